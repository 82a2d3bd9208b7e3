// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MNN_CORPUS_H_
#define MNN_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mnn/signal.h"

namespace mnn {

// Synthetic speaker: voiced harmonic source shaped by a formant envelope.
// Group 0 has low F0 and longer vocal tracts, group 1 high F0 and shorter
// ones; the two groups stand in for the two speaker classes of the
// speaker-group experiment.
struct SpeakerProfile {
  std::string id;
  int group = 0;
  double f0 = 120.0;            // Hz, speaker mean
  double formant_scale = 1.0;   // multiplies the vowel formant table
  double tilt = 1.0;            // harmonic amplitude ~ k^-tilt
};

SpeakerProfile make_speaker(int group, int index, std::uint64_t seed);

struct SpeechOptions {
  int sample_rate = 16000;
  double min_seconds = 1.2;
  double max_seconds = 1.8;
  double rms = 0.05;  // nominal level; each utterance varies around it
};

// A sequence of voiced syllables (vowel-to-vowel glides) separated by
// short pauses.
Waveform synth_utterance(const SpeakerProfile& speaker, std::uint64_t seed,
                         const SpeechOptions& options = {});

enum class NoiseKind { kBirds, kTyping, kMotorcycle };

std::string to_string(NoiseKind k);
NoiseKind parse_noise_kind(const std::string& s);
inline constexpr NoiseKind kAllNoiseKinds[] = {
    NoiseKind::kBirds, NoiseKind::kTyping, NoiseKind::kMotorcycle};

// Birds: high, fast-sweeping chirps and trills. Typing: sparse broadband
// clicks. Motorcycle: low engine harmonics over lowpassed rumble.
// Normalized to RMS `rms`.
Waveform synth_noise(NoiseKind kind, double seconds, std::uint64_t seed,
                     int sample_rate = 16000, double rms = 0.05);

Waveform white_noise(std::size_t samples, std::uint64_t seed,
                     int sample_rate = 16000, double rms = 0.05);

// Desk-scale model sizes written into the generated experiment plans.
struct DeskScale {
  std::vector<int> module_hidden{128, 128};
  int module_iterations = 400;
  std::vector<int> shallow_dae_hidden{128};
  int shallow_dae_iterations = 500;
  std::vector<int> deep_dae_hidden{256, 256};
  int deep_dae_iterations = 300;
  // Larger than any desk training set, so every update sees all frames.
  // Sign-based Rprop diverged on 256-frame minibatches.
  int batch_size = 4096;
};

struct CorpusOptions {
  int speakers_per_group = 6;
  int utterances = 8;
  std::uint64_t seed = 1;
  int sample_rate = 16000;
  double noise_seconds = 60.0;
  int frame_size = 1024;
  int hop = 256;
  DeskScale scale;
};

// Writes clean/, noise/, manifests/ and three experiment plans
// (exp1_noise.json, exp2_speaker.json, exp3_snr.json) under `out`.
// Speakers rotate through three roles: autoencoder training, module
// training and test. Train mixtures draw noise from the first half of each
// noise file and test mixtures from the second half.
void synthesize_corpus(const CorpusOptions& options,
                       const std::filesystem::path& out);

}  // namespace mnn

#endif  // MNN_CORPUS_H_
