// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "fixtures.h"

#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <unistd.h>

#include "mnn/common.h"

namespace mnn::testing {

Waveform random_waveform(std::size_t n, std::uint64_t seed, int sample_rate, double sigma) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = sigma * rng.normal();
  return Waveform{std::move(x), sample_rate};
}

Waveform sine(double freq, double seconds, int sample_rate, double amp) {
  const auto n = static_cast<std::size_t>(seconds * sample_rate);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / sample_rate);
  return Waveform{std::move(x), sample_rate};
}

Waveform speech_fixture(std::uint64_t seed, int group, int index) {
  return synth_utterance(make_speaker(group, index, seed), derive_seed(seed, 77));
}

Waveform noise_fixture(NoiseKind kind, double seconds, std::uint64_t seed) {
  return synth_noise(kind, seconds, seed);
}

Network random_network(std::uint64_t seed, int max_dim, int max_depth) {
  Rng rng(seed);
  const int depth = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_depth)));
  std::vector<int> dims;
  std::vector<Activation> acts;
  for (int l = 0; l <= depth; ++l)
    dims.push_back(1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_dim))));
  for (int l = 0; l < depth; ++l) acts.push_back(static_cast<Activation>(rng.below(3)));
  return init_weights(dims, acts, derive_seed(seed, 5));
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          (tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

CorpusOptions tiny_corpus_options(std::uint64_t seed) {
  CorpusOptions o;
  o.speakers_per_group = 3;
  o.utterances = 2;
  o.seed = seed;
  o.noise_seconds = 8.0;
  o.scale.module_hidden = {8};
  o.scale.module_iterations = 6;
  o.scale.shallow_dae_hidden = {8};
  o.scale.shallow_dae_iterations = 6;
  o.scale.deep_dae_hidden = {8, 8};
  o.scale.deep_dae_iterations = 4;
  o.scale.batch_size = 16;
  return o;
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

}  // namespace mnn::testing
