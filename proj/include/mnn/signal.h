// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MNN_SIGNAL_H_
#define MNN_SIGNAL_H_

#include <cstddef>
#include <vector>

#include "mnn/common.h"

namespace mnn {

// Mono time-domain signal. Samples are nominally in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;

  std::size_t size() const { return samples.size(); }
};

// Throws std::invalid_argument unless the waveform is non-empty, finite and
// has a positive sample rate.
void validate(const Waveform& w);

// Framing metadata shared by complex and magnitude spectrograms.
// `length` is the original signal length so istft can trim the tail padding.
struct FrameGeometry {
  int frame_size = 1024;
  int hop = 256;
  int sample_rate = 16000;
  std::size_t length = 0;

  int bins() const { return frame_size / 2 + 1; }
  bool operator==(const FrameGeometry&) const = default;
};

// T x D one-sided STFT; row t is frame t.
struct Spectrogram {
  ComplexMatrix frames;
  FrameGeometry geometry;

  Eigen::Index num_frames() const { return frames.rows(); }
  Eigen::Index num_bins() const { return frames.cols(); }
};

struct MagnitudeSpectrogram {
  RealMatrix frames;
  FrameGeometry geometry;

  Eigen::Index num_frames() const { return frames.rows(); }
  Eigen::Index num_bins() const { return frames.cols(); }
};

// Row t = [M[t-h] ... M[t+h]] with h = (context-1)/2; out-of-range
// neighbours are zero.
struct FeatureMatrix {
  RealMatrix rows;
  int context = 1;
};

// Soft masks in [0, 1], same T x D layout as the spectrogram they gate.
struct MaskMatrix {
  RealMatrix frames;
};

// Number of frames the framing policy produces for a signal of `length`
// samples: ceil((length - frame_size) / hop) + 1, and 1 when the signal is
// shorter than one frame.
std::size_t frame_count(std::size_t length, int frame_size, int hop);

// Periodic Hann window of length n.
std::vector<double> hann_window(int n);

// Analysis with a periodic Hann window. Frames start at sample 0; the tail is
// zero-padded so the last frame is complete.
Spectrogram stft(const Waveform& w, int frame_size = 1024, int hop = 256);

// Weighted overlap-add with the analysis window, normalized by the summed
// squared window. Output is trimmed to geometry.length when it is set.
Waveform istft(const Spectrogram& s);

MagnitudeSpectrogram magnitude(const Spectrogram& s);

// Combines magnitudes with the phase of `phase_source` (zero-magnitude bins
// take phase 0).
Spectrogram with_phase(const MagnitudeSpectrogram& mag,
                       const Spectrogram& phase_source);

FeatureMatrix concat_context(const MagnitudeSpectrogram& m, int context);

// y (.) x per bin; phase of x is kept.
Spectrogram apply_mask(const Spectrogram& x, const MaskMatrix& y);

}  // namespace mnn

#endif  // MNN_SIGNAL_H_
