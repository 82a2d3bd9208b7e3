// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MNN_RESAMPLE_H_
#define MNN_RESAMPLE_H_

#include <vector>

#include "mnn/signal.h"

namespace mnn {

// Rational-ratio polyphase resampler with a Kaiser-windowed sinc lowpass
// (80 dB stopband, ~0.001 dB passband ripple below 90% of the output
// Nyquist). Group delay is compensated, so output sample m lines up with
// input time m / target_rate.
class Resampler {
 public:
  Resampler(int source_rate, int target_rate);

  std::vector<double> apply(const std::vector<double>& x) const;

  int up() const { return up_; }
  int down() const { return down_; }
  std::size_t taps() const { return filter_.size(); }

 private:
  int up_ = 1;
  int down_ = 1;
  std::vector<double> filter_;
};

Waveform resample(const Waveform& w, int target_rate);

}  // namespace mnn

#endif  // MNN_RESAMPLE_H_
