// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MNN_METRICS_H_
#define MNN_METRICS_H_

#include "mnn/signal.h"

namespace mnn {

// All log-ratio metrics saturate at +/- kDbCap.
inline constexpr double kDbCap = 100.0;

// 10 log10(sum s^2 / sum n^2). Lengths must match.
double snr(const Waveform& s, const Waveform& n);

// Scale-invariant SDR: the estimate is projected onto the reference, and the
// residual counts as distortion. Lengths must match; the reference must be
// nonzero.
double sdr(const Waveform& estimate, const Waveform& reference);

// Short-time objective intelligibility in [0, 1]. Inputs are resampled to
// 10 kHz; needs at least 30 speech-active 256-sample frames after silent
// frame removal.
double stoi(const Waveform& estimate, const Waveform& reference);

struct EvalResult {
  double sdr_db = 0.0;
  double stoi = 0.0;
  double snr_db = 0.0;  // reference vs (estimate - reference)
};

EvalResult evaluate(const Waveform& estimate, const Waveform& reference);

}  // namespace mnn

#endif  // MNN_METRICS_H_
