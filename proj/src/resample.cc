// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mnn/resample.h"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace mnn {
namespace {

// Octave's resample() design: 60 dB rejection, roll-off a tenth of the
// stopband edge, DC gain normalized to one per output phase.
constexpr double kRejectionDb = 60.0;

double bessel_i0(double x) {
  double sum = 1.0;
  double term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

}  // namespace

Resampler::Resampler(int source_rate, int target_rate) {
  if (source_rate <= 0 || target_rate <= 0)
    throw std::invalid_argument("resampler: rates must be positive");
  const int g = std::gcd(source_rate, target_rate);
  up_ = target_rate / g;
  down_ = source_rate / g;
  if (up_ == 1 && down_ == 1) {
    filter_ = {1.0};
    return;
  }
  // Frequencies are normalized to the upsampled rate.
  const double cutoff = 0.5 / std::max(up_, down_);
  const double roll_off = cutoff / 10.0;
  const int half = static_cast<int>(std::ceil((kRejectionDb - 8.0) / (28.714 * roll_off)));
  const int length = 2 * half + 1;
  const double beta = 0.1102 * (kRejectionDb - 8.7);
  filter_.resize(static_cast<std::size_t>(length));
  const double i0_beta = bessel_i0(beta);
  double sum = 0.0;
  for (int n = 0; n < length; ++n) {
    const double t = n - half;
    const double arg = 2.0 * cutoff * t;
    const double sinc =
        t == 0 ? 1.0 : std::sin(std::numbers::pi * arg) / (std::numbers::pi * arg);
    const double r = static_cast<double>(t) / half;
    const double kaiser = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    filter_[static_cast<std::size_t>(n)] = sinc * kaiser;
    sum += filter_[static_cast<std::size_t>(n)];
  }
  for (double& h : filter_) h *= up_ / sum;
}

std::vector<double> Resampler::apply(const std::vector<double>& x) const {
  if (up_ == 1 && down_ == 1) return x;
  const auto len = static_cast<long long>(x.size());
  const long long out_len = (len * up_ + down_ - 1) / down_;
  const long long taps = static_cast<long long>(filter_.size());
  const long long center = (taps - 1) / 2;
  std::vector<double> y(static_cast<std::size_t>(out_len), 0.0);
  for (long long m = 0; m < out_len; ++m) {
    // y[m] = sum_n h[n] * xu[m*down + center - n], xu nonzero every `up`.
    const long long pos = m * down_ + center;
    long long n = pos % up_;
    double acc = 0.0;
    for (; n < taps; n += up_) {
      const long long j = (pos - n) / up_;
      if (j < 0) break;
      if (j >= len) continue;
      acc += filter_[static_cast<std::size_t>(n)] * x[static_cast<std::size_t>(j)];
    }
    y[static_cast<std::size_t>(m)] = acc;
  }
  return y;
}

Waveform resample(const Waveform& w, int target_rate) {
  if (w.sample_rate == target_rate) return w;
  Resampler r(w.sample_rate, target_rate);
  return Waveform{r.apply(w.samples), target_rate};
}

}  // namespace mnn
