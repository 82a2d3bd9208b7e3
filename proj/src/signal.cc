// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mnn/signal.h"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mnn {
namespace {

Eigen::FFT<double>& half_spectrum_fft() {
  thread_local Eigen::FFT<double> fft = [] {
    Eigen::FFT<double> f;
    f.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    return f;
  }();
  return fft;
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void check_geometry(const FrameGeometry& g) {
  if (!is_power_of_two(g.frame_size))
    throw std::invalid_argument("frame_size must be a power of two, got " +
                                std::to_string(g.frame_size));
  if (g.hop <= 0 || g.hop > g.frame_size)
    throw std::invalid_argument("hop must be in [1, frame_size], got " +
                                std::to_string(g.hop));
}

}  // namespace

void validate(const Waveform& w) {
  if (w.samples.empty()) throw std::invalid_argument("empty waveform");
  if (w.sample_rate <= 0)
    throw std::invalid_argument("non-positive sample rate");
  for (double v : w.samples)
    if (!std::isfinite(v))
      throw std::invalid_argument("waveform contains non-finite samples");
}

std::size_t frame_count(std::size_t length, int frame_size, int hop) {
  const auto fs = static_cast<std::size_t>(frame_size);
  const auto h = static_cast<std::size_t>(hop);
  if (length <= fs) return 1;
  return (length - fs + h - 1) / h + 1;
}

std::vector<double> hann_window(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    w[static_cast<std::size_t>(i)] =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  return w;
}

Spectrogram stft(const Waveform& w, int frame_size, int hop) {
  validate(w);
  FrameGeometry g{frame_size, hop, w.sample_rate, w.size()};
  check_geometry(g);

  const std::size_t frames = frame_count(w.size(), frame_size, hop);
  const std::vector<double> window = hann_window(frame_size);
  auto& fft = half_spectrum_fft();

  Spectrogram out;
  out.geometry = g;
  out.frames.resize(static_cast<Eigen::Index>(frames), g.bins());
  std::vector<double> buf(static_cast<std::size_t>(frame_size));
  std::vector<std::complex<double>> spec;
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t start = t * static_cast<std::size_t>(hop);
    for (int i = 0; i < frame_size; ++i) {
      const std::size_t n = start + static_cast<std::size_t>(i);
      const double x = n < w.size() ? w.samples[n] : 0.0;
      buf[static_cast<std::size_t>(i)] = x * window[static_cast<std::size_t>(i)];
    }
    fft.fwd(spec, buf);
    for (int k = 0; k < g.bins(); ++k)
      out.frames(static_cast<Eigen::Index>(t), k) = spec[static_cast<std::size_t>(k)];
  }
  return out;
}

Waveform istft(const Spectrogram& s) {
  const FrameGeometry& g = s.geometry;
  check_geometry(g);
  if (s.num_bins() != g.bins())
    throw std::invalid_argument("spectrogram has " +
                                std::to_string(s.num_bins()) +
                                " bins, frame_size implies " +
                                std::to_string(g.bins()));
  const auto frames = static_cast<std::size_t>(s.num_frames());
  const auto fs = static_cast<std::size_t>(g.frame_size);
  const std::size_t padded =
      frames == 0 ? 0 : (frames - 1) * static_cast<std::size_t>(g.hop) + fs;

  const std::vector<double> window = hann_window(g.frame_size);
  std::vector<double> acc(padded, 0.0);
  std::vector<double> norm(padded, 0.0);
  auto& fft = half_spectrum_fft();
  std::vector<std::complex<double>> spec(static_cast<std::size_t>(g.bins()));
  std::vector<double> frame;
  for (std::size_t t = 0; t < frames; ++t) {
    for (int k = 0; k < g.bins(); ++k)
      spec[static_cast<std::size_t>(k)] = s.frames(static_cast<Eigen::Index>(t), k);
    fft.inv(frame, spec, static_cast<int>(fs));
    const std::size_t start = t * static_cast<std::size_t>(g.hop);
    for (std::size_t i = 0; i < fs; ++i) {
      acc[start + i] += window[i] * frame[i];
      norm[start + i] += window[i] * window[i];
    }
  }
  // Where the summed window vanishes (sample 0 of a periodic Hann) nothing
  // can be recovered; emit zero there.
  constexpr double kNormFloor = 1e-10;
  for (std::size_t i = 0; i < padded; ++i)
    acc[i] = norm[i] > kNormFloor ? acc[i] / norm[i] : 0.0;

  Waveform out;
  out.sample_rate = g.sample_rate;
  if (g.length > 0) acc.resize(g.length, 0.0);
  out.samples = std::move(acc);
  return out;
}

MagnitudeSpectrogram magnitude(const Spectrogram& s) {
  MagnitudeSpectrogram m;
  m.geometry = s.geometry;
  m.frames = s.frames.cwiseAbs();
  return m;
}

Spectrogram with_phase(const MagnitudeSpectrogram& mag,
                       const Spectrogram& phase_source) {
  if (mag.frames.rows() != phase_source.frames.rows() ||
      mag.frames.cols() != phase_source.frames.cols())
    throw std::invalid_argument("with_phase: shape mismatch");
  Spectrogram out;
  out.geometry = phase_source.geometry;
  out.frames.resize(mag.frames.rows(), mag.frames.cols());
  for (Eigen::Index t = 0; t < mag.frames.rows(); ++t) {
    for (Eigen::Index k = 0; k < mag.frames.cols(); ++k) {
      const std::complex<double> z = phase_source.frames(t, k);
      const double a = std::abs(z);
      // Unit phasor first: mag / a overflows for denormal bins.
      out.frames(t, k) = a > 0.0 ? (z / a) * mag.frames(t, k)
                                 : std::complex<double>(mag.frames(t, k), 0.0);
    }
  }
  return out;
}

FeatureMatrix concat_context(const MagnitudeSpectrogram& m, int context) {
  if (context < 1 || context % 2 == 0)
    throw std::invalid_argument("context must be a positive odd count, got " +
                                std::to_string(context));
  const Eigen::Index frames = m.frames.rows();
  const Eigen::Index bins = m.frames.cols();
  const int half = (context - 1) / 2;
  FeatureMatrix f;
  f.context = context;
  f.rows = RealMatrix::Zero(frames, bins * context);
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (int c = 0; c < context; ++c) {
      const Eigen::Index src = t + c - half;
      if (src < 0 || src >= frames) continue;
      f.rows.block(t, c * bins, 1, bins) = m.frames.row(src);
    }
  }
  return f;
}

Spectrogram apply_mask(const Spectrogram& x, const MaskMatrix& y) {
  if (x.frames.rows() != y.frames.rows() || x.frames.cols() != y.frames.cols())
    throw std::invalid_argument(
        "apply_mask: mask is " + std::to_string(y.frames.rows()) + "x" +
        std::to_string(y.frames.cols()) + ", spectrogram is " +
        std::to_string(x.frames.rows()) + "x" + std::to_string(x.frames.cols()));
  Spectrogram out;
  out.geometry = x.geometry;
  out.frames = x.frames.array() * y.frames.array().cast<std::complex<double>>();
  return out;
}

}  // namespace mnn
