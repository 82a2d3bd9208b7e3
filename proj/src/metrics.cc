// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mnn/metrics.h"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "mnn/resample.h"

namespace mnn {
namespace {

constexpr double kTiny = 1e-20;

double energy(const std::vector<double>& x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

double capped_ratio_db(double num, double den) {
  if (den < kTiny) return kDbCap;
  if (num < kTiny) return -kDbCap;
  return std::clamp(10.0 * std::log10(num / den), -kDbCap, kDbCap);
}

void check_pair(const Waveform& a, const Waveform& b, const char* what) {
  if (a.samples.empty() || b.samples.empty())
    throw std::invalid_argument(std::string(what) + ": zero-length input");
  if (a.size() != b.size())
    throw std::invalid_argument(std::string(what) + ": length mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
}

// STOI constants of the reference algorithm.
constexpr int kStoiRate = 10000;
constexpr int kStoiFrame = 256;
constexpr int kStoiFft = 512;
constexpr int kStoiBands = 15;
constexpr double kStoiMinFreq = 150.0;
constexpr int kStoiSegment = 30;
constexpr double kStoiBeta = -15.0;
constexpr double kStoiDynRange = 40.0;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// MATLAB-style hanning(n): the periodic-free window without zero endpoints.
std::vector<double> matlab_hanning(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    w[static_cast<std::size_t>(i)] =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (i + 1) / (n + 1));
  return w;
}

std::vector<std::vector<double>> windowed_frames(const std::vector<double>& x,
                                                 const std::vector<double>& w,
                                                 int hop) {
  std::vector<std::vector<double>> frames;
  const auto n = static_cast<long long>(w.size());
  for (long long i = 0; i < static_cast<long long>(x.size()) - n; i += hop) {
    std::vector<double> f(w.size());
    for (long long k = 0; k < n; ++k)
      f[static_cast<std::size_t>(k)] =
          w[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(i + k)];
    frames.push_back(std::move(f));
  }
  return frames;
}

std::vector<double> overlap_add(const std::vector<std::vector<double>>& frames,
                                int hop) {
  if (frames.empty()) return {};
  const std::size_t len = (frames.size() - 1) * static_cast<std::size_t>(hop) +
                          frames.front().size();
  std::vector<double> out(len, 0.0);
  for (std::size_t t = 0; t < frames.size(); ++t)
    for (std::size_t k = 0; k < frames[t].size(); ++k)
      out[t * static_cast<std::size_t>(hop) + k] += frames[t][k];
  return out;
}

// Drops frames whose clean-signal energy is more than kStoiDynRange below the
// loudest frame, then re-synthesizes both signals by overlap-add.
void remove_silent_frames(std::vector<double>& x, std::vector<double>& y) {
  const std::vector<double> w = matlab_hanning(kStoiFrame);
  const int hop = kStoiFrame / 2;
  auto xf = windowed_frames(x, w, hop);
  auto yf = windowed_frames(y, w, hop);
  std::vector<double> db(xf.size());
  double max_db = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < xf.size(); ++t) {
    db[t] = 20.0 * std::log10(std::sqrt(energy(xf[t])) + kEps);
    max_db = std::max(max_db, db[t]);
  }
  std::vector<std::vector<double>> xk, yk;
  for (std::size_t t = 0; t < xf.size(); ++t) {
    if (max_db - kStoiDynRange - db[t] < 0.0) {
      xk.push_back(std::move(xf[t]));
      yk.push_back(std::move(yf[t]));
    }
  }
  x = overlap_add(xk, hop);
  y = overlap_add(yk, hop);
}

// Rows are 1/3-octave band indices, columns FFT bins [lo, hi).
struct Band {
  int lo = 0;
  int hi = 0;
};

std::vector<Band> third_octave_bands() {
  const int bins = kStoiFft / 2 + 1;
  std::vector<double> f(static_cast<std::size_t>(bins));
  for (int i = 0; i < bins; ++i)
    f[static_cast<std::size_t>(i)] =
        static_cast<double>(kStoiRate) * i / kStoiFft;
  auto nearest = [&](double freq) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < bins; ++i) {
      const double d = (f[static_cast<std::size_t>(i)] - freq) *
                       (f[static_cast<std::size_t>(i)] - freq);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  };
  std::vector<Band> bands(kStoiBands);
  for (int k = 0; k < kStoiBands; ++k) {
    bands[static_cast<std::size_t>(k)].lo =
        nearest(kStoiMinFreq * std::pow(2.0, (2.0 * k - 1.0) / 6.0));
    bands[static_cast<std::size_t>(k)].hi =
        nearest(kStoiMinFreq * std::pow(2.0, (2.0 * k + 1.0) / 6.0));
  }
  return bands;
}

// Band envelopes: kStoiBands x frames.
RealMatrix band_envelopes(const std::vector<double>& x,
                          const std::vector<Band>& bands) {
  const std::vector<double> w = matlab_hanning(kStoiFrame);
  const auto frames = windowed_frames(x, w, kStoiFrame / 2);
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  RealMatrix env(kStoiBands, static_cast<Eigen::Index>(frames.size()));
  std::vector<double> buf(kStoiFft, 0.0);
  std::vector<std::complex<double>> spec;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    std::fill(buf.begin(), buf.end(), 0.0);
    std::copy(frames[t].begin(), frames[t].end(), buf.begin());
    fft.fwd(spec, buf);
    for (int b = 0; b < kStoiBands; ++b) {
      double e = 0.0;
      for (int k = bands[static_cast<std::size_t>(b)].lo;
           k < bands[static_cast<std::size_t>(b)].hi; ++k)
        e += std::norm(spec[static_cast<std::size_t>(k)]);
      env(b, static_cast<Eigen::Index>(t)) = std::sqrt(e);
    }
  }
  return env;
}

}  // namespace

double snr(const Waveform& s, const Waveform& n) {
  check_pair(s, n, "snr");
  return capped_ratio_db(energy(s.samples), energy(n.samples));
}

double sdr(const Waveform& estimate, const Waveform& reference) {
  check_pair(estimate, reference, "sdr");
  const double ref_energy = energy(reference.samples);
  if (ref_energy < kTiny) throw std::invalid_argument("sdr: zero reference");
  double dot = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i)
    dot += estimate.samples[i] * reference.samples[i];
  const double gain = dot / ref_energy;
  double target = 0.0;
  double distortion = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const double t = gain * reference.samples[i];
    const double e = estimate.samples[i] - t;
    target += t * t;
    distortion += e * e;
  }
  return capped_ratio_db(target, distortion);
}

double stoi(const Waveform& estimate, const Waveform& reference) {
  check_pair(estimate, reference, "stoi");
  if (estimate.sample_rate != reference.sample_rate)
    throw std::invalid_argument("stoi: sample rate mismatch");
  if (reference.sample_rate < kStoiRate)
    throw std::invalid_argument("stoi: sample rate below 10 kHz");

  std::vector<double> x = resample(reference, kStoiRate).samples;
  std::vector<double> y = resample(estimate, kStoiRate).samples;
  remove_silent_frames(x, y);

  static const std::vector<Band> bands = third_octave_bands();
  const RealMatrix xe = band_envelopes(x, bands);
  const RealMatrix ye = band_envelopes(y, bands);
  const Eigen::Index frames = xe.cols();
  if (frames < kStoiSegment)
    throw std::invalid_argument(
        "stoi: input too short (" + std::to_string(frames) +
        " speech-active frames, need " + std::to_string(kStoiSegment) + ")");

  const double clip = std::pow(10.0, -kStoiBeta / 20.0);
  double total = 0.0;
  Eigen::Index segments = 0;
  for (Eigen::Index m = kStoiSegment; m <= frames; ++m, ++segments) {
    for (int b = 0; b < kStoiBands; ++b) {
      Eigen::RowVectorXd xs = xe.block(b, m - kStoiSegment, 1, kStoiSegment);
      Eigen::RowVectorXd ys = ye.block(b, m - kStoiSegment, 1, kStoiSegment);
      const double alpha = xs.norm() / (ys.norm() + kEps);
      Eigen::RowVectorXd yp = (ys * alpha).cwiseMin(xs * (1.0 + clip));
      yp.array() -= yp.mean();
      xs.array() -= xs.mean();
      yp /= yp.norm() + kEps;
      xs /= xs.norm() + kEps;
      total += yp.dot(xs);
    }
  }
  const double d = total / (static_cast<double>(segments) * kStoiBands);
  return std::clamp(d, 0.0, 1.0);
}

EvalResult evaluate(const Waveform& estimate, const Waveform& reference) {
  EvalResult r;
  r.sdr_db = sdr(estimate, reference);
  r.stoi = stoi(estimate, reference);
  Waveform residual = estimate;
  for (std::size_t i = 0; i < residual.size(); ++i)
    residual.samples[i] -= reference.samples[i];
  r.snr_db = snr(reference, residual);
  return r;
}

}  // namespace mnn
