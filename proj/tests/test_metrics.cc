// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fixtures.h"
#include "mnn/common.h"
#include "mnn/metrics.h"
#include "mnn/resample.h"

using namespace mnn;
using mnn::testing::noise_fixture;
using mnn::testing::random_waveform;
using mnn::testing::sine;
using mnn::testing::speech_fixture;

namespace {

// Closed-form signals shared with tests/oracles/stoi_oracle.py.
std::pair<Waveform, Waveform> stoi_fixture(int fs, double seconds, int which) {
  const auto n = static_cast<std::size_t>(seconds * fs);
  Waveform ref{std::vector<double>(n), fs};
  Waveform est{std::vector<double>(n), fs};
  const double pi2 = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    const double r = std::sin(pi2 * 440 * t) * (0.5 + 0.5 * std::sin(pi2 * 3 * t)) +
                     0.3 * std::sin(pi2 * 1200 * t) * (0.5 + 0.5 * std::cos(pi2 * 5 * t)) +
                     0.2 * std::sin(pi2 * 2300 * t) * (0.5 + 0.5 * std::sin(pi2 * 7 * t + 1.0));
    const double d = std::sin(pi2 * 700 * t + 0.3) * (0.5 + 0.5 * std::sin(pi2 * 11 * t)) +
                     0.5 * std::sin(pi2 * 3100 * t);
    ref.samples[i] = r;
    est.samples[i] = which == 0 ? r : which == 1 ? r + 0.3 * d : 0.7 * r + d;
  }
  return {est, ref};
}

Waveform add(const Waveform& a, const Waveform& b, double gb) {
  Waveform out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.samples[i] += gb * b.samples[i];
  return out;
}

Waveform scaled(const Waveform& a, double g) {
  Waveform out = a;
  for (double& v : out.samples) v *= g;
  return out;
}

}  // namespace

TEST_CASE("snr") {
  const Waveform s = random_waveform(1000, 1);
  CHECK(snr(s, s) == doctest::Approx(0.0));
  CHECK(snr(s, scaled(s, 1.0 / std::sqrt(10.0))) == doctest::Approx(10.0));
  CHECK(snr(s, scaled(s, 0.0)) == kDbCap);
  CHECK(snr(scaled(s, 0.0), s) == -kDbCap);
  CHECK(snr(s, add(s, s, -1.0)) == kDbCap);
  CHECK_THROWS_AS(snr(Waveform{{}, 16000}, Waveform{{}, 16000}), std::invalid_argument);
  CHECK_THROWS_AS(snr(s, random_waveform(999, 2)), std::invalid_argument);
}

TEST_CASE("sdr") {
  const Waveform r = random_waveform(4096, 3);
  CHECK(sdr(r, r) == kDbCap);
  CHECK(sdr(scaled(r, 2.0), r) == kDbCap);
  // noise orthogonal to r with a tenth of its energy
  Waveform n = random_waveform(4096, 4);
  double dot = 0.0, rr = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    dot += n.samples[i] * r.samples[i];
    rr += r.samples[i] * r.samples[i];
  }
  n = add(n, r, -dot / rr);
  double nn = 0.0;
  for (double v : n.samples) nn += v * v;
  n = scaled(n, std::sqrt(rr / 10.0 / nn));
  CHECK(sdr(add(r, n, 1.0), r) == doctest::Approx(10.0).epsilon(1e-9));
  CHECK_THROWS_AS(sdr(r, scaled(r, 0.0)), std::invalid_argument);
}

TEST_CASE("sdr is scale invariant") {
  const Waveform r = random_waveform(4096, 5);
  const Waveform e = add(r, random_waveform(4096, 6), 0.7);
  const double base = sdr(e, r);
  for (double a : {0.5, 2.0, 10.0}) CHECK(std::abs(sdr(scaled(e, a), r) - base) < 1e-9);
}

TEST_CASE("resampler passes in-band tones and blocks out-of-band ones") {
  const Waveform in = sine(1000.0, 1.0, 16000, 1.0);
  const Waveform out = resample(in, 10000);
  CHECK(out.sample_rate == 10000);
  CHECK(out.size() == 10000);
  double err = 0.0;
  for (std::size_t m = 1000; m < 9000; ++m)
    err = std::max(err, std::abs(out.samples[m] - std::sin(2.0 * std::numbers::pi * 1000.0 * m / 10000.0)));
  CHECK(err < 1e-3);

  const Waveform high = resample(sine(6500.0, 1.0, 16000, 1.0), 10000);
  double peak = 0.0;
  for (std::size_t m = 1000; m < 9000; ++m) peak = std::max(peak, std::abs(high.samples[m]));
  CHECK(peak < 1e-3);

  const Resampler r(16000, 10000);
  CHECK(r.up() == 5);
  CHECK(r.down() == 8);
}

TEST_CASE("stoi matches the reference implementation at 10 kHz") {
  const double expected[] = {1.0, 0.768305105547, 0.712602294966};
  for (int which = 0; which < 3; ++which) {
    const auto [est, ref] = stoi_fixture(10000, 2.0, which);
    CHECK(stoi(est, ref) == doctest::Approx(expected[which]).epsilon(1e-6));
  }
}

TEST_CASE("stoi matches the reference implementation at 16 kHz") {
  const double expected[] = {1.0, 0.813491658533, 0.739055979174};
  for (int which = 0; which < 3; ++which) {
    const auto [est, ref] = stoi_fixture(16000, 2.0, which);
    CHECK(stoi(est, ref) == doctest::Approx(expected[which]).epsilon(1e-6));
  }
}

TEST_CASE("stoi on speech fixtures") {
  const Waveform s = speech_fixture(11);
  CHECK(stoi(s, s) > 0.99);
  const Waveform n = noise_fixture(NoiseKind::kTyping, 3.0, 12);
  Waveform seg{std::vector<double>(n.samples.begin(), n.samples.begin() + s.size()), 16000};
  const double light = stoi(add(s, seg, 0.3), s);
  const double heavy = stoi(add(s, seg, 3.0), s);
  CHECK(light > heavy);
  const Waveform white = white_noise(s.size(), 13);
  const double w = stoi(white, s);
  CHECK(w < 0.3);
  for (double v : {light, heavy, w}) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("stoi preconditions") {
  const Waveform s8 = sine(300.0, 2.0, 8000);
  CHECK_THROWS_AS(stoi(s8, s8), std::invalid_argument);
  const Waveform shortw = sine(300.0, 0.2, 16000);
  CHECK_THROWS_AS(stoi(shortw, shortw), std::invalid_argument);
}

TEST_CASE("evaluate bundles the three metrics") {
  const Waveform s = speech_fixture(21);
  const EvalResult r = evaluate(s, s);
  CHECK(r.sdr_db == kDbCap);
  CHECK(r.snr_db == kDbCap);
  CHECK(r.stoi > 0.99);
}
