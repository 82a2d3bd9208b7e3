// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fixtures.h"
#include "mnn/common.h"
#include "mnn/metrics.h"
#include "mnn/selector.h"

using namespace mnn;
using mnn::testing::random_waveform;
using mnn::testing::speech_fixture;

namespace {

constexpr int kBins = 513;

// Module whose mask is the constant logistic(bias) for every bin.
Model constant_module(const std::string& id, double bias, int context = 3) {
  RealMatrix w = RealMatrix::Zero(kBins, context * kBins + 1);
  w.col(context * kBins).setConstant(bias);
  return make_model(id, Network({Layer{w, Activation::kLogistic}}));
}

// Module whose mask is logistic(bias + gain * |x_t|) per bin.
Model gain_module(const std::string& id, double bias, double gain) {
  RealMatrix w = RealMatrix::Zero(kBins, 3 * kBins + 1);
  for (int k = 0; k < kBins; ++k) w(k, kBins + k) = gain;
  w.col(3 * kBins).setConstant(bias);
  return make_model(id, Network({Layer{w, Activation::kLogistic}}));
}

Model identity_dae() {
  RealMatrix w = RealMatrix::Zero(kBins, kBins + 1);
  w.leftCols(kBins).setIdentity();
  return make_model("identity", Network({Layer{w, Activation::kIdentity}}));
}

// Shrinks its input by `g`: reconstruction error grows with input energy.
Model shrink_dae(double g) {
  RealMatrix w = RealMatrix::Zero(kBins, kBins + 1);
  w.leftCols(kBins).diagonal().setConstant(g);
  return make_model("shrink", Network({Layer{w, Activation::kModifiedRelu}}));
}

Waveform scaled(const Waveform& a, double g) {
  Waveform out = a;
  for (double& v : out.samples) v *= g;
  return out;
}

}  // namespace

TEST_CASE("model context comes from the dims") {
  CHECK(constant_module("a", 0.0).context() == 3);
  CHECK(identity_dae().context() == 1);
  RealMatrix w = RealMatrix::Zero(kBins, 2 * kBins + 1);
  CHECK_THROWS_AS(make_model("bad", Network({Layer{w, Activation::kLogistic}})),
                  std::invalid_argument);
}

TEST_CASE("saturated modules pass or silence the mixture") {
  const Waveform x = random_waveform(8000, 1);
  const Spectrogram X = stft(x);
  const ModuleOutput pass = enhance_with_module(constant_module("one", 60.0), X);
  double err = 0.0;
  for (std::size_t i = 1024; i + 1024 < x.size(); ++i)
    err = std::max(err, std::abs(pass.enhanced_wave.samples[i] - x.samples[i]));
  CHECK(err < 1e-9);
  const ModuleOutput mute = enhance_with_module(constant_module("zero", -800.0), X);
  for (double v : mute.enhanced_wave.samples) CHECK(std::abs(v) < 1e-12);
  CHECK(pass.enhanced_wave.size() == x.size());
}

TEST_CASE("module geometry is checked") {
  const Spectrogram X = stft(random_waveform(4000, 2), 512, 128);
  CHECK_THROWS_AS(enhance_with_module(constant_module("a", 0.0), X), std::invalid_argument);
  RealMatrix w = RealMatrix::Zero(kBins, 3 * kBins + 1);
  const Model relu = make_model("relu", Network({Layer{w, Activation::kModifiedRelu}}));
  CHECK_THROWS_AS(enhance_with_module(relu, stft(random_waveform(4000, 2))),
                  std::invalid_argument);
}

TEST_CASE("identity autoencoder scores zero") {
  const Spectrogram X = stft(speech_fixture(3));
  ModuleOutput out = enhance_with_module(constant_module("half", 0.0), X);
  CHECK(ae_score(identity_dae(), out) == doctest::Approx(0.0).epsilon(1e-12));
  const ModuleScore s = score_output(identity_dae(), out);
  CHECK(s.snr_db > 60.0);
}

TEST_CASE("silent input through a zero-bias autoencoder scores zero") {
  const Waveform z{std::vector<double>(8000, 0.0), 16000};
  ModuleOutput out = enhance_with_module(constant_module("a", 0.0), stft(z));
  CHECK(ae_score(shrink_dae(0.5), out) == 0.0);
}

TEST_CASE("autoencoder geometry is checked") {
  const Spectrogram X = stft(random_waveform(4000, 4));
  ModuleOutput out = enhance_with_module(constant_module("a", 0.0), X);
  RealMatrix w = RealMatrix::Zero(10, 11);
  const Model small = make_model("small", Network({Layer{w, Activation::kIdentity}}));
  CHECK_THROWS_AS(ae_score(small, out), std::invalid_argument);
}

TEST_CASE("snr score examples") {
  const Waveform s = random_waveform(2000, 5);
  CHECK(snr_score(s, s) == 100.0);
  CHECK(snr_score(s, scaled(s, 0.0)) == doctest::Approx(0.0));
  CHECK(snr_score(s, scaled(s, 1.1)) == doctest::Approx(20.0));
  CHECK_THROWS_AS(snr_score(Waveform{{}, 16000}, s), std::invalid_argument);
}

TEST_CASE("choose, ties and chance") {
  std::vector<ModuleScore> scores{{"a", 2.0, 5.0}, {"b", 1.0, 9.0}, {"c", 3.0, 1.0}};
  CHECK(choose(scores, SelectionMetric::kAe) == 1);
  CHECK(choose(scores, SelectionMetric::kSnr) == 1);
  std::vector<ModuleScore> tied{{"a", 1.0, 3.0}, {"b", 1.0, 3.0}};
  CHECK(choose(tied, SelectionMetric::kAe) == 0);
  CHECK(choose(tied, SelectionMetric::kSnr) == 0);
  CHECK(choose({{"only", 7.0, -3.0}}, SelectionMetric::kAe) == 0);
  CHECK_THROWS_AS(choose({}, SelectionMetric::kAe), std::invalid_argument);
  CHECK(chance_index(3, 11) == chance_index(3, 11));
  std::vector<int> hits(3, 0);
  for (std::uint64_t seed = 0; seed < 3000; ++seed) ++hits[chance_index(3, seed)];
  for (int h : hits) CHECK(h == doctest::Approx(1000).epsilon(0.1));
  CHECK(parse_metric("ae") == SelectionMetric::kAe);
  CHECK(parse_metric("snr") == SelectionMetric::kSnr);
  CHECK_THROWS_AS(parse_metric("sdr"), std::invalid_argument);
}

TEST_CASE("oracle picks the output closest to the reference") {
  const Waveform r = random_waveform(4000, 6);
  ModuleOutput exact, noisy;
  exact.enhanced_wave = r;
  noisy.enhanced_wave = r;
  const Waveform n = random_waveform(4000, 7);
  for (std::size_t i = 0; i < r.size(); ++i) noisy.enhanced_wave.samples[i] += n.samples[i];
  CHECK(oracle_select({noisy, exact}, r) == 1);
  CHECK(oracle_select({exact, noisy}, r) == 0);
  CHECK_THROWS_AS(oracle_select({exact}, Waveform{{}, 16000}), std::invalid_argument);
}

TEST_CASE("select returns the independently recomputed argmin and argmax") {
  const Waveform s = speech_fixture(8);
  const Waveform n = random_waveform(s.size(), 9, 16000, 0.02);
  Waveform x = s;
  for (std::size_t i = 0; i < x.size(); ++i) x.samples[i] += n.samples[i];
  const Spectrogram X = stft(x);
  const std::vector<Model> modules{gain_module("m0", -1.0, 5.0), gain_module("m1", 0.5, 0.0),
                                   gain_module("m2", -3.0, 40.0)};
  const Model dae = shrink_dae(0.8);
  for (SelectionMetric metric : {SelectionMetric::kAe, SelectionMetric::kSnr}) {
    SelectOptions opt;
    opt.metric = metric;
    opt.seed = 4;
    opt.reference = s;
    opt.utterance = "u";
    const SelectionResult r = select(modules, dae, X, opt);
    std::vector<double> ae, snr_db;
    for (const Model& m : modules) {
      ModuleOutput o = enhance_with_module(m, X);
      ae.push_back(ae_score(dae, o));
      snr_db.push_back(score_output(dae, o).snr_db);
    }
    const std::size_t want =
        metric == SelectionMetric::kAe
            ? static_cast<std::size_t>(std::min_element(ae.begin(), ae.end()) - ae.begin())
            : static_cast<std::size_t>(std::max_element(snr_db.begin(), snr_db.end()) - snr_db.begin());
    CHECK(r.report.chosen == want);
    for (std::size_t j = 0; j < modules.size(); ++j) {
      CHECK(r.report.scores[j].ae_error == ae[j]);
      CHECK(r.report.scores[j].snr_db == snr_db[j]);
    }
    REQUIRE(r.report.oracle.has_value());
    const double chosen_sdr = sdr(r.chosen().enhanced_wave, s);
    const double oracle_sdr = sdr(r.outputs[*r.report.oracle].enhanced_wave, s);
    CHECK(oracle_sdr >= chosen_sdr);
    CHECK(r.report.chance == chance_index(3, 4));

    const nlohmann::json j = to_json(r.report);
    CHECK(j["utterance"] == "u");
    CHECK(j["metric"] == to_string(metric));
    CHECK(j["chosen"] == modules[want].id);
    CHECK(j["scores"].size() == 3);
    CHECK(j.contains("oracle"));
    CHECK(j["seed"] == 4);
  }
}

TEST_CASE("permuting modules moves ids but keeps the chosen signal") {
  const Waveform x = speech_fixture(10);
  const Spectrogram X = stft(x);
  std::vector<Model> modules{gain_module("m0", -1.0, 5.0), gain_module("m1", 0.5, 0.0),
                             gain_module("m2", -3.0, 40.0)};
  const Model dae = shrink_dae(0.8);
  const SelectionResult a = select(modules, dae, X, {});
  std::swap(modules[0], modules[2]);
  const SelectionResult b = select(modules, dae, X, {});
  CHECK(a.chosen().module_id == b.chosen().module_id);
  CHECK(a.chosen().enhanced_wave.samples == b.chosen().enhanced_wave.samples);
}

TEST_CASE("selection is thread-count independent and needs modules") {
  const Spectrogram X = stft(speech_fixture(12));
  const std::vector<Model> modules{gain_module("m0", -1.0, 5.0), gain_module("m1", 0.5, 0.0),
                                   gain_module("m2", -3.0, 40.0)};
  SelectOptions one, many;
  many.threads = 3;
  const SelectionResult a = select(modules, shrink_dae(0.8), X, one);
  const SelectionResult b = select(modules, shrink_dae(0.8), X, many);
  for (std::size_t j = 0; j < modules.size(); ++j) {
    CHECK(a.report.scores[j].ae_error == b.report.scores[j].ae_error);
    CHECK(a.report.scores[j].snr_db == b.report.scores[j].snr_db);
  }
  CHECK_THROWS_AS(select({}, shrink_dae(0.8), X, one), std::invalid_argument);
}

TEST_CASE("sampled arbitration is seeded and averages draws") {
  const Spectrogram X = stft(speech_fixture(13));
  ModuleOutput out = enhance_with_module(gain_module("m", -1.0, 5.0), X);
  ArbiterDropout drop{DropoutMode::kSampled, 0.8, 4, 99};
  const double a = ae_score(shrink_dae(0.8), out, drop);
  const double b = ae_score(shrink_dae(0.8), out, drop);
  CHECK(a == b);
  drop.seed = 100;
  CHECK(ae_score(shrink_dae(0.8), out, drop) != a);
  drop.draws = 0;
  CHECK_THROWS_AS(ae_score(shrink_dae(0.8), out, drop), std::invalid_argument);
}
