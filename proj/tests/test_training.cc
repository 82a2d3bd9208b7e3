// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fixtures.h"
#include "mnn/common.h"
#include "mnn/model_io.h"
#include "mnn/training.h"

using namespace mnn;
using mnn::testing::random_waveform;
using mnn::testing::sine;

namespace {

Network scalar_net(double w) {
  RealMatrix m(1, 2);
  m << w, 0.0;
  return Network({Layer{m, Activation::kIdentity}});
}

Gradients scalar_grad(double g) {
  RealMatrix m(1, 2);
  m << g, 0.0;
  return Gradients{{m}};
}

}  // namespace

TEST_CASE("rprop config validation") {
  RpropConfig c;
  CHECK_NOTHROW(validate(c));
  c.eta_minus = 1.0;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
  c = {};
  c.step_min = 1.0;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
  c = {};
  c.batch_size = 0;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
}

TEST_CASE("zero gradient leaves weight and step unchanged") {
  RpropConfig cfg;
  Network net = scalar_net(0.25);
  RpropState st = RpropState::initial(net, cfg);
  rprop_step(st, scalar_grad(0.0), net, cfg);
  CHECK(net.layers()[0].weight(0, 0) == 0.25);
  CHECK(st.step[0](0, 0) == cfg.initial_step);
}

TEST_CASE("quadratic (w - 3)^2 converges within 200 steps, steps stay in bounds") {
  RpropConfig cfg;
  Network net = scalar_net(0.0);
  RpropState st = RpropState::initial(net, cfg);
  int converged_at = -1;
  for (int i = 0; i < 200; ++i) {
    const double w = net.layers()[0].weight(0, 0);
    if (std::abs(w - 3.0) < 1e-6) {
      converged_at = i;
      break;
    }
    rprop_step(st, scalar_grad(2.0 * (w - 3.0)), net, cfg);
    const double s = st.step[0](0, 0);
    CHECK(s >= cfg.step_min);
    CHECK(s <= cfg.step_max);
  }
  CHECK(converged_at == 94);
}

TEST_CASE("alternating gradient signs shrink the step monotonically to the floor") {
  RpropConfig cfg;
  Network net = scalar_net(0.0);
  RpropState st = RpropState::initial(net, cfg);
  double last = st.step[0](0, 0);
  for (int i = 0; i < 100; ++i) {
    rprop_step(st, scalar_grad(i % 2 == 0 ? 1.0 : -1.0), net, cfg);
    const double s = st.step[0](0, 0);
    CHECK(s <= last);
    last = s;
  }
  CHECK(last == cfg.step_min);
}

TEST_CASE("non-finite gradient aborts") {
  RpropConfig cfg;
  Network net = scalar_net(0.0);
  RpropState st = RpropState::initial(net, cfg);
  CHECK_THROWS_AS(rprop_step(st, scalar_grad(std::nan("")), net, cfg), NumericError);
}

TEST_CASE("mask targets") {
  const Waveform s = random_waveform(4000, 1);
  const Spectrogram S = stft(s);
  SUBCASE("no noise gives ones where the mixture is nonzero") {
    const MaskMatrix m = mask_targets(S, S);
    CHECK(m.frames.minCoeff() == 1.0);
  }
  SUBCASE("silent speech gives zeros") {
    Spectrogram z = S;
    z.frames.setZero();
    CHECK(mask_targets(z, S).frames.maxCoeff() == 0.0);
  }
  SUBCASE("equal in-phase noise gives one half") {
    Spectrogram x = S;
    x.frames *= 2.0;
    const MaskMatrix m = mask_targets(S, x);
    CHECK(m.frames.minCoeff() == doctest::Approx(0.5));
    CHECK(m.frames.maxCoeff() == doctest::Approx(0.5));
  }
  SUBCASE("clipped to [0, 1] and zero where the mixture vanishes") {
    const Spectrogram n = stft(random_waveform(4000, 2));
    Spectrogram x = S;
    x.frames += n.frames;
    x.frames(0, 0) = 0.0;
    const MaskMatrix m = mask_targets(S, x);
    CHECK(m.frames.minCoeff() >= 0.0);
    CHECK(m.frames.maxCoeff() <= 1.0);
    CHECK(m.frames(0, 0) == 0.0);
  }
  SUBCASE("shape mismatch") {
    Spectrogram x = S;
    x.frames.conservativeResize(S.frames.rows() - 1, Eigen::NoChange);
    CHECK_THROWS_AS(mask_targets(S, x), std::invalid_argument);
  }
}

TEST_CASE("noiseless mask reproduces the clean waveform") {
  const Waveform s = random_waveform(8000, 3);
  const Spectrogram S = stft(s);
  const Waveform back = istft(apply_mask(S, mask_targets(S, S)));
  double err = 0.0;
  for (std::size_t i = 1024; i + 1024 < s.size(); ++i)
    err = std::max(err, std::abs(back.samples[i] - s.samples[i]));
  CHECK(err < 1e-9);
}

TEST_CASE("denoiser dataset shapes") {
  const Waveform s = sine(300.0, 1.0);
  const Waveform n = random_waveform(20000, 4);
  const Dataset d = build_denoiser_dataset({{s, n, 0.0}}, 3);
  CHECK(d.size() == static_cast<Eigen::Index>(frame_count(16000, 1024, 256)));
  CHECK(d.size() == 60);
  CHECK(d.inputs.cols() == 1539);
  CHECK(d.targets.cols() == 513);
  CHECK(d.targets.minCoeff() >= 0.0);
  CHECK(d.targets.maxCoeff() <= 1.0);
  CHECK_THROWS_AS(build_denoiser_dataset({}, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_denoiser_dataset({{s, sine(50.0, 0.5), 0.0}}, 3), std::invalid_argument);
}

TEST_CASE("silent noise yields all-one targets") {
  const Waveform s = sine(300.0, 0.5);
  const Dataset d = denoiser_pairs(s, s, 3, 1024, 256);
  const RealMatrix m = d.targets;
  // the mixture equals the clean signal, so every non-silent bin is 1
  for (Eigen::Index i = 0; i < m.size(); ++i)
    if (m.data()[i] != 0.0) CHECK(m.data()[i] == 1.0);
  CHECK(m.maxCoeff() == 1.0);
}

TEST_CASE("autoencoder dataset shapes") {
  const Waveform s = sine(300.0, 1.0);
  const Dataset d1 = build_dae_dataset({s}, 1);
  CHECK(d1.inputs.cols() == 513);
  CHECK(d1.targets.cols() == 513);
  CHECK(d1.inputs == d1.targets);
  const Dataset d3 = build_dae_dataset({s}, 3);
  CHECK(d3.inputs.cols() == 1539);
  const Dataset z = build_dae_dataset({Waveform{std::vector<double>(4000, 0.0), 16000}}, 1);
  CHECK(z.inputs.isZero());
  CHECK(z.targets.isZero());
  CHECK_THROWS_AS(build_dae_dataset({}, 1), std::invalid_argument);
}

TEST_CASE("training reduces loss and is deterministic") {
  Rng rng(5);
  Dataset d;
  d.inputs.resize(50, 10);
  for (Eigen::Index i = 0; i < d.inputs.size(); ++i) d.inputs.data()[i] = rng.uniform();
  d.targets = d.inputs.array().square();
  const Network init = init_weights(
      {10, 8, 10}, {Activation::kModifiedRelu, Activation::kIdentity}, 1);
  RpropConfig cfg;
  cfg.iterations = 500;
  cfg.batch_size = 20;
  DropoutSpec off;
  const TrainResult a = train(init, d, cfg, off, 9);
  const TrainResult b = train(init, d, cfg, off, 9);
  REQUIRE(a.loss_curve.size() == 500);
  CHECK(a.loss_curve.back() < a.loss_curve.front());
  CHECK(serialize(a.network) == serialize(b.network));
  CHECK(a.loss_curve == b.loss_curve);
  for (double v : a.loss_curve) CHECK(std::isfinite(v));
}

TEST_CASE("train rejects mismatched data") {
  Dataset d{RealMatrix::Zero(4, 3), RealMatrix::Zero(4, 2)};
  const Network net = init_weights({4, 2}, {Activation::kIdentity}, 1);
  CHECK_THROWS_AS(train(net, d, RpropConfig{}, DropoutSpec{}, 0), std::invalid_argument);
  CHECK_THROWS_AS(train(net, Dataset{}, RpropConfig{}, DropoutSpec{}, 0), std::invalid_argument);
}

TEST_CASE("diverging training raises a numeric error") {
  Dataset d{RealMatrix::Constant(4, 1, 1e300), RealMatrix::Zero(4, 1)};
  const Network net = init_weights({1, 1}, {Activation::kIdentity}, 1);
  RpropConfig cfg;
  cfg.iterations = 3;
  cfg.batch_size = 4;
  CHECK_THROWS_AS(train(net, d, cfg, DropoutSpec{}, 0), NumericError);
}

TEST_CASE("autoencoder on sinusoid mixtures reconstructs its training spectra") {
  std::vector<Waveform> cleans;
  for (int i = 0; i < 5; ++i) {
    Waveform a = sine(200.0 + 90.0 * i, 0.6, 16000, 0.3);
    const Waveform b = sine(1100.0 + 170.0 * i, 0.6, 16000, 0.1);
    for (std::size_t k = 0; k < a.size(); ++k) a.samples[k] += b.samples[k];
    cleans.push_back(std::move(a));
  }
  const Dataset d = build_dae_dataset(cleans, 1);
  TrainConfig c;
  c.context = 1;
  c.dims = {513, 32, 513};
  c.activations = {Activation::kModifiedRelu, Activation::kModifiedRelu};
  c.rprop.iterations = 400;
  c.rprop.batch_size = 64;
  c.dropout = {{0.9, 1.0}, DropoutMode::kSampled, 3};
  c.seed = 3;
  const TrainResult r =
      train(init_weights(c.dims, c.activations, c.seed), d, c.rprop, c.dropout, c.seed);
  const Network inf = inference_network(r.network, c.dropout);
  const RealMatrix recon = infer(inf, d.inputs);
  const double err = (recon - d.targets).squaredNorm();
  CHECK(err < 0.1 * d.targets.squaredNorm());
}

TEST_CASE("train config json") {
  const TrainConfig dn = train_config_from_json(nlohmann::json::object(), ModelRole::kDenoiser);
  CHECK(dn.context == 3);
  CHECK(dn.dims == std::vector<int>{1539, 128, 513});
  CHECK(dn.activations.back() == Activation::kLogistic);
  CHECK(dn.rprop.iterations == 5000);
  CHECK(dn.rprop.batch_size == 1000);
  const TrainConfig ae = train_config_from_json(nlohmann::json::object(), ModelRole::kAutoencoder);
  CHECK(ae.context == 1);
  CHECK(ae.dims == std::vector<int>{513, 128, 513});
  CHECK(ae.activations.back() == Activation::kModifiedRelu);

  const TrainConfig back = train_config_from_json(train_config_to_json(dn), ModelRole::kDenoiser);
  CHECK(train_config_to_json(back) == train_config_to_json(dn));

  CHECK_THROWS_AS(train_config_from_json({{"context", 2}}, ModelRole::kDenoiser),
                  std::invalid_argument);
  CHECK_THROWS_AS(train_config_from_json({{"dims", {100, 513}}}, ModelRole::kDenoiser),
                  std::invalid_argument);
}

TEST_CASE("loss curve csv") {
  CHECK(loss_curve_csv({1.5, 0.25}) == "iteration,mean_loss\n0,1.5\n1,0.25\n");
}
