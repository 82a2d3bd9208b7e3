// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mnn/training.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mnn {
namespace {

constexpr double kMaskFloor = 1e-10;

void shuffle(std::vector<Eigen::Index>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

void validate(const RpropConfig& cfg) {
  if (!(cfg.eta_minus > 0.0 && cfg.eta_minus < 1.0 && cfg.eta_plus > 1.0))
    throw std::invalid_argument("rprop: need 0 < eta_minus < 1 < eta_plus");
  if (!(cfg.step_min > 0.0 && cfg.step_min < cfg.step_max))
    throw std::invalid_argument("rprop: need 0 < step_min < step_max");
  if (!(cfg.initial_step >= cfg.step_min && cfg.initial_step <= cfg.step_max))
    throw std::invalid_argument("rprop: initial_step outside [step_min, step_max]");
  if (cfg.iterations < 0 || cfg.batch_size < 1)
    throw std::invalid_argument("rprop: bad iteration count or batch size");
}

void Dataset::append(const Dataset& other) {
  if (other.size() == 0) return;
  if (size() == 0) {
    *this = other;
    return;
  }
  if (other.inputs.cols() != inputs.cols() || other.targets.cols() != targets.cols())
    throw std::invalid_argument("dataset append: dimension mismatch");
  RealMatrix in(size() + other.size(), inputs.cols());
  in << inputs, other.inputs;
  RealMatrix tg(size() + other.size(), targets.cols());
  tg << targets, other.targets;
  inputs = std::move(in);
  targets = std::move(tg);
}

MaskMatrix mask_targets(const Spectrogram& clean, const Spectrogram& mixture) {
  if (clean.frames.rows() != mixture.frames.rows() ||
      clean.frames.cols() != mixture.frames.cols())
    throw std::invalid_argument("mask_targets: clean and mixture shapes differ");
  MaskMatrix m;
  m.frames.resize(clean.frames.rows(), clean.frames.cols());
  for (Eigen::Index t = 0; t < m.frames.rows(); ++t) {
    for (Eigen::Index k = 0; k < m.frames.cols(); ++k) {
      const double x = std::abs(mixture.frames(t, k));
      m.frames(t, k) =
          x < kMaskFloor ? 0.0 : std::min(1.0, std::abs(clean.frames(t, k)) / x);
    }
  }
  return m;
}

Dataset denoiser_pairs(const Waveform& clean, const Waveform& mixture,
                       int context, int frame_size, int hop) {
  const Spectrogram s = stft(clean, frame_size, hop);
  const Spectrogram x = stft(mixture, frame_size, hop);
  Dataset d;
  d.inputs = concat_context(magnitude(x), context).rows;
  d.targets = mask_targets(s, x).frames;
  return d;
}

Dataset build_denoiser_dataset(const std::vector<DenoiserExample>& examples,
                               int context, int frame_size, int hop) {
  if (examples.empty())
    throw std::invalid_argument("build_denoiser_dataset: no examples");
  Dataset all;
  for (const DenoiserExample& e : examples) {
    if (e.noise.size() < e.clean.size())
      throw std::invalid_argument(
          "build_denoiser_dataset: noise shorter than clean speech");
    const Mixture mix = mix_at_snr(e.clean, e.noise, e.snr_db);
    all.append(denoiser_pairs(e.clean, mix.mixture, context, frame_size, hop));
  }
  return all;
}

Dataset build_dae_dataset(const std::vector<Waveform>& cleans, int context,
                          int frame_size, int hop) {
  if (cleans.empty())
    throw std::invalid_argument("build_dae_dataset: no utterances");
  Dataset all;
  for (const Waveform& w : cleans) {
    const MagnitudeSpectrogram m = magnitude(stft(w, frame_size, hop));
    Dataset d;
    d.inputs = concat_context(m, context).rows;
    d.targets = m.frames;
    all.append(d);
  }
  return all;
}

RpropState RpropState::initial(const Network& net, const RpropConfig& cfg) {
  RpropState s;
  for (const Layer& l : net.layers()) {
    s.step.push_back(
        RealMatrix::Constant(l.weight.rows(), l.weight.cols(), cfg.initial_step));
    s.prev_grad.push_back(RealMatrix::Zero(l.weight.rows(), l.weight.cols()));
  }
  return s;
}

void rprop_step(RpropState& state, const Gradients& grads, Network& net,
                const RpropConfig& cfg) {
  auto& layers = net.mutable_layers();
  if (grads.weight.size() != layers.size() || state.step.size() != layers.size())
    throw std::invalid_argument("rprop_step: layer count mismatch");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    RealMatrix& w = layers[l].weight;
    const RealMatrix& g = grads.weight[l];
    RealMatrix& step = state.step[l];
    RealMatrix& prev = state.prev_grad[l];
    if (g.rows() != w.rows() || g.cols() != w.cols())
      throw std::invalid_argument("rprop_step: gradient shape mismatch at layer " +
                                  std::to_string(l));
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      double gi = g.data()[i];
      if (!std::isfinite(gi))
        throw NumericError("rprop_step: non-finite gradient at layer " +
                           std::to_string(l));
      double& s = step.data()[i];
      const double agreement = gi * prev.data()[i];
      if (agreement > 0.0) {
        s = std::min(s * cfg.eta_plus, cfg.step_max);
      } else if (agreement < 0.0) {
        s = std::max(s * cfg.eta_minus, cfg.step_min);
        gi = 0.0;
      }
      if (gi > 0.0)
        w.data()[i] -= s;
      else if (gi < 0.0)
        w.data()[i] += s;
      prev.data()[i] = gi;
    }
  }
}

TrainResult train(const Network& init, const Dataset& data,
                  const RpropConfig& cfg, const DropoutSpec& drop,
                  std::uint64_t seed, const ProgressFn& progress) {
  validate(cfg);
  validate(drop);
  if (data.size() == 0) throw std::invalid_argument("train: empty dataset");
  if (data.inputs.cols() != init.input_dim() ||
      data.targets.cols() != init.output_dim())
    throw std::invalid_argument(
        "train: dataset is " + std::to_string(data.inputs.cols()) + " -> " +
        std::to_string(data.targets.cols()) + ", network is " +
        std::to_string(init.input_dim()) + " -> " +
        std::to_string(init.output_dim()));

  TrainResult result;
  result.network = init;
  RpropState state = RpropState::initial(init, cfg);
  Rng order_rng(derive_seed(seed, 1));
  Rng mask_rng(derive_seed(seed, 2));

  std::vector<Eigen::Index> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  shuffle(order, order_rng);
  std::size_t cursor = 0;

  // A batch at least as large as the data set means full-batch training.
  const Eigen::Index batch = std::min<Eigen::Index>(cfg.batch_size, data.size());
  RealMatrix x(batch, data.inputs.cols());
  RealMatrix y(batch, data.targets.cols());
  result.loss_curve.reserve(static_cast<std::size_t>(cfg.iterations));
  for (int it = 0; it < cfg.iterations; ++it) {
    for (Eigen::Index b = 0; b < batch; ++b) {
      if (cursor == order.size()) {
        shuffle(order, order_rng);
        cursor = 0;
      }
      const Eigen::Index row = order[cursor++];
      x.row(b) = data.inputs.row(row);
      y.row(b) = data.targets.row(row);
    }
    const DropoutMasks masks = draw_masks(result.network, drop, batch, mask_rng);
    const LossAndGradients lg = backprop(result.network, x, y, masks);
    if (!std::isfinite(lg.loss))
      throw NumericError("train: non-finite loss at iteration " +
                         std::to_string(it));
    rprop_step(state, lg.grads, result.network, cfg);
    const double mean = lg.loss / static_cast<double>(batch);
    result.loss_curve.push_back(mean);
    if (progress) progress(it, mean);
  }
  result.network = quantize_to_float(result.network);
  return result;
}

Network inference_network(const Network& trained, const DropoutSpec& drop) {
  return quantize_to_float(fold_dropout(trained, drop));
}

TrainConfig train_config_from_json(const nlohmann::json& j, ModelRole role) {
  TrainConfig c;
  c.frame_size = j.value("frame_size", c.frame_size);
  c.hop = j.value("hop", c.hop);
  c.context = j.value("context", role == ModelRole::kDenoiser ? 3 : 1);
  c.seed = j.value("seed", std::uint64_t{0});
  const int bins = c.frame_size / 2 + 1;
  if (j.contains("dims")) {
    c.dims = j.at("dims").get<std::vector<int>>();
  } else {
    c.dims.push_back(c.context * bins);
    for (int h : j.value("hidden", std::vector<int>{128})) c.dims.push_back(h);
    c.dims.push_back(bins);
  }
  if (c.dims.size() < 2) throw std::invalid_argument("config: dims too short");
  const std::size_t layers = c.dims.size() - 1;
  if (j.contains("activations")) {
    for (const auto& a : j.at("activations"))
      c.activations.push_back(parse_activation(a.get<std::string>()));
  } else {
    c.activations.assign(layers, Activation::kModifiedRelu);
    if (role == ModelRole::kDenoiser) c.activations.back() = Activation::kLogistic;
  }
  if (j.contains("rprop")) {
    const auto& r = j.at("rprop");
    c.rprop.eta_minus = r.value("eta_minus", c.rprop.eta_minus);
    c.rprop.eta_plus = r.value("eta_plus", c.rprop.eta_plus);
    c.rprop.step_min = r.value("step_min", c.rprop.step_min);
    c.rprop.step_max = r.value("step_max", c.rprop.step_max);
    c.rprop.initial_step = r.value("initial_step", c.rprop.initial_step);
    c.rprop.iterations = r.value("iterations", c.rprop.iterations);
    c.rprop.batch_size = r.value("batch_size", c.rprop.batch_size);
  }
  c.dropout.mode = DropoutMode::kSampled;
  c.dropout.keep_prob.assign(layers, 0.8);
  if (j.contains("dropout")) {
    const auto& d = j.at("dropout");
    if (d.contains("keep_prob")) {
      if (d.at("keep_prob").is_number())
        c.dropout.keep_prob.assign(layers, d.at("keep_prob").get<double>());
      else
        c.dropout.keep_prob = d.at("keep_prob").get<std::vector<double>>();
    }
    const std::string mode = d.value("mode", std::string("sampled"));
    if (mode == "sampled")
      c.dropout.mode = DropoutMode::kSampled;
    else if (mode == "scaled")
      c.dropout.mode = DropoutMode::kScaled;
    else if (mode == "off")
      c.dropout.mode = DropoutMode::kOff;
    else
      throw std::invalid_argument("config: unknown dropout mode '" + mode + "'");
  }
  c.dropout.seed = c.seed;
  validate(c);
  return c;
}

nlohmann::json train_config_to_json(const TrainConfig& c) {
  nlohmann::json j;
  j["frame_size"] = c.frame_size;
  j["hop"] = c.hop;
  j["context"] = c.context;
  j["dims"] = c.dims;
  auto& acts = j["activations"] = nlohmann::json::array();
  for (Activation a : c.activations) acts.push_back(std::string(to_string(a)));
  j["rprop"] = {{"eta_minus", c.rprop.eta_minus},
                {"eta_plus", c.rprop.eta_plus},
                {"step_min", c.rprop.step_min},
                {"step_max", c.rprop.step_max},
                {"initial_step", c.rprop.initial_step},
                {"iterations", c.rprop.iterations},
                {"batch_size", c.rprop.batch_size}};
  const char* mode = c.dropout.mode == DropoutMode::kSampled  ? "sampled"
                     : c.dropout.mode == DropoutMode::kScaled ? "scaled"
                                                              : "off";
  j["dropout"] = {{"keep_prob", c.dropout.keep_prob}, {"mode", mode}};
  j["seed"] = c.seed;
  return j;
}

void validate(const TrainConfig& c) {
  if (c.frame_size <= 0 || (c.frame_size & (c.frame_size - 1)) != 0)
    throw std::invalid_argument("config: frame_size must be a power of two");
  if (c.hop <= 0 || c.hop > c.frame_size)
    throw std::invalid_argument("config: hop must be in [1, frame_size]");
  if (c.context < 1 || c.context % 2 == 0)
    throw std::invalid_argument("config: context must be odd");
  const int bins = c.frame_size / 2 + 1;
  if (c.dims.size() < 2 || c.dims.front() != c.context * bins ||
      c.dims.back() != bins)
    throw std::invalid_argument("config: dims must run from context*bins (" +
                                std::to_string(c.context * bins) + ") to bins (" +
                                std::to_string(bins) + ")");
  if (c.activations.size() != c.dims.size() - 1)
    throw std::invalid_argument("config: need one activation per layer");
  if (c.dropout.keep_prob.size() > c.dims.size() - 1)
    throw std::invalid_argument("config: more keep_prob entries than layers");
  validate(c.rprop);
  validate(c.dropout);
}

std::string loss_curve_csv(const std::vector<double>& curve) {
  std::ostringstream os;
  os.precision(17);
  os << "iteration,mean_loss\n";
  for (std::size_t i = 0; i < curve.size(); ++i) os << i << ',' << curve[i] << '\n';
  return os.str();
}

}  // namespace mnn
