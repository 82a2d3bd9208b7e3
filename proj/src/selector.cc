// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mnn/selector.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mnn/metrics.h"
#include "mnn/parallel.h"

namespace mnn {

int Model::context() const {
  const Eigen::Index in = net.input_dim();
  const Eigen::Index out = net.output_dim();
  if (out <= 0 || in % out != 0 || (in / out) % 2 == 0)
    throw std::invalid_argument("model " + id + ": input dim " +
                                std::to_string(in) +
                                " is not an odd multiple of output dim " +
                                std::to_string(out));
  return static_cast<int>(in / out);
}

Model make_model(std::string id, Network net) {
  Model m{std::move(id), std::move(net)};
  m.context();
  return m;
}

ModuleOutput enhance_with_module(const Model& module, const Spectrogram& mixture) {
  const int context = module.context();
  if (module.net.output_dim() != mixture.num_bins())
    throw std::invalid_argument("module " + module.id + " emits " +
                                std::to_string(module.net.output_dim()) +
                                " bins, mixture has " +
                                std::to_string(mixture.num_bins()));
  if (module.net.layers().back().activation != Activation::kLogistic)
    throw std::invalid_argument("module " + module.id +
                                " must end in a logistic layer to emit masks");
  const FeatureMatrix features = concat_context(magnitude(mixture), context);
  MaskMatrix mask{infer(module.net, features.rows)};
  ModuleOutput out;
  out.module_id = module.id;
  out.enhanced_spec = apply_mask(mixture, mask);
  out.enhanced_wave = istft(out.enhanced_spec);
  return out;
}

std::string to_string(SelectionMetric m) {
  return m == SelectionMetric::kAe ? "ae" : "snr";
}

SelectionMetric parse_metric(const std::string& s) {
  if (s == "ae") return SelectionMetric::kAe;
  if (s == "snr") return SelectionMetric::kSnr;
  throw std::invalid_argument("unknown selection metric '" + s + "'");
}

double snr_score(const Waveform& enhanced, const Waveform& reconstructed) {
  const std::size_t n = std::min(enhanced.size(), reconstructed.size());
  if (n == 0) throw std::invalid_argument("snr_score: zero-length input");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = enhanced.samples[i];
    const double d = s - reconstructed.samples[i];
    num += s * s;
    den += d * d;
  }
  if (den < 1e-20) return kDbCap;
  if (num < 1e-20) return -kDbCap;
  return std::clamp(10.0 * std::log10(num / den), -kDbCap, kDbCap);
}

ModuleScore score_output(const Model& dae, ModuleOutput& output,
                         const ArbiterDropout& drop) {
  const MagnitudeSpectrogram mag = magnitude(output.enhanced_spec);
  const int context = dae.context();
  if (dae.net.output_dim() != mag.num_bins())
    throw std::invalid_argument("autoencoder " + dae.id + " emits " +
                                std::to_string(dae.net.output_dim()) +
                                " bins, module output has " +
                                std::to_string(mag.num_bins()));
  const RealMatrix features = concat_context(mag, context).rows;
  const double frames = static_cast<double>(std::max<Eigen::Index>(mag.num_frames(), 1));

  auto score_one = [&](const RealMatrix& recon, ModuleScore& acc) {
    acc.ae_error += (recon - mag.frames).squaredNorm() / frames;
    MagnitudeSpectrogram r{recon, mag.geometry};
    acc.snr_db += snr_score(output.enhanced_wave,
                            istft(with_phase(r, output.enhanced_spec)));
  };

  ModuleScore score;
  score.module = output.module_id;
  if (drop.mode != DropoutMode::kSampled) {
    RealMatrix recon = infer(dae.net, features);
    score_one(recon, score);
    output.dae_recon = MagnitudeSpectrogram{std::move(recon), mag.geometry};
  } else {
    if (drop.draws < 1 || !(drop.keep_prob > 0.0 && drop.keep_prob <= 1.0))
      throw std::invalid_argument("sampled arbiter dropout needs draws >= 1 and keep_prob in (0, 1]");
    Rng rng(drop.seed);
    RealMatrix mean = RealMatrix::Zero(mag.num_frames(), mag.num_bins());
    const double inv_keep = 1.0 / drop.keep_prob;
    for (int d = 0; d < drop.draws; ++d) {
      RealMatrix corrupted = features;
      for (Eigen::Index i = 0; i < corrupted.size(); ++i)
        corrupted.data()[i] *= rng.bernoulli(drop.keep_prob) ? inv_keep : 0.0;
      const RealMatrix recon = infer(dae.net, corrupted);
      score_one(recon, score);
      mean += recon;
    }
    score.ae_error /= drop.draws;
    score.snr_db /= drop.draws;
    output.dae_recon = MagnitudeSpectrogram{mean / drop.draws, mag.geometry};
  }
  if (!std::isfinite(score.ae_error) || !std::isfinite(score.snr_db))
    throw NumericError("non-finite arbitration score for module " + output.module_id);
  return score;
}

double ae_score(const Model& dae, ModuleOutput& output, const ArbiterDropout& drop) {
  return score_output(dae, output, drop).ae_error;
}

nlohmann::json to_json(const SelectionReport& r) {
  nlohmann::json j;
  j["utterance"] = r.utterance;
  j["metric"] = to_string(r.metric);
  auto& scores = j["scores"] = nlohmann::json::array();
  for (const ModuleScore& s : r.scores)
    scores.push_back({{"module", s.module}, {"ae_error", s.ae_error}, {"snr_db", s.snr_db}});
  j["chosen"] = r.scores.at(r.chosen).module;
  if (r.oracle) j["oracle"] = r.scores.at(*r.oracle).module;
  j["chance"] = r.scores.at(r.chance).module;
  j["seed"] = r.seed;
  return j;
}

std::size_t choose(const std::vector<ModuleScore>& scores, SelectionMetric metric) {
  if (scores.empty()) throw std::invalid_argument("choose: no modules");
  std::size_t best = 0;
  for (std::size_t j = 1; j < scores.size(); ++j) {
    const bool better = metric == SelectionMetric::kAe
                            ? scores[j].ae_error < scores[best].ae_error
                            : scores[j].snr_db > scores[best].snr_db;
    if (better) best = j;
  }
  return best;
}

std::size_t chance_index(std::size_t count, std::uint64_t seed) {
  if (count == 0) throw std::invalid_argument("chance_index: no modules");
  Rng rng(seed);
  return static_cast<std::size_t>(rng.below(count));
}

std::size_t oracle_select(const std::vector<ModuleOutput>& outputs,
                          const Waveform& reference) {
  if (outputs.empty()) throw std::invalid_argument("oracle_select: no outputs");
  if (reference.samples.empty())
    throw std::invalid_argument("oracle_select: missing reference");
  std::size_t best = 0;
  double best_sdr = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < outputs.size(); ++j) {
    const double v = sdr(outputs[j].enhanced_wave, reference);
    if (v > best_sdr) {
      best_sdr = v;
      best = j;
    }
  }
  return best;
}

SelectionResult select(const std::vector<Model>& modules, const Model& dae,
                       const Spectrogram& mixture, const SelectOptions& options) {
  if (modules.empty()) throw std::invalid_argument("select: no modules");
  SelectionResult result;
  result.outputs.resize(modules.size());
  std::vector<ModuleScore> scores(modules.size());
  parallel_for(modules.size(), options.threads, [&](std::size_t j) {
    result.outputs[j] = enhance_with_module(modules[j], mixture);
    scores[j] = score_output(dae, result.outputs[j], options.dropout);
  });
  SelectionReport& r = result.report;
  r.utterance = options.utterance;
  r.metric = options.metric;
  r.scores = std::move(scores);
  r.chosen = choose(r.scores, options.metric);
  r.chance = chance_index(modules.size(), options.seed);
  r.seed = options.seed;
  if (options.reference) r.oracle = oracle_select(result.outputs, *options.reference);
  return result;
}

}  // namespace mnn
