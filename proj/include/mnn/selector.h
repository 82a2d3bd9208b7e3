// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MNN_SELECTOR_H_
#define MNN_SELECTOR_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mnn/network.h"
#include "mnn/signal.h"

namespace mnn {

// A denoiser or speech autoencoder ready for inference, with the context
// width inferred from its input/output dims.
struct Model {
  std::string id;
  Network net;

  int context() const;
};

Model make_model(std::string id, Network net);

struct ModuleOutput {
  std::string module_id;
  Spectrogram enhanced_spec;
  Waveform enhanced_wave;
  MagnitudeSpectrogram dae_recon;  // filled by scoring
};

// y_t = F(concat row t), s_t = y_t (.) x_t, waveform by istft.
ModuleOutput enhance_with_module(const Model& module, const Spectrogram& mixture);

enum class SelectionMetric { kAe, kSnr };

std::string to_string(SelectionMetric m);
SelectionMetric parse_metric(const std::string& s);

// How the autoencoder sees its input at run time. `scaled` feeds the
// magnitudes unchanged through a dropout-folded network; `sampled` corrupts
// the input with Bernoulli(keep_prob) masks (rescaled by 1/keep_prob for the
// folded weights) and averages `draws` seeded passes.
struct ArbiterDropout {
  DropoutMode mode = DropoutMode::kScaled;
  double keep_prob = 0.8;
  int draws = 1;
  std::uint64_t seed = 0;
};

struct ModuleScore {
  std::string module;
  double ae_error = 0.0;
  double snr_db = 0.0;
};

// Both arbitration scores for one module output. Fills output.dae_recon with
// the (mean) reconstruction.
ModuleScore score_output(const Model& dae, ModuleOutput& output,
                         const ArbiterDropout& drop = {});

// Per-frame mean of the squared error between |s| frames and their
// reconstructions.
double ae_score(const Model& dae, ModuleOutput& output,
                const ArbiterDropout& drop = {});

// 10 log10(sum s^2 / sum (s - s_recon)^2), +100 dB when the discrepancy
// vanishes. Lengths are trimmed to the shorter signal.
double snr_score(const Waveform& enhanced, const Waveform& reconstructed);

struct SelectionReport {
  std::string utterance;
  SelectionMetric metric = SelectionMetric::kAe;
  std::vector<ModuleScore> scores;
  std::size_t chosen = 0;
  std::optional<std::size_t> oracle;
  std::size_t chance = 0;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const SelectionReport& r);

// Index that the metric prefers (argmin AE error / argmax SNR), lowest index
// on ties.
std::size_t choose(const std::vector<ModuleScore>& scores, SelectionMetric metric);

// Uniform draw over `count` modules.
std::size_t chance_index(std::size_t count, std::uint64_t seed);

// Argmax SDR against the reference; lowest index on ties.
std::size_t oracle_select(const std::vector<ModuleOutput>& outputs,
                          const Waveform& reference);

struct SelectionResult {
  SelectionReport report;
  std::vector<ModuleOutput> outputs;

  const ModuleOutput& chosen() const { return outputs.at(report.chosen); }
};

struct SelectOptions {
  SelectionMetric metric = SelectionMetric::kAe;
  ArbiterDropout dropout;
  std::uint64_t seed = 0;
  int threads = 1;
  std::optional<Waveform> reference;  // enables the oracle field
  std::string utterance;
};

// Runs every module on the mixture (in parallel), scores each output with the
// autoencoder and picks the winner.
SelectionResult select(const std::vector<Model>& modules, const Model& dae,
                       const Spectrogram& mixture, const SelectOptions& options);

}  // namespace mnn

#endif  // MNN_SELECTOR_H_
