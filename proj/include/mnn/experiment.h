// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MNN_EXPERIMENT_H_
#define MNN_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mnn/data.h"
#include "mnn/network.h"
#include "mnn/report.h"
#include "mnn/selector.h"
#include "mnn/training.h"

namespace mnn {

struct TrainedModel {
  Network network;  // dropout folded, float32-exact
  std::vector<double> loss_curve;
};

// Realizes every record of the manifest and trains one network on it.
// Denoisers learn soft masks from mixtures; autoencoders learn to reproduce
// clean magnitudes (records' noise is ignored).
Dataset dataset_from_manifest(const DatasetManifest& m, const TrainConfig& c,
                              ModelRole role);
TrainedModel train_from_manifest(const DatasetManifest& m, const TrainConfig& c,
                                 ModelRole role, const ProgressFn& progress = {});

enum class ExperimentAxis { kNoise, kSpeakerGroup, kSnr };

std::string to_string(ExperimentAxis a);
ExperimentAxis parse_axis(const std::string& s);

struct ModelSpec {
  std::string name;
  std::string train_manifest;  // relative to the plan's directory
  nlohmann::json config;       // TrainConfig JSON
};

struct TestSpec {
  std::string label;     // axis value; records in the manifest carry it too
  std::string manifest;
};

struct ExperimentPlan {
  std::string name;
  ExperimentAxis axis = ExperimentAxis::kNoise;
  std::vector<ModelSpec> modules;
  std::vector<ModelSpec> daes;
  std::vector<TestSpec> tests;
  std::vector<std::string> metrics{"SDR", "STOI"};
  int chance_seeds = 10;
  std::uint64_t seed = 0;
  ArbiterDropout arbiter;
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& p) const;
};

ExperimentPlan plan_from_json(const nlohmann::json& j,
                              const std::filesystem::path& base_dir);
nlohmann::json plan_to_json(const ExperimentPlan& p);
ExperimentPlan load_plan(const std::filesystem::path& path);
void validate(const ExperimentPlan& p);

// Hex SHA-256 over role, normalized config and the manifest contents.
std::string model_cache_key(ModelRole role, const TrainConfig& c,
                            const DatasetManifest& m);

struct SelectorRun {
  std::string dae;
  SelectionMetric metric = SelectionMetric::kAe;
  std::string column() const;  // "AE[dae]" / "SNR[dae]"
};

struct UtteranceResult {
  std::string label;
  std::string utterance;
  std::vector<double> module_sdr;
  std::vector<double> module_stoi;
  double chance_sdr = 0.0;   // mean over the chance seeds
  double chance_stoi = 0.0;
  std::vector<std::size_t> chosen;  // one per selector run
  std::size_t oracle_sdr = 0;
  std::size_t oracle_stoi = 0;
};

struct ExperimentResult {
  ExperimentPlan plan;
  std::vector<SelectorRun> selectors;
  std::vector<UtteranceResult> utterances;
  ReportTable table;      // mean SDR/STOI per test label
  ReportTable accuracy;   // selector == SDR oracle rate per test label, plus "all"
  // One SelectionReport per utterance and selector run, tagged with the
  // autoencoder name and test label.
  std::vector<nlohmann::json> selections;
};

struct RunOptions {
  std::filesystem::path out_dir;  // empty: nothing written
  std::optional<std::filesystem::path> cache_dir;
  int threads = 1;
};

// Trains (or loads cached) modules and autoencoders, evaluates every test
// utterance and writes report.csv, report.txt, accuracy.csv,
// selection.jsonl and models/ under out_dir.
ExperimentResult run_experiment(const ExperimentPlan& plan, const RunOptions& options);

std::string render_text_report(const ExperimentResult& r);

}  // namespace mnn

#endif  // MNN_EXPERIMENT_H_
