// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <algorithm>
#include <stdexcept>

#include "fixtures.h"
#include "mnn/corpus.h"
#include "mnn/experiment.h"
#include "mnn/report.h"
#include "mnn/wav.h"

using namespace mnn;
using mnn::testing::TempDir;
using mnn::testing::read_text;
using mnn::testing::tiny_corpus_options;

namespace {

// One corpus for the whole binary.
const std::filesystem::path& corpus() {
  static TempDir dir("mnn_exp_corpus");
  static const bool made = [] {
    synthesize_corpus(tiny_corpus_options(), dir.path());
    return true;
  }();
  (void)made;
  return dir.path();
}

ReportTable small_table() {
  ReportTable t;
  t.title = "t";
  t.columns = {"a", "b"};
  t.rows.push_back({"x", "SDR", {1.25, -3.0 / 7.0}});
  t.rows.push_back({"x", "STOI", {0.5, 0.123456789012345678}});
  return t;
}

}  // namespace

TEST_CASE("report csv round trip and rendering") {
  const ReportTable t = small_table();
  ReportTable back = parse_csv(to_csv(t));
  back.title = t.title;
  CHECK(back == t);
  const std::string text = to_text(t);
  CHECK(text.find("1.25") != std::string::npos);
  CHECK(text.find("0.1235") != std::string::npos);
  CHECK(t.cell("x", "SDR", "a") == 1.25);
  CHECK_THROWS_AS(t.cell("y", "SDR", "a"), std::out_of_range);
}

TEST_CASE("empty cells are rendering errors") {
  ReportTable t = small_table();
  t.rows[1].cells[0].reset();
  CHECK_THROWS_AS(to_csv(t), std::invalid_argument);
  CHECK_THROWS_AS(to_text(t), std::invalid_argument);
  t = small_table();
  t.rows[0].cells.pop_back();
  CHECK_THROWS_AS(to_csv(t), std::invalid_argument);
  CHECK_THROWS_AS(parse_csv("label,metric,a\nx,SDR,zz\n"), std::invalid_argument);
}

TEST_CASE("plan parsing and validation") {
  const ExperimentPlan p = load_plan(corpus() / "exp1_noise.json");
  CHECK(p.modules.size() == 3);
  const ExperimentPlan back = plan_from_json(plan_to_json(p), p.base_dir);
  CHECK(plan_to_json(back) == plan_to_json(p));
  CHECK(parse_axis("speaker-group") == ExperimentAxis::kSpeakerGroup);
  CHECK_THROWS_AS(parse_axis("gender"), std::invalid_argument);

  ExperimentPlan bad = p;
  bad.modules.resize(1);
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = p;
  bad.daes.clear();
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = p;
  bad.metrics = {"PESQ"};
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = p;
  bad.modules[1].name = bad.modules[0].name;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  CHECK_THROWS_AS(load_plan(corpus() / "missing.json"), IoError);
}

TEST_CASE("mislabeled test records are rejected") {
  ExperimentPlan p = load_plan(corpus() / "exp1_noise.json");
  std::swap(p.tests[0].label, p.tests[1].label);
  CHECK_THROWS_AS(run_experiment(p, {}), std::invalid_argument);
}

TEST_CASE("cache key tracks config and audio") {
  const ExperimentPlan p = load_plan(corpus() / "exp1_noise.json");
  const DatasetManifest m = load_manifest(p.resolve(p.modules[0].train_manifest));
  TrainConfig c = train_config_from_json(p.modules[0].config, ModelRole::kDenoiser);
  const std::string k = model_cache_key(ModelRole::kDenoiser, c, m);
  CHECK(k.size() == 64);
  CHECK(model_cache_key(ModelRole::kDenoiser, c, m) == k);
  CHECK(model_cache_key(ModelRole::kAutoencoder, c, m) != k);
  c.seed += 1;
  CHECK(model_cache_key(ModelRole::kDenoiser, c, m) != k);
}

TEST_CASE("experiment run: outputs, invariants, determinism") {
  const ExperimentPlan plan = load_plan(corpus() / "exp1_noise.json");
  TempDir out1("mnn_exp_out1"), out2("mnn_exp_out2"), cache("mnn_exp_cache");
  RunOptions o1{out1.path(), std::nullopt, 1};
  RunOptions o2{out2.path(), cache.path(), 3};
  const ExperimentResult a = run_experiment(plan, o1);
  const ExperimentResult b = run_experiment(plan, o2);

  for (const char* f : {"report.csv", "report.txt", "accuracy.csv", "selection.jsonl",
                        "models/birds.mnn", "models/dae128.mnn", "models/dae_deep.mnn",
                        "models/typing.loss.csv"}) {
    CHECK(std::filesystem::exists(out1 / f));
    CHECK(read_text(out1 / f) == read_text(out2 / f));
  }

  // cached rerun reproduces the bytes
  {
    TempDir out3("mnn_exp_out3");
    RunOptions o3{out3.path(), cache.path(), 1};
    run_experiment(plan, o3);
    for (const char* f : {"report.csv", "selection.jsonl", "models/motorcycle.mnn"})
      CHECK(read_text(out1 / f) == read_text(out3 / f));
  }

  // table shape
  {
    const ReportTable& t = a.table;
    CHECK(t.columns.front() == "birds");
    CHECK(t.columns.back() == "Oracle");
    CHECK(std::find(t.columns.begin(), t.columns.end(), "AE[dae128]") != t.columns.end());
    CHECK(std::find(t.columns.begin(), t.columns.end(), "SNR[dae_deep]") != t.columns.end());
    CHECK(t.rows.size() == 3 * 2);
    ReportTable back = parse_csv(read_text(out1 / "report.csv"));
    back.title = t.title;
    CHECK(back == t);
    CHECK(a.accuracy.rows.back().label == "all");
    CHECK(a.selections.size() == a.utterances.size() * a.selectors.size());
  }

  // oracle dominates every selector and chance; selector beats the worst module
  {
    for (const UtteranceResult& u : a.utterances) {
      const double oracle = u.module_sdr[u.oracle_sdr];
      const double worst = *std::min_element(u.module_sdr.begin(), u.module_sdr.end());
      for (std::size_t k = 0; k < a.selectors.size(); ++k) {
        CHECK(oracle >= u.module_sdr[u.chosen[k]]);
        CHECK(u.module_sdr[u.chosen[k]] >= worst);
      }
      CHECK(oracle >= u.chance_sdr);
      CHECK(u.module_stoi[u.oracle_stoi] >= u.module_stoi[u.oracle_sdr]);
    }
    for (const ReportRow& r : a.table.rows)
      for (std::size_t c = 0; c + 1 < r.cells.size(); ++c) CHECK(*r.cells.back() >= *r.cells[c] - 1e-12);
  }
}

TEST_CASE("chance converges to the module mean and oracle is monotone in the module set") {
  ExperimentPlan plan = load_plan(corpus() / "exp1_noise.json");
  plan.chance_seeds = 3000;
  plan.daes.resize(1);
  plan.metrics = {"SDR"};
  const ExperimentResult r = run_experiment(plan, {});
  for (const UtteranceResult& u : r.utterances) {
    double mean = 0.0;
    for (double v : u.module_sdr) mean += v;
    mean /= static_cast<double>(u.module_sdr.size());
    double spread = 0.0;
    for (double v : u.module_sdr) spread = std::max(spread, std::abs(v - mean));
    CHECK(std::abs(u.chance_sdr - mean) <= 0.1 * spread + 1e-12);
  }
  ExperimentPlan fewer = plan;
  fewer.modules.pop_back();
  fewer.chance_seeds = 10;
  const ExperimentResult s = run_experiment(fewer, {});
  for (std::size_t i = 0; i < r.utterances.size(); ++i) {
    const auto& big = r.utterances[i].module_sdr;
    const auto& small = s.utterances[i].module_sdr;
    CHECK(*std::max_element(small.begin(), small.end()) <=
          *std::max_element(big.begin(), big.end()));
  }
}

TEST_CASE("train_from_manifest handles both roles") {
  const ExperimentPlan plan = load_plan(corpus() / "exp2_speaker.json");
  const DatasetManifest dm = load_manifest(plan.resolve(plan.daes[0].train_manifest));
  const TrainConfig dc = train_config_from_json(plan.daes[0].config, ModelRole::kAutoencoder);
  const TrainedModel d = train_from_manifest(dm, dc, ModelRole::kAutoencoder);
  CHECK(d.network.input_dim() == 513);
  CHECK(d.loss_curve.size() == static_cast<std::size_t>(dc.rprop.iterations));
  const DatasetManifest mm = load_manifest(plan.resolve(plan.modules[0].train_manifest));
  const TrainConfig mc = train_config_from_json(plan.modules[0].config, ModelRole::kDenoiser);
  CHECK(train_from_manifest(mm, mc, ModelRole::kDenoiser).network.input_dim() == 1539);
  CHECK_THROWS_AS(train_from_manifest(dm, mc, ModelRole::kDenoiser), std::invalid_argument);
}
