// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mnn/experiment.h"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include "mnn/metrics.h"
#include "mnn/model_io.h"
#include "mnn/parallel.h"
#include "mnn/wav.h"

namespace mnn {
namespace {

const char* role_name(ModelRole r) {
  return r == ModelRole::kDenoiser ? "denoiser" : "autoencoder";
}

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1)
      throw Error("sha256: init failed");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_, data, n) != 1) throw Error("sha256: update failed");
  }
  void update(const std::string& s) {
    update(s.data(), s.size());
    update("\n", 1);
  }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_, md, &len) != 1) throw Error("sha256: final failed");
    std::string out;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
      std::snprintf(buf, sizeof buf, "%02x", md[i]);
      out += buf;
    }
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

std::vector<ModelSpec> specs_from_json(const nlohmann::json& j) {
  std::vector<ModelSpec> out;
  for (const auto& e : j)
    out.push_back({e.at("name").get<std::string>(), e.at("train").get<std::string>(),
                   e.value("config", nlohmann::json::object())});
  return out;
}

nlohmann::json specs_to_json(const std::vector<ModelSpec>& specs) {
  nlohmann::json out = nlohmann::json::array();
  for (const ModelSpec& s : specs)
    out.push_back({{"name", s.name}, {"train", s.train_manifest}, {"config", s.config}});
  return out;
}

struct Job {
  const ModelSpec* spec;
  ModelRole role;
  TrainConfig config;
  DatasetManifest manifest;
};

std::size_t argmax_first(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

Dataset dataset_from_manifest(const DatasetManifest& m, const TrainConfig& c,
                              ModelRole role) {
  validate_manifest(m);
  if (m.records.empty()) throw std::invalid_argument("training manifest has no records");
  if (role == ModelRole::kAutoencoder) {
    std::vector<Waveform> cleans;
    cleans.reserve(m.records.size());
    for (const MixtureRecord& r : m.records) cleans.push_back(read_wav(m.resolve(r.clean_path)));
    return build_dae_dataset(cleans, c.context, c.frame_size, c.hop);
  }
  Dataset all;
  for (const MixtureRecord& r : m.records) {
    if (r.noise_path.empty())
      throw std::invalid_argument("denoiser record " + r.id + " has no noise");
    const RealizedMixture x = realize(m, r);
    all.append(denoiser_pairs(x.clean, x.mixture, c.context, c.frame_size, c.hop));
  }
  return all;
}

TrainedModel train_from_manifest(const DatasetManifest& m, const TrainConfig& c,
                                 ModelRole role, const ProgressFn& progress) {
  validate(c);
  const Dataset data = dataset_from_manifest(m, c, role);
  const Network init = init_weights(c.dims, c.activations, c.seed);
  TrainResult r = train(init, data, c.rprop, c.dropout, c.seed, progress);
  return {inference_network(r.network, c.dropout), std::move(r.loss_curve)};
}

std::string to_string(ExperimentAxis a) {
  switch (a) {
    case ExperimentAxis::kNoise:
      return "noise";
    case ExperimentAxis::kSpeakerGroup:
      return "speaker-group";
    case ExperimentAxis::kSnr:
      return "snr";
  }
  return "noise";
}

ExperimentAxis parse_axis(const std::string& s) {
  if (s == "noise") return ExperimentAxis::kNoise;
  if (s == "speaker-group") return ExperimentAxis::kSpeakerGroup;
  if (s == "snr") return ExperimentAxis::kSnr;
  throw std::invalid_argument("unknown experiment axis '" + s + "'");
}

std::filesystem::path ExperimentPlan::resolve(const std::string& p) const {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

ExperimentPlan plan_from_json(const nlohmann::json& j,
                              const std::filesystem::path& base_dir) {
  ExperimentPlan p;
  try {
    p.name = j.value("name", std::string("experiment"));
    p.axis = parse_axis(j.at("axis").get<std::string>());
    p.modules = specs_from_json(j.at("modules"));
    p.daes = specs_from_json(j.at("daes"));
    for (const auto& t : j.at("tests"))
      p.tests.push_back({t.at("label").get<std::string>(), t.at("manifest").get<std::string>()});
    if (j.contains("metrics")) p.metrics = j.at("metrics").get<std::vector<std::string>>();
    p.chance_seeds = j.value("chance_seeds", p.chance_seeds);
    p.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("arbiter")) {
      const auto& a = j.at("arbiter");
      const std::string mode = a.value("mode", std::string("scaled"));
      if (mode == "scaled")
        p.arbiter.mode = DropoutMode::kScaled;
      else if (mode == "sampled")
        p.arbiter.mode = DropoutMode::kSampled;
      else
        throw std::invalid_argument("plan: arbiter mode must be scaled or sampled");
      p.arbiter.keep_prob = a.value("keep_prob", p.arbiter.keep_prob);
      p.arbiter.draws = a.value("draws", p.arbiter.draws);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("plan: ") + e.what());
  }
  p.base_dir = base_dir;
  validate(p);
  return p;
}

nlohmann::json plan_to_json(const ExperimentPlan& p) {
  return {{"name", p.name},
          {"axis", to_string(p.axis)},
          {"seed", p.seed},
          {"chance_seeds", p.chance_seeds},
          {"metrics", p.metrics},
          {"arbiter",
           {{"mode", p.arbiter.mode == DropoutMode::kSampled ? "sampled" : "scaled"},
            {"keep_prob", p.arbiter.keep_prob},
            {"draws", p.arbiter.draws}}},
          {"modules", specs_to_json(p.modules)},
          {"daes", specs_to_json(p.daes)},
          {"tests", [&] {
             nlohmann::json t = nlohmann::json::array();
             for (const TestSpec& s : p.tests)
               t.push_back({{"label", s.label}, {"manifest", s.manifest}});
             return t;
           }()}};
}

ExperimentPlan load_plan(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return plan_from_json(j, path.parent_path());
}

void validate(const ExperimentPlan& p) {
  if (p.modules.size() < 2) throw std::invalid_argument("plan: need at least 2 modules");
  if (p.daes.empty()) throw std::invalid_argument("plan: need at least 1 autoencoder");
  if (p.tests.empty()) throw std::invalid_argument("plan: need at least 1 test set");
  if (p.chance_seeds < 1) throw std::invalid_argument("plan: chance_seeds must be >= 1");
  if (p.metrics.empty()) throw std::invalid_argument("plan: no metrics");
  for (const std::string& m : p.metrics)
    if (m != "SDR" && m != "STOI")
      throw std::invalid_argument("plan: unknown metric '" + m + "'");
  std::set<std::string> names;
  for (const auto* list : {&p.modules, &p.daes})
    for (const ModelSpec& s : *list)
      if (s.name.empty() || !names.insert(s.name).second)
        throw std::invalid_argument("plan: model names must be unique and non-empty ('" +
                                    s.name + "')");
  std::set<std::string> labels;
  for (const TestSpec& t : p.tests)
    if (t.label.empty() || !labels.insert(t.label).second)
      throw std::invalid_argument("plan: test labels must be unique and non-empty");
  if (p.arbiter.draws < 1 || !(p.arbiter.keep_prob > 0.0 && p.arbiter.keep_prob <= 1.0))
    throw std::invalid_argument("plan: arbiter needs draws >= 1 and keep_prob in (0, 1]");
}

std::string model_cache_key(ModelRole role, const TrainConfig& c,
                            const DatasetManifest& m) {
  Sha256 h;
  h.update(std::string("mnn-model-v") + std::to_string(1));
  h.update(role_name(role));
  h.update(train_config_to_json(c).dump());
  h.update(manifest_to_json(m).dump());
  // Audio contents, so a regenerated corpus at the same paths misses the cache.
  std::set<std::string> files;
  for (const MixtureRecord& r : m.records) {
    files.insert(m.resolve(r.clean_path).string());
    if (role == ModelRole::kDenoiser && !r.noise_path.empty())
      files.insert(m.resolve(r.noise_path).string());
  }
  for (const std::string& f : files) {
    const auto bytes = read_file_bytes(f);
    h.update(bytes.data(), bytes.size());
  }
  return h.hex();
}

std::string SelectorRun::column() const {
  return (metric == SelectionMetric::kAe ? "AE[" : "SNR[") + dae + "]";
}

ExperimentResult run_experiment(const ExperimentPlan& plan, const RunOptions& options) {
  validate(plan);
  namespace fs = std::filesystem;
  const int threads = std::max(1, options.threads);
  if (!options.out_dir.empty()) fs::create_directories(options.out_dir / "models");
  if (options.cache_dir) fs::create_directories(*options.cache_dir);

  // Models.
  std::vector<Job> jobs;
  for (const ModelSpec& s : plan.modules)
    jobs.push_back({&s, ModelRole::kDenoiser,
                    train_config_from_json(s.config, ModelRole::kDenoiser),
                    load_manifest(plan.resolve(s.train_manifest))});
  for (const ModelSpec& s : plan.daes)
    jobs.push_back({&s, ModelRole::kAutoencoder,
                    train_config_from_json(s.config, ModelRole::kAutoencoder),
                    load_manifest(plan.resolve(s.train_manifest))});
  const int frame_size = jobs.front().config.frame_size;
  const int hop = jobs.front().config.hop;
  for (const Job& j : jobs)
    if (j.config.frame_size != frame_size || j.config.hop != hop)
      throw std::invalid_argument("plan: all models must share frame size and hop");

  std::vector<Network> nets(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    const Job& job = jobs[i];
    const std::string key = model_cache_key(job.role, job.config, job.manifest);
    std::vector<std::uint8_t> model_bytes;
    std::string curve;
    const fs::path cached = options.cache_dir ? *options.cache_dir / (key + ".mnn") : fs::path();
    if (options.cache_dir && fs::exists(cached)) {
      spdlog::info("{}: cached model {}", job.spec->name, key.substr(0, 12));
      model_bytes = read_file_bytes(cached);
      nets[i] = deserialize(model_bytes);
      const fs::path curve_path = *options.cache_dir / (key + ".loss.csv");
      if (fs::exists(curve_path)) {
        const auto b = read_file_bytes(curve_path);
        curve.assign(b.begin(), b.end());
      }
    } else {
      spdlog::info("{}: training {} ({} iterations)", job.spec->name, role_name(job.role),
                   job.config.rprop.iterations);
      const int every = std::max(1, job.config.rprop.iterations / 10);
      TrainedModel m = train_from_manifest(
          job.manifest, job.config, job.role, [&](int it, double loss) {
            if ((it + 1) % every == 0)
              spdlog::debug("{}: iteration {} loss {:.6g}", job.spec->name, it + 1, loss);
          });
      nets[i] = std::move(m.network);
      model_bytes = serialize(nets[i]);
      curve = loss_curve_csv(m.loss_curve);
      if (options.cache_dir) {
        write_file_atomic(cached, model_bytes);
        write_file_atomic(*options.cache_dir / (key + ".loss.csv"), curve);
      }
    }
    if (!options.out_dir.empty()) {
      write_file_atomic(options.out_dir / "models" / (job.spec->name + ".mnn"), model_bytes);
      if (!curve.empty())
        write_file_atomic(options.out_dir / "models" / (job.spec->name + ".loss.csv"), curve);
    }
  });

  std::vector<Model> modules;
  std::vector<Model> daes;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    Model m = make_model(jobs[i].spec->name, nets[i]);
    (jobs[i].role == ModelRole::kDenoiser ? modules : daes).push_back(std::move(m));
  }

  // Test records.
  struct TestItem {
    std::string label;
    const DatasetManifest* manifest;
    const MixtureRecord* record;
  };
  std::vector<DatasetManifest> test_manifests;
  test_manifests.reserve(plan.tests.size());
  for (const TestSpec& t : plan.tests) {
    test_manifests.push_back(load_manifest(plan.resolve(t.manifest)));
    validate_manifest(test_manifests.back());
    for (const Job& j : jobs)
      if (j.role == ModelRole::kDenoiser) check_noise_disjoint(j.manifest, test_manifests.back());
  }
  std::vector<TestItem> items;
  for (std::size_t t = 0; t < plan.tests.size(); ++t) {
    const DatasetManifest& m = test_manifests[t];
    if (m.records.empty())
      throw std::invalid_argument("test set '" + plan.tests[t].label + "' is empty");
    for (const MixtureRecord& r : m.records) {
      if (r.label != plan.tests[t].label)
        throw std::invalid_argument("test record " + r.id + " is labeled '" + r.label +
                                    "', expected '" + plan.tests[t].label + "'");
      if (r.noise_path.empty())
        throw std::invalid_argument("test record " + r.id + " has no noise");
      items.push_back({plan.tests[t].label, &m, &r});
    }
  }

  ExperimentResult result;
  result.plan = plan;
  for (SelectionMetric metric : {SelectionMetric::kSnr, SelectionMetric::kAe})
    for (const Model& d : daes) result.selectors.push_back({d.id, metric});

  const bool want_stoi =
      std::find(plan.metrics.begin(), plan.metrics.end(), "STOI") != plan.metrics.end();
  const std::size_t n_mod = modules.size();
  result.utterances.resize(items.size());
  std::vector<std::vector<nlohmann::json>> selections(items.size());
  spdlog::info("{}: evaluating {} test utterances", plan.name, items.size());

  parallel_for(items.size(), threads, [&](std::size_t u) {
    const TestItem& item = items[u];
    const RealizedMixture x = realize(*item.manifest, *item.record);
    const Spectrogram mix = stft(x.mixture, frame_size, hop);
    const std::uint64_t seed_u = derive_seed(plan.seed, u);

    UtteranceResult& ur = result.utterances[u];
    ur.label = item.label;
    ur.utterance = item.record->id;
    std::vector<ModuleOutput> outputs(n_mod);
    for (std::size_t j = 0; j < n_mod; ++j) {
      outputs[j] = enhance_with_module(modules[j], mix);
      ur.module_sdr.push_back(sdr(outputs[j].enhanced_wave, x.clean));
      ur.module_stoi.push_back(want_stoi ? stoi(outputs[j].enhanced_wave, x.clean) : 0.0);
    }
    ur.oracle_sdr = argmax_first(ur.module_sdr);
    ur.oracle_stoi = want_stoi ? argmax_first(ur.module_stoi) : ur.oracle_sdr;

    for (int k = 0; k < plan.chance_seeds; ++k) {
      const std::size_t c = chance_index(n_mod, derive_seed(seed_u, static_cast<std::uint64_t>(k)));
      ur.chance_sdr += ur.module_sdr[c];
      ur.chance_stoi += ur.module_stoi[c];
    }
    ur.chance_sdr /= plan.chance_seeds;
    ur.chance_stoi /= plan.chance_seeds;

    std::map<std::string, std::vector<ModuleScore>> scores;
    for (std::size_t d = 0; d < daes.size(); ++d) {
      ArbiterDropout drop = plan.arbiter;
      drop.seed = derive_seed(seed_u, 1000 + d);
      auto& s = scores[daes[d].id];
      for (std::size_t j = 0; j < n_mod; ++j)
        s.push_back(score_output(daes[d], outputs[j], drop));
    }
    for (const SelectorRun& run : result.selectors) {
      SelectionReport rep;
      rep.utterance = ur.utterance;
      rep.metric = run.metric;
      rep.scores = scores.at(run.dae);
      rep.chosen = choose(rep.scores, run.metric);
      rep.oracle = ur.oracle_sdr;
      rep.seed = seed_u;
      rep.chance = chance_index(n_mod, seed_u);
      ur.chosen.push_back(rep.chosen);
      nlohmann::json j = to_json(rep);
      j["dae"] = run.dae;
      j["label"] = ur.label;
      selections[u].push_back(std::move(j));
    }
  });
  for (auto& v : selections)
    for (auto& j : v) result.selections.push_back(std::move(j));

  // Aggregation, in test-plan order.
  ReportTable& table = result.table;
  table.title = plan.name + " (" + to_string(plan.axis) + " axis)";
  for (const Model& m : modules) table.columns.push_back(m.id);
  table.columns.push_back("Chance");
  for (const SelectorRun& s : result.selectors) table.columns.push_back(s.column());
  table.columns.push_back("Oracle");

  ReportTable& acc = result.accuracy;
  acc.title = "selection accuracy (selector == SDR oracle)";
  for (const SelectorRun& s : result.selectors) acc.columns.push_back(s.column());
  acc.columns.push_back("Chance");

  auto add_rows = [&](const std::string& label, bool all) {
    std::vector<const UtteranceResult*> rows;
    for (const UtteranceResult& ur : result.utterances)
      if (all || ur.label == label) rows.push_back(&ur);
    const double n = static_cast<double>(rows.size());
    if (!all) {
      for (const std::string& metric : plan.metrics) {
        const bool is_sdr = metric == "SDR";
        ReportRow row{label, metric, {}};
        auto val = [&](const UtteranceResult* ur, std::size_t j) {
          return is_sdr ? ur->module_sdr[j] : ur->module_stoi[j];
        };
        for (std::size_t j = 0; j < n_mod; ++j) {
          double s = 0.0;
          for (const auto* ur : rows) s += val(ur, j);
          row.cells.emplace_back(s / n);
        }
        double chance = 0.0;
        for (const auto* ur : rows) chance += is_sdr ? ur->chance_sdr : ur->chance_stoi;
        row.cells.emplace_back(chance / n);
        for (std::size_t k = 0; k < result.selectors.size(); ++k) {
          double s = 0.0;
          for (const auto* ur : rows) s += val(ur, ur->chosen[k]);
          row.cells.emplace_back(s / n);
        }
        double oracle = 0.0;
        for (const auto* ur : rows) oracle += val(ur, is_sdr ? ur->oracle_sdr : ur->oracle_stoi);
        row.cells.emplace_back(oracle / n);
        table.rows.push_back(std::move(row));
      }
    }
    ReportRow arow{label, "SEL_ACC", {}};
    for (std::size_t k = 0; k < result.selectors.size(); ++k) {
      double hits = 0.0;
      for (const auto* ur : rows) hits += ur->chosen[k] == ur->oracle_sdr ? 1.0 : 0.0;
      arow.cells.emplace_back(hits / n);
    }
    arow.cells.emplace_back(1.0 / static_cast<double>(n_mod));
    acc.rows.push_back(std::move(arow));
  };
  for (const TestSpec& t : plan.tests) add_rows(t.label, false);
  add_rows("all", true);

  if (!options.out_dir.empty()) {
    write_file_atomic(options.out_dir / "report.csv", to_csv(table));
    write_file_atomic(options.out_dir / "accuracy.csv", to_csv(acc));
    write_file_atomic(options.out_dir / "report.txt", render_text_report(result));
    std::string lines;
    for (const auto& j : result.selections) lines += j.dump() + "\n";
    write_file_atomic(options.out_dir / "selection.jsonl", lines);
  }
  return result;
}

std::string render_text_report(const ExperimentResult& r) {
  std::ostringstream os;
  os << to_text(r.table) << '\n' << to_text(r.accuracy);
  std::vector<const UtteranceResult*> disagree;
  for (const UtteranceResult& u : r.utterances)
    if (u.oracle_sdr != u.oracle_stoi) disagree.push_back(&u);
  const bool has_stoi = std::find(r.plan.metrics.begin(), r.plan.metrics.end(), "STOI") !=
                        r.plan.metrics.end();
  if (has_stoi) {
    os << "\nSDR/STOI oracle disagreements: " << disagree.size() << " of "
       << r.utterances.size() << " utterances\n";
    const std::vector<std::string>& names = r.table.columns;
    for (const UtteranceResult* u : disagree)
      os << "  " << u->label << ' ' << u->utterance << ": SDR oracle " << names[u->oracle_sdr]
         << ", STOI oracle " << names[u->oracle_stoi] << '\n';
  }
  return os.str();
}

}  // namespace mnn
