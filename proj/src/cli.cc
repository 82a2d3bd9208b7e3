// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mnn/cli.h"

#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "mnn/common.h"
#include "mnn/corpus.h"
#include "mnn/data.h"
#include "mnn/experiment.h"
#include "mnn/metrics.h"
#include "mnn/model_io.h"
#include "mnn/selector.h"
#include "mnn/training.h"
#include "mnn/wav.h"

namespace mnn {
namespace {

namespace fs = std::filesystem;

struct Globals {
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string log_level = "info";
};

struct TrainArgs {
  std::string manifest;
  std::string out;
  std::string config;
  std::string loss_csv;
};

struct SelectArgs {
  std::string mixture;
  std::vector<std::string> modules;
  std::string dae;
  std::string metric = "ae";
  std::string out = "enhanced.wav";
  std::string report = "report.json";
  std::string reference;
  int sampled_draws = 0;
  double dae_keep_prob = 0.8;
};

std::string model_id(const std::string& path) { return fs::path(path).stem().string(); }

void check_parent(const std::string& path) {
  const fs::path parent = fs::absolute(fs::path(path)).parent_path();
  if (!fs::is_directory(parent))
    throw IoError("output directory does not exist: " + parent.string());
}

int cmd_synth(const CorpusOptions& o, const std::string& out_dir, std::ostream& out) {
  synthesize_corpus(o, out_dir);
  out << nlohmann::json{{"corpus", out_dir},
                        {"speakers_per_group", o.speakers_per_group},
                        {"utterances", o.utterances},
                        {"seed", o.seed}}
             .dump()
      << '\n';
  return kExitOk;
}

int cmd_train(const TrainArgs& a, ModelRole role, const Globals& g, std::ostream& out) {
  const DatasetManifest m = load_manifest(a.manifest);
  nlohmann::json cj = m.config.is_object() ? m.config : nlohmann::json::object();
  if (!a.config.empty()) {
    const auto bytes = read_file_bytes(a.config);
    try {
      cj = nlohmann::json::parse(bytes.begin(), bytes.end());
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(a.config + ": " + e.what());
    }
  }
  if (g.seed) cj["seed"] = *g.seed;
  const TrainConfig c = train_config_from_json(cj, role);
  check_parent(a.out);
  if (!a.loss_csv.empty()) check_parent(a.loss_csv);
  const int every = std::max(1, c.rprop.iterations / 20);
  const TrainedModel t = train_from_manifest(m, c, role, [&](int it, double loss) {
    if ((it + 1) % every == 0) spdlog::info("iteration {} mean loss {:.6g}", it + 1, loss);
  });
  save_network(a.out, t.network);
  if (!a.loss_csv.empty()) write_file_atomic(a.loss_csv, loss_curve_csv(t.loss_curve));
  out << nlohmann::json{{"model", a.out},
                        {"dims", c.dims},
                        {"final_loss", t.loss_curve.empty() ? 0.0 : t.loss_curve.back()}}
             .dump()
      << '\n';
  return kExitOk;
}

int cmd_enhance(const std::string& model, const std::string& in, const std::string& out_path,
                std::ostream& out) {
  const Model m = make_model(model_id(model), load_network(model));
  const Waveform x = read_wav(in);
  check_parent(out_path);
  const Spectrogram spec = stft(x);
  const ModuleOutput o = enhance_with_module(m, spec);
  write_wav(out_path, o.enhanced_wave);
  out << nlohmann::json{{"model", m.id}, {"out", out_path}}.dump() << '\n';
  return kExitOk;
}

int cmd_select(const SelectArgs& a, const Globals& g, std::ostream& out) {
  SelectOptions opt;
  opt.metric = parse_metric(a.metric);
  opt.seed = g.seed.value_or(0);
  opt.threads = g.threads;
  opt.utterance = model_id(a.mixture);
  if (a.sampled_draws > 0) {
    opt.dropout.mode = DropoutMode::kSampled;
    opt.dropout.draws = a.sampled_draws;
  }
  opt.dropout.keep_prob = a.dae_keep_prob;
  opt.dropout.seed = derive_seed(opt.seed, 1);
  std::vector<Model> modules;
  for (const std::string& p : a.modules) modules.push_back(make_model(model_id(p), load_network(p)));
  const Model dae = make_model(model_id(a.dae), load_network(a.dae));
  const Waveform x = read_wav(a.mixture);
  if (!a.reference.empty()) opt.reference = read_wav(a.reference);
  check_parent(a.out);
  check_parent(a.report);
  const SelectionResult r = select(modules, dae, stft(x), opt);
  write_wav(a.out, r.chosen().enhanced_wave);
  write_file_atomic(a.report, to_json(r.report).dump(2) + "\n");
  out << r.chosen().module_id << '\n';
  return kExitOk;
}

int cmd_eval(const std::string& est, const std::string& ref, std::ostream& out) {
  const Waveform e = read_wav(est);
  const Waveform r = read_wav(ref);
  nlohmann::json j;
  j["sdr_db"] = sdr(e, r);
  Waveform diff = e;
  for (std::size_t i = 0; i < diff.samples.size() && i < r.samples.size(); ++i)
    diff.samples[i] -= r.samples[i];
  j["snr_db"] = snr(r, diff);
  try {
    j["stoi"] = stoi(e, r);
  } catch (const std::invalid_argument& ex) {
    spdlog::warn("stoi unavailable: {}", ex.what());
    j["stoi"] = nullptr;
  }
  out << j.dump() << '\n';
  return kExitOk;
}

int cmd_experiment(const std::string& plan_path, const std::string& out_dir,
                   const std::string& cache, const Globals& g, std::ostream& out) {
  ExperimentPlan plan = load_plan(plan_path);
  if (g.seed) plan.seed = *g.seed;
  RunOptions o;
  o.out_dir = out_dir;
  if (!cache.empty()) o.cache_dir = fs::path(cache);
  o.threads = g.threads;
  const ExperimentResult r = run_experiment(plan, o);
  out << render_text_report(r);
  return kExitOk;
}

void emit_error(std::ostream& err, int code, const std::string& kind, const std::string& msg) {
  err << nlohmann::json{{"error", {{"code", code}, {"kind", kind}, {"message", msg}}}}.dump()
      << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("mnn", sink);
  logger->set_pattern("[%l] %v");
  // The sink borrows `err`; put the previous logger back before it dies.
  struct Restore {
    std::shared_ptr<spdlog::logger> prev = spdlog::default_logger();
    ~Restore() { spdlog::set_default_logger(prev); }
  } restore;
  spdlog::set_default_logger(logger);

  CLI::App app{"Modular speech enhancement networks with autoencoder selection"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "mnn model format " + std::to_string(kModelFormatVersion));

  Globals g;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Random seed");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::Range(1, 1024));
  app.add_option("--log-level", g.log_level, "trace|debug|info|warn|error|off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  CorpusOptions corpus;
  std::string corpus_out;
  auto* synth = app.add_subcommand("synth", "Generate the synthetic corpus and plans");
  synth->add_option("--speakers", corpus.speakers_per_group, "Speakers per group")
      ->check(CLI::Range(3, 1000));
  synth->add_option("--utterances", corpus.utterances, "Utterances per speaker")
      ->check(CLI::Range(1, 10000));
  synth->add_option("--noise-seconds", corpus.noise_seconds, "Length of each noise file")
      ->check(CLI::PositiveNumber);
  synth->add_option("--module-iterations", corpus.scale.module_iterations,
                    "Module training iterations written into the plans")
      ->check(CLI::Range(1, 10000000));
  int dae_iterations = 0;
  auto* dae_iter_opt =
      synth->add_option("--dae-iterations", dae_iterations,
                        "Autoencoder training iterations written into the plans")
          ->check(CLI::Range(1, 10000000));
  synth->add_option("--out", corpus_out, "Output directory")->required();

  TrainArgs train_module, train_dae;
  auto add_train = [&](const char* name, const char* desc, TrainArgs& a) {
    auto* s = app.add_subcommand(name, desc);
    s->add_option("--manifest", a.manifest, "Training manifest")->required();
    s->add_option("--out", a.out, "Model file to write")->required();
    s->add_option("--config", a.config, "Training config JSON (else the manifest's block)");
    s->add_option("--loss-csv", a.loss_csv, "Write the loss curve here");
    return s;
  };
  auto* tm = add_train("train-module", "Train a mask-predicting denoiser", train_module);
  auto* td = add_train("train-dae", "Train a speech autoencoder", train_dae);

  std::string enh_model, enh_in, enh_out = "enhanced.wav";
  auto* enhance = app.add_subcommand("enhance", "Run one module on one WAV");
  enhance->add_option("--model", enh_model, "Module file")->required();
  enhance->add_option("--in", enh_in, "Input WAV")->required();
  enhance->add_option("--out", enh_out, "Output WAV");

  SelectArgs sel;
  auto* select_cmd = app.add_subcommand("select", "Pick the best module output for a mixture");
  select_cmd->add_option("--mixture", sel.mixture, "Mixture WAV")->required();
  select_cmd->add_option("--modules", sel.modules, "Module files")->required()->expected(1, -1);
  select_cmd->add_option("--dae", sel.dae, "Autoencoder file")->required();
  select_cmd->add_option("--metric", sel.metric, "ae|snr")->check(CLI::IsMember({"ae", "snr"}));
  select_cmd->add_option("--out", sel.out, "Enhanced WAV to write");
  select_cmd->add_option("--report", sel.report, "Selection report JSON to write");
  select_cmd->add_option("--reference", sel.reference, "Clean reference (fills the oracle)");
  select_cmd->add_option("--sampled-dropout", sel.sampled_draws,
                         "Average this many corrupted autoencoder passes")
      ->check(CLI::Range(1, 100000));
  select_cmd->add_option("--dae-keep-prob", sel.dae_keep_prob, "Keep probability for sampling")
      ->check(CLI::Range(1e-6, 1.0));

  std::string est, ref;
  auto* eval = app.add_subcommand("eval", "SDR, SNR and STOI of an estimate");
  eval->add_option("--est", est, "Estimate WAV")->required();
  eval->add_option("--ref", ref, "Reference WAV")->required();

  std::string plan_path, exp_out, exp_cache;
  auto* experiment = app.add_subcommand("experiment", "Experiment runner");
  experiment->require_subcommand(1);
  auto* exp_run = experiment->add_subcommand("run", "Train, select and report");
  exp_run->add_option("--plan", plan_path, "Plan JSON")->required();
  exp_run->add_option("--out", exp_out, "Output directory")->required();
  exp_run->add_option("--cache", exp_cache, "Model cache directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << e.what() << '\n';
      return kExitOk;
    }
    emit_error(err, kExitUsage, "usage", e.what());
    return kExitUsage;
  }

  if (*seed_opt) g.seed = seed_value;
  logger->set_level(spdlog::level::from_str(g.log_level));
  set_thread_count(g.threads);
  if (g.seed) corpus.seed = *g.seed;
  if (*dae_iter_opt) {
    corpus.scale.shallow_dae_iterations = dae_iterations;
    corpus.scale.deep_dae_iterations = dae_iterations;
  }

  try {
    if (*synth) return cmd_synth(corpus, corpus_out, out);
    if (*tm) return cmd_train(train_module, ModelRole::kDenoiser, g, out);
    if (*td) return cmd_train(train_dae, ModelRole::kAutoencoder, g, out);
    if (*enhance) return cmd_enhance(enh_model, enh_in, enh_out, out);
    if (*select_cmd) return cmd_select(sel, g, out);
    if (*eval) return cmd_eval(est, ref, out);
    if (*exp_run) return cmd_experiment(plan_path, exp_out, exp_cache, g, out);
  } catch (const std::invalid_argument& e) {
    emit_error(err, kExitUsage, "invalid-argument", e.what());
    return kExitUsage;
  } catch (const IoError& e) {
    emit_error(err, kExitIo, "io", e.what());
    return kExitIo;
  } catch (const NumericError& e) {
    emit_error(err, kExitNumeric, "numeric", e.what());
    return kExitNumeric;
  } catch (const fs::filesystem_error& e) {
    emit_error(err, kExitIo, "io", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    emit_error(err, kExitFailure, "internal", e.what());
    return kExitFailure;
  }
  emit_error(err, kExitUsage, "usage", "no subcommand");
  return kExitUsage;
}

}  // namespace mnn
