// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mnn/corpus.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "mnn/common.h"
#include "mnn/data.h"
#include "mnn/wav.h"

namespace mnn {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vowel {
  double f1, f2, f3;
};

// Average adult formants (Hz) for a handful of vowels.
constexpr std::array<Vowel, 7> kVowels{{
    {730, 1090, 2440},  // a
    {270, 2290, 3010},  // i
    {300, 870, 2240},   // u
    {530, 1840, 2480},  // e
    {570, 840, 2410},   // o
    {660, 1720, 2410},  // ae
    {490, 1350, 1690},  // er
}};

// Second-order resonance magnitude, unity at DC.
double resonance(double f, double centre, double bandwidth) {
  const double r = f / centre;
  const double a = 1.0 - r * r;
  const double b = f * bandwidth / (centre * centre);
  return 1.0 / std::sqrt(a * a + b * b);
}

void normalize_rms(std::vector<double>& x, double rms) {
  double e = 0.0;
  for (double v : x) e += v * v;
  if (e <= 0.0) return;
  const double g = rms / std::sqrt(e / static_cast<double>(x.size()));
  for (double& v : x) v *= g;
}

// RBJ band-pass (constant peak gain).
class BandPass {
 public:
  BandPass(double centre, double q, int fs) {
    const double w0 = kTwoPi * centre / fs;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    b0_ = alpha / a0;
    b2_ = -alpha / a0;
    a1_ = -2.0 * std::cos(w0) / a0;
    a2_ = (1.0 - alpha) / a0;
  }
  double operator()(double x) {
    const double y = b0_ * x + b2_ * x2_ - a1_ * y1_ - a2_ * y2_;
    x2_ = x1_;
    x1_ = x;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double b0_, b2_, a1_, a2_;
  double x1_ = 0, x2_ = 0, y1_ = 0, y2_ = 0;
};

void add_birds(std::vector<double>& out, Rng& rng, int fs) {
  const auto n = static_cast<double>(out.size());
  double t = rng.uniform(0.0, 0.2) * fs;
  while (t < n) {
    const int burst = rng.bernoulli(0.3) ? 2 + static_cast<int>(rng.below(3)) : 1;
    const double f_start = rng.uniform(2800.0, 6000.0);
    const double sweep = rng.uniform(-2000.0, 2000.0);
    const double trill_depth = rng.uniform(0.0, 400.0);
    const double trill_rate = rng.uniform(15.0, 40.0);
    const double amp = rng.uniform(0.3, 1.0);
    for (int b = 0; b < burst && t < n; ++b) {
      const double dur = rng.uniform(0.04, 0.15) * fs;
      double phase = 0.0;
      for (int i = 0; i < static_cast<int>(dur); ++i) {
        const auto idx = static_cast<std::size_t>(t) + static_cast<std::size_t>(i);
        if (idx >= out.size()) break;
        const double u = i / dur;
        double f = f_start + sweep * u +
                   trill_depth * std::sin(kTwoPi * trill_rate * i / fs);
        f = std::clamp(f, 1800.0, 7500.0);
        phase += kTwoPi * f / fs;
        const double env = std::pow(std::sin(std::numbers::pi * u), 2.0);
        out[idx] += amp * env * (std::sin(phase) + 0.2 * std::sin(2.0 * phase));
      }
      t += dur + rng.uniform(0.01, 0.04) * fs;
    }
    t += rng.uniform(0.03, 0.35) * fs;
  }
}

void add_typing(std::vector<double>& out, Rng& rng, int fs) {
  const auto n = static_cast<double>(out.size());
  double t = rng.uniform(0.0, 0.1) * fs;
  auto click = [&](double start, double amp) {
    BandPass bp(rng.uniform(1500.0, 5000.0), 1.5, fs);
    const double tau = rng.uniform(1.5e-3, 4e-3) * fs;
    const double thump_f = rng.uniform(150.0, 300.0);
    const double thump_tau = 8e-3 * fs;
    const int len = static_cast<int>(8.0 * std::max(tau, thump_tau));
    for (int i = 0; i < len; ++i) {
      const auto idx = static_cast<std::size_t>(start) + static_cast<std::size_t>(i);
      if (idx >= out.size()) break;
      const double crack = bp(rng.normal()) * std::exp(-i / tau);
      const double thump =
          0.3 * std::sin(kTwoPi * thump_f * i / fs) * std::exp(-i / thump_tau);
      out[idx] += amp * (4.0 * crack + thump);
    }
  };
  while (t < n) {
    const double amp = rng.uniform(0.4, 1.0);
    click(t, amp);
    click(t + rng.uniform(0.03, 0.08) * fs, 0.5 * amp);
    t += rng.uniform(0.07, 0.30) * fs;
  }
}

void add_motorcycle(std::vector<double>& out, Rng& rng, int fs) {
  const double base = rng.uniform(30.0, 45.0);
  const double lfo_rate = rng.uniform(0.1, 0.3);
  const double lfo_phase = rng.uniform(0.0, kTwoPi);
  const double exhaust = rng.uniform(300.0, 600.0);
  double walk = 0.0;
  double phase = 0.0;
  double rumble = 0.0, rumble1 = 0.0;
  const double pole = std::exp(-kTwoPi * 400.0 / fs);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i % 64 == 0) walk = std::clamp(walk + 0.02 * rng.normal(), -0.2, 0.2);
    const double ts = static_cast<double>(i) / fs;
    const double f0 =
        base * (1.0 + 0.3 * std::sin(kTwoPi * lfo_rate * ts + lfo_phase) + walk);
    phase += kTwoPi * f0 / fs;
    if (phase > kTwoPi * 1e6) phase = std::fmod(phase, kTwoPi);
    double engine = 0.0;
    const int harmonics = static_cast<int>(1500.0 / f0);
    for (int k = 1; k <= harmonics; ++k)
      engine += std::pow(k, -0.7) * resonance(k * f0, exhaust, 250.0) *
                std::sin(k * phase);
    // Firing roughness at half the engine rate.
    engine *= 1.0 + 0.3 * std::sin(0.5 * phase);
    // Two one-pole stages keep the rumble below about 1 kHz.
    rumble1 = pole * rumble1 + (1.0 - pole) * rng.normal();
    rumble = pole * rumble + (1.0 - pole) * rumble1;
    out[i] = 0.2 * engine + 6.0 * rumble;
  }
}

nlohmann::json plan_entry(const std::string& name, const std::string& train,
                          nlohmann::json config) {
  return {{"name", name}, {"train", train}, {"config", std::move(config)}};
}

}  // namespace

SpeakerProfile make_speaker(int group, int index, std::uint64_t seed) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(group * 1000 + index)));
  SpeakerProfile s;
  s.group = group;
  s.id = "g" + std::to_string(group) + "s" + std::to_string(index);
  if (group == 0) {
    s.f0 = rng.uniform(95.0, 140.0);
    s.formant_scale = rng.uniform(0.95, 1.05);
  } else {
    s.f0 = rng.uniform(175.0, 245.0);
    s.formant_scale = rng.uniform(1.12, 1.22);
  }
  s.tilt = rng.uniform(0.9, 1.3);
  return s;
}

Waveform synth_utterance(const SpeakerProfile& speaker, std::uint64_t seed,
                         const SpeechOptions& options) {
  Rng rng(seed);
  const int fs = options.sample_rate;
  const auto total = static_cast<std::size_t>(
      rng.uniform(options.min_seconds, options.max_seconds) * fs);
  std::vector<double> out(total, 0.0);
  const double nyquist_guard = 0.45 * fs;

  double t = rng.uniform(0.05, 0.15) * fs;
  while (t < static_cast<double>(total) - 0.2 * fs) {
    const double len = rng.uniform(0.12, 0.30) * fs;
    if (t + len > static_cast<double>(total) - 0.05 * fs) break;
    const Vowel& a = kVowels[rng.below(kVowels.size())];
    const Vowel& b = kVowels[rng.below(kVowels.size())];
    const double f0_start = speaker.f0 * rng.uniform(0.9, 1.15);
    const double f0_end = f0_start * rng.uniform(0.8, 1.05);
    const double amp = rng.uniform(0.6, 1.0);
    const double vibrato = rng.uniform(4.0, 6.0);
    const double attack = 0.025 * fs;
    const double release = 0.04 * fs;

    std::vector<double> harmonic_amp;
    double phase = rng.uniform(0.0, kTwoPi);
    const auto start = static_cast<std::size_t>(t);
    const auto count = static_cast<std::size_t>(len);
    for (std::size_t i = 0; i < count; ++i) {
      const double u = static_cast<double>(i) / len;
      const double f0 =
          (f0_start + (f0_end - f0_start) * u) *
          (1.0 + 0.01 * std::sin(kTwoPi * vibrato * static_cast<double>(i) / fs));
      if (i % 64 == 0) {
        // Smooth glide between the two vowel targets.
        const double g = 0.5 - 0.5 * std::cos(std::numbers::pi * u);
        const double s = speaker.formant_scale;
        const double f1 = s * (a.f1 + (b.f1 - a.f1) * g);
        const double f2 = s * (a.f2 + (b.f2 - a.f2) * g);
        const double f3 = s * (a.f3 + (b.f3 - a.f3) * g);
        const double f4 = s * 3500.0;
        const auto k_max = static_cast<std::size_t>(nyquist_guard / f0);
        harmonic_amp.assign(k_max, 0.0);
        for (std::size_t k = 1; k <= k_max; ++k) {
          const double f = static_cast<double>(k) * f0;
          harmonic_amp[k - 1] = std::pow(static_cast<double>(k), -speaker.tilt) *
                                resonance(f, f1, 80.0) * resonance(f, f2, 100.0) *
                                resonance(f, f3, 140.0) * resonance(f, f4, 200.0);
        }
      }
      phase += kTwoPi * f0 / fs;
      double v = 0.0;
      for (std::size_t k = 0; k < harmonic_amp.size(); ++k)
        v += harmonic_amp[k] * std::sin(static_cast<double>(k + 1) * phase);
      const double di = static_cast<double>(i);
      double env = 1.0;
      if (di < attack) env = 0.5 - 0.5 * std::cos(std::numbers::pi * di / attack);
      if (len - di < release)
        env = std::min(env, 0.5 - 0.5 * std::cos(std::numbers::pi * (len - di) / release));
      out[start + i] += amp * env * v;
    }
    t += len + rng.uniform(0.04, 0.15) * fs;
  }
  normalize_rms(out, options.rms * rng.uniform(0.7, 1.4));
  return Waveform{std::move(out), fs};
}

std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::kBirds:
      return "birds";
    case NoiseKind::kTyping:
      return "typing";
    case NoiseKind::kMotorcycle:
      return "motorcycle";
  }
  return "birds";
}

NoiseKind parse_noise_kind(const std::string& s) {
  for (NoiseKind k : kAllNoiseKinds)
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown noise kind '" + s + "'");
}

Waveform synth_noise(NoiseKind kind, double seconds, std::uint64_t seed,
                     int sample_rate, double rms) {
  if (!(seconds > 0.0)) throw std::invalid_argument("synth_noise: non-positive duration");
  Rng rng(seed);
  std::vector<double> out(static_cast<std::size_t>(seconds * sample_rate), 0.0);
  switch (kind) {
    case NoiseKind::kBirds:
      add_birds(out, rng, sample_rate);
      break;
    case NoiseKind::kTyping:
      add_typing(out, rng, sample_rate);
      break;
    case NoiseKind::kMotorcycle:
      add_motorcycle(out, rng, sample_rate);
      break;
  }
  normalize_rms(out, rms);
  return Waveform{std::move(out), sample_rate};
}

Waveform white_noise(std::size_t samples, std::uint64_t seed, int sample_rate,
                     double rms) {
  Rng rng(seed);
  std::vector<double> out(samples);
  for (double& v : out) v = rng.normal();
  normalize_rms(out, rms);
  return Waveform{std::move(out), sample_rate};
}

void synthesize_corpus(const CorpusOptions& o, const std::filesystem::path& out) {
  if (o.speakers_per_group < 3)
    throw std::invalid_argument("synth: need at least 3 speakers per group");
  if (o.utterances < 1) throw std::invalid_argument("synth: need utterances >= 1");
  namespace fs = std::filesystem;
  fs::create_directories(out / "clean");
  fs::create_directories(out / "noise");
  fs::create_directories(out / "manifests");

  struct Utterance {
    std::string path;  // relative to `out`
    std::size_t length;
    int group;
  };
  // role 0: autoencoder training, 1: module training, 2: test
  std::array<std::vector<Utterance>, 3> by_role;
  nlohmann::json meta;
  meta["seed"] = o.seed;
  meta["sample_rate"] = o.sample_rate;
  meta["speakers"] = nlohmann::json::array();
  for (int g = 0; g < 2; ++g) {
    for (int s = 0; s < o.speakers_per_group; ++s) {
      const SpeakerProfile spk = make_speaker(g, s, o.seed);
      const int role = s % 3;
      nlohmann::json sj = {{"id", spk.id},
                           {"group", g},
                           {"f0", spk.f0},
                           {"formant_scale", spk.formant_scale},
                           {"role", role == 0 ? "dae" : role == 1 ? "train" : "test"},
                           {"utterances", nlohmann::json::array()}};
      for (int u = 0; u < o.utterances; ++u) {
        SpeechOptions so;
        so.sample_rate = o.sample_rate;
        const Waveform w = synth_utterance(
            spk, derive_seed(o.seed, 100000 + g * 10000 + s * 100 + u), so);
        const std::string rel = "clean/" + spk.id + "u" + std::to_string(u) + ".wav";
        write_wav(out / rel, w);
        double peak = 0.0;
        for (double v : w.samples) peak = std::max(peak, std::abs(v));
        sj["utterances"].push_back({{"path", rel}, {"peak", peak}});
        by_role[static_cast<std::size_t>(role)].push_back({rel, w.size(), g});
      }
      meta["speakers"].push_back(std::move(sj));
    }
  }

  std::vector<std::size_t> noise_len;
  meta["noise"] = nlohmann::json::array();
  for (NoiseKind k : kAllNoiseKinds) {
    const Waveform n = synth_noise(
        k, o.noise_seconds, derive_seed(o.seed, 500 + static_cast<int>(k)), o.sample_rate);
    write_wav(out / "noise" / (to_string(k) + ".wav"), n);
    double peak = 0.0;
    for (double v : n.samples) peak = std::max(peak, std::abs(v));
    meta["noise"].push_back(
        {{"path", "noise/" + to_string(k) + ".wav"}, {"peak", peak}});
    noise_len.push_back(n.size());
  }
  write_file_atomic(out / "corpus.json", meta.dump(2) + "\n");

  std::uint64_t record_counter = 0;
  // Train segments come from the first half of a noise file, test segments
  // from the second half.
  auto make_record = [&](const Utterance& u, NoiseKind k, double snr, bool test,
                         const std::string& label) {
    MixtureRecord r;
    r.clean_path = "../" + u.path;
    r.noise_path = "../noise/" + to_string(k) + ".wav";
    r.snr_db = snr;
    r.label = label;
    r.seed = derive_seed(o.seed, 900000 + record_counter++);
    const std::size_t half = noise_len[static_cast<std::size_t>(k)] / 2;
    if (u.length > half) throw std::invalid_argument("synth: noise too short");
    Rng rng(r.seed);
    r.noise_offset = static_cast<long long>(rng.below(half - u.length + 1)) +
                     (test ? static_cast<long long>(half) : 0);
    r.id = fs::path(u.path).stem().string() + "_" + to_string(k) + "_" +
           (snr >= 0 ? "p" : "m") + std::to_string(static_cast<int>(std::abs(snr)));
    return r;
  };
  auto write = [&](const std::string& name, Split split,
                   std::vector<MixtureRecord> records, const std::string& desc) {
    DatasetManifest m;
    m.split = split;
    m.sample_rate = o.sample_rate;
    m.description = desc;
    m.records = std::move(records);
    save_manifest(out / "manifests" / name, m);
    return "manifests/" + name;
  };

  // Clean-speech sets for the autoencoders and for held-out checks.
  auto clean_records = [&](int role) {
    std::vector<MixtureRecord> v;
    for (const Utterance& u : by_role[static_cast<std::size_t>(role)]) {
      MixtureRecord r;
      r.clean_path = "../" + u.path;
      r.id = fs::path(u.path).stem().string();
      r.label = "g" + std::to_string(u.group);
      v.push_back(std::move(r));
    }
    return v;
  };
  const std::string dae_manifest =
      write("dae_train.json", Split::kTrain, clean_records(0), "clean speech for the autoencoders");
  write("clean_test.json", Split::kTest, clean_records(2), "held-out clean speech");

  const int bins = o.frame_size / 2 + 1;
  auto config = [&](int context, const std::vector<int>& hidden, int iterations,
                    bool denoiser, std::uint64_t seed) {
    std::vector<int> dims{context * bins};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(bins);
    std::vector<std::string> acts(hidden.size(), "modified-relu");
    acts.push_back(denoiser ? "logistic" : "modified-relu");
    return nlohmann::json{
        {"frame_size", o.frame_size},
        {"hop", o.hop},
        {"context", context},
        {"dims", dims},
        {"activations", acts},
        {"rprop",
         {{"eta_minus", 0.5},
          {"eta_plus", 1.5},
          {"step_min", 1e-7},
          {"step_max", 1e-1},
          {"initial_step", 1e-3},
          {"iterations", iterations},
          {"batch_size", o.scale.batch_size}}},
        {"dropout", {{"keep_prob", 0.8}, {"mode", "sampled"}}},
        {"seed", seed}};
  };
  const nlohmann::json daes = nlohmann::json::array(
      {plan_entry("dae128", dae_manifest,
                  config(1, o.scale.shallow_dae_hidden, o.scale.shallow_dae_iterations,
                         false, derive_seed(o.seed, 71))),
       plan_entry("dae_deep", dae_manifest,
                  config(3, o.scale.deep_dae_hidden, o.scale.deep_dae_iterations,
                         false, derive_seed(o.seed, 72)))});

  auto plan = [&](const std::string& name, const std::string& axis,
                  const nlohmann::json& modules, const nlohmann::json& tests) {
    nlohmann::json p = {{"name", name},
                        {"axis", axis},
                        {"seed", o.seed},
                        {"chance_seeds", 10},
                        {"metrics", {"SDR", "STOI"}},
                        {"arbiter", {{"mode", "scaled"}, {"keep_prob", 0.8}, {"draws", 1}}},
                        {"modules", modules},
                        {"daes", daes},
                        {"tests", tests}};
    write_file_atomic(out / (name + ".json"), p.dump(2) + "\n");
  };

  const std::vector<Utterance>& train_utts = by_role[1];
  const std::vector<Utterance>& test_utts = by_role[2];

  // Experiment 1: one module per noise type, 0 dB mixtures.
  {
    nlohmann::json modules = nlohmann::json::array();
    nlohmann::json tests = nlohmann::json::array();
    for (NoiseKind k : kAllNoiseKinds) {
      const std::string label = to_string(k);
      std::vector<MixtureRecord> train, test;
      for (const Utterance& u : train_utts) train.push_back(make_record(u, k, 0.0, false, label));
      for (const Utterance& u : test_utts) test.push_back(make_record(u, k, 0.0, true, label));
      modules.push_back(plan_entry(
          label, write("exp1_train_" + label + ".json", Split::kTrain, train, label + " mixtures"),
          config(3, o.scale.module_hidden, o.scale.module_iterations, true,
                 derive_seed(o.seed, 10 + static_cast<int>(k)))));
      tests.push_back({{"label", label},
                       {"manifest", write("exp1_test_" + label + ".json", Split::kTest, test,
                                          label + " test mixtures")}});
    }
    plan("exp1_noise", "noise", modules, tests);
  }

  // Experiment 2: one module per speaker group, all noise types.
  {
    nlohmann::json modules = nlohmann::json::array();
    nlohmann::json tests = nlohmann::json::array();
    for (int g = 0; g < 2; ++g) {
      const std::string label = "group" + std::to_string(g);
      std::vector<MixtureRecord> train, test;
      for (NoiseKind k : kAllNoiseKinds) {
        for (const Utterance& u : train_utts)
          if (u.group == g) train.push_back(make_record(u, k, 0.0, false, label));
        for (const Utterance& u : test_utts)
          if (u.group == g) test.push_back(make_record(u, k, 0.0, true, label));
      }
      modules.push_back(plan_entry(
          label, write("exp2_train_" + label + ".json", Split::kTrain, train, label + " mixtures"),
          config(3, o.scale.module_hidden, o.scale.module_iterations, true,
                 derive_seed(o.seed, 20 + g))));
      tests.push_back({{"label", label},
                       {"manifest", write("exp2_test_" + label + ".json", Split::kTest, test,
                                          label + " test mixtures")}});
    }
    plan("exp2_speaker", "speaker-group", modules, tests);
  }

  // Experiment 3: one module per input SNR, all noise types.
  {
    nlohmann::json modules = nlohmann::json::array();
    nlohmann::json tests = nlohmann::json::array();
    for (double snr : {-5.0, 0.0, 5.0}) {
      const std::string label =
          snr < 0 ? "snr-5" : snr > 0 ? "snr+5" : "snr0";
      std::vector<MixtureRecord> train, test;
      for (NoiseKind k : kAllNoiseKinds) {
        for (const Utterance& u : train_utts) train.push_back(make_record(u, k, snr, false, label));
        for (const Utterance& u : test_utts) test.push_back(make_record(u, k, snr, true, label));
      }
      modules.push_back(plan_entry(
          label, write("exp3_train_" + label + ".json", Split::kTrain, train, label + " mixtures"),
          config(3, o.scale.module_hidden, o.scale.module_iterations, true,
                 derive_seed(o.seed, 30 + static_cast<int>(snr)))));
      tests.push_back({{"label", label},
                       {"manifest", write("exp3_test_" + label + ".json", Split::kTest, test,
                                          label + " test mixtures")}});
    }
    plan("exp3_snr", "snr", modules, tests);
  }
}

}  // namespace mnn
