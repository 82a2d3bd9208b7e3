// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mnn/data.h"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

#include "mnn/wav.h"

namespace mnn {

Mixture mix_at_snr(const Waveform& s, const Waveform& n, double target_db) {
  validate(s);
  validate(n);
  if (!std::isfinite(target_db))
    throw std::invalid_argument("mix_at_snr: non-finite target SNR");
  if (n.size() < s.size())
    throw std::invalid_argument("mix_at_snr: noise (" +
                                std::to_string(n.size()) +
                                " samples) shorter than speech (" +
                                std::to_string(s.size()) + ")");
  if (s.sample_rate != n.sample_rate)
    throw std::invalid_argument("mix_at_snr: sample rate mismatch");
  double es = 0.0, en = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    es += s.samples[i] * s.samples[i];
    en += n.samples[i] * n.samples[i];
  }
  if (es <= 0.0) throw std::invalid_argument("mix_at_snr: zero-energy speech");
  if (en <= 0.0) throw std::invalid_argument("mix_at_snr: zero-energy noise");

  Mixture m;
  m.gain = std::sqrt((es / en) / std::pow(10.0, target_db / 10.0));
  m.scaled_noise.sample_rate = s.sample_rate;
  m.mixture.sample_rate = s.sample_rate;
  m.scaled_noise.samples.resize(s.size());
  m.mixture.samples.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    m.scaled_noise.samples[i] = m.gain * n.samples[i];
    m.mixture.samples[i] = s.samples[i] + m.scaled_noise.samples[i];
  }
  return m;
}

std::string to_string(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kValidation:
      return "validation";
    case Split::kTest:
      return "test";
  }
  return "train";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "validation") return Split::kValidation;
  if (s == "test") return Split::kTest;
  throw std::invalid_argument("unknown split '" + s + "'");
}

std::filesystem::path DatasetManifest::resolve(const std::string& p) const {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

DatasetManifest manifest_from_json(const nlohmann::json& j,
                                   const std::filesystem::path& base_dir) {
  DatasetManifest m;
  m.base_dir = base_dir;
  m.split = parse_split(j.value("split", std::string("train")));
  m.sample_rate = j.value("sample_rate", 16000);
  m.description = j.value("description", std::string());
  if (j.contains("config")) m.config = j.at("config");
  if (!j.contains("records") || !j.at("records").is_array())
    throw std::invalid_argument("manifest: missing 'records' array");
  for (const auto& r : j.at("records")) {
    MixtureRecord rec;
    rec.clean_path = r.at("clean_path").get<std::string>();
    rec.noise_path = r.value("noise_path", std::string());
    rec.snr_db = r.value("snr_db", 0.0);
    rec.noise_offset = r.value("noise_offset", -1LL);
    rec.seed = r.value("seed", std::uint64_t{0});
    rec.label = r.value("label", std::string());
    rec.id = r.value("id", std::filesystem::path(rec.clean_path).stem().string());
    if (!std::isfinite(rec.snr_db))
      throw std::invalid_argument("manifest: non-finite snr_db");
    m.records.push_back(std::move(rec));
  }
  validate_manifest(m);
  return m;
}

nlohmann::json manifest_to_json(const DatasetManifest& m) {
  nlohmann::json j;
  j["split"] = to_string(m.split);
  j["sample_rate"] = m.sample_rate;
  if (!m.description.empty()) j["description"] = m.description;
  auto& records = j["records"] = nlohmann::json::array();
  for (const MixtureRecord& r : m.records) {
    nlohmann::json rec;
    rec["id"] = r.id.empty() ? std::filesystem::path(r.clean_path).stem().string() : r.id;
    rec["clean_path"] = r.clean_path;
    if (!r.noise_path.empty()) {
      rec["noise_path"] = r.noise_path;
      rec["snr_db"] = r.snr_db;
      rec["noise_offset"] = r.noise_offset;
      rec["seed"] = r.seed;
    }
    if (!r.label.empty()) rec["label"] = r.label;
    records.push_back(std::move(rec));
  }
  if (!m.config.is_null()) j["config"] = m.config;
  return j;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return manifest_from_json(j, path.parent_path());
}

void save_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
  write_file_atomic(path, manifest_to_json(m).dump(2) + "\n");
}

void validate_manifest(const DatasetManifest& m) {
  std::set<std::tuple<std::string, std::string, long long>> seen;
  for (const MixtureRecord& r : m.records) {
    if (r.noise_path.empty()) continue;
    if (r.noise_offset < 0) continue;
    if (!seen.emplace(r.clean_path, r.noise_path, r.noise_offset).second)
      throw std::invalid_argument("manifest: duplicate record (" + r.clean_path +
                                  ", " + r.noise_path + ", " +
                                  std::to_string(r.noise_offset) + ")");
  }
}

long long resolve_offset(const MixtureRecord& r, std::size_t clean_len,
                         std::size_t noise_len) {
  if (noise_len < clean_len)
    throw std::invalid_argument("noise " + r.noise_path + " (" +
                                std::to_string(noise_len) +
                                " samples) is shorter than " + r.clean_path);
  if (r.noise_offset >= 0) {
    if (static_cast<std::size_t>(r.noise_offset) + clean_len > noise_len)
      throw std::invalid_argument("noise offset " +
                                  std::to_string(r.noise_offset) +
                                  " runs past the end of " + r.noise_path);
    return r.noise_offset;
  }
  Rng rng(r.seed);
  return static_cast<long long>(rng.below(noise_len - clean_len + 1));
}

RealizedMixture realize(const DatasetManifest& m, const MixtureRecord& r) {
  RealizedMixture out;
  out.clean = read_wav(m.resolve(r.clean_path));
  validate(out.clean);
  if (r.noise_path.empty()) {
    out.mixture = out.clean;
    out.noise = Waveform{std::vector<double>(out.clean.size(), 0.0),
                         out.clean.sample_rate};
    return out;
  }
  const Waveform noise = read_wav(m.resolve(r.noise_path));
  out.noise_offset = resolve_offset(r, out.clean.size(), noise.size());
  Waveform segment;
  segment.sample_rate = noise.sample_rate;
  const auto first = noise.samples.begin() + out.noise_offset;
  segment.samples.assign(first, first + static_cast<long long>(out.clean.size()));
  Mixture mix = mix_at_snr(out.clean, segment, r.snr_db);
  out.noise = std::move(mix.scaled_noise);
  out.mixture = std::move(mix.mixture);
  return out;
}

void check_noise_disjoint(const DatasetManifest& train,
                          const DatasetManifest& test) {
  struct Interval {
    long long begin, end;
    std::string clean;
  };
  auto collect = [](const DatasetManifest& m) {
    std::map<std::string, std::vector<Interval>> by_noise;
    for (const MixtureRecord& r : m.records) {
      if (r.noise_path.empty()) continue;
      const auto noise = std::filesystem::weakly_canonical(m.resolve(r.noise_path));
      const std::size_t clean_len = wav_length(m.resolve(r.clean_path));
      const long long begin =
          resolve_offset(r, clean_len, wav_length(m.resolve(r.noise_path)));
      by_noise[noise.string()].push_back(
          {begin, begin + static_cast<long long>(clean_len), r.clean_path});
    }
    return by_noise;
  };
  const auto a = collect(train);
  const auto b = collect(test);
  for (const auto& [noise, intervals] : a) {
    const auto it = b.find(noise);
    if (it == b.end()) continue;
    for (const Interval& x : intervals)
      for (const Interval& y : it->second)
        if (x.begin < y.end && y.begin < x.end)
          throw std::invalid_argument(
              "train/test noise segments overlap in " + noise + ": [" +
              std::to_string(x.begin) + ", " + std::to_string(x.end) +
              ") for " + x.clean + " vs [" + std::to_string(y.begin) + ", " +
              std::to_string(y.end) + ") for " + y.clean);
  }
}

}  // namespace mnn
