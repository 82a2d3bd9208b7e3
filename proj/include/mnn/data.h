// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MNN_DATA_H_
#define MNN_DATA_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mnn/signal.h"

namespace mnn {

struct Mixture {
  Waveform mixture;
  Waveform scaled_noise;
  double gain = 1.0;
};

// Scales the first s.size() samples of n by
// g = sqrt((sum s^2 / sum n^2) / 10^(target/10)) and adds them to s.
Mixture mix_at_snr(const Waveform& s, const Waveform& n, double target_db);

struct MixtureRecord {
  std::string clean_path;
  std::string noise_path;  // empty for clean-only records (DAE training)
  double snr_db = 0.0;
  // Start of the noise segment; negative means "draw from seed".
  long long noise_offset = -1;
  std::uint64_t seed = 0;
  std::string label;  // experiment axis value (noise type, group, SNR)
  std::string id;     // utterance identifier; defaults to the clean stem
};

enum class Split { kTrain, kValidation, kTest };

std::string to_string(Split s);
Split parse_split(const std::string& s);

struct DatasetManifest {
  std::vector<MixtureRecord> records;
  Split split = Split::kTrain;
  int sample_rate = 16000;
  std::string description;
  nlohmann::json config;  // optional training config block
  // Relative record paths resolve against this directory.
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& p) const;
};

DatasetManifest manifest_from_json(const nlohmann::json& j,
                                   const std::filesystem::path& base_dir);
nlohmann::json manifest_to_json(const DatasetManifest& m);

DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const DatasetManifest& m);

// Rejects duplicate (clean, noise, offset) triples.
void validate_manifest(const DatasetManifest& m);

struct RealizedMixture {
  Waveform clean;
  Waveform noise;    // scaled noise segment
  Waveform mixture;
  long long noise_offset = 0;
};

// Offset actually used for the record: the stored one, or a seeded uniform
// draw over all segments that fit.
long long resolve_offset(const MixtureRecord& r, std::size_t clean_len,
                         std::size_t noise_len);

// Loads the clean file and, for mixture records, the noise segment, then
// mixes at the record's SNR. Noise shorter than the clean signal is an error.
RealizedMixture realize(const DatasetManifest& m, const MixtureRecord& r);

// Throws std::invalid_argument if any noise segment used by `train` overlaps
// one used by `test` within the same noise file.
void check_noise_disjoint(const DatasetManifest& train,
                          const DatasetManifest& test);

}  // namespace mnn

#endif  // MNN_DATA_H_
