// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MNN_TESTS_FIXTURES_H_
#define MNN_TESTS_FIXTURES_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mnn/corpus.h"
#include "mnn/network.h"
#include "mnn/signal.h"

namespace mnn::testing {

// Gaussian samples with the given standard deviation.
Waveform random_waveform(std::size_t n, std::uint64_t seed, int sample_rate = 16000,
                         double sigma = 0.1);

Waveform sine(double freq, double seconds, int sample_rate = 16000, double amp = 0.5);

// One synthetic utterance of speaker `index` from `group`.
Waveform speech_fixture(std::uint64_t seed, int group = 0, int index = 0);

Waveform noise_fixture(NoiseKind kind, double seconds, std::uint64_t seed);

// Network with random dims/activations drawn from the seed.
Network random_network(std::uint64_t seed, int max_dim = 10, int max_depth = 3);

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "mnn");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& p) const { return path_ / p; }

 private:
  std::filesystem::path path_;
};

// Small corpus whose plans train in seconds: tiny hidden layers and a few
// iterations.
CorpusOptions tiny_corpus_options(std::uint64_t seed = 3);

std::string read_text(const std::filesystem::path& p);

}  // namespace mnn::testing

#endif  // MNN_TESTS_FIXTURES_H_
