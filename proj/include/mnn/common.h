// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MNN_COMMON_H_
#define MNN_COMMON_H_

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace mnn {

using RealMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexMatrix = Eigen::Matrix<std::complex<double>, Eigen::Dynamic,
                                    Eigen::Dynamic, Eigen::RowMajor>;
using RealVector = Eigen::VectorXd;

// Error taxonomy. The CLI maps these onto exit codes; precondition
// violations are reported as std::invalid_argument.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents (bad WAV chunk, bad model magic, CRC mismatch).
class FormatError : public IoError {
 public:
  using IoError::IoError;
};

// Non-finite values during training or scoring.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Seeded generator with platform-independent distributions. std's
// distributions are implementation-defined, so the mapping from engine
// output to uniforms lives here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// splitmix64 finalizer over (base, salt); used to derive independent
// sub-seeds from one plan seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt);

// Default worker count for library-level fan-out (set by `--threads`).
void set_thread_count(int threads);
int thread_count();

}  // namespace mnn

#endif  // MNN_COMMON_H_
