// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MNN_CLI_H_
#define MNN_CLI_H_

#include <iosfwd>

namespace mnn {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitNumeric = 4;

// Entry point of the `mnn` binary. Results go to `out`; log lines and
// JSON error objects go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mnn

#endif  // MNN_CLI_H_
