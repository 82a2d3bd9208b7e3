// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MNN_MODEL_IO_H_
#define MNN_MODEL_IO_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mnn/network.h"

namespace mnn {

// Model file layout, little-endian:
//   "MNN1" | u32 layer_count | per layer: u32 rows, u32 cols, u8 activation,
//   rows*cols float32 row-major (bias column last) | u32 CRC32
// The CRC covers every byte before it.
inline constexpr char kModelMagic[4] = {'M', 'N', 'N', '1'};
inline constexpr int kModelFormatVersion = 1;

std::vector<std::uint8_t> serialize(const Network& net);
Network deserialize(const std::vector<std::uint8_t>& bytes);

void save_network(const std::filesystem::path& path, const Network& net);
Network load_network(const std::filesystem::path& path);

}  // namespace mnn

#endif  // MNN_MODEL_IO_H_
