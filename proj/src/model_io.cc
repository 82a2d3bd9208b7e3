// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mnn/model_io.h"

#include <zlib.h>

#include <cstring>
#include <string>

#include "mnn/wav.h"

namespace mnn {
namespace {

std::uint32_t crc32_of(const std::uint8_t* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; model files stay far below 4 GiB.
  crc = crc32(crc, data, static_cast<uInt>(n));
  return static_cast<std::uint32_t>(crc);
}

template <typename T>
void put(std::vector<std::uint8_t>& b, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  b.insert(b.end(), p, p + sizeof(T));
}

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& b, std::size_t end)
      : b_(b), end_(end) {}

  template <typename T>
  T get() {
    if (at_ + sizeof(T) > end_) throw FormatError("model: truncated file");
    T v;
    std::memcpy(&v, b_.data() + at_, sizeof(T));
    at_ += sizeof(T);
    return v;
  }

  std::size_t position() const { return at_; }
  void skip(std::size_t n) { at_ += n; }

 private:
  const std::vector<std::uint8_t>& b_;
  std::size_t end_;
  std::size_t at_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize(const Network& net) {
  std::vector<std::uint8_t> b;
  b.insert(b.end(), kModelMagic, kModelMagic + 4);
  put<std::uint32_t>(b, static_cast<std::uint32_t>(net.depth()));
  for (const Layer& layer : net.layers()) {
    put<std::uint32_t>(b, static_cast<std::uint32_t>(layer.weight.rows()));
    put<std::uint32_t>(b, static_cast<std::uint32_t>(layer.weight.cols()));
    put<std::uint8_t>(b, static_cast<std::uint8_t>(layer.activation));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
        put<float>(b, static_cast<float>(layer.weight(r, c)));
  }
  put<std::uint32_t>(b, crc32_of(b.data(), b.size()));
  return b;
}

Network deserialize(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kModelMagic, 4) != 0)
    throw FormatError("model: bad magic (expected MNN1)");
  const std::size_t body = bytes.size() - 4;
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + body, 4);
  if (stored != crc32_of(bytes.data(), body))
    throw FormatError("model: CRC mismatch");

  Reader in(bytes, body);
  in.skip(4);
  const auto count = in.get<std::uint32_t>();
  if (count == 0) throw FormatError("model: zero layers");
  std::vector<Layer> layers;
  for (std::uint32_t l = 0; l < count; ++l) {
    const auto rows = in.get<std::uint32_t>();
    const auto cols = in.get<std::uint32_t>();
    const auto tag = in.get<std::uint8_t>();
    if (tag > static_cast<std::uint8_t>(Activation::kIdentity))
      throw FormatError("model: unknown activation tag " + std::to_string(tag));
    if (rows == 0 || cols < 2) throw FormatError("model: empty layer");
    if (static_cast<std::uint64_t>(rows) * cols * 4 > body - in.position())
      throw FormatError("model: truncated file");
    Layer layer;
    layer.activation = static_cast<Activation>(tag);
    layer.weight.resize(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r)
      for (std::uint32_t c = 0; c < cols; ++c)
        layer.weight(r, c) = static_cast<double>(in.get<float>());
    layers.push_back(std::move(layer));
  }
  if (in.position() != body) throw FormatError("model: trailing bytes");
  try {
    return Network(std::move(layers));
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("model: ") + e.what());
  }
}

void save_network(const std::filesystem::path& path, const Network& net) {
  write_file_atomic(path, serialize(net));
}

Network load_network(const std::filesystem::path& path) {
  try {
    return deserialize(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace mnn
