// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mnn/wav.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <system_error>

namespace mnn {
namespace {

static_assert(std::endian::native == std::endian::little,
              "WAV and model I/O assume a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

struct WavInfo {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
  std::size_t data_offset = 0;
  std::size_t data_size = 0;
};

template <typename T>
T load(const std::vector<std::uint8_t>& b, std::size_t at) {
  if (at + sizeof(T) > b.size()) throw FormatError("wav: truncated header");
  T v;
  std::memcpy(&v, b.data() + at, sizeof(T));
  return v;
}

template <typename T>
void store(std::vector<std::uint8_t>& b, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  b.insert(b.end(), p, p + sizeof(T));
}

void store_tag(std::vector<std::uint8_t>& b, const char* tag) {
  b.insert(b.end(), tag, tag + 4);
}

bool tag_is(const std::vector<std::uint8_t>& b, std::size_t at,
            const char* tag) {
  return at + 4 <= b.size() && std::memcmp(b.data() + at, tag, 4) == 0;
}

WavInfo parse_header(const std::vector<std::uint8_t>& b) {
  if (!tag_is(b, 0, "RIFF") || !tag_is(b, 8, "WAVE"))
    throw FormatError("wav: not a RIFF/WAVE file");
  WavInfo info;
  bool have_fmt = false;
  std::size_t at = 12;
  while (at + 8 <= b.size()) {
    const auto size = load<std::uint32_t>(b, at + 4);
    const std::size_t body = at + 8;
    if (tag_is(b, at, "fmt ")) {
      if (size < 16) throw FormatError("wav: fmt chunk too small");
      info.format = load<std::uint16_t>(b, body);
      info.channels = load<std::uint16_t>(b, body + 2);
      info.sample_rate = load<std::uint32_t>(b, body + 4);
      info.bits = load<std::uint16_t>(b, body + 14);
      if (info.format == kFormatExtensible) {
        if (size < 40) throw FormatError("wav: extensible fmt chunk too small");
        // First two bytes of the SubFormat GUID carry the real format tag.
        info.format = load<std::uint16_t>(b, body + 24);
      }
      have_fmt = true;
    } else if (tag_is(b, at, "data")) {
      if (!have_fmt) throw FormatError("wav: data chunk before fmt chunk");
      info.data_offset = body;
      info.data_size = std::min<std::size_t>(size, b.size() - body);
      break;
    }
    at = body + size + (size & 1U);
  }
  if (!have_fmt) throw FormatError("wav: missing fmt chunk");
  if (info.data_offset == 0) throw FormatError("wav: missing data chunk");
  if (info.channels != 1)
    throw FormatError("wav: expected mono input, found " +
                      std::to_string(info.channels) + " channels");
  if (info.sample_rate == 0) throw FormatError("wav: zero sample rate");
  const bool pcm16 = info.format == kFormatPcm && info.bits == 16;
  const bool f32 = info.format == kFormatFloat && info.bits == 32;
  if (!pcm16 && !f32)
    throw FormatError("wav: unsupported encoding (format " +
                      std::to_string(info.format) + ", " +
                      std::to_string(info.bits) +
                      " bits); need PCM16 or float32");
  return info;
}

std::vector<std::uint8_t> read_prefix(const std::filesystem::path& path,
                                      std::size_t limit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes(limit);
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(limit));
  bytes.resize(static_cast<std::size_t>(in.gcount()));
  return bytes;
}

}  // namespace

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Waveform parse_wav(const std::vector<std::uint8_t>& b) {
  const WavInfo info = parse_header(b);
  Waveform w;
  w.sample_rate = static_cast<int>(info.sample_rate);
  const std::size_t width = info.bits / 8;
  const std::size_t n = info.data_size / width;
  w.samples.resize(n);
  const std::uint8_t* p = b.data() + info.data_offset;
  if (info.format == kFormatPcm) {
    for (std::size_t i = 0; i < n; ++i) {
      std::int16_t v;
      std::memcpy(&v, p + 2 * i, 2);
      w.samples[i] = static_cast<double>(v) / 32768.0;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      float v;
      std::memcpy(&v, p + 4 * i, 4);
      if (!std::isfinite(v)) throw FormatError("wav: non-finite float sample");
      w.samples[i] = static_cast<double>(v);
    }
  }
  return w;
}

Waveform read_wav(const std::filesystem::path& path) {
  try {
    return parse_wav(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::size_t wav_length(const std::filesystem::path& path) {
  // Headers in practice fit well within 4 KiB; the data chunk size is read
  // from its header, not from the bytes present.
  auto prefix = read_prefix(path, 4096);
  const std::size_t total = std::filesystem::file_size(path);
  try {
    WavInfo info = parse_header(prefix);
    const auto declared = load<std::uint32_t>(prefix, info.data_offset - 4);
    const std::size_t avail = total - info.data_offset;
    return std::min<std::size_t>(declared, avail) / (info.bits / 8);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_wav(const Waveform& w, WavEncoding enc) {
  if (w.sample_rate <= 0) throw std::invalid_argument("wav: bad sample rate");
  const bool pcm = enc == WavEncoding::kPcm16;
  const std::uint16_t bits = pcm ? 16 : 32;
  const std::uint32_t data_size =
      static_cast<std::uint32_t>(w.samples.size() * (bits / 8));
  std::vector<std::uint8_t> b;
  b.reserve(44 + data_size);
  store_tag(b, "RIFF");
  store<std::uint32_t>(b, 36 + data_size);
  store_tag(b, "WAVE");
  store_tag(b, "fmt ");
  store<std::uint32_t>(b, 16);
  store<std::uint16_t>(b, pcm ? kFormatPcm : kFormatFloat);
  store<std::uint16_t>(b, 1);
  store<std::uint32_t>(b, static_cast<std::uint32_t>(w.sample_rate));
  store<std::uint32_t>(b, static_cast<std::uint32_t>(w.sample_rate) * bits / 8);
  store<std::uint16_t>(b, bits / 8);
  store<std::uint16_t>(b, bits);
  store_tag(b, "data");
  store<std::uint32_t>(b, data_size);
  for (double v : w.samples) {
    if (pcm) {
      const double c = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
      store<std::int16_t>(b, static_cast<std::int16_t>(c));
    } else {
      store<float>(b, static_cast<float>(v));
    }
  }
  return b;
}

void write_wav(const std::filesystem::path& path, const Waveform& w,
               WavEncoding enc) {
  write_file_atomic(path, encode_wav(w, enc));
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::vector<std::uint8_t>& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw IoError("short write to " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot rename " + tmp.string() + " -> " + path.string() +
                  ": " + ec.message());
  }
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& text) {
  write_file_atomic(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

}  // namespace mnn
