// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MNN_WAV_H_
#define MNN_WAV_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mnn/signal.h"

namespace mnn {

enum class WavEncoding { kPcm16, kFloat32 };

// Reads a mono RIFF/WAVE file (PCM 16-bit or IEEE float 32-bit, plain or
// WAVE_FORMAT_EXTENSIBLE). PCM samples are scaled by 1/32768.
// Throws IoError when the file cannot be opened and FormatError on anything
// else, including multichannel input.
Waveform read_wav(const std::filesystem::path& path);
Waveform parse_wav(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> encode_wav(const Waveform& w,
                                     WavEncoding enc = WavEncoding::kFloat32);
void write_wav(const std::filesystem::path& path, const Waveform& w,
               WavEncoding enc = WavEncoding::kFloat32);

// Number of samples from the header alone.
std::size_t wav_length(const std::filesystem::path& path);

// Writes to a sibling temp file then renames, so readers never see a
// partial file.
void write_file_atomic(const std::filesystem::path& path,
                       const std::vector<std::uint8_t>& bytes);
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& text);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

}  // namespace mnn

#endif  // MNN_WAV_H_
