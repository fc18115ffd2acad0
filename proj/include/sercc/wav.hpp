// Copyright 2026 The sercc Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// 16-bit mono PCM RIFF/WAVE reading and writing.

#ifndef SERCC_WAV_HPP_
#define SERCC_WAV_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "sercc/binary_io.hpp"
#include "sercc/error.hpp"

namespace sercc {

struct Audio {
  std::vector<float> samples;  // in [-1, 1)
  int sample_rate = 16000;
};

inline std::int16_t to_pcm16(float x) {
  double v = std::round(static_cast<double>(x) * 32768.0);
  return static_cast<std::int16_t>(std::clamp(v, -32768.0, 32767.0));
}

inline void write_wav(std::ostream& os, std::span<const float> samples, int sample_rate) {
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  le::write_tag(os, "RIFF", 4);
  le::write_uint<std::uint32_t>(os, 36 + data_bytes);
  le::write_tag(os, "WAVE", 4);
  le::write_tag(os, "fmt ", 4);
  le::write_uint<std::uint32_t>(os, 16);
  le::write_uint<std::uint16_t>(os, 1);  // PCM
  le::write_uint<std::uint16_t>(os, 1);  // mono
  le::write_uint<std::uint32_t>(os, static_cast<std::uint32_t>(sample_rate));
  le::write_uint<std::uint32_t>(os, static_cast<std::uint32_t>(sample_rate) * 2);
  le::write_uint<std::uint16_t>(os, 2);
  le::write_uint<std::uint16_t>(os, 16);
  le::write_tag(os, "data", 4);
  le::write_uint<std::uint32_t>(os, data_bytes);
  for (float x : samples) le::write_i16(os, to_pcm16(x));
}

inline void write_wav(const std::string& path, std::span<const float> samples, int sample_rate) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path);
  write_wav(os, samples, sample_rate);
  if (!os) throw IoError("write failed: " + path);
}

inline Audio read_wav(std::istream& is, const std::string& name = "<stream>") {
  try {
    if (le::read_tag(is, 4) != "RIFF") throw FormatError("missing RIFF tag");
    le::read_uint<std::uint32_t>(is);
    if (le::read_tag(is, 4) != "WAVE") throw FormatError("missing WAVE tag");
    Audio audio;
    bool have_fmt = false;
    while (true) {
      std::string id = le::read_tag(is, 4);
      auto size = le::read_uint<std::uint32_t>(is);
      if (id == "fmt ") {
        if (size < 16) throw FormatError("short fmt chunk");
        auto format = le::read_uint<std::uint16_t>(is);
        auto channels = le::read_uint<std::uint16_t>(is);
        audio.sample_rate = static_cast<int>(le::read_uint<std::uint32_t>(is));
        le::read_uint<std::uint32_t>(is);
        le::read_uint<std::uint16_t>(is);
        auto bits = le::read_uint<std::uint16_t>(is);
        if (format != 1 || channels != 1 || bits != 16)
          throw FormatError("only 16-bit mono PCM is supported");
        if (audio.sample_rate <= 0) throw FormatError("non-positive sample rate");
        is.ignore(size - 16);
        have_fmt = true;
      } else if (id == "data") {
        if (!have_fmt) throw FormatError("data chunk before fmt chunk");
        if (size % 2 != 0) throw FormatError("odd data chunk size");
        audio.samples.resize(size / 2);
        for (auto& s : audio.samples) s = static_cast<float>(le::read_i16(is)) / 32768.0f;
        return audio;
      } else {
        is.ignore(size + (size & 1));
      }
    }
  } catch (const FormatError& e) {
    throw FormatError(name + ": " + e.what());
  }
}

inline Audio read_wav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  return read_wav(is, path);
}

}  // namespace sercc

#endif  // SERCC_WAV_HPP_
