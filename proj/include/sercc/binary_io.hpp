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

#ifndef SERCC_BINARY_IO_HPP_
#define SERCC_BINARY_IO_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "sercc/error.hpp"

namespace sercc::le {

// All on-disk integers and floats are little-endian regardless of host.

template <typename UInt>
void write_uint(std::ostream& os, UInt v) {
  char buf[sizeof(UInt)];
  for (std::size_t i = 0; i < sizeof(UInt); ++i)
    buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(buf, sizeof(UInt));
}

template <typename UInt>
UInt read_uint(std::istream& is) {
  unsigned char buf[sizeof(UInt)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(UInt)))
    throw FormatError("unexpected end of file");
  UInt v = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= static_cast<UInt>(buf[i]) << (8 * i);
  return v;
}

inline void write_f32(std::ostream& os, float f) {
  write_uint<std::uint32_t>(os, std::bit_cast<std::uint32_t>(f));
}

inline float read_f32(std::istream& is) {
  return std::bit_cast<float>(read_uint<std::uint32_t>(is));
}

inline void write_i16(std::ostream& os, std::int16_t v) {
  write_uint<std::uint16_t>(os, static_cast<std::uint16_t>(v));
}

inline std::int16_t read_i16(std::istream& is) {
  return static_cast<std::int16_t>(read_uint<std::uint16_t>(is));
}

inline void write_tag(std::ostream& os, const char* tag, std::size_t n) { os.write(tag, n); }

inline std::string read_tag(std::istream& is, std::size_t n) {
  std::string s(n, '\0');
  if (!is.read(s.data(), static_cast<std::streamsize>(n)))
    throw FormatError("unexpected end of file");
  return s;
}

}  // namespace sercc::le

#endif  // SERCC_BINARY_IO_HPP_
