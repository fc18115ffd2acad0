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

// Parameter checkpoint file:
//
//   "SERCCKPT"            8-byte magic
//   uint32 version        currently 1
//   uint32 count
//   count x { uint32 name_len, name bytes, uint32 rows, uint32 cols,
//             uint64 offset }   offset in floats from the start of data
//   float32 data          each parameter row-major
//
// All fields little-endian. Values are stored in single precision.

#ifndef SERCC_CHECKPOINT_HPP_
#define SERCC_CHECKPOINT_HPP_

#include <cstdint>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sercc/autodiff.hpp"
#include "sercc/binary_io.hpp"
#include "sercc/error.hpp"

namespace sercc {

inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void write_parameters(std::ostream& os, std::span<const ad::Parameter* const> params) {
  le::write_tag(os, "SERCCKPT", 8);
  le::write_uint<std::uint32_t>(os, kCheckpointVersion);
  le::write_uint<std::uint32_t>(os, static_cast<std::uint32_t>(params.size()));
  std::uint64_t offset = 0;
  for (const auto* p : params) {
    le::write_uint<std::uint32_t>(os, static_cast<std::uint32_t>(p->name.size()));
    os.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    le::write_uint<std::uint32_t>(os, static_cast<std::uint32_t>(p->value.rows()));
    le::write_uint<std::uint32_t>(os, static_cast<std::uint32_t>(p->value.cols()));
    le::write_uint<std::uint64_t>(os, offset);
    offset += static_cast<std::uint64_t>(p->value.size());
  }
  for (const auto* p : params)
    for (Eigen::Index r = 0; r < p->value.rows(); ++r)
      for (Eigen::Index c = 0; c < p->value.cols(); ++c) le::write_f32(os, static_cast<float>(p->value(r, c)));
}

/// Fills every parameter in `params` from the stream, matching by name.
/// Shapes must agree; parameters missing from the file are an error.
inline void read_parameters(std::istream& is, std::span<ad::Parameter* const> params) {
  if (le::read_tag(is, 8) != "SERCCKPT") throw FormatError("checkpoint: bad magic");
  const auto version = le::read_uint<std::uint32_t>(is);
  if (version != kCheckpointVersion)
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  const auto count = le::read_uint<std::uint32_t>(is);
  struct Entry {
    std::uint32_t rows, cols;
    std::uint64_t offset;
  };
  std::map<std::string, Entry> dir;
  std::uint64_t total = 0;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = le::read_uint<std::uint32_t>(is);
    if (len > 4096) throw FormatError("checkpoint: implausible name length");
    std::string name = le::read_tag(is, len);
    Entry e{le::read_uint<std::uint32_t>(is), le::read_uint<std::uint32_t>(is), le::read_uint<std::uint64_t>(is)};
    total = std::max<std::uint64_t>(total, e.offset + std::uint64_t{e.rows} * e.cols);
    dir[name] = e;
  }
  std::vector<float> data(total);
  for (auto& f : data) f = le::read_f32(is);
  for (auto* p : params) {
    auto it = dir.find(p->name);
    if (it == dir.end()) throw FormatError("checkpoint: missing parameter '" + p->name + "'");
    const auto& e = it->second;
    if (e.rows != p->value.rows() || e.cols != p->value.cols())
      throw FormatError("checkpoint: parameter '" + p->name + "' is " + std::to_string(e.rows) + "x" +
                        std::to_string(e.cols) + ", model expects " + ad::shape_str(p->value));
    std::size_t k = e.offset;
    for (Eigen::Index r = 0; r < p->value.rows(); ++r)
      for (Eigen::Index c = 0; c < p->value.cols(); ++c) p->value(r, c) = data[k++];
    p->zero_grad();
  }
}

inline void save_parameters(const std::string& path, std::span<const ad::Parameter* const> params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path);
  write_parameters(os, params);
  if (!os) throw IoError("write failed: " + path);
}

inline void load_parameters(const std::string& path, std::span<ad::Parameter* const> params) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  try {
    read_parameters(is, params);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace sercc

#endif  // SERCC_CHECKPOINT_HPP_
