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

// Flat `key = value` text files used for run configs, synthetic corpus specs
// and model metadata. Keys may repeat; order is preserved.

#ifndef SERCC_KV_FILE_HPP_
#define SERCC_KV_FILE_HPP_

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sercc/error.hpp"

namespace sercc {

inline std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// Comma-separated list with empty items removed and whitespace trimmed.
inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  for (auto& item : split(s, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

inline double parse_double(std::string_view text, std::string_view what) {
  std::string s = trim(text);
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw FormatError(std::string(what) + ": not a number: '" + s + "'");
  }
}

inline long long parse_int(std::string_view text, std::string_view what) {
  std::string s = trim(text);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw FormatError(std::string(what) + ": not an integer: '" + s + "'");
  return v;
}

class KeyValueFile {
 public:
  struct Entry {
    std::string key;
    std::string value;
    int line = 0;
  };

  KeyValueFile() = default;

  static KeyValueFile parse(std::istream& in, const std::string& source = "<input>") {
    KeyValueFile kv;
    kv.source_ = source;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      auto t = trim(line);
      if (t.empty()) continue;
      auto eq = t.find('=');
      if (eq == std::string::npos)
        throw FormatError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
      auto key = trim(std::string_view(t).substr(0, eq));
      if (key.empty())
        throw FormatError(source + ":" + std::to_string(lineno) + ": empty key");
      kv.entries_.push_back({key, trim(std::string_view(t).substr(eq + 1)), lineno});
    }
    return kv;
  }

  static KeyValueFile load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return parse(in, path);
  }

  std::optional<std::string> get(std::string_view key) const {
    std::optional<std::string> found;
    for (const auto& e : entries_)
      if (e.key == key) found = e.value;  // last one wins
    return found;
  }

  std::string get_or(std::string_view key, std::string fallback) const {
    auto v = get(key);
    return v ? *v : std::move(fallback);
  }

  std::vector<Entry> get_all(std::string_view key) const {
    std::vector<Entry> out;
    for (const auto& e : entries_)
      if (e.key == key) out.push_back(e);
    return out;
  }

  const std::vector<Entry>& entries() const { return entries_; }
  const std::string& source() const { return source_; }

  void set(std::string key, std::string value) {
    for (auto& e : entries_)
      if (e.key == key) {
        e.value = std::move(value);
        return;
      }
    entries_.push_back({std::move(key), std::move(value), 0});
  }

  void add(std::string key, std::string value) {
    entries_.push_back({std::move(key), std::move(value), 0});
  }

  std::string to_string() const {
    std::ostringstream os;
    for (const auto& e : entries_) os << e.key << " = " << e.value << "\n";
    return os.str();
  }

 private:
  std::vector<Entry> entries_;
  std::string source_;
};

}  // namespace sercc

#endif  // SERCC_KV_FILE_HPP_
