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

// Corpus manifests, label normalisation across corpora, speaker-disjoint
// splits, synthetic domain-shifted corpora and energy-based silence trimming.

#ifndef SERCC_CORPUS_HPP_
#define SERCC_CORPUS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sercc/error.hpp"
#include "sercc/kv_file.hpp"

namespace sercc {

// ---------------------------------------------------------------------------
// Emotion classes

enum class Emotion : std::uint8_t { happy, sad, anger, surprise, disgust, fear, neutral };

inline constexpr std::array<std::string_view, 7> kEmotionNames = {
    "happy", "sad", "anger", "surprise", "disgust", "fear", "neutral"};

/// Labels that may appear in a corpus's native annotation. Everything beyond
/// the seven emotions exists only as a source label.
inline constexpr std::array<std::string_view, 11> kSourceLabels = {
    "happy",   "sad",     "anger",       "surprise",   "disgust", "fear",
    "neutral", "frustration", "excitement", "other",   "calm"};

inline std::string_view to_string(Emotion e) { return kEmotionNames[static_cast<std::size_t>(e)]; }

inline std::optional<Emotion> emotion_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kEmotionNames.size(); ++i)
    if (kEmotionNames[i] == name) return static_cast<Emotion>(i);
  return std::nullopt;
}

inline bool is_source_label(std::string_view name) {
  return std::find(kSourceLabels.begin(), kSourceLabels.end(), name) != kSourceLabels.end();
}

/// Ordered set of target classes. The order defines the model's output index.
class ClassSet {
 public:
  ClassSet() = default;
  ClassSet(std::string name, std::vector<Emotion> classes, bool merge_excitement = false)
      : name_(std::move(name)), classes_(std::move(classes)), merge_excitement_(merge_excitement) {
    std::set<Emotion> seen(classes_.begin(), classes_.end());
    if (classes_.empty() || seen.size() != classes_.size())
      throw ArgumentError("class set must be non-empty without duplicates");
  }

  static ClassSet big_six() {
    using enum Emotion;
    return {"big6", {happy, sad, anger, surprise, disgust, fear}};
  }
  static ClassSet big_six_neutral() {
    using enum Emotion;
    return {"big6+neutral", {happy, sad, anger, surprise, disgust, fear, neutral}};
  }
  /// Four-class IEMOCAP view; excitement folds into happy.
  static ClassSet iem4() {
    using enum Emotion;
    return {"iem4", {happy, sad, anger, neutral}, true};
  }

  static ClassSet from_names(const std::vector<std::string>& names) {
    if (names.size() == 1) {
      if (names[0] == "big6") return big_six();
      if (names[0] == "big6+neutral") return big_six_neutral();
      if (names[0] == "iem4") return iem4();
    }
    std::vector<Emotion> cls;
    for (const auto& n : names) {
      auto e = emotion_from_name(n);
      if (!e) throw ConfigError("unknown emotion class '" + n + "'");
      cls.push_back(*e);
    }
    return {"custom", std::move(cls)};
  }

  std::optional<std::size_t> index_of(Emotion e) const {
    auto it = std::find(classes_.begin(), classes_.end(), e);
    if (it == classes_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - classes_.begin());
  }
  bool contains(Emotion e) const { return index_of(e).has_value(); }
  std::size_t size() const { return classes_.size(); }
  Emotion operator[](std::size_t i) const { return classes_[i]; }
  const std::vector<Emotion>& classes() const { return classes_; }
  const std::string& name() const { return name_; }
  bool merge_excitement() const { return merge_excitement_; }

  std::string names_csv() const {
    std::string s;
    for (std::size_t i = 0; i < classes_.size(); ++i) {
      if (i) s += ',';
      s += to_string(classes_[i]);
    }
    return s;
  }

  bool operator==(const ClassSet& o) const { return classes_ == o.classes_; }

 private:
  std::string name_;
  std::vector<Emotion> classes_;
  bool merge_excitement_ = false;
};

// ---------------------------------------------------------------------------
// Utterances and manifests

struct Label {
  std::string name;  // a source label, see kSourceLabels
  int value = 1;     // intensity; 0 means absent
  bool operator==(const Label&) const = default;
};

enum class Split : std::uint8_t { unassigned, train, test };
enum class LabelScheme : std::uint8_t { single_label, multi_label_binary, intensity_0_to_3 };

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::test: return "test";
    default: return "-";
  }
}

inline std::string_view to_string(LabelScheme s) {
  switch (s) {
    case LabelScheme::single_label: return "single_label";
    case LabelScheme::multi_label_binary: return "multi_label_binary";
    default: return "intensity_0_to_3";
  }
}

struct Utterance {
  std::string id;
  std::string corpus_id;
  std::string speaker_id;
  Split split = Split::unassigned;
  std::string audio_path;     // resolved path; empty when audio is inline
  std::vector<Label> labels;  // empty: neutral by absence
  int sample_rate = 16000;
  std::vector<float> samples;  // inline audio, optional

  bool neutral_by_absence() const {
    return std::none_of(labels.begin(), labels.end(), [](const Label& l) { return l.value > 0; });
  }

  /// Presence of each class of `classes`; labels must already be mapped.
  std::vector<bool> presence(const ClassSet& classes) const {
    std::vector<bool> out(classes.size(), false);
    for (const auto& l : labels) {
      auto e = emotion_from_name(l.name);
      if (!e || l.value <= 0) continue;
      if (auto i = classes.index_of(*e)) out[*i] = true;
    }
    return out;
  }
};

struct CorpusManifest {
  std::string corpus_id;
  std::vector<Utterance> utterances;
  LabelScheme label_scheme = LabelScheme::single_label;

  /// Speakers in order of first appearance, optionally restricted to one split.
  std::vector<std::string> speakers(std::optional<Split> split = std::nullopt) const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& u : utterances) {
      if (split && u.split != *split) continue;
      if (seen.insert(u.speaker_id).second) out.push_back(u.speaker_id);
    }
    return out;
  }
};

inline LabelScheme infer_label_scheme(const std::vector<Utterance>& utts) {
  bool multi = false;
  for (const auto& u : utts) {
    int present = 0;
    for (const auto& l : u.labels) {
      if (l.value > 1) return LabelScheme::intensity_0_to_3;
      present += l.value > 0;
    }
    multi = multi || present > 1;
  }
  return multi ? LabelScheme::multi_label_binary : LabelScheme::single_label;
}

/// Throws ValidationError on duplicate ids or a speaker in both splits.
inline void validate_manifest(const CorpusManifest& m) {
  std::set<std::string> ids;
  std::set<std::string> train, test;
  for (const auto& u : m.utterances) {
    if (!ids.insert(u.id).second) throw ValidationError("duplicate utterance id '" + u.id + "'");
    if (u.corpus_id != m.corpus_id)
      throw ValidationError("utterance '" + u.id + "' belongs to corpus '" + u.corpus_id +
                            "', manifest is '" + m.corpus_id + "'");
    if (u.sample_rate <= 0) throw ValidationError("utterance '" + u.id + "': sample rate <= 0");
    if (u.split == Split::train) train.insert(u.speaker_id);
    if (u.split == Split::test) test.insert(u.speaker_id);
  }
  for (const auto& s : train)
    if (test.count(s))
      throw ValidationError("speaker '" + s + "' appears in both train and test of " + m.corpus_id);
}

/// Parses the tab-separated manifest format:
///   id  corpus  speaker  split  audio_path  label:intensity[,label:intensity...]
/// `#` starts a comment. Relative audio paths resolve against `base_dir`.
inline CorpusManifest parse_manifest(std::istream& in, const std::string& source = "<manifest>",
                                     const std::filesystem::path& base_dir = {}) {
  CorpusManifest m;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw FormatError(source + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || trim(line).front() == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() != 6) fail("expected 6 tab-separated fields, got " + std::to_string(fields.size()));
    Utterance u;
    u.id = trim(fields[0]);
    u.corpus_id = trim(fields[1]);
    u.speaker_id = trim(fields[2]);
    if (u.id.empty() || u.corpus_id.empty() || u.speaker_id.empty()) fail("empty id, corpus or speaker");
    auto split_name = trim(fields[3]);
    if (split_name == "train") u.split = Split::train;
    else if (split_name == "test") u.split = Split::test;
    else if (split_name == "-" || split_name.empty()) u.split = Split::unassigned;
    else fail("unknown split '" + split_name + "'");
    std::filesystem::path audio = trim(fields[4]);
    if (!audio.empty() && audio.is_relative() && !base_dir.empty()) audio = base_dir / audio;
    u.audio_path = audio.string();
    auto label_field = trim(fields[5]);
    if (label_field != "-" && !label_field.empty()) {
      for (const auto& item : split_list(label_field)) {
        Label l;
        auto colon = item.find(':');
        l.name = trim(item.substr(0, colon));
        if (l.name.empty()) fail("empty label name");
        if (colon != std::string::npos) {
          try {
            l.value = static_cast<int>(parse_int(item.substr(colon + 1), "intensity"));
          } catch (const FormatError& e) {
            fail(e.what());
          }
        }
        u.labels.push_back(std::move(l));
      }
    }
    if (m.utterances.empty()) m.corpus_id = u.corpus_id;
    m.utterances.push_back(std::move(u));
  }
  m.label_scheme = infer_label_scheme(m.utterances);
  return m;
}

inline CorpusManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path);
  auto m = parse_manifest(in, path, std::filesystem::path(path).parent_path());
  validate_manifest(m);
  return m;
}

/// Writes a manifest. Audio paths are written relative to `base_dir` when given.
inline void write_manifest(std::ostream& os, const CorpusManifest& m,
                           const std::filesystem::path& base_dir = {}) {
  os << "# id\tcorpus\tspeaker\tsplit\taudio_path\tlabels\n";
  for (const auto& u : m.utterances) {
    std::string audio = u.audio_path;
    if (!base_dir.empty() && !audio.empty())
      audio = std::filesystem::path(audio).lexically_relative(base_dir).string();
    os << u.id << '\t' << u.corpus_id << '\t' << u.speaker_id << '\t' << to_string(u.split) << '\t'
       << (audio.empty() ? "-" : audio) << '\t';
    if (u.labels.empty()) os << '-';
    for (std::size_t i = 0; i < u.labels.size(); ++i)
      os << (i ? "," : "") << u.labels[i].name << ':' << u.labels[i].value;
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// Label normalisation

/// Restricts labels to `target`. Excitement becomes happy when the target
/// merges it (IEM4); other labels outside the target set are dropped.
inline Utterance map_labels(Utterance u, const ClassSet& target) {
  std::vector<Label> out;
  for (const auto& l : u.labels) {
    if (!is_source_label(l.name))
      throw ValidationError("utterance '" + u.id + "': unknown source label '" + l.name + "'");
    std::string name = l.name;
    if (name == "excitement" && target.merge_excitement()) name = "happy";
    auto e = emotion_from_name(name);
    if (!e || !target.contains(*e)) continue;
    auto it = std::find_if(out.begin(), out.end(), [&](const Label& x) { return x.name == name; });
    if (it == out.end()) out.push_back({name, l.value});
    else it->value = std::max(it->value, l.value);
  }
  u.labels = std::move(out);
  return u;
}

/// Intensity labels (0..3) become presence flags.
inline Utterance binarize_labels(Utterance u) {
  for (auto& l : u.labels) {
    if (l.value < 0 || l.value > 3)
      throw ValidationError("utterance '" + u.id + "': intensity " + std::to_string(l.value) +
                            " for '" + l.name + "' outside [0, 3]");
    l.value = l.value > 0 ? 1 : 0;
  }
  return u;
}

// ---------------------------------------------------------------------------
// Splits

struct SplitRule {
  enum class Kind { all_train, all_test, first_n, fraction, test_list, train_list };
  Kind kind = Kind::fraction;
  std::size_t count = 0;
  double fraction = 0.8;
  std::vector<std::string> speakers;

  /// "all-train", "all-test", "first:N", "fraction:F", "test:a,b", "train:a,b".
  static SplitRule parse(std::string_view text) {
    SplitRule r;
    std::string t = trim(text);
    auto colon = t.find(':');
    std::string head = t.substr(0, colon);
    std::string arg = colon == std::string::npos ? "" : t.substr(colon + 1);
    if (head == "all-train") r.kind = Kind::all_train;
    else if (head == "all-test") r.kind = Kind::all_test;
    else if (head == "first") {
      r.kind = Kind::first_n;
      auto n = parse_int(arg, "split rule");
      if (n < 0) throw FormatError("split rule: negative speaker count");
      r.count = static_cast<std::size_t>(n);
    } else if (head == "fraction") {
      r.kind = Kind::fraction;
      r.fraction = parse_double(arg, "split rule");
      if (r.fraction < 0 || r.fraction > 1) throw FormatError("split rule: fraction outside [0,1]");
    } else if (head == "test" || head == "train") {
      r.kind = head == "test" ? Kind::test_list : Kind::train_list;
      r.speakers = split_list(arg);
    } else {
      throw FormatError("unknown split rule '" + t + "'");
    }
    return r;
  }
};

/// Assigns every utterance to train or test by speaker. Speakers are ordered
/// by first appearance in the manifest.
inline CorpusManifest split_corpus(CorpusManifest m, const SplitRule& rule) {
  const auto speakers = m.speakers();
  std::set<std::string> train;
  switch (rule.kind) {
    case SplitRule::Kind::all_train:
      train.insert(speakers.begin(), speakers.end());
      break;
    case SplitRule::Kind::all_test:
      break;
    case SplitRule::Kind::first_n:
      if (rule.count > speakers.size())
        throw ValidationError("split rule asks for " + std::to_string(rule.count) +
                              " training speakers, corpus has " + std::to_string(speakers.size()));
      train.insert(speakers.begin(), speakers.begin() + static_cast<std::ptrdiff_t>(rule.count));
      break;
    case SplitRule::Kind::fraction: {
      auto n = static_cast<std::size_t>(std::llround(rule.fraction * static_cast<double>(speakers.size())));
      train.insert(speakers.begin(), speakers.begin() + static_cast<std::ptrdiff_t>(n));
      break;
    }
    case SplitRule::Kind::test_list:
    case SplitRule::Kind::train_list: {
      std::set<std::string> known(speakers.begin(), speakers.end());
      for (const auto& s : rule.speakers)
        if (!known.count(s)) throw ValidationError("split rule references unknown speaker '" + s + "'");
      std::set<std::string> listed(rule.speakers.begin(), rule.speakers.end());
      for (const auto& s : speakers)
        if (listed.count(s) == (rule.kind == SplitRule::Kind::train_list)) train.insert(s);
      break;
    }
  }
  for (auto& u : m.utterances) u.split = train.count(u.speaker_id) ? Split::train : Split::test;
  return m;
}

// ---------------------------------------------------------------------------
// Silence trimming

/// Removes leading and trailing frames whose mean-square energy is below
/// `threshold_db` relative to the loudest frame. Frames do not overlap; the
/// last frame may be partial.
inline std::vector<float> trim_silence(std::span<const float> audio, int sample_rate,
                                       double threshold_db = -35.0, double frame_seconds = 0.025) {
  if (audio.empty()) throw EmptyBufferError("trim_silence: empty buffer");
  const auto frame = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(frame_seconds * sample_rate)));
  const std::size_t n_frames = (audio.size() + frame - 1) / frame;
  std::vector<double> energy(n_frames, 0.0);
  for (std::size_t f = 0; f < n_frames; ++f) {
    std::size_t b = f * frame, e = std::min(audio.size(), b + frame);
    double acc = 0;
    for (std::size_t i = b; i < e; ++i) acc += static_cast<double>(audio[i]) * audio[i];
    energy[f] = acc / static_cast<double>(e - b);
  }
  const double peak = *std::max_element(energy.begin(), energy.end());
  if (!(peak > 0)) throw EmptyBufferError("trim_silence: every frame is below threshold");
  const double floor = peak * std::pow(10.0, threshold_db / 10.0);
  std::size_t first = 0, last = n_frames - 1;
  while (energy[first] < floor) ++first;
  while (energy[last] < floor) --last;
  auto begin = audio.begin() + static_cast<std::ptrdiff_t>(first * frame);
  auto end = audio.begin() + static_cast<std::ptrdiff_t>(std::min(audio.size(), (last + 1) * frame));
  return {begin, end};
}

// ---------------------------------------------------------------------------
// Synthetic corpora

struct EmotionPrototype {
  Emotion emotion = Emotion::happy;
  double f0_hz = 200;       // fundamental of the harmonic mixture
  double am_rate_hz = 4;    // amplitude-modulation rate
  double energy = 0.1;      // peak amplitude scale
};

struct DomainShift {
  std::string corpus_id;
  double spectral_tilt = 0;  // first-order filter y[n] = x[n] - tilt * x[n-1]
  double noise_level = 0;    // std of additive white Gaussian noise
};

struct SynthSpec {
  int n_speakers = 10;
  int segments_per_emotion = 4;  // per speaker and emotion
  std::vector<EmotionPrototype> emotions;
  std::vector<DomainShift> domains;
  std::uint64_t seed = 1;
  int sample_rate = 16000;
  double duration = 0.5;           // voiced part, seconds
  double silence = 0.05;           // leading/trailing padding, seconds
  double speaker_f0_spread = 0.05; // per-speaker relative f0 offset bound
  double utterance_f0_jitter = 0.02;
  std::string split_rule = "fraction:0.8";
};

inline void validate_synth_spec(const SynthSpec& s) {
  if (s.n_speakers < 1 || s.segments_per_emotion < 1)
    throw ValidationError("synth spec: counts must be >= 1");
  if (s.emotions.empty() || s.domains.empty())
    throw ValidationError("synth spec: needs at least one emotion and one domain");
  if (s.sample_rate <= 0 || s.duration <= 0 || s.silence < 0)
    throw ValidationError("synth spec: sample rate and duration must be positive");
  if (s.speaker_f0_spread < 0 || s.speaker_f0_spread >= 1 || s.utterance_f0_jitter < 0 ||
      s.utterance_f0_jitter >= 1)
    throw ValidationError("synth spec: f0 spread and jitter must be in [0, 1)");
  std::set<Emotion> seen;
  for (std::size_t i = 0; i < s.emotions.size(); ++i) {
    const auto& a = s.emotions[i];
    if (!seen.insert(a.emotion).second)
      throw ValidationError("synth spec: duplicate prototype for " + std::string(to_string(a.emotion)));
    if (a.f0_hz <= 0 || a.f0_hz * 3 * (1 + s.speaker_f0_spread) >= s.sample_rate / 2.0 || a.am_rate_hz < 0 ||
        a.energy <= 0)
      throw ValidationError("synth spec: prototype for " + std::string(to_string(a.emotion)) +
                            " out of range");
    for (std::size_t j = 0; j < i; ++j) {
      const auto& b = s.emotions[j];
      if (a.f0_hz == b.f0_hz && a.am_rate_hz == b.am_rate_hz && a.energy == b.energy)
        throw ValidationError("synth spec: prototypes for " + std::string(to_string(a.emotion)) +
                              " and " + std::string(to_string(b.emotion)) + " are identical");
    }
  }
  std::set<std::string> ids;
  for (const auto& d : s.domains) {
    if (d.corpus_id.empty() || !ids.insert(d.corpus_id).second)
      throw ValidationError("synth spec: domain ids must be unique and non-empty");
    if (std::abs(d.spectral_tilt) >= 1 || d.noise_level < 0)
      throw ValidationError("synth spec: domain '" + d.corpus_id + "' needs |tilt| < 1 and noise >= 0");
  }
  SplitRule::parse(s.split_rule);
}

/// Reads a synth spec from `key = value` text. `emotion` and `domain` repeat:
///   emotion = <name> <f0_hz> <am_rate_hz> <energy>
///   domain  = <corpus_id> <spectral_tilt> <noise_level>
inline SynthSpec parse_synth_spec(const KeyValueFile& kv) {
  SynthSpec s;
  s.n_speakers = static_cast<int>(parse_int(kv.get_or("n_speakers", "10"), "n_speakers"));
  s.segments_per_emotion =
      static_cast<int>(parse_int(kv.get_or("segments_per_emotion", "4"), "segments_per_emotion"));
  s.seed = static_cast<std::uint64_t>(parse_int(kv.get_or("seed", "1"), "seed"));
  s.sample_rate = static_cast<int>(parse_int(kv.get_or("sample_rate", "16000"), "sample_rate"));
  s.duration = parse_double(kv.get_or("duration", "0.5"), "duration");
  s.silence = parse_double(kv.get_or("silence", "0.05"), "silence");
  s.speaker_f0_spread = parse_double(kv.get_or("speaker_f0_spread", "0.05"), "speaker_f0_spread");
  s.utterance_f0_jitter = parse_double(kv.get_or("utterance_f0_jitter", "0.02"), "utterance_f0_jitter");
  s.split_rule = kv.get_or("split", "fraction:0.8");
  for (const auto& e : kv.get_all("emotion")) {
    std::istringstream is(e.value);
    std::string name;
    EmotionPrototype p;
    if (!(is >> name >> p.f0_hz >> p.am_rate_hz >> p.energy))
      throw FormatError(kv.source() + ":" + std::to_string(e.line) + ": expected 'emotion = name f0 am energy'");
    auto em = emotion_from_name(name);
    if (!em) throw FormatError(kv.source() + ":" + std::to_string(e.line) + ": unknown emotion '" + name + "'");
    p.emotion = *em;
    s.emotions.push_back(p);
  }
  for (const auto& d : kv.get_all("domain")) {
    std::istringstream is(d.value);
    DomainShift shift;
    if (!(is >> shift.corpus_id >> shift.spectral_tilt >> shift.noise_level))
      throw FormatError(kv.source() + ":" + std::to_string(d.line) + ": expected 'domain = id tilt noise'");
    s.domains.push_back(shift);
  }
  validate_synth_spec(s);
  return s;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(seed);
  for (auto k : keys) h = splitmix64(h ^ (k + 0x632be59bd9b4e019ULL));
  return h;
}

}  // namespace detail

/// Renders one utterance: a three-harmonic mixture at `f0`, amplitude
/// modulated at the prototype rate, passed through the domain tilt filter,
/// padded with silence and mixed with white noise.
inline std::vector<float> synthesize_utterance(const SynthSpec& spec, const EmotionPrototype& proto,
                                               const DomainShift& domain, double f0, std::mt19937_64& rng) {
  const auto sr = static_cast<double>(spec.sample_rate);
  const auto voiced = static_cast<std::size_t>(std::lround(spec.duration * sr));
  const auto pad = static_cast<std::size_t>(std::lround(spec.silence * sr));
  const auto fade = std::min<std::size_t>(voiced / 2, static_cast<std::size_t>(std::lround(0.01 * sr)));
  std::uniform_real_distribution<double> phase(0.0, 2 * std::numbers::pi);
  const double am_phase = phase(rng);
  const std::array<double, 3> amp = {1.0, 0.5, 0.25};
  std::array<double, 3> ph{};
  for (auto& p : ph) p = phase(rng);

  std::vector<double> x(voiced + 2 * pad, 0.0);
  for (std::size_t n = 0; n < voiced; ++n) {
    const double t = static_cast<double>(n) / sr;
    double s = 0;
    for (std::size_t k = 0; k < amp.size(); ++k)
      s += amp[k] * std::sin(2 * std::numbers::pi * static_cast<double>(k + 1) * f0 * t + ph[k]);
    double env = 1.0 + 0.5 * std::sin(2 * std::numbers::pi * proto.am_rate_hz * t + am_phase);
    double ramp = 1.0;
    if (n < fade) ramp = static_cast<double>(n) / static_cast<double>(fade);
    else if (n + fade >= voiced) ramp = static_cast<double>(voiced - 1 - n) / static_cast<double>(fade);
    x[pad + n] = proto.energy * env * ramp * s / 1.75;
  }
  std::vector<float> out(x.size());
  std::normal_distribution<double> noise(0.0, 1.0);
  double prev = 0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    double y = x[n] - domain.spectral_tilt * prev;
    prev = x[n];
    if (domain.noise_level > 0) y += domain.noise_level * noise(rng);
    out[n] = static_cast<float>(std::clamp(y, -1.0, 1.0));
  }
  return out;
}

/// One manifest per domain, audio inline. Deterministic in `spec.seed`.
inline std::vector<CorpusManifest> generate_synthetic(const SynthSpec& spec) {
  validate_synth_spec(spec);
  const auto rule = SplitRule::parse(spec.split_rule);
  std::vector<CorpusManifest> out;
  for (std::size_t d = 0; d < spec.domains.size(); ++d) {
    const auto& domain = spec.domains[d];
    CorpusManifest m;
    m.corpus_id = domain.corpus_id;
    for (int spk = 0; spk < spec.n_speakers; ++spk) {
      char spk_name[32];
      std::snprintf(spk_name, sizeof spk_name, "spk%02d", spk);
      std::mt19937_64 spk_rng(detail::mix_seed(spec.seed, {d, static_cast<std::uint64_t>(spk), 0xabcdULL}));
      const double spk_scale =
          1.0 + std::uniform_real_distribution<double>(-spec.speaker_f0_spread, spec.speaker_f0_spread)(spk_rng);
      for (std::size_t e = 0; e < spec.emotions.size(); ++e) {
        const auto& proto = spec.emotions[e];
        for (int seg = 0; seg < spec.segments_per_emotion; ++seg) {
          std::mt19937_64 rng(detail::mix_seed(
              spec.seed, {d, static_cast<std::uint64_t>(spk), e, static_cast<std::uint64_t>(seg)}));
          const double jitter =
              std::uniform_real_distribution<double>(-spec.utterance_f0_jitter, spec.utterance_f0_jitter)(rng);
          Utterance u;
          u.corpus_id = domain.corpus_id;
          u.speaker_id = domain.corpus_id + "_" + spk_name;
          u.id = u.speaker_id + "_" + std::string(to_string(proto.emotion)) + "_" + std::to_string(seg);
          u.labels = {{std::string(to_string(proto.emotion)), 1}};
          u.sample_rate = spec.sample_rate;
          u.samples = synthesize_utterance(spec, proto, domain, proto.f0_hz * spk_scale * (1 + jitter), rng);
          m.utterances.push_back(std::move(u));
        }
      }
    }
    m.label_scheme = LabelScheme::single_label;
    out.push_back(split_corpus(std::move(m), rule));
  }
  return out;
}

}  // namespace sercc

#endif  // SERCC_CORPUS_HPP_
