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

// Command implementations behind the `sercc` tool. Each returns a process
// exit code and writes machine-readable lines to `out`, diagnostics to `err`.
//
// Run directory layout:
//   config.txt      resolved configuration (seed included)
//   metrics.log     one tab-separated line per epoch
//   model.bin       parameters of the selected epoch
//   model.meta      model header (dims, classes, domains, features)
//   checkpoint.txt  selected epoch and its score
//   report.tsv      final metrics report
//   provenance.txt  toolkit version, platform, base run for adaptations

#ifndef SERCC_COMMANDS_HPP_
#define SERCC_COMMANDS_HPP_

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sercc/experiments.hpp"
#include "sercc/training.hpp"
#include "sercc/wav.hpp"

#ifndef SERCC_VERSION
#define SERCC_VERSION "0.0.0"
#endif

namespace sercc::cli {

namespace fs = std::filesystem;

/// Overrides that flags apply on top of a config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<FeatureKind> features;
  bool iem4_view = false;
};

struct Context {
  std::ostream& out = std::cout;
  std::ostream& err = std::cerr;
};

inline std::string provenance_text() {
  std::ostringstream os;
  os << "toolkit = sercc " << SERCC_VERSION << "\n";
#if defined(__clang__)
  os << "compiler = clang " << __clang_major__ << "." << __clang_minor__ << "\n";
#elif defined(__GNUC__)
  os << "compiler = gcc " << __GNUC__ << "." << __GNUC_MINOR__ << "\n";
#endif
#if defined(__linux__)
  os << "platform = linux\n";
#elif defined(__APPLE__)
  os << "platform = macos\n";
#elif defined(_WIN32)
  os << "platform = windows\n";
#endif
  os << "precision = float64 training, float32 checkpoints\n";
  return os.str();
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  os << text;
  if (!os) throw IoError("write failed: " + path.string());
}

inline std::string read_text(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline TrainingConfig load_config(const fs::path& path, const Overrides& ov) {
  auto kv = KeyValueFile::load(path.string());
  auto c = parse_config(kv, path.parent_path());
  if (ov.seed) c.seed = *ov.seed;
  if (ov.features) c.features.kind = *ov.features;
  if (ov.iem4_view) c.iem4_view = true;
  return c;
}

// ---------------------------------------------------------------------------
// Features

inline fs::path cache_path(const fs::path& cache_dir, const Utterance& u, FeatureKind kind) {
  return cache_dir / u.corpus_id / (u.id + "." + std::string(to_string(kind)) + ".feat");
}

/// Cached features when the cache holds them, otherwise extracted directly.
inline FeatureFn feature_source(const TrainingConfig& c) {
  return [c](const Utterance& u) {
    if (!c.cache_dir.empty()) {
      auto p = cache_path(c.cache_dir, u, c.features.kind);
      if (fs::exists(p)) return load_features(p.string());
    }
    return extract_features(u, c.features);
  };
}

inline std::vector<CorpusManifest> load_manifests(const TrainingConfig& c) {
  if (c.manifests.empty()) throw ConfigError("config lists no manifests");
  std::vector<CorpusManifest> out;
  std::set<std::string> ids;
  for (const auto& m : c.manifests) {
    out.push_back(load_manifest(m));
    if (!ids.insert(out.back().corpus_id).second)
      throw ConfigError("corpus '" + out.back().corpus_id + "' appears in two manifests");
  }
  return out;
}

/// Loads the manifests of the corpora in `needed` (all when empty).
inline DataStore load_store(const TrainingConfig& c, const std::set<std::string>& needed = {}) {
  DataStore store;
  auto features = feature_source(c);
  for (auto& m : load_manifests(c))
    if (needed.empty() || needed.count(m.corpus_id)) store.add(build_corpus_data(m, features, c.classes));
  for (const auto& id : needed)
    if (!store.has(id)) throw ConfigError("no manifest provides corpus '" + id + "'");
  return store;
}

/// Writes one cache file per utterance, skipping files newer than their
/// audio. Failing utterances are listed on `err`; exit code 1 if any failed.
inline int cmd_extract(const Context& ctx, const TrainingConfig& c, const std::string& out_dir = {}) {
  const fs::path cache = out_dir.empty() ? fs::path(c.cache_dir) : fs::path(out_dir);
  if (cache.empty()) throw ConfigError("extract: no cache directory (set cache_dir or --out)");
  std::size_t written = 0, skipped = 0, failed = 0;
  for (const auto& m : load_manifests(c)) {
    fs::create_directories(cache / m.corpus_id);
    for (const auto& u : m.utterances) {
      const auto target = cache_path(cache, u, c.features.kind);
      try {
        if (fs::exists(target) && !u.audio_path.empty() && fs::exists(u.audio_path) &&
            fs::last_write_time(target) >= fs::last_write_time(u.audio_path)) {
          ++skipped;
          continue;
        }
        save_features(target.string(), extract_features(u, c.features));
        ++written;
      } catch (const Error& e) {
        ++failed;
        ctx.err << "extract: " << u.id << ": " << e.what() << "\n";
      }
    }
  }
  ctx.out << "written=" << written << "\tskipped=" << skipped << "\tfailed=" << failed << "\n";
  return failed ? 1 : 0;
}

// ---------------------------------------------------------------------------
// Training

inline ModelMeta meta_for(const TrainingConfig& c, const ModelParameters& p, std::vector<std::string> domains) {
  ModelMeta m;
  m.dims = p.dims;
  m.classes = c.classes;
  m.domains = std::move(domains);
  m.feature_kind = c.features.kind;
  return m;
}

inline void write_run(const fs::path& dir, const TrainingConfig& c, const RunResult& r, ModelMeta meta,
                      const std::string& metrics_log, const std::string& extra_provenance = {}) {
  fs::create_directories(dir);
  save_checkpoint(dir, {r.params, std::move(meta), c, r.best_epoch, r.best_score});
  write_text(dir / "metrics.log", metrics_log);
  write_text(dir / "report.tsv", report_to_string(r.report));
  write_text(dir / "provenance.txt", provenance_text() + extra_provenance);
}

inline RunResult dispatch(const TrainingConfig& c, const DataStore& store, std::ostream* log) {
  switch (c.regime) {
    case Regime::cc: return run_cross_corpus(c, store, log);
    case Regime::md: return run_multidomain(c, store, log);
    case Regime::dat: return run_dat(c, store, log);
    case Regime::ood: return run_ood(c, store, log);
    default: throw ConfigError("train: regime ADAPT runs through the adapt command");
  }
}

inline int cmd_train(const Context& ctx, TrainingConfig c, const fs::path& out_dir) {
  c.validate();
  if (c.regime == Regime::adapt) throw ConfigError("train: regime ADAPT runs through the adapt command");
  std::set<std::string> needed(c.train_corpora.begin(), c.train_corpora.end());
  needed.insert(c.eval_corpora.begin(), c.eval_corpora.end());
  auto store = load_store(c, needed);
  std::ostringstream log;
  auto r = dispatch(c, store, &log);
  if (c.iem4_view) r.report = evaluate(r.params, store, c.eval_corpora, c.classes, true);
  write_run(out_dir, c, r, meta_for(c, r.params, c.train_corpora), log.str());
  ctx.out << log.str();
  write_report(ctx.out, r.report);
  return 0;
}

inline int cmd_adapt(const Context& ctx, TrainingConfig c, const fs::path& out_dir) {
  if (c.base_run.empty()) throw ConfigError("adapt: config needs base_run");
  c.regime = Regime::adapt;
  if (c.eval_corpora.empty() && c.adapt_corpus) c.eval_corpora = {*c.adapt_corpus};
  c.validate();
  auto base = load_checkpoint(c.base_run);
  if (!(base.meta.classes == c.classes))
    throw ConfigError("adapt: base model classes (" + base.meta.classes.names_csv() + ") differ from config (" +
                      c.classes.names_csv() + ")");
  if (base.meta.feature_kind != c.features.kind) throw ConfigError("adapt: base model uses other features");
  // The base's training corpora are checked before any data is read.
  if (std::find(base.meta.domains.begin(), base.meta.domains.end(), *c.adapt_corpus) != base.meta.domains.end())
    throw ValidationError("adapt: corpus '" + *c.adapt_corpus + "' was part of the base model's training data");
  std::set<std::string> needed(c.eval_corpora.begin(), c.eval_corpora.end());
  needed.insert(*c.adapt_corpus);
  auto store = load_store(c, needed);
  std::ostringstream log;
  auto r = adapt(base.params, base.meta.domains, c, store, &log);
  if (c.iem4_view) r.report = evaluate(r.params, store, c.eval_corpora, c.classes, true);
  write_run(out_dir, c, r, meta_for(c, r.params, base.meta.domains), log.str(),
            "base_run = " + fs::absolute(c.base_run).lexically_normal().string() + "\n");
  ctx.out << log.str();
  write_report(ctx.out, r.report);
  return 0;
}

// ---------------------------------------------------------------------------
// Evaluation

/// Scores a run's checkpoint. `request` (optional) replaces the run's own
/// manifests and eval corpora.
inline MetricsReport evaluate_run(const fs::path& run_dir, const std::optional<TrainingConfig>& request,
                                  bool iem4) {
  auto ck = load_checkpoint(run_dir);
  TrainingConfig c = request.value_or(ck.config);
  if (!(c.classes == ck.meta.classes))
    throw ConfigError("eval: checkpoint was trained on classes (" + ck.meta.classes.names_csv() +
                      ") but the request asks for (" + c.classes.names_csv() + ")");
  if (c.features.kind != ck.meta.feature_kind)
    throw ConfigError("eval: checkpoint expects " + std::string(to_string(ck.meta.feature_kind)) + " features");
  if (c.eval_corpora.empty()) {
    for (const auto& m : load_manifests(c)) c.eval_corpora.push_back(m.corpus_id);
  }
  auto store = load_store(c, {c.eval_corpora.begin(), c.eval_corpora.end()});
  return evaluate(ck.params, store, c.eval_corpora, c.classes, iem4 || c.iem4_view);
}

inline int cmd_eval(const Context& ctx, const fs::path& run_dir, const std::optional<TrainingConfig>& request,
                    bool iem4, const std::string& out_file = {}) {
  auto report = evaluate_run(run_dir, request, iem4);
  const auto text = report_to_string(report);
  if (!out_file.empty()) write_text(out_file, text);
  ctx.out << text;
  return 0;
}

// ---------------------------------------------------------------------------
// Synthetic corpora

/// Writes `<out>/<corpus>/<id>.wav` and `<out>/<corpus>.manifest` per domain.
inline std::vector<fs::path> write_synthetic(const SynthSpec& spec, const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw IoError("cannot create directory " + out.string());
  std::vector<fs::path> manifests;
  for (auto m : generate_synthetic(spec)) {
    fs::create_directories(out / m.corpus_id, ec);
    if (ec) throw IoError("cannot create directory " + (out / m.corpus_id).string());
    for (auto& u : m.utterances) {
      const auto wav = out / m.corpus_id / (u.id + ".wav");
      write_wav(wav.string(), u.samples, u.sample_rate);
      u.audio_path = wav.string();
      u.samples.clear();
    }
    const auto path = out / (m.corpus_id + ".manifest");
    std::ostringstream os;
    write_manifest(os, m, out);
    write_text(path, os.str());
    manifests.push_back(path);
  }
  return manifests;
}

inline int cmd_synth(const Context& ctx, const fs::path& spec_path, const fs::path& out,
                     std::optional<std::uint64_t> seed) {
  auto spec = parse_synth_spec(KeyValueFile::load(spec_path.string()));
  if (seed) spec.seed = *seed;
  for (const auto& m : write_synthetic(spec, out)) ctx.out << "manifest\t" << m.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// Full grid

/// Splits a combined file into the synth part and the training part.
inline std::pair<KeyValueFile, KeyValueFile> split_grid_config(const KeyValueFile& kv) {
  static const std::set<std::string> synth_keys = {"n_speakers", "segments_per_emotion", "emotion", "domain",
                                                   "sample_rate", "duration", "silence", "speaker_f0_spread",
                                                   "utterance_f0_jitter", "split"};
  KeyValueFile synth, train;
  for (const auto& e : kv.entries()) (synth_keys.count(e.key) ? synth : train).add(e.key, e.value);
  synth.add("seed", kv.get_or("seed", "1"));
  return {synth, train};
}

/// Generates the synthetic corpora, runs the regime grid and writes
/// by_corpus.tsv (CC/MD/DAT by corpus), by_emotion.tsv (per emotion) and
/// held_out.tsv (OOD and adaptation on the held-out corpus).
inline int cmd_reproduce_all(const Context& ctx, const fs::path& config_path, const fs::path& out,
                             const Overrides& ov) {
  auto kv = KeyValueFile::load(config_path.string());
  if (ov.seed) kv.set("seed", std::to_string(*ov.seed));
  auto [synth_kv, train_kv] = split_grid_config(kv);
  auto spec = parse_synth_spec(synth_kv);
  auto manifests = write_synthetic(spec, out / "corpora");
  std::vector<std::string> corpora;
  for (const auto& d : spec.domains) corpora.push_back(d.corpus_id);
  TrainingConfig base = parse_config(train_kv, config_path.parent_path());
  if (ov.features) base.features.kind = *ov.features;
  base.manifests.clear();
  for (const auto& m : manifests) base.manifests.push_back(m.string());
  write_text(out / "config.txt", kv.to_string());

  auto store = load_store(base);
  std::map<std::string, std::unique_ptr<std::ostringstream>> logs;
  GridLogger logger;
  logger.open = [&](const std::string& run) {
    logs[run] = std::make_unique<std::ostringstream>();
    return logs[run].get();
  };
  logger.done = [&](const std::string& run, const TrainingConfig& c, const RunResult& r) {
    write_run(out / "runs" / run, c, r, meta_for(c, r.params, c.train_corpora), logs[run]->str());
    ctx.out << "run\t" << run << "\tbest_epoch=" << r.best_epoch << "\tscore=" << format_double(r.best_score)
            << "\n";
  };
  auto g = run_grid(store, corpora, base, {}, logger);
  std::ostringstream by_corpus, by_emotion, held_out;
  write_corpus_table(by_corpus, g);
  write_emotion_table(by_emotion, g);
  write_held_out_table(held_out, g);
  write_text(out / "by_corpus.tsv", by_corpus.str());
  write_text(out / "by_emotion.tsv", by_emotion.str());
  write_text(out / "held_out.tsv", held_out.str());
  write_text(out / "provenance.txt", provenance_text());
  ctx.out << by_corpus.str() << held_out.str();
  return 0;
}

}  // namespace sercc::cli

#endif  // SERCC_COMMANDS_HPP_
