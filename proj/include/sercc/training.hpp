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

// Training regimes: cross-corpus (CC), multi-domain (MD), domain adversarial
// (DAT), out-of-domain (OOD) and adaptation of an OOD model (ADAPT).
//
// Every regime trains with batch size 1 (one Adam step per sample), evaluates
// all eval corpora after each epoch, steps the plateau scheduler on the mean
// per-corpus UA and keeps the epoch with the best mean UA.

#ifndef SERCC_TRAINING_HPP_
#define SERCC_TRAINING_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "sercc/autodiff.hpp"
#include "sercc/corpus.hpp"
#include "sercc/dsp.hpp"
#include "sercc/error.hpp"
#include "sercc/kv_file.hpp"
#include "sercc/metrics.hpp"
#include "sercc/model.hpp"
#include "sercc/optim.hpp"

namespace sercc {

enum class Regime { cc, md, dat, ood, adapt };

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::cc: return "CC";
    case Regime::md: return "MD";
    case Regime::dat: return "DAT";
    case Regime::ood: return "OOD";
    default: return "ADAPT";
  }
}

inline Regime regime_from_name(std::string_view s) {
  if (s == "CC" || s == "cc") return Regime::cc;
  if (s == "MD" || s == "md") return Regime::md;
  if (s == "DAT" || s == "dat") return Regime::dat;
  if (s == "OOD" || s == "ood") return Regime::ood;
  if (s == "ADAPT" || s == "adapt") return Regime::adapt;
  throw ConfigError("unknown regime '" + std::string(s) + "'");
}

struct TrainingConfig {
  Regime regime = Regime::cc;
  std::vector<std::string> train_corpora;
  std::optional<std::string> adapt_corpus;  // held out (OOD) or adapted to (ADAPT)
  std::vector<std::string> eval_corpora;
  ClassSet classes = ClassSet::big_six();
  int epochs = 200;
  double lambda = 0.007;
  double lr = 1e-4;
  int patience = 4;
  double factor = 0.8;
  int batch_size = 1;
  std::uint64_t seed = 1;
  int hidden = 512;
  int layers = 2;
  int attention_dim = 128;
  FeatureConfig features;
  std::vector<std::string> manifests;  // resolved paths
  std::string cache_dir;
  std::string base_run;  // ADAPT: run directory of the base model
  bool iem4_view = false;

  /// Throws ConfigError when the regime and corpus sets are inconsistent.
  void validate() const {
    if (batch_size != 1) throw ConfigError("config: batch_size must be 1");
    if (epochs < 0) throw ConfigError("config: epochs must be >= 0");
    if (!(lambda >= 0)) throw ConfigError("config: lambda must be >= 0");
    if (!(lr > 0)) throw ConfigError("config: lr must be positive");
    if (patience < 1 || !(factor > 0 && factor < 1)) throw ConfigError("config: need patience >= 1, 0 < factor < 1");
    std::set<std::string> uniq(train_corpora.begin(), train_corpora.end());
    if (uniq.size() != train_corpora.size()) throw ConfigError("config: duplicate training corpus");
    switch (regime) {
      case Regime::cc:
        if (train_corpora.size() != 1) throw ConfigError("config: CC trains on exactly one corpus");
        break;
      case Regime::md:
      case Regime::dat:
        if (train_corpora.size() < 2)
          throw ConfigError("config: " + std::string(to_string(regime)) + " needs at least two corpora");
        break;
      case Regime::ood:
        if (!adapt_corpus) throw ConfigError("config: OOD needs adapt_corpus (the held-out corpus)");
        if (train_corpora.empty()) throw ConfigError("config: OOD needs training corpora");
        if (uniq.count(*adapt_corpus)) throw ConfigError("config: OOD training corpora include the held-out corpus");
        break;
      case Regime::adapt:
        if (!adapt_corpus) throw ConfigError("config: ADAPT needs adapt_corpus");
        break;
    }
    if (regime != Regime::adapt && eval_corpora.empty()) throw ConfigError("config: no eval corpora");
  }
};

inline std::string join(const std::vector<std::string>& v, char sep = ',') {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? std::string(1, sep) : "") + v[i];
  return s;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Reads a `key = value` config. Manifest and cache paths resolve against
/// `base_dir` when relative.
inline TrainingConfig parse_config(const KeyValueFile& kv, const std::filesystem::path& base_dir = {}) {
  static const std::set<std::string> known = {
      "regime", "train_corpora", "adapt_corpus", "eval_corpora", "classes", "epochs", "lambda", "lr",
      "patience", "factor", "batch_size", "seed", "hidden", "layers", "attention_dim", "features",
      "manifests", "cache_dir", "base_run", "iem4_view", "n_mels", "n_ceps"};
  for (const auto& e : kv.entries())
    if (!known.count(e.key))
      throw ConfigError(kv.source() + ":" + std::to_string(e.line) + ": unknown key '" + e.key + "'");
  TrainingConfig c;
  c.regime = regime_from_name(kv.get_or("regime", "CC"));
  c.train_corpora = split_list(kv.get_or("train_corpora", ""));
  if (auto a = kv.get("adapt_corpus"); a && !a->empty()) c.adapt_corpus = *a;
  c.eval_corpora = split_list(kv.get_or("eval_corpora", ""));
  c.classes = ClassSet::from_names(split_list(kv.get_or("classes", "big6")));
  c.epochs = static_cast<int>(parse_int(kv.get_or("epochs", "200"), "epochs"));
  c.lambda = parse_double(kv.get_or("lambda", "0.007"), "lambda");
  c.lr = parse_double(kv.get_or("lr", "0.0001"), "lr");
  c.patience = static_cast<int>(parse_int(kv.get_or("patience", "4"), "patience"));
  c.factor = parse_double(kv.get_or("factor", "0.8"), "factor");
  c.batch_size = static_cast<int>(parse_int(kv.get_or("batch_size", "1"), "batch_size"));
  c.seed = static_cast<std::uint64_t>(parse_int(kv.get_or("seed", "1"), "seed"));
  c.hidden = static_cast<int>(parse_int(kv.get_or("hidden", "512"), "hidden"));
  c.layers = static_cast<int>(parse_int(kv.get_or("layers", "2"), "layers"));
  c.attention_dim = static_cast<int>(parse_int(kv.get_or("attention_dim", "128"), "attention_dim"));
  c.features.kind = feature_kind_from_name(kv.get_or("features", "lmfb"));
  c.features.n_mels = static_cast<int>(parse_int(kv.get_or("n_mels", "23"), "n_mels"));
  c.features.n_ceps = static_cast<int>(parse_int(kv.get_or("n_ceps", "13"), "n_ceps"));
  c.iem4_view = kv.get_or("iem4_view", "false") == "true";
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return (path.is_relative() && !base_dir.empty() ? base_dir / path : path).lexically_normal().string();
  };
  for (const auto& m : split_list(kv.get_or("manifests", ""))) c.manifests.push_back(resolve(m));
  if (auto cd = kv.get("cache_dir"); cd && !cd->empty()) c.cache_dir = resolve(*cd);
  if (auto b = kv.get("base_run"); b && !b->empty()) c.base_run = resolve(*b);
  return c;
}

/// Inverse of parse_config with absolute paths.
inline KeyValueFile config_to_kv(const TrainingConfig& c) {
  KeyValueFile kv;
  kv.add("regime", std::string(to_string(c.regime)));
  kv.add("train_corpora", join(c.train_corpora));
  kv.add("adapt_corpus", c.adapt_corpus.value_or(""));
  kv.add("eval_corpora", join(c.eval_corpora));
  kv.add("classes", c.classes.names_csv());
  kv.add("epochs", std::to_string(c.epochs));
  kv.add("lambda", format_double(c.lambda));
  kv.add("lr", format_double(c.lr));
  kv.add("patience", std::to_string(c.patience));
  kv.add("factor", format_double(c.factor));
  kv.add("batch_size", std::to_string(c.batch_size));
  kv.add("seed", std::to_string(c.seed));
  kv.add("hidden", std::to_string(c.hidden));
  kv.add("layers", std::to_string(c.layers));
  kv.add("attention_dim", std::to_string(c.attention_dim));
  kv.add("features", std::string(to_string(c.features.kind)));
  kv.add("n_mels", std::to_string(c.features.n_mels));
  kv.add("n_ceps", std::to_string(c.features.n_ceps));
  std::vector<std::string> abs;
  for (const auto& m : c.manifests) abs.push_back(std::filesystem::absolute(m).lexically_normal().string());
  kv.add("manifests", join(abs));
  kv.add("cache_dir", c.cache_dir.empty() ? "" : std::filesystem::absolute(c.cache_dir).lexically_normal().string());
  kv.add("base_run", c.base_run.empty() ? "" : std::filesystem::absolute(c.base_run).lexically_normal().string());
  kv.add("iem4_view", c.iem4_view ? "true" : "false");
  return kv;
}

// ---------------------------------------------------------------------------
// Data

/// One training example: multi-label utterances expand to one sample per
/// present class.
struct Sample {
  std::string utt_id;
  std::string corpus_id;
  std::size_t domain = 0;
  std::size_t label = 0;
  std::shared_ptr<const ad::Matrix> features;
};

/// One evaluation utterance with its binarised source labels.
struct EvalItem {
  std::string utt_id;
  std::vector<Label> labels;
  std::shared_ptr<const ad::Matrix> features;
};

struct CorpusData {
  std::string corpus_id;
  std::vector<Sample> train;
  std::vector<EvalItem> train_items;  // the training utterances, unexpanded
  std::vector<EvalItem> test;
};

using FeatureFn = std::function<FeatureSequence(const Utterance&)>;

/// Splits a manifest into training samples (expanded over the class set)
/// and test items. Utterances without any label in the class set are
/// skipped for training.
inline CorpusData build_corpus_data(const CorpusManifest& m, const FeatureFn& features, const ClassSet& classes) {
  CorpusData d;
  d.corpus_id = m.corpus_id;
  for (const auto& raw : m.utterances) {
    if (raw.split == Split::unassigned)
      throw ValidationError("utterance '" + raw.id + "' has no split; run split_corpus first");
    Utterance u = binarize_labels(raw);
    auto f = std::make_shared<const ad::Matrix>(to_matrix(features(u)));
    EvalItem item{u.id, u.labels, f};
    if (u.split == Split::test) {
      d.test.push_back(std::move(item));
      continue;
    }
    const auto present = map_labels(u, classes).presence(classes);
    for (std::size_t c = 0; c < present.size(); ++c)
      if (present[c]) d.train.push_back({u.id, u.corpus_id, 0, c, f});
    d.train_items.push_back(std::move(item));
  }
  return d;
}

/// Corpora by id, with a log of every (corpus, split) read.
class DataStore {
 public:
  void add(CorpusData d) {
    auto id = d.corpus_id;
    corpora_[id] = std::move(d);
  }
  bool has(const std::string& id) const { return corpora_.count(id) > 0; }

  const std::vector<Sample>& train(const std::string& id) const {
    log_.push_back(id + ":train");
    return get(id).train;
  }
  const std::vector<EvalItem>& train_items(const std::string& id) const {
    log_.push_back(id + ":train");
    return get(id).train_items;
  }
  const std::vector<EvalItem>& test(const std::string& id) const {
    log_.push_back(id + ":test");
    return get(id).test;
  }
  std::vector<std::string> corpus_ids() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : corpora_) out.push_back(id);
    return out;
  }

  const std::vector<std::string>& access_log() const { return log_; }
  void clear_log() const { log_.clear(); }

 private:
  const CorpusData& get(const std::string& id) const {
    auto it = corpora_.find(id);
    if (it == corpora_.end()) throw ConfigError("no data loaded for corpus '" + id + "'");
    return it->second;
  }

  std::map<std::string, CorpusData> corpora_;
  mutable std::vector<std::string> log_;
};

// ---------------------------------------------------------------------------
// Evaluation

inline std::vector<Prediction> predict(ModelParameters& p, const std::vector<const EvalItem*>& items) {
  std::vector<Prediction> out;
  out.reserve(items.size());
  for (const auto* it : items) {
    auto s = predict_scores(p, *it->features);
    out.push_back({it->utt_id, {s.data(), s.data() + s.size()}});
  }
  return out;
}

/// Scores one corpus's test split. With `iem4` the four-class view is used.
inline CorpusReport evaluate_corpus(ModelParameters& p, const std::string& corpus,
                                    const std::vector<EvalItem>& test, const ClassSet& classes, bool iem4 = false) {
  const ClassSet view = iem4 ? ClassSet::iem4() : classes;
  std::vector<const EvalItem*> items;
  std::vector<Reference> refs;
  for (const auto& it : test) {
    Utterance u;
    u.id = it.utt_id;
    u.labels = it.labels;
    auto present = map_labels(u, view).presence(view);
    if (std::none_of(present.begin(), present.end(), [](bool b) { return b; })) continue;
    items.push_back(&it);
    refs.push_back({it.utt_id, std::move(present)});
  }
  if (items.empty()) throw EmptyReportError("corpus '" + corpus + "' has no test utterance in the class set");
  auto preds = predict(p, items);
  if (iem4) return aggregate_corpus(corpus + "/IEM4", iem4_view(preds, refs, classes), view);
  return aggregate_corpus(corpus, confusion_from_predictions(preds, refs, classes), classes);
}

inline MetricsReport evaluate(ModelParameters& p, const DataStore& store, const std::vector<std::string>& corpora,
                              const ClassSet& classes, bool iem4 = false, std::string provenance = {}) {
  MetricsReport r;
  r.provenance = std::move(provenance);
  for (const auto& c : corpora) {
    const auto& test = store.test(c);
    r.corpora.push_back(evaluate_corpus(p, c, test, classes));
    if (iem4) r.corpora.push_back(evaluate_corpus(p, c, test, classes, true));
  }
  if (r.corpora.empty()) throw EmptyReportError("evaluate: no corpora");
  return r;
}

// ---------------------------------------------------------------------------
// Training loop

struct EpochRecord {
  int epoch = 0;  // 1-based
  double loss = 0;         // mean emotion loss
  double domain_loss = 0;  // mean domain loss, DAT only
  std::size_t steps = 0;
  double lr = 0;           // rate used during the epoch
  std::vector<std::pair<std::string, std::pair<double, double>>> corpus_metrics;  // corpus -> (UA, WA)

  double mean_ua() const {
    double s = 0;
    for (const auto& [_, m] : corpus_metrics) s += m.first;
    return corpus_metrics.empty() ? 0 : s / static_cast<double>(corpus_metrics.size());
  }
};

/// Epoch number with the highest mean per-corpus UA; earliest on ties.
inline int select_best(const std::vector<EpochRecord>& history) {
  if (history.empty()) throw TrainingError("select_best: empty history");
  std::size_t best = 0;
  for (std::size_t i = 1; i < history.size(); ++i)
    if (history[i].mean_ua() > history[best].mean_ua()) best = i;
  return history[best].epoch;
}

struct EpochStats {
  double loss_sum = 0;
  double domain_loss_sum = 0;
  std::size_t steps = 0;
};

/// One pass over `samples` in an order drawn from `rng`, one Adam step per
/// sample. In DAT mode the loss is L_y + L_d and the reversal layer turns the
/// domain term into -lambda * dL_d on the shared encoder.
inline EpochStats train_epoch(ModelParameters& p, const std::vector<const Sample*>& samples, ForwardMode mode,
                              double lambda, AdamState& adam, std::mt19937_64& rng) {
  if (samples.empty()) throw TrainingError("train_epoch: no training samples");
  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  auto params = p.all();
  EpochStats stats;
  for (auto idx : order) {
    const Sample& s = *samples[idx];
    p.zero_grad();
    ad::Tape tape;
    auto r = model_forward(tape, *s.features, p, mode, lambda);
    ad::Var loss = ad::cross_entropy(r.emotion_logits, s.label);
    const double ly = loss.scalar();
    double ld = 0;
    if (mode == ForwardMode::dat) {
      ad::Var dl = ad::cross_entropy(*r.domain_logits, s.domain);
      ld = dl.scalar();
      loss = ad::add(loss, dl);
    }
    if (!std::isfinite(ly) || !std::isfinite(ld))
      throw TrainingError("non-finite loss on sample '" + s.utt_id + "'");
    tape.backward(loss);
    adam_step(params, adam);
    stats.loss_sum += ly;
    stats.domain_loss_sum += ld;
    ++stats.steps;
  }
  return stats;
}

struct RunResult {
  ModelParameters params;        // selected epoch, single precision values
  ModelParameters final_params;  // after the last epoch, single precision values
  int best_epoch = 0;      // 0 when no epoch ran
  double best_score = 0;
  std::vector<EpochRecord> history;
  MetricsReport report;
};

/// Tab-separated key=value line for one epoch.
inline std::string format_epoch(const EpochRecord& r) {
  std::string s = "epoch=" + std::to_string(r.epoch) + "\tlr=" + format_double(r.lr) +
                  "\tloss=" + format_double(r.loss) + "\tdomain_loss=" + format_double(r.domain_loss) +
                  "\tsteps=" + std::to_string(r.steps) + "\tscore=" + format_double(r.mean_ua());
  for (const auto& [c, m] : r.corpus_metrics)
    s += "\tua[" + c + "]=" + format_double(m.first) + "\twa[" + c + "]=" + format_double(m.second);
  return s;
}

struct TrainSpec {
  std::vector<std::string> corpora;  // training corpora; position = domain id
  std::vector<std::string> eval;
  ForwardMode mode = ForwardMode::plain;
  double lambda = 0;
  int epochs = 0;
  double lr = 1e-4;
  int patience = 4;
  double factor = 0.8;
  std::uint64_t seed = 1;
  ClassSet classes = ClassSet::big_six();
};

/// Trains `init` and returns the best epoch's parameters with its report.
inline RunResult train_run(ModelParameters init, const DataStore& store, const TrainSpec& spec,
                           std::ostream* log = nullptr) {
  std::vector<const Sample*> samples;
  std::vector<Sample> relabelled;
  for (std::size_t d = 0; d < spec.corpora.size(); ++d)
    for (const auto& s : store.train(spec.corpora[d])) relabelled.push_back(s), relabelled.back().domain = d;
  for (const auto& s : relabelled) samples.push_back(&s);

  RunResult result;
  ModelParameters p = std::move(init);
  auto evaluate_epoch = [&](EpochRecord& rec) {
    ModelParameters snapshot = p;
    snapshot.round_to_float();
    for (const auto& c : spec.eval) {
      auto cr = evaluate_corpus(snapshot, c, store.test(c), spec.classes);
      rec.corpus_metrics.push_back({c, {cr.ua.value_or(0.0), cr.wa.value_or(0.0)}});
    }
    return snapshot;
  };

  if (spec.epochs == 0) {
    result.params = p;
    result.params.round_to_float();
  }
  AdamState adam;
  adam.learning_rate = spec.lr;
  PlateauState plateau(spec.factor, spec.patience);
  std::mt19937_64 rng(detail::mix_seed(spec.seed, {0x7472616eULL}));
  double best = -1;
  for (int e = 1; e <= spec.epochs; ++e) {
    EpochRecord rec;
    rec.epoch = e;
    rec.lr = adam.learning_rate;
    auto stats = train_epoch(p, samples, spec.mode, spec.lambda, adam, rng);
    rec.steps = stats.steps;
    rec.loss = stats.loss_sum / static_cast<double>(stats.steps);
    rec.domain_loss = stats.domain_loss_sum / static_cast<double>(stats.steps);
    auto snapshot = evaluate_epoch(rec);
    const double score = rec.mean_ua();
    if (score > best) {
      best = score;
      result.params = std::move(snapshot);
      result.best_epoch = e;
      result.best_score = score;
    }
    adam.learning_rate = plateau_step(plateau, score, adam.learning_rate);
    if (log) *log << format_epoch(rec) << '\n' << std::flush;
    result.history.push_back(std::move(rec));
  }
  result.final_params = p;
  result.final_params.round_to_float();
  if (!result.history.empty() && select_best(result.history) != result.best_epoch)
    throw std::logic_error("train_run: best-epoch bookkeeping disagrees with select_best");
  result.report = evaluate(result.params, store, spec.eval, spec.classes);
  return result;
}

inline ModelDims dims_for(const TrainingConfig& c, int input_dim, int n_domains) {
  ModelDims d;
  d.input_dim = input_dim;
  d.hidden = c.hidden;
  d.layers = c.layers;
  d.attention_dim = c.attention_dim;
  d.n_classes = static_cast<int>(c.classes.size());
  d.n_domains = std::max(1, n_domains);
  return d;
}

inline int feature_dim(const DataStore& store, const std::string& corpus) {
  const auto& items = store.train_items(corpus);
  if (!items.empty()) return static_cast<int>(items.front().features->cols());
  const auto& test = store.test(corpus);
  if (!test.empty()) return static_cast<int>(test.front().features->cols());
  throw ConfigError("corpus '" + corpus + "' is empty");
}

inline TrainSpec spec_from(const TrainingConfig& c, ForwardMode mode) {
  TrainSpec s;
  s.corpora = c.train_corpora;
  s.eval = c.eval_corpora;
  s.mode = mode;
  s.lambda = mode == ForwardMode::dat ? c.lambda : 0.0;
  s.epochs = c.epochs;
  s.lr = c.lr;
  s.patience = c.patience;
  s.factor = c.factor;
  s.seed = c.seed;
  s.classes = c.classes;
  return s;
}

inline RunResult run_regime(const TrainingConfig& c, const DataStore& store, ForwardMode mode,
                            std::ostream* log) {
  c.validate();
  const auto dims = dims_for(c, feature_dim(store, c.train_corpora.front()), static_cast<int>(c.train_corpora.size()));
  return train_run(init_params(dims, c.seed), store, spec_from(c, mode), log);
}

inline RunResult run_cross_corpus(const TrainingConfig& c, const DataStore& store, std::ostream* log = nullptr) {
  if (c.regime != Regime::cc) throw ConfigError("run_cross_corpus: regime is " + std::string(to_string(c.regime)));
  return run_regime(c, store, ForwardMode::plain, log);
}

/// Pools all training corpora; corpus labels are not used.
inline RunResult run_multidomain(const TrainingConfig& c, const DataStore& store, std::ostream* log = nullptr) {
  if (c.regime != Regime::md) throw ConfigError("run_multidomain: regime is " + std::string(to_string(c.regime)));
  return run_regime(c, store, ForwardMode::plain, log);
}

inline RunResult run_dat(const TrainingConfig& c, const DataStore& store, std::ostream* log = nullptr) {
  if (c.regime != Regime::dat) throw ConfigError("run_dat: regime is " + std::string(to_string(c.regime)));
  return run_regime(c, store, ForwardMode::dat, log);
}

inline RunResult run_ood(const TrainingConfig& c, const DataStore& store, std::ostream* log = nullptr) {
  if (c.regime != Regime::ood) throw ConfigError("run_ood: regime is " + std::string(to_string(c.regime)));
  if (std::find(c.eval_corpora.begin(), c.eval_corpora.end(), *c.adapt_corpus) == c.eval_corpora.end())
    throw ConfigError("run_ood: eval corpora must include the held-out corpus");
  return run_regime(c, store, ForwardMode::plain, log);
}

/// Continues training every parameter of `base` on `c.adapt_corpus` alone
/// with a fresh optimiser. `base_train_corpora` are the corpora the base
/// model saw; the adaptation corpus must not be one of them.
inline RunResult adapt(const ModelParameters& base, const std::vector<std::string>& base_train_corpora,
                       const TrainingConfig& c, const DataStore& store, std::ostream* log = nullptr) {
  if (!c.adapt_corpus) throw ConfigError("adapt: no adaptation corpus");
  if (std::find(base_train_corpora.begin(), base_train_corpora.end(), *c.adapt_corpus) != base_train_corpora.end())
    throw ValidationError("adapt: corpus '" + *c.adapt_corpus + "' was part of the base model's training data");
  if (!(base.dims.n_classes == static_cast<int>(c.classes.size())))
    throw ConfigError("adapt: class set differs from the base model");
  TrainSpec s = spec_from(c, ForwardMode::plain);
  s.corpora = {*c.adapt_corpus};
  ModelParameters start = base;
  start.zero_grad();
  return train_run(std::move(start), store, s, log);
}

// ---------------------------------------------------------------------------
// Checkpoints (run directories)

struct Checkpoint {
  ModelParameters params;
  ModelMeta meta;
  TrainingConfig config;
  int epoch = 0;
  double score = 0;
};

inline void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ck) {
  std::filesystem::create_directories(dir);
  save_model(dir / "model", ck.params, ck.meta);
  std::ofstream os(dir / "checkpoint.txt");
  if (!os) throw IoError("cannot write " + (dir / "checkpoint.txt").string());
  os << "epoch = " << ck.epoch << "\nscore = " << format_double(ck.score) << "\n";
  std::ofstream cfg(dir / "config.txt");
  cfg << config_to_kv(ck.config).to_string();
}

inline Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  Checkpoint ck;
  auto [params, meta] = load_model(dir / "model");
  ck.params = std::move(params);
  ck.meta = std::move(meta);
  auto kv = KeyValueFile::load((dir / "checkpoint.txt").string());
  ck.epoch = static_cast<int>(parse_int(kv.get_or("epoch", "0"), "epoch"));
  ck.score = parse_double(kv.get_or("score", "0"), "score");
  ck.config = parse_config(KeyValueFile::load((dir / "config.txt").string()));
  return ck;
}

// ---------------------------------------------------------------------------
// Domain probe

/// Trains a linear softmax probe to predict the corpus from frozen encoder
/// outputs of the training utterances and returns its accuracy on the test
/// utterances. Measures how much domain information the encoder keeps.
inline double domain_probe_accuracy(ModelParameters& p, const DataStore& store,
                                    const std::vector<std::string>& corpora, int epochs = 30,
                                    std::uint64_t seed = 1, double lr = 1e-2) {
  struct Rep {
    ad::Matrix x;
    std::size_t domain;
  };
  std::vector<Rep> train, test;
  for (std::size_t d = 0; d < corpora.size(); ++d) {
    for (const auto& it : store.train_items(corpora[d])) train.push_back({encode(p, *it.features), d});
    for (const auto& it : store.test(corpora[d])) test.push_back({encode(p, *it.features), d});
  }
  if (train.empty() || test.empty()) throw TrainingError("domain probe: no data");
  const auto dim = train.front().x.rows();
  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  std::uniform_real_distribution<double> u(-bound, bound);
  ad::Parameter w("probe.w", ad::Matrix::NullaryExpr(static_cast<Eigen::Index>(corpora.size()), dim,
                                                     [&] { return u(rng); }));
  ad::Parameter b("probe.b", ad::Matrix::Zero(static_cast<Eigen::Index>(corpora.size()), 1));
  std::vector<ad::Parameter*> params{&w, &b};
  AdamState adam;
  adam.learning_rate = lr;
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (int e = 0; e < epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (auto i : order) {
      w.zero_grad();
      b.zero_grad();
      ad::Tape tape;
      auto loss = ad::cross_entropy(ad::affine(tape.constant(train[i].x), tape.param(w), tape.param(b)),
                                    train[i].domain);
      tape.backward(loss);
      adam_step(params, adam);
    }
  }
  std::size_t correct = 0;
  for (const auto& r : test) {
    ad::Matrix logits = w.value * r.x + b.value;
    Eigen::Index top;
    logits.col(0).maxCoeff(&top);
    correct += static_cast<std::size_t>(top) == r.domain;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace sercc

#endif  // SERCC_TRAINING_HPP_
