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

// The regime grid: one CC model per corpus, one MD model, one DAT model, one
// OOD model per held-out corpus and its adaptation, plus the summary tables.

#ifndef SERCC_EXPERIMENTS_HPP_
#define SERCC_EXPERIMENTS_HPP_

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sercc/training.hpp"

namespace sercc {

struct GridOptions {
  bool cc = true;
  bool md = true;
  bool dat = true;
  bool ood = true;
  bool adapt = true;
  int adapt_epochs = -1;  // -1: same as base
};

struct GridResult {
  std::vector<std::string> corpora;
  std::map<std::string, RunResult> cc;
  std::optional<RunResult> md;
  std::optional<RunResult> dat;
  std::map<std::string, RunResult> ood;    // keyed by held-out corpus
  std::map<std::string, RunResult> adapt;  // keyed by adaptation corpus
};

/// Per-run seed derived from the master seed and a run tag.
inline std::uint64_t run_seed(std::uint64_t master, std::string_view tag) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : tag) h = (h ^ ch) * 1099511628211ULL;
  return detail::mix_seed(master, {h}) & 0x7fffffffffffffffULL;
}

struct GridLogger {
  std::function<std::ostream*(const std::string& run)> open;  // may return null
  std::function<void(const std::string& run, const TrainingConfig&, const RunResult&)> done;
};

/// Runs the grid over `corpora` with `base` supplying hyperparameters, class
/// set and master seed. Every model is evaluated on every corpus, except the
/// adapted models, which are selected and scored on their own corpus.
inline GridResult run_grid(const DataStore& store, const std::vector<std::string>& corpora,
                           const TrainingConfig& base, const GridOptions& opt = {}, const GridLogger& logger = {}) {
  if (corpora.size() < 2) throw ConfigError("grid: needs at least two corpora");
  GridResult g;
  g.corpora = corpora;
  auto run = [&](const std::string& name, TrainingConfig c, auto&& fn) {
    c.seed = run_seed(base.seed, name);
    std::ostream* log = logger.open ? logger.open(name) : nullptr;
    RunResult r = fn(c, log);
    if (logger.done) logger.done(name, c, r);
    return r;
  };
  TrainingConfig c = base;
  c.eval_corpora = corpora;
  c.adapt_corpus.reset();

  if (opt.cc) {
    for (const auto& k : corpora) {
      c.regime = Regime::cc;
      c.train_corpora = {k};
      g.cc.emplace(k, run("CC-" + k, c, [&](const TrainingConfig& cfg, std::ostream* log) {
                     return run_cross_corpus(cfg, store, log);
                   }));
    }
  }
  c.train_corpora = corpora;
  if (opt.md) {
    c.regime = Regime::md;
    g.md = run("MD", c, [&](const TrainingConfig& cfg, std::ostream* log) { return run_multidomain(cfg, store, log); });
  }
  if (opt.dat) {
    c.regime = Regime::dat;
    g.dat = run("DAT", c, [&](const TrainingConfig& cfg, std::ostream* log) { return run_dat(cfg, store, log); });
  }
  if (opt.ood || opt.adapt) {
    for (const auto& held : corpora) {
      TrainingConfig o = c;
      o.regime = Regime::ood;
      o.adapt_corpus = held;
      o.train_corpora.clear();
      for (const auto& k : corpora)
        if (k != held) o.train_corpora.push_back(k);
      auto& base_run = g.ood.emplace(held, run("OOD-" + held, o, [&](const TrainingConfig& cfg, std::ostream* log) {
                                          return run_ood(cfg, store, log);
                                        }))
                           .first->second;
      if (!opt.adapt) continue;
      TrainingConfig a = o;
      a.regime = Regime::adapt;
      a.eval_corpora = {held};
      if (opt.adapt_epochs >= 0) a.epochs = opt.adapt_epochs;
      g.adapt.emplace(held, run("ADAPT-" + held, a, [&](const TrainingConfig& cfg, std::ostream* log) {
                        return adapt(base_run.params, o.train_corpora, cfg, store, log);
                      }));
    }
  }
  return g;
}

inline std::optional<double> corpus_ua(const RunResult& r, const std::string& corpus) {
  return r.report.has(corpus) ? r.report.at(corpus).ua : std::nullopt;
}

/// Rows = models, columns = corpora, cells "UA WA" pairs.
inline void write_corpus_table(std::ostream& os, const GridResult& g) {
  os << "model";
  for (const auto& k : g.corpora) os << '\t' << k << ".ua\t" << k << ".wa";
  os << "\tmean.ua\tmean.wa\n";
  auto row = [&](const std::string& name, const RunResult& r) {
    os << name;
    double su = 0, sw = 0;
    int nu = 0, nw = 0;
    for (const auto& k : g.corpora) {
      const auto& c = r.report.at(k);
      os << '\t' << format_metric(c.ua) << '\t' << format_metric(c.wa);
      if (c.ua) su += *c.ua, ++nu;
      if (c.wa) sw += *c.wa, ++nw;
    }
    os << '\t' << format_metric(nu ? std::optional(su / nu) : std::nullopt) << '\t'
       << format_metric(nw ? std::optional(sw / nw) : std::nullopt) << '\n';
  };
  for (const auto& k : g.corpora)
    if (g.cc.count(k)) row("CC-" + k, g.cc.at(k));
  if (g.md) row("MD", *g.md);
  if (g.dat) row("DAT", *g.dat);
}

/// Per-emotion breakdown, one line per (model, corpus, emotion).
inline void write_emotion_table(std::ostream& os, const GridResult& g) {
  os << "model\tcorpus\temotion\tua\twa\n";
  auto rows = [&](const std::string& name, const RunResult& r) {
    for (const auto& c : r.report.corpora)
      for (const auto& cell : c.cells)
        os << name << '\t' << c.corpus << '\t' << to_string(cell.emotion) << '\t' << format_metric(cell.ua) << '\t'
           << format_metric(cell.wa) << '\n';
  };
  for (const auto& k : g.corpora)
    if (g.cc.count(k)) rows("CC-" + k, g.cc.at(k));
  if (g.md) rows("MD", *g.md);
  if (g.dat) rows("DAT", *g.dat);
}

/// Held-out corpus results of the OOD models and their adaptations.
inline void write_held_out_table(std::ostream& os, const GridResult& g) {
  os << "held_out\tood.ua\tood.wa\tadapt.ua\tadapt.wa\n";
  for (const auto& k : g.corpora) {
    if (!g.ood.count(k)) continue;
    const auto& o = g.ood.at(k).report.at(k);
    os << k << '\t' << format_metric(o.ua) << '\t' << format_metric(o.wa);
    if (g.adapt.count(k)) {
      const auto& a = g.adapt.at(k).report.at(k);
      os << '\t' << format_metric(a.ua) << '\t' << format_metric(a.wa) << '\n';
    } else {
      os << "\tNA\tNA\n";
    }
  }
}

/// Probe accuracies for two DAT models that differ only in lambda.
struct ProbeComparison {
  double probe_with_reversal = 0;
  double probe_without_reversal = 0;
};

inline ProbeComparison compare_domain_probe(const DataStore& store, TrainingConfig c, double lambda,
                                            int probe_epochs = 30) {
  c.regime = Regime::dat;
  ProbeComparison out;
  for (double l : {lambda, 0.0}) {
    c.lambda = l;
    auto r = run_dat(c, store);
    const double acc = domain_probe_accuracy(r.final_params, store, c.train_corpora, probe_epochs, c.seed);
    (l == lambda ? out.probe_with_reversal : out.probe_without_reversal) = acc;
  }
  return out;
}

}  // namespace sercc

#endif  // SERCC_EXPERIMENTS_HPP_
