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

// Acceptance harness. Prints one PASS/FAIL line per criterion followed by a
// summary, and mirrors the lines into the file given with --results.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sercc/experiments.hpp"

namespace {

using namespace sercc;
using ad::Matrix;
using Clock = std::chrono::steady_clock;

constexpr int kSeeds = 5;
const std::vector<std::string> kCorpora = {"SYA", "SYB", "SYC", "SYD"};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// ---------------------------------------------------------------------------
// Tiny model used by the gradient checks.

ModelDims tiny_dims() {
  ModelDims d;
  d.input_dim = 4;
  d.hidden = 8;
  d.layers = 1;
  d.attention_dim = 4;
  d.n_classes = 3;
  d.n_domains = 2;
  return d;
}

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

// Five-point stencil derivative.
double central_difference(ad::Parameter& w, Eigen::Index i, const std::function<double()>& f) {
  const double h = 1e-3, orig = w.value.data()[i];
  auto at = [&](double dx) {
    w.value.data()[i] = orig + dx;
    const double v = f();
    w.value.data()[i] = orig;
    return v;
  };
  return (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
}

// Relative error; below 1e-8 in magnitude both sides count as zero, which is
// where the difference quotient's own rounding noise lives.
double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / scale;
}

Outcome gradient_correctness() {
  const auto t0 = Clock::now();
  auto p = init_params(tiny_dims(), 2024);
  const Matrix x = gaussian(5, 4, 77);
  const std::size_t y = 2, d = 1;
  const double lambda = 0.007;
  auto emotion_loss = [&] {
    ad::Tape t(false);
    return ad::cross_entropy(model_forward(t, x, p).emotion_logits, y).scalar();
  };
  auto domain_loss = [&] {
    ad::Tape t(false);
    return ad::cross_entropy(*model_forward(t, x, p, ForwardMode::dat, lambda).domain_logits, d).scalar();
  };
  double worst = 0;
  std::size_t checked = 0;

  // Emotion cross-entropy alone.
  p.zero_grad();
  {
    ad::Tape t;
    t.backward(ad::cross_entropy(model_forward(t, x, p).emotion_logits, y));
  }
  for (auto* w : p.all())
    for (Eigen::Index i = 0; i < w->value.size(); ++i, ++checked)
      worst = std::max(worst, relative_error(w->grad.data()[i], central_difference(*w, i, emotion_loss)));

  // Full DAT objective. The reversal flips the domain term on the shared
  // parameters, so the reference there is fe - lambda * fdom.
  p.zero_grad();
  {
    ad::Tape t;
    auto r = model_forward(t, x, p, ForwardMode::dat, lambda);
    t.backward(ad::add(ad::cross_entropy(r.emotion_logits, y), ad::cross_entropy(*r.domain_logits, d)));
  }
  auto check = [&](std::vector<ad::Parameter*> ws, double fe_weight, double fdom_weight) {
    for (auto* w : ws)
      for (Eigen::Index i = 0; i < w->value.size(); ++i, ++checked) {
        double want = 0;
        if (fe_weight != 0) want += fe_weight * central_difference(*w, i, emotion_loss);
        if (fdom_weight != 0) want += fdom_weight * central_difference(*w, i, domain_loss);
        worst = std::max(worst, relative_error(w->grad.data()[i], want));
      }
  };
  check(p.shared(), 1.0, -lambda);
  check(p.emotion(), 1.0, 0.0);
  check(p.domain(), 0.0, 1.0);

  const double secs = seconds_since(t0);
  return {worst <= 1e-4 && secs < 60,
          std::to_string(checked) + " entries, max rel err " + fmt("%.2e", worst) + " (tol 1e-4), " +
              fmt("%.2f", secs) + " s (limit 60)"};
}

// Shared-parameter gradients of the domain loss, through the reversal layer
// or through a plain identity.
std::vector<Matrix> domain_path_gradients(ModelParameters& p, const Matrix& x, std::size_t d,
                                          std::optional<double> lambda, std::vector<Matrix>* head) {
  p.zero_grad();
  ad::Tape t;
  ad::Var logits;
  if (lambda) {
    logits = *model_forward(t, x, p, ForwardMode::dat, *lambda).domain_logits;
  } else {
    auto r = model_forward(t, x, p);
    logits = ad::affine(r.attended, t.param(p.dom_w), t.param(p.dom_b));
  }
  t.backward(ad::cross_entropy(logits, d));
  std::vector<Matrix> out;
  for (auto* w : p.shared()) out.push_back(w->grad);
  if (head) {
    head->clear();
    for (auto* w : p.domain()) head->push_back(w->grad);
  }
  return out;
}

Outcome reversal_law() {
  auto p = init_params(tiny_dims(), 99);
  const Matrix x = gaussian(6, 4, 5);
  std::vector<Matrix> id_head;
  const auto identity = domain_path_gradients(p, x, 0, std::nullopt, &id_head);
  double worst_ratio = 0, worst_entry = 0, head_diff = 0;
  bool zero_ok = true;
  for (double lambda : {0.0, 0.007, 0.014}) {
    std::vector<Matrix> head;
    const auto reversed = domain_path_gradients(p, x, 0, lambda, &head);
    for (std::size_t i = 0; i < head.size(); ++i)
      head_diff = std::max(head_diff, (head[i] - id_head[i]).cwiseAbs().maxCoeff());
    for (std::size_t i = 0; i < identity.size(); ++i) {
      if (lambda == 0) {
        zero_ok = zero_ok && reversed[i].isZero(0.0);
        continue;
      }
      const double ratio = -reversed[i].cwiseProduct(identity[i]).sum() / identity[i].squaredNorm();
      worst_ratio = std::max(worst_ratio, std::abs(ratio / lambda - 1));
      worst_entry =
          std::max(worst_entry, (reversed[i] + lambda * identity[i]).cwiseAbs().maxCoeff() /
                                    std::max(lambda * identity[i].cwiseAbs().maxCoeff(), 1e-300));
    }
  }
  const bool pass = zero_ok && worst_ratio <= 1e-6 && worst_entry <= 1e-6 && head_diff == 0;
  return {pass, std::string("lambda=0 ") + (zero_ok ? "zero" : "nonzero") + ", max |ratio/(-lambda)-1| " +
                    fmt("%.2e", worst_ratio) + ", max entry dev " + fmt("%.2e", worst_entry) +
                    " (tol 1e-6), head grad diff " + fmt("%.1e", head_diff)};
}

// ---------------------------------------------------------------------------
// Metric oracle.

ClassSet first_k(std::size_t k) {
  auto all = ClassSet::big_six_neutral().classes();
  return {"first" + std::to_string(k), {all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k)}};
}

Outcome metric_oracle() {
  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int mismatches = 0, compared = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 1 + rng() % 7, n = 1 + rng() % 50;
    const auto classes = first_k(k);
    std::vector<Prediction> preds;
    std::vector<Reference> refs;
    for (std::size_t i = 0; i < n; ++i) {
      Prediction p;
      p.id = "u" + std::to_string(i);
      double total = 0;
      for (std::size_t c = 0; c < k; ++c) total += p.scores.emplace_back(u(rng));
      for (auto& s : p.scores) s /= total;
      Reference r;
      r.id = p.id;
      r.present.assign(k, false);
      if (rng() % 3 == 0) {
        for (std::size_t c = 0; c < k; ++c) r.present[c] = rng() % 3 == 0;
      } else {
        r.present[rng() % k] = true;
      }
      preds.push_back(std::move(p));
      refs.push_back(std::move(r));
    }
    std::shuffle(preds.begin(), preds.end(), rng);

    // Brute-force tally.
    std::vector<std::array<long long, 4>> t(k, {0, 0, 0, 0});  // tp fp tn fn
    for (const auto& r : refs) {
      const Prediction* p = nullptr;
      for (const auto& q : preds)
        if (q.id == r.id) p = &q;
      const int n_present = static_cast<int>(std::count(r.present.begin(), r.present.end(), true));
      std::size_t top = 0;
      for (std::size_t c = 0; c < k; ++c)
        if (p->scores[c] > p->scores[top]) top = c;
      for (std::size_t c = 0; c < k; ++c) {
        const bool predicted = n_present == 1 ? c == top : p->scores[c] >= 0.5;
        ++t[c][predicted ? (r.present[c] ? 0 : 1) : (r.present[c] ? 3 : 2)];
      }
    }
    const auto counts = confusion_from_predictions(preds, refs, classes);
    double ua_sum = 0, wa_sum = 0;
    int ua_n = 0, wa_n = 0;
    for (std::size_t c = 0; c < k; ++c) {
      ++compared;
      const auto& o = t[c];
      if (counts[c].tp != o[0] || counts[c].fp != o[1] || counts[c].tn != o[2] || counts[c].fn != o[3]) ++mismatches;
      const long long pos = o[0] + o[3], neg = o[2] + o[1];
      if (pos + neg > 0) ua_sum += static_cast<double>(o[0] + o[2]) / static_cast<double>(pos + neg), ++ua_n;
      if (pos > 0 && neg > 0) {
        const double per = 0.5 * (static_cast<double>(o[0]) / static_cast<double>(pos) +
                                  static_cast<double>(o[2]) / static_cast<double>(neg));
        wa_sum += per, ++wa_n;
        if (try_wa(counts[c]) != per) ++mismatches;
      }
      if (pos + neg > 0 && try_ua(counts[c]) != static_cast<double>(o[0] + o[2]) / static_cast<double>(pos + neg))
        ++mismatches;
    }
    if (ua_n == 0 && wa_n == 0) continue;
    const auto report = aggregate_report({{"X", counts}}, classes);
    const auto& r = report.at("X");
    if (r.ua.has_value() != (ua_n > 0) || r.wa.has_value() != (wa_n > 0)) ++mismatches;
    if (ua_n && *r.ua != ua_sum / ua_n) ++mismatches;
    if (wa_n && *r.wa != wa_sum / wa_n) ++mismatches;
  }

  // Always-positive predictor with balanced classes.
  bool half = true;
  for (long long pn : {1LL, 7LL, 500LL}) half = half && wa(ConfusionCounts{pn, pn, 0, 0}) == 0.5;
  {
    const auto classes = first_k(2);
    std::vector<Prediction> preds;
    std::vector<Reference> refs;
    for (int i = 0; i < 40; ++i) {
      preds.push_back({"p" + std::to_string(i), {0.9, 0.1}});
      refs.push_back({"p" + std::to_string(i), {i % 2 == 0, i % 2 == 1}});
    }
    half = half && try_wa(confusion_from_predictions(preds, refs, classes)[0]) == 0.5;
  }
  return {mismatches == 0 && half, std::to_string(compared) + " class tallies over 100 instances, " +
                                        std::to_string(mismatches) + " mismatches; always-positive wa " +
                                        (half ? "= 0.5 exactly" : "!= 0.5")};
}

// ---------------------------------------------------------------------------
// DSP.

Outcome dsp_correctness() {
  std::mt19937 rng(31);
  std::normal_distribution<double> g(0.0, 5.0);
  double worst_dct = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 8 + static_cast<int>(rng() % 33);
    const int k = 1 + static_cast<int>(rng() % static_cast<unsigned>(n));
    std::vector<double> x(static_cast<std::size_t>(n));
    for (auto& v : x) v = g(rng);
    const auto c = mfcc(x, k);
    for (int j = 0; j < k; ++j) {
      double acc = 0;
      for (int i = 0; i < n; ++i) acc += x[i] * std::cos(std::numbers::pi * j * (i + 0.5) / n);
      acc *= std::sqrt((j == 0 ? 1.0 : 2.0) / n);
      worst_dct = std::max(worst_dct, std::abs(c[j] - acc));
    }
  }
  const bool mel_ok = hz_to_mel(0.0) == 0.0 && std::abs(hz_to_mel(700.0) - 781.17) <= 1e-2;

  int frame_errors = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t len = 16 + rng() % 600, hop = 1 + rng() % len, n = len + rng() % 5000;
    std::vector<double> x(n, 0.0);
    if (frame_signal(x, len, hop).size() != 1 + (n - len) / hop) ++frame_errors;
  }

  FeatureConfig fc;
  const auto fb = mel_filterbank_matrix(fc, 16000);
  bool finite = true;
  std::uniform_real_distribution<double> e(-300.0, 300.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> s(257);
    for (auto& v : s) {
      switch (rng() % 4) {
        case 0: v = 0.0; break;
        case 1: v = std::numeric_limits<double>::denorm_min(); break;
        default: v = std::pow(10.0, e(rng)); break;
      }
    }
    for (double v : log_mel(s, fb, 1e-10)) finite = finite && std::isfinite(v);
  }
  const bool pass = worst_dct <= 1e-10 && mel_ok && frame_errors == 0 && finite;
  return {pass, "mfcc vs DCT max abs err " + fmt("%.2e", worst_dct) + " (tol 1e-10), mel(700)=" +
                    fmt("%.4f", hz_to_mel(700.0)) + ", frame sweep " + std::to_string(frame_errors) +
                    "/500 wrong, log_mel " + (finite ? "finite" : "non-finite")};
}

Outcome attention_normalisation() {
  ModelDims d = tiny_dims();
  auto p = init_params(d, 8);
  double worst = 0;
  for (int steps : {1, 2, 17, 301}) {
    ad::Tape t(false);
    auto r = model_forward(t, gaussian(steps, d.input_dim, 100 + static_cast<std::uint64_t>(steps)), p);
    worst = std::max(worst, std::abs(r.attention_weights.value().sum() - 1.0));
  }
  Matrix h(9, 2 * d.hidden);
  h.rowwise() = gaussian(1, 2 * d.hidden, 13).row(0);
  ad::Tape t(false);
  auto att = attention_forward(t, t.constant(h), p);
  const double uniform_dev = (att.weights.value().array() - 1.0 / 9).abs().maxCoeff();
  return {worst <= 1e-6 && uniform_dev <= 1e-6,
          "max |sum-1| " + fmt("%.2e", worst) + " over T in {1,2,17,301}, identical-row deviation " +
              fmt("%.2e", uniform_dev) + " (tol 1e-6)"};
}

// ---------------------------------------------------------------------------
// Synthetic corpora and the regime grid.

SynthSpec synthetic_spec(std::uint64_t seed, double tilt_scale = 1.0, double noise_scale = 1.0) {
  SynthSpec s;
  s.seed = seed;
  s.n_speakers = 10;
  s.segments_per_emotion = 4;
  s.duration = 0.3;
  s.silence = 0.03;
  s.emotions = {{Emotion::happy, 260, 6, 0.30},   {Emotion::sad, 140, 2, 0.08},  {Emotion::anger, 220, 8, 0.5},
                {Emotion::surprise, 340, 4, 0.3}, {Emotion::disgust, 170, 5, 0.15}, {Emotion::fear, 300, 10, 0.12}};
  s.domains = {{"SYA", 0.0, 0.002 * noise_scale},
               {"SYB", 0.9 * tilt_scale, 0.005 * noise_scale},
               {"SYC", -0.6 * tilt_scale, 0.01 * noise_scale},
               {"SYD", 0.5 * tilt_scale, 0.03 * noise_scale}};
  return s;
}

DataStore build_store(const SynthSpec& spec) {
  FeatureConfig fc;
  DataStore store;
  for (const auto& m : generate_synthetic(spec))
    store.add(build_corpus_data(m, [&](const Utterance& u) { return extract_features(u, fc); },
                                ClassSet::big_six()));
  return store;
}

TrainingConfig desk_config(std::uint64_t seed) {
  TrainingConfig c;
  c.epochs = 15;
  c.hidden = 16;
  c.layers = 1;
  c.attention_dim = 8;
  c.seed = seed;
  return c;
}

// Fraction of test utterances whose argmax matches the generating emotion.
double accuracy(ModelParameters p, const DataStore& store, const std::string& corpus) {
  const auto classes = ClassSet::big_six();
  std::size_t right = 0, total = 0;
  for (const auto& item : store.test(corpus)) {
    const auto want = classes.index_of(*emotion_from_name(item.labels.at(0).name));
    const ad::Vector s = predict_scores(p, *item.features);
    Eigen::Index top = 0;
    s.maxCoeff(&top);
    right += want && static_cast<std::size_t>(top) == *want;
    ++total;
  }
  return total ? static_cast<double>(right) / static_cast<double>(total) : 0.0;
}

struct SeedRun {
  GridResult grid;
  std::map<std::string, double> matched_accuracy;
  std::size_t utterances_per_cell = 0;
  double seconds = 0;
};

SeedRun run_seed_grid(std::uint64_t seed) {
  const auto t0 = Clock::now();
  const auto spec = synthetic_spec(seed);
  SeedRun out;
  out.utterances_per_cell = static_cast<std::size_t>(spec.n_speakers * spec.segments_per_emotion);
  const auto store = build_store(spec);
  out.grid = run_grid(store, kCorpora, desk_config(seed));
  for (const auto& k : kCorpora) out.matched_accuracy[k] = accuracy(out.grid.cc.at(k).params, store, k);
  out.seconds = seconds_since(t0);
  return out;
}

double ua_of(const RunResult& r, const std::string& corpus) { return corpus_ua(r, corpus).value_or(-1.0); }

Outcome matched_learning(const SeedRun& s) {
  double lowest = 1.0;
  std::string parts;
  for (const auto& [k, acc] : s.matched_accuracy) {
    lowest = std::min(lowest, acc);
    parts += k + "=" + fmt("%.3f", acc) + " ";
  }
  const int epochs = desk_config(1).epochs;
  const bool pass = lowest >= 0.90 && epochs <= 50 && s.seconds <= 15 * 60 && s.utterances_per_cell >= 40;
  return {pass, "matched CC accuracy " + parts + "(min " + fmt("%.3f", lowest) + ", need 0.90), " +
                    std::to_string(s.utterances_per_cell) + " utt/emotion/domain, " + std::to_string(epochs) +
                    " epochs, full grid " + fmt("%.0f", s.seconds) + " s (limit 900)"};
}

Outcome orderings(const std::vector<SeedRun>& runs) {
  int matched = 0, md = 0, ood = 0, adapted = 0;
  for (const auto& s : runs) {
    const auto& g = s.grid;
    bool m_ok = true, md_ok = true, ood_ok = true, ad_ok = true;
    for (const auto& d : kCorpora) {
      double best = -1, worst = 2;
      for (const auto& j : kCorpora) {
        if (j == d) continue;
        best = std::max(best, ua_of(g.cc.at(j), d));
        worst = std::min(worst, ua_of(g.cc.at(j), d));
      }
      const double own = ua_of(g.cc.at(d), d);
      m_ok = m_ok && own >= best;
      md_ok = md_ok && ua_of(*g.md, d) > best;
      ood_ok = ood_ok && ua_of(g.ood.at(d), d) >= worst;
      ad_ok = ad_ok && ua_of(g.adapt.at(d), d) > ua_of(g.ood.at(d), d);
    }
    matched += m_ok;
    md += md_ok;
    ood += ood_ok;
    adapted += ad_ok;
  }
  const int need = kSeeds / 2 + 1;
  const bool pass = matched >= need && md >= need && ood >= need && adapted >= need;
  auto frac = [](int n) { return std::to_string(n) + "/" + std::to_string(kSeeds); };
  return {pass, "matched>=mismatched " + frac(matched) + ", MD>best mismatched " + frac(md) +
                    ", OOD>=worst mismatched " + frac(ood) + ", ADAPT>OOD " + frac(adapted) + " (need " +
                    std::to_string(need) + " each)"};
}

Outcome domain_confusion() {
  int lower = 0;
  std::string parts;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    const auto store = build_store(synthetic_spec(static_cast<std::uint64_t>(seed), 0.3, 0.5));
    auto c = desk_config(static_cast<std::uint64_t>(seed));
    c.train_corpora = c.eval_corpora = kCorpora;
    const auto p = compare_domain_probe(store, c, 0.007);
    lower += p.probe_with_reversal < p.probe_without_reversal;
    parts += fmt("%.3f", p.probe_with_reversal) + "/" + fmt("%.3f", p.probe_without_reversal) +
             (seed < kSeeds ? " " : "");
  }
  return {lower >= 4, "probe accuracy reversal/plain per seed " + parts + "; lower in " + std::to_string(lower) +
                          "/5 (need 4)"};
}

Outcome reproducibility() {
  const auto store = build_store(synthetic_spec(3));
  auto c = desk_config(3);
  c.epochs = 4;
  c.regime = Regime::cc;
  c.train_corpora = {"SYB"};
  c.eval_corpora = kCorpora;
  std::ostringstream log_a, log_b;
  const auto a = run_cross_corpus(c, store, &log_a);
  const auto b = run_cross_corpus(c, store, &log_b);
  auto dc = c;
  dc.regime = Regime::dat;
  dc.train_corpora = kCorpora;
  std::ostringstream dat_a, dat_b;
  run_dat(dc, store, &dat_a);
  run_dat(dc, store, &dat_b);
  const bool logs_equal = !log_a.str().empty() && log_a.str() == log_b.str() && dat_a.str() == dat_b.str();

  const auto dir = std::filesystem::temp_directory_path() / "sercc_acceptance_ck";
  std::filesystem::remove_all(dir);
  ModelMeta meta;
  meta.dims = a.params.dims;
  meta.classes = c.classes;
  meta.domains = c.train_corpora;
  meta.feature_kind = c.features.kind;
  save_checkpoint(dir, {a.params, meta, c, a.best_epoch, a.best_score});
  auto ck = load_checkpoint(dir);
  const auto again = evaluate(ck.params, store, c.eval_corpora, c.classes);
  bool exact = true;
  for (const auto& k : kCorpora)
    exact = exact && again.at(k).ua == a.report.at(k).ua && again.at(k).wa == a.report.at(k).wa;
  exact = exact && report_to_string(again) == report_to_string(a.report);
  std::filesystem::remove_all(dir);
  return {logs_equal && exact, std::string("rerun logs ") + (logs_equal ? "byte-identical" : "differ") +
                                   ", checkpoint round-trip UA/WA " + (exact ? "exact" : "differ")};
}

Outcome label_counts() {
  const std::vector<std::pair<std::string, int>> counts = {
      {"happy", 595},       {"sad", 1084},  {"anger", 1103},    {"surprise", 107},     {"disgust", 2},
      {"fear", 40},         {"neutral", 1708}, {"frustration", 1849}, {"excitement", 1041}, {"other", 3}};
  CorpusManifest m;
  m.corpus_id = "IEM";
  int k = 0;
  for (const auto& [label, n] : counts)
    for (int i = 0; i < n; ++i, ++k) {
      Utterance u;
      u.id = "iem" + std::to_string(k);
      u.corpus_id = "IEM";
      u.speaker_id = "Ses0" + std::to_string(1 + k % 5) + (k % 2 ? "F" : "M");
      u.labels = {{label, 1}};
      m.utterances.push_back(std::move(u));
    }
  const auto cs = ClassSet::iem4();
  const auto happy = *cs.index_of(Emotion::happy);
  int n = 0;
  for (const auto& u : m.utterances) n += map_labels(u, cs).presence(cs)[happy];
  return {n == 1636, std::to_string(k) + " segments, " + std::to_string(n) + " happy after merge (want 1636)"};
}

}  // namespace

int main(int argc, char** argv) {
  std::string results_path;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--results" && i + 1 < argc) {
      results_path = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--results FILE]\n";
      return 2;
    }
  }

  std::vector<std::pair<std::string, std::function<Outcome()>>> checks;
  std::vector<SeedRun> runs;
  auto grid_runs = [&]() -> const std::vector<SeedRun>& {
    if (runs.empty())
      for (int seed = 1; seed <= kSeeds; ++seed) runs.push_back(run_seed_grid(static_cast<std::uint64_t>(seed)));
    return runs;
  };
  checks.emplace_back("gradient-correctness", gradient_correctness);
  checks.emplace_back("gradient-reversal-law", reversal_law);
  checks.emplace_back("metric-oracle", metric_oracle);
  checks.emplace_back("dsp-correctness", dsp_correctness);
  checks.emplace_back("attention-normalisation", attention_normalisation);
  checks.emplace_back("matched-learning", [&] { return matched_learning(grid_runs().front()); });
  checks.emplace_back("regime-orderings", [&] { return orderings(grid_runs()); });
  checks.emplace_back("dat-domain-confusion", domain_confusion);
  checks.emplace_back("reproducibility", reproducibility);
  checks.emplace_back("label-pipeline-counts", label_counts);

  std::ostringstream lines;
  int passed = 0;
  for (auto& [name, fn] : checks) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    passed += o.pass;
    const std::string line = std::string(o.pass ? "PASS" : "FAIL") + "  " + name + "  " + o.detail;
    std::cout << line << std::endl;
    lines << line << "\n";
  }
  const std::string summary =
      "acceptance: " + std::to_string(passed) + "/" + std::to_string(checks.size()) + " criteria pass";
  std::cout << summary << std::endl;
  lines << summary << "\n";
  if (!results_path.empty()) {
    std::ofstream out(results_path);
    out << lines.str();
  }
  return 0;
}
