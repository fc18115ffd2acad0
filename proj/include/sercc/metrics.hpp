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

// Per-class binary confusions and the two accuracy figures reported per class:
//
//   UA = (TP + TN) / (P + N)          plain accuracy of the binary decision
//   WA = (TP / P + TN / N) / 2        class-balanced accuracy
//
// The names follow the emotion literature this toolkit reproduces, even
// though "UA" here is the unbalanced figure. Corpus-level values are the
// unweighted mean over classes whose value is defined.

#ifndef SERCC_METRICS_HPP_
#define SERCC_METRICS_HPP_

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "sercc/corpus.hpp"
#include "sercc/error.hpp"

namespace sercc {

struct ConfusionCounts {
  long long tp = 0, fp = 0, tn = 0, fn = 0;

  long long positives() const { return tp + fn; }
  long long negatives() const { return tn + fp; }
  long long total() const { return tp + fp + tn + fn; }

  void add(bool predicted, bool actual) {
    if (predicted && actual) ++tp;
    else if (predicted) ++fp;
    else if (actual) ++fn;
    else ++tn;
  }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp, fp += o.fp, tn += o.tn, fn += o.fn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

inline double ua(const ConfusionCounts& c) {
  if (c.total() == 0) throw UndefinedMetricError("ua: no samples");
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

inline double wa(const ConfusionCounts& c) {
  if (c.positives() == 0 || c.negatives() == 0)
    throw UndefinedMetricError("wa: class has no positive or no negative samples");
  return 0.5 * (static_cast<double>(c.tp) / static_cast<double>(c.positives()) +
                static_cast<double>(c.tn) / static_cast<double>(c.negatives()));
}

inline std::optional<double> try_ua(const ConfusionCounts& c) {
  return c.total() > 0 ? std::optional(ua(c)) : std::nullopt;
}
inline std::optional<double> try_wa(const ConfusionCounts& c) {
  return c.positives() > 0 && c.negatives() > 0 ? std::optional(wa(c)) : std::nullopt;
}

struct Prediction {
  std::string id;
  std::vector<double> scores;  // softmax posterior over the class set
};

struct Reference {
  std::string id;
  std::vector<bool> present;  // over the same class set
};

/// Index of the largest score; ties resolve to the lowest index.
inline std::size_t argmax(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

namespace detail {

/// Pairs each reference with its prediction by id.
inline std::vector<const Prediction*> align(std::span<const Prediction> preds, std::span<const Reference> refs,
                                            std::size_t n_scores, std::size_t n_ref_classes) {
  if (preds.size() != refs.size())
    throw AlignmentError("metrics: " + std::to_string(preds.size()) + " predictions for " +
                         std::to_string(refs.size()) + " references");
  std::map<std::string, const Prediction*> by_id;
  for (const auto& p : preds) {
    if (p.scores.size() != n_scores)
      throw AlignmentError("metrics: prediction '" + p.id + "' has " + std::to_string(p.scores.size()) +
                           " scores, expected " + std::to_string(n_scores));
    if (!by_id.emplace(p.id, &p).second) throw AlignmentError("metrics: duplicate prediction id '" + p.id + "'");
  }
  std::vector<const Prediction*> out;
  for (const auto& r : refs) {
    auto it = by_id.find(r.id);
    if (it == by_id.end()) throw AlignmentError("metrics: no prediction for '" + r.id + "'");
    if (r.present.size() != n_ref_classes)
      throw AlignmentError("metrics: reference '" + r.id + "' has the wrong class count");
    out.push_back(it->second);
  }
  return out;
}

}  // namespace detail

/// Single-label references are decided by argmax; any other reference
/// (several labels or none) by one-vs-rest thresholding of each score at 0.5.
inline std::vector<ConfusionCounts> confusion_from_predictions(std::span<const Prediction> preds,
                                                               std::span<const Reference> refs,
                                                               const ClassSet& classes) {
  const std::size_t k = classes.size();
  auto aligned = detail::align(preds, refs, k, k);
  std::vector<ConfusionCounts> counts(k);
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto& ref = refs[i];
    const auto& scores = aligned[i]->scores;
    const auto n_present = std::count(ref.present.begin(), ref.present.end(), true);
    if (n_present == 1) {
      const std::size_t top = argmax(scores);
      for (std::size_t c = 0; c < k; ++c) counts[c].add(c == top, ref.present[c]);
    } else {
      for (std::size_t c = 0; c < k; ++c) counts[c].add(scores[c] >= 0.5, ref.present[c]);
    }
  }
  return counts;
}

/// Four-class IEMOCAP scoring for a model trained on `model_classes`.
/// `preds` score the model's classes; `refs` carry presence over
/// ClassSet::iem4(). References with none of the four labels are skipped.
/// The decision is the argmax restricted to the IEM4 classes the model
/// knows; IEM4 classes the model lacks come back as nullopt.
inline std::vector<std::optional<ConfusionCounts>> iem4_view(std::span<const Prediction> preds,
                                                             std::span<const Reference> refs,
                                                             const ClassSet& model_classes) {
  const auto view = ClassSet::iem4();
  auto aligned = detail::align(preds, refs, model_classes.size(), view.size());
  std::vector<std::optional<std::size_t>> model_index(view.size());
  bool any = false;
  for (std::size_t c = 0; c < view.size(); ++c) {
    model_index[c] = model_classes.index_of(view[c]);
    any = any || model_index[c].has_value();
  }
  if (!any) throw EmptyReportError("iem4 view: model knows none of the four classes");
  std::vector<std::optional<ConfusionCounts>> counts(view.size());
  for (std::size_t c = 0; c < view.size(); ++c)
    if (model_index[c]) counts[c] = ConfusionCounts{};
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto& ref = refs[i];
    if (std::none_of(ref.present.begin(), ref.present.end(), [](bool b) { return b; })) continue;
    const auto& scores = aligned[i]->scores;
    std::optional<std::size_t> top;
    for (std::size_t c = 0; c < view.size(); ++c) {
      if (!model_index[c]) continue;
      if (!top || scores[*model_index[c]] > scores[*model_index[*top]]) top = c;
    }
    for (std::size_t c = 0; c < view.size(); ++c)
      if (counts[c]) counts[c]->add(c == *top, ref.present[c]);
  }
  return counts;
}

// ---------------------------------------------------------------------------
// Reports

struct ClassCell {
  Emotion emotion = Emotion::happy;
  std::optional<ConfusionCounts> counts;  // nullopt: class not scored
  std::optional<double> ua, wa;
};

struct CorpusReport {
  std::string corpus;
  std::vector<ClassCell> cells;
  std::optional<double> ua, wa;
};

struct MetricsReport {
  std::string provenance;
  std::vector<CorpusReport> corpora;

  const CorpusReport& at(const std::string& corpus) const {
    for (const auto& c : corpora)
      if (c.corpus == corpus) return c;
    throw ArgumentError("report has no corpus '" + corpus + "'");
  }
  bool has(const std::string& corpus) const {
    for (const auto& c : corpora)
      if (c.corpus == corpus) return true;
    return false;
  }
};

/// Cells for one corpus; the corpus figures average the defined cells.
inline CorpusReport aggregate_corpus(const std::string& corpus,
                                     const std::vector<std::optional<ConfusionCounts>>& counts,
                                     const ClassSet& classes) {
  if (counts.size() != classes.size()) throw ArgumentError("aggregate: counts do not match the class set");
  CorpusReport r;
  r.corpus = corpus;
  double ua_sum = 0, wa_sum = 0;
  int ua_n = 0, wa_n = 0;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    ClassCell cell;
    cell.emotion = classes[c];
    cell.counts = counts[c];
    if (counts[c]) {
      cell.ua = try_ua(*counts[c]);
      cell.wa = try_wa(*counts[c]);
    }
    if (cell.ua) ua_sum += *cell.ua, ++ua_n;
    if (cell.wa) wa_sum += *cell.wa, ++wa_n;
    r.cells.push_back(cell);
  }
  if (ua_n == 0 && wa_n == 0)
    throw EmptyReportError("aggregate: no class of corpus '" + corpus + "' has a defined metric");
  if (ua_n) r.ua = ua_sum / ua_n;
  if (wa_n) r.wa = wa_sum / wa_n;
  return r;
}

inline CorpusReport aggregate_corpus(const std::string& corpus, const std::vector<ConfusionCounts>& counts,
                                     const ClassSet& classes) {
  return aggregate_corpus(corpus, std::vector<std::optional<ConfusionCounts>>(counts.begin(), counts.end()),
                          classes);
}

/// One corpus report per entry of `per_corpus`, in the given order.
inline MetricsReport aggregate_report(
    const std::vector<std::pair<std::string, std::vector<ConfusionCounts>>>& per_corpus, const ClassSet& classes,
    std::string provenance = {}) {
  MetricsReport report;
  report.provenance = std::move(provenance);
  for (const auto& [corpus, counts] : per_corpus) report.corpora.push_back(aggregate_corpus(corpus, counts, classes));
  if (report.corpora.empty()) throw EmptyReportError("aggregate: no corpora");
  return report;
}

inline std::string format_metric(std::optional<double> v) {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

/// Tab-separated report. Column order:
///   cell    corpus  class  tp  fp  tn  fn  ua  wa
///   corpus  corpus  n      ua  wa
/// Absent values print as NA.
inline void write_report(std::ostream& os, const MetricsReport& r) {
  os << "# sercc metrics report v1\n";
  if (!r.provenance.empty()) os << "# provenance: " << r.provenance << "\n";
  for (const auto& c : r.corpora) {
    long long n = 0;
    for (const auto& cell : c.cells) {
      os << "cell\t" << c.corpus << '\t' << to_string(cell.emotion);
      if (cell.counts) {
        os << '\t' << cell.counts->tp << '\t' << cell.counts->fp << '\t' << cell.counts->tn << '\t' << cell.counts->fn;
        n = std::max(n, cell.counts->total());
      } else {
        os << "\tNA\tNA\tNA\tNA";
      }
      os << '\t' << format_metric(cell.ua) << '\t' << format_metric(cell.wa) << '\n';
    }
    os << "corpus\t" << c.corpus << '\t' << n << '\t' << format_metric(c.ua) << '\t' << format_metric(c.wa) << '\n';
  }
}

inline std::string report_to_string(const MetricsReport& r) {
  std::ostringstream os;
  write_report(os, r);
  return os.str();
}

}  // namespace sercc

#endif  // SERCC_METRICS_HPP_
