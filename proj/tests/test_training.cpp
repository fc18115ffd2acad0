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

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "sercc/experiments.hpp"
#include "sercc/training.hpp"

namespace sercc {
namespace {

const ClassSet kTwo = ClassSet::from_names({"happy", "sad"});

DataStore make_store() {
  SynthSpec s;
  s.n_speakers = 3;
  s.segments_per_emotion = 2;
  s.duration = 0.12;
  s.silence = 0.02;
  s.emotions = {{Emotion::happy, 260, 6, 0.3}, {Emotion::sad, 140, 2, 0.08}};
  s.domains = {{"A", 0.0, 0.002}, {"B", 0.6, 0.01}, {"C", -0.4, 0.005}};
  s.split_rule = "first:2";
  FeatureConfig fc;
  fc.n_mels = 8;
  DataStore store;
  for (const auto& m : generate_synthetic(s))
    store.add(build_corpus_data(m, [&](const Utterance& u) { return extract_features(u, fc); }, kTwo));
  return store;
}

const DataStore& store() {
  static const DataStore s = make_store();
  return s;
}

TrainingConfig tiny_config(Regime r, std::vector<std::string> train, int epochs = 2) {
  TrainingConfig c;
  c.regime = r;
  c.train_corpora = std::move(train);
  c.eval_corpora = {"A", "B", "C"};
  c.classes = kTwo;
  c.epochs = epochs;
  c.hidden = 4;
  c.layers = 1;
  c.attention_dim = 3;
  c.lr = 1e-3;
  c.seed = 7;
  return c;
}

EpochRecord record(int epoch, std::vector<double> uas) {
  EpochRecord r;
  r.epoch = epoch;
  for (std::size_t i = 0; i < uas.size(); ++i) r.corpus_metrics.push_back({"c" + std::to_string(i), {uas[i], 0.0}});
  return r;
}

std::string history_text(const RunResult& r) {
  std::string s;
  for (const auto& e : r.history) s += format_epoch(e) + "\n";
  return s;
}

TEST(SelectBest, Singleton) { EXPECT_EQ(select_best({record(1, {0.3})}), 1); }

TEST(SelectBest, EarliestTieWins) {
  EXPECT_EQ(select_best({record(1, {0.5}), record(2, {0.7}), record(3, {0.7})}), 2);
}

TEST(SelectBest, MeanOverCorpora) {
  EXPECT_EQ(select_best({record(1, {0.9, 0.5}), record(2, {0.65, 0.65})}), 1);
}

TEST(SelectBest, EmptyHistoryIsAnError) { EXPECT_THROW(select_best({}), TrainingError); }

TEST(Config, RegimeInvariants) {
  EXPECT_NO_THROW(tiny_config(Regime::cc, {"A"}).validate());
  EXPECT_THROW(tiny_config(Regime::cc, {"A", "B"}).validate(), ConfigError);
  EXPECT_THROW(tiny_config(Regime::md, {"A"}).validate(), ConfigError);
  EXPECT_THROW(tiny_config(Regime::dat, {"A"}).validate(), ConfigError);
  auto ood = tiny_config(Regime::ood, {"A", "B"});
  EXPECT_THROW(ood.validate(), ConfigError);
  ood.adapt_corpus = "B";
  EXPECT_THROW(ood.validate(), ConfigError);
  ood.adapt_corpus = "C";
  EXPECT_NO_THROW(ood.validate());
  auto c = tiny_config(Regime::cc, {"A"});
  c.batch_size = 4;
  EXPECT_THROW(c.validate(), ConfigError);
  c = tiny_config(Regime::cc, {"A"});
  c.eval_corpora.clear();
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(tiny_config(Regime::adapt, {}).validate(), ConfigError);
}

TEST(Config, ParseAndWriteRoundTrip) {
  std::istringstream is(
      "regime = DAT\n"
      "train_corpora = A, B\n"
      "eval_corpora = A,B,C\n"
      "classes = happy,sad\n"
      "epochs = 3\n"
      "lambda = 0.007\n"
      "manifests = m/a.manifest\n"
      "features = mfcc\n");
  auto c = parse_config(KeyValueFile::parse(is, "cfg"), "/base");
  EXPECT_EQ(c.regime, Regime::dat);
  EXPECT_EQ(c.train_corpora, (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(c.classes, kTwo);
  EXPECT_EQ(c.features.kind, FeatureKind::mfcc);
  EXPECT_EQ(c.manifests.front(), "/base/m/a.manifest");
  std::istringstream again(config_to_kv(c).to_string());
  auto d = parse_config(KeyValueFile::parse(again, "again"));
  EXPECT_EQ(config_to_kv(d).to_string(), config_to_kv(c).to_string());
}

TEST(Config, UnknownKeyIsRejected) {
  std::istringstream is("regime = CC\nlearning_rate = 0.1\n");
  EXPECT_THROW(parse_config(KeyValueFile::parse(is, "cfg")), ConfigError);
}

TEST(Data, MultiLabelUtterancesExpandPerClass) {
  CorpusManifest m;
  m.corpus_id = "M";
  Utterance u;
  u.corpus_id = "M";
  u.speaker_id = "s";
  u.split = Split::train;
  u.samples.assign(1600, 0.0f);
  u.id = "both";
  u.labels = {{"happy", 2}, {"sad", 1}, {"fear", 3}};
  m.utterances.push_back(u);
  u.id = "none";
  u.labels = {};
  m.utterances.push_back(u);
  auto fake = [](const Utterance&) {
    FeatureSequence f;
    f.frames = FeatureMatrix::Ones(3, 2);
    return f;
  };
  auto d = build_corpus_data(m, fake, kTwo);
  ASSERT_EQ(d.train.size(), 2u);
  EXPECT_EQ(d.train[0].label, 0u);
  EXPECT_EQ(d.train[1].label, 1u);
  EXPECT_EQ(d.train_items.size(), 2u);
  m.utterances[0].split = Split::unassigned;
  EXPECT_THROW(build_corpus_data(m, fake, kTwo), ValidationError);
}

TEST(Data, UnlabelledTestItemsAreSkippedAtEvaluation) {
  auto p = init_params(ModelDims{2, 3, 1, 2, 2, 1}, 1);
  auto item = [](std::string id, std::vector<Label> l) {
    return EvalItem{std::move(id), std::move(l), std::make_shared<const ad::Matrix>(ad::Matrix::Ones(3, 2))};
  };
  std::vector<EvalItem> test = {item("a", {{"happy", 1}}), item("b", {}), item("c", {{"fear", 1}})};
  auto r = evaluate_corpus(p, "X", test, kTwo);
  EXPECT_EQ(r.cells[0].counts->total(), 1);
  std::vector<EvalItem> none = {item("b", {}), item("c", {{"fear", 1}})};
  EXPECT_THROW(evaluate_corpus(p, "X", none, kTwo), EmptyReportError);
}

TEST(TrainEpoch, EmptyCorpusIsAnError) {
  auto p = init_params(ModelDims{8, 4, 1, 3, 2, 1}, 1);
  AdamState adam;
  std::mt19937_64 rng(1);
  EXPECT_THROW(train_epoch(p, {}, ForwardMode::plain, 0, adam, rng), TrainingError);
}

TEST(TrainEpoch, SingleSampleIsOneStep) {
  auto p = init_params(ModelDims{8, 4, 1, 3, 2, 1}, 1);
  const Sample& s = store().train("A").front();
  AdamState adam;
  std::mt19937_64 rng(1);
  auto stats = train_epoch(p, {&s}, ForwardMode::plain, 0, adam, rng);
  EXPECT_EQ(stats.steps, 1u);
  EXPECT_EQ(adam.step, 1);
}

TEST(TrainEpoch, DatLossIsEmotionPlusDomainPerSample) {
  auto p = init_params(ModelDims{8, 4, 1, 3, 2, 2}, 3);
  std::vector<Sample> samples;
  for (std::size_t d = 0; d < 2; ++d)
    for (auto s : store().train(d ? "B" : "A")) samples.push_back(s), samples.back().domain = d;
  std::vector<const Sample*> ptrs;
  for (const auto& s : samples) ptrs.push_back(&s);
  // A zero learning rate keeps the parameters fixed, so the logged losses can
  // be recomputed from the same weights afterwards.
  AdamState adam;
  adam.learning_rate = 0;
  std::mt19937_64 rng(2);
  auto stats = train_epoch(p, ptrs, ForwardMode::dat, 0.007, adam, rng);
  double ly = 0, ld = 0;
  for (const auto& s : samples) {
    ad::Tape t(false);
    auto r = model_forward(t, *s.features, p, ForwardMode::dat, 0.007);
    ly += ad::cross_entropy(r.emotion_logits, s.label).scalar();
    ld += ad::cross_entropy(*r.domain_logits, s.domain).scalar();
  }
  EXPECT_NEAR(stats.loss_sum, ly, 1e-9 * std::abs(ly));
  EXPECT_NEAR(stats.domain_loss_sum, ld, 1e-9 * std::abs(ld));
  EXPECT_EQ(stats.steps, samples.size());
}

TEST(Regimes, PooledEpochVisitsEverySample) {
  auto r = run_multidomain(tiny_config(Regime::md, {"A", "B", "C"}), store());
  const std::size_t pooled = store().train("A").size() + store().train("B").size() + store().train("C").size();
  ASSERT_EQ(r.history.size(), 2u);
  for (const auto& e : r.history) EXPECT_EQ(e.steps, pooled);
  EXPECT_EQ(r.report.corpora.size(), 3u);
}

TEST(Regimes, SameSeedSameHistory) {
  auto c = tiny_config(Regime::dat, {"A", "B"});
  auto a = run_dat(c, store());
  auto b = run_dat(c, store());
  EXPECT_EQ(history_text(a), history_text(b));
  EXPECT_EQ(report_to_string(a.report), report_to_string(b.report));
  for (const auto& e : a.history) {
    EXPECT_TRUE(std::isfinite(e.loss));
    EXPECT_TRUE(std::isfinite(e.domain_loss));
    EXPECT_GT(e.domain_loss, 0.0);
  }
}

TEST(Regimes, CrossCorpusReportHasTheMatchedCell) {
  auto r = run_cross_corpus(tiny_config(Regime::cc, {"B"}), store());
  EXPECT_TRUE(r.report.has("B"));
  EXPECT_TRUE(r.report.has("A"));
  EXPECT_EQ(r.best_epoch, select_best(r.history));
  EXPECT_THROW(run_cross_corpus(tiny_config(Regime::md, {"A", "B"}), store()), ConfigError);
}

TEST(Regimes, ZeroLambdaDatMatchesMultiDomainOnSharedAndEmotionWeights) {
  auto dat = tiny_config(Regime::dat, {"A", "B"});
  dat.lambda = 0;
  auto md = dat;
  md.regime = Regime::md;
  auto a = run_dat(dat, store());
  auto b = run_multidomain(md, store());
  auto pa = a.final_params.shared(), pb = b.final_params.shared();
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i]->value, pb[i]->value) << pa[i]->name;
  EXPECT_EQ(a.final_params.emo_w.value, b.final_params.emo_w.value);
}

TEST(Regimes, OodNeedsTheHeldOutCorpusInEvaluation) {
  auto c = tiny_config(Regime::ood, {"A", "B"});
  c.adapt_corpus = "C";
  c.eval_corpora = {"A", "B"};
  EXPECT_THROW(run_ood(c, store()), ConfigError);
}

TEST(Adapt, ZeroEpochsReproducesTheBase) {
  auto o = tiny_config(Regime::ood, {"A", "B"});
  o.adapt_corpus = "C";
  auto base = run_ood(o, store());
  auto a = o;
  a.regime = Regime::adapt;
  a.epochs = 0;
  auto r = adapt(base.params, o.train_corpora, a, store());
  EXPECT_EQ(report_to_string(r.report), report_to_string(base.report));
}

TEST(Adapt, OverlapWithBaseCorporaIsRejected) {
  auto base = init_params(dims_for(tiny_config(Regime::cc, {"A"}), 8, 2), 1);
  auto a = tiny_config(Regime::adapt, {});
  a.adapt_corpus = "A";
  EXPECT_THROW(adapt(base, {"A", "B"}, a, store()), ValidationError);
}

TEST(Adapt, TouchesOnlyTheAdaptationCorpus) {
  auto base = init_params(dims_for(tiny_config(Regime::cc, {"A"}), 8, 2), 1);
  auto a = tiny_config(Regime::adapt, {});
  a.adapt_corpus = "C";
  a.eval_corpora = {"C"};
  store().clear_log();
  auto r = adapt(base, {"A", "B"}, a, store());
  ASSERT_FALSE(store().access_log().empty());
  for (const auto& entry : store().access_log()) EXPECT_EQ(entry.substr(0, 2), "C:") << entry;
  EXPECT_EQ(r.history.size(), 2u);
}

TEST(Checkpoint, RoundTripReproducesTheReport) {
  auto c = tiny_config(Regime::cc, {"A"});
  auto r = run_cross_corpus(c, store());
  Checkpoint ck;
  ck.params = r.params;
  ck.meta.dims = r.params.dims;
  ck.meta.classes = c.classes;
  ck.meta.domains = c.train_corpora;
  ck.config = c;
  ck.epoch = r.best_epoch;
  ck.score = r.best_score;
  auto dir = std::filesystem::temp_directory_path() / "sercc_test_checkpoint";
  std::filesystem::remove_all(dir);
  save_checkpoint(dir, ck);
  auto back = load_checkpoint(dir);
  EXPECT_EQ(back.epoch, ck.epoch);
  EXPECT_EQ(back.score, ck.score);
  EXPECT_EQ(back.config.train_corpora, c.train_corpora);
  auto again = evaluate(back.params, store(), c.eval_corpora, back.meta.classes);
  EXPECT_EQ(report_to_string(again), report_to_string(r.report));
  std::filesystem::remove_all(dir);
}

TEST(Grid, RunSeedsDifferPerRunAndRepeat) {
  EXPECT_EQ(run_seed(1, "CC-A"), run_seed(1, "CC-A"));
  EXPECT_NE(run_seed(1, "CC-A"), run_seed(1, "CC-B"));
  EXPECT_NE(run_seed(1, "CC-A"), run_seed(2, "CC-A"));
}

TEST(Grid, EnumeratesEveryRegime) {
  auto base = tiny_config(Regime::cc, {"A"}, 1);
  auto g = run_grid(store(), {"A", "B", "C"}, base);
  EXPECT_EQ(g.cc.size(), 3u);
  EXPECT_TRUE(g.md.has_value());
  EXPECT_TRUE(g.dat.has_value());
  EXPECT_EQ(g.ood.size(), 3u);
  EXPECT_EQ(g.adapt.size(), 3u);
  for (const auto& [held, r] : g.ood) EXPECT_TRUE(r.report.has(held));
  std::ostringstream by_corpus, held_out;
  write_corpus_table(by_corpus, g);
  write_held_out_table(held_out, g);
  const std::string a = by_corpus.str(), b = held_out.str();
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 6);
  EXPECT_EQ(std::count(b.begin(), b.end(), '\n'), 4);
}

}  // namespace
}  // namespace sercc
