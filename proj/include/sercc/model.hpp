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

// BLSTM encoder with multiplicative attention, an emotion head and a domain
// head behind gradient reversal.
//
//   features (T x n) -> BLSTM x layers -> H (T x 2H)
//   g = mean_t H;  e_t = v . tanh(W_a (h_t * g) + b_a);  alpha = softmax(e)
//   attended = tanh(W_o (sum_t alpha_t h_t) + b_o)
//   emotion logits = W_y attended + b_y
//   domain logits  = W_d reverse_lambda(attended) + b_d

#ifndef SERCC_MODEL_HPP_
#define SERCC_MODEL_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sercc/autodiff.hpp"
#include "sercc/checkpoint.hpp"
#include "sercc/corpus.hpp"
#include "sercc/dsp.hpp"
#include "sercc/error.hpp"
#include "sercc/kv_file.hpp"

namespace sercc {

struct ModelDims {
  int input_dim = 23;
  int hidden = 512;  // per direction
  int layers = 2;
  int attention_dim = 128;
  int n_classes = 6;
  int n_domains = 1;

  int encoder_dim() const { return 2 * hidden; }

  void validate() const {
    if (input_dim < 1 || hidden < 1 || layers < 1 || attention_dim < 1)
      throw ConfigError("model: all dimensions must be >= 1");
    if (n_classes < 1 || n_domains < 1) throw ConfigError("model: class and domain counts must be >= 1");
  }
  bool operator==(const ModelDims&) const = default;
};

struct LstmParameters {
  ad::Parameter w_ih, w_hh, bias;
};

struct ModelParameters {
  ModelDims dims;
  std::vector<std::array<LstmParameters, 2>> blstm;  // [layer][0 = forward, 1 = backward]
  ad::Parameter att_w, att_b, att_v;                 // bottleneck, its bias, score vector
  ad::Parameter out_w, out_b;                        // projection of the attended vector
  ad::Parameter emo_w, emo_b;
  ad::Parameter dom_w, dom_b;

  /// Shared encoder (BLSTM + attention).
  std::vector<ad::Parameter*> shared() {
    std::vector<ad::Parameter*> out;
    for (auto& layer : blstm)
      for (auto& dir : layer) out.insert(out.end(), {&dir.w_ih, &dir.w_hh, &dir.bias});
    out.insert(out.end(), {&att_w, &att_b, &att_v, &out_w, &out_b});
    return out;
  }
  std::vector<ad::Parameter*> emotion() { return {&emo_w, &emo_b}; }
  std::vector<ad::Parameter*> domain() { return {&dom_w, &dom_b}; }

  std::vector<ad::Parameter*> all() {
    auto out = shared();
    for (auto* p : emotion()) out.push_back(p);
    for (auto* p : domain()) out.push_back(p);
    return out;
  }
  std::vector<const ad::Parameter*> all() const {
    auto ptrs = const_cast<ModelParameters*>(this)->all();
    return {ptrs.begin(), ptrs.end()};
  }

  void zero_grad() {
    for (auto* p : all()) p->zero_grad();
  }

  /// Rounds every value to single precision, the checkpoint storage format.
  void round_to_float() {
    for (auto* p : all()) p->value = p->value.cast<float>().cast<double>();
  }
};

/// Allocates zero-valued parameters with the right names and shapes.
inline ModelParameters make_params(const ModelDims& dims) {
  dims.validate();
  using ad::Matrix;
  ModelParameters p;
  p.dims = dims;
  const int h = dims.hidden, e = dims.encoder_dim();
  for (int l = 0; l < dims.layers; ++l) {
    std::array<LstmParameters, 2> layer;
    const int in = l == 0 ? dims.input_dim : e;
    for (int d = 0; d < 2; ++d) {
      const std::string prefix = "blstm.l" + std::to_string(l) + (d == 0 ? ".fwd." : ".bwd.");
      layer[d].w_ih = {prefix + "w_ih", Matrix::Zero(4 * h, in)};
      layer[d].w_hh = {prefix + "w_hh", Matrix::Zero(4 * h, h)};
      layer[d].bias = {prefix + "bias", Matrix::Zero(4 * h, 1)};
    }
    p.blstm.push_back(std::move(layer));
  }
  p.att_w = {"attention.w", Matrix::Zero(dims.attention_dim, e)};
  p.att_b = {"attention.b", Matrix::Zero(dims.attention_dim, 1)};
  p.att_v = {"attention.v", Matrix::Zero(dims.attention_dim, 1)};
  p.out_w = {"attention.out_w", Matrix::Zero(e, e)};
  p.out_b = {"attention.out_b", Matrix::Zero(e, 1)};
  p.emo_w = {"emotion.w", Matrix::Zero(dims.n_classes, e)};
  p.emo_b = {"emotion.b", Matrix::Zero(dims.n_classes, 1)};
  p.dom_w = {"domain.w", Matrix::Zero(dims.n_domains, e)};
  p.dom_b = {"domain.b", Matrix::Zero(dims.n_domains, 1)};
  return p;
}

/// Weights uniform in +-1/sqrt(fan_in); biases zero except LSTM forget gates
/// at +1. Deterministic in `seed`.
inline ModelParameters init_params(const ModelDims& dims, std::uint64_t seed) {
  auto p = make_params(dims);
  std::mt19937_64 rng(seed);
  auto fill = [&rng](ad::Parameter& w, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index c = 0; c < w.value.cols(); ++c)
      for (Eigen::Index r = 0; r < w.value.rows(); ++r) w.value(r, c) = u(rng);
  };
  for (auto& layer : p.blstm)
    for (auto& dir : layer) {
      fill(dir.w_ih, static_cast<int>(dir.w_ih.value.cols()));
      fill(dir.w_hh, static_cast<int>(dir.w_hh.value.cols()));
      dir.bias.value.block(dims.hidden, 0, dims.hidden, 1).setOnes();
    }
  fill(p.att_w, dims.encoder_dim());
  fill(p.att_v, dims.attention_dim);
  fill(p.out_w, dims.encoder_dim());
  fill(p.emo_w, dims.encoder_dim());
  fill(p.dom_w, dims.encoder_dim());
  return p;
}

inline ModelParameters init_params(std::uint64_t seed, int n_classes, int n_domains, ModelDims dims = {}) {
  dims.n_classes = n_classes;
  dims.n_domains = n_domains;
  return init_params(dims, seed);
}

/// T x n features -> H (T x 2H): per-step concatenation of the last layer's
/// forward and backward states. Layer l+1 consumes the 2H output of layer l.
inline ad::Var blstm_forward(ad::Tape& tape, ad::Var features, ModelParameters& p) {
  if (features.cols() != p.dims.input_dim)
    throw ShapeError("blstm: features have " + std::to_string(features.cols()) + " dims, model expects " +
                     std::to_string(p.dims.input_dim));
  if (features.rows() < 1) throw ShapeError("blstm: empty sequence");
  ad::Var x = features;
  for (auto& layer : p.blstm) {
    ad::Var halves[2];
    for (int d = 0; d < 2; ++d) {
      ad::LstmWeights w{tape.param(layer[d].w_ih), tape.param(layer[d].w_hh), tape.param(layer[d].bias)};
      halves[d] = ad::lstm_layer(x, w, d == 1);
    }
    x = ad::concat_cols(halves[0], halves[1]);
  }
  return x;
}

struct AttentionOutput {
  ad::Var attended;  // 2H x 1
  ad::Var weights;   // T x 1
  ad::Var context;   // 2H x 1, before the output projection
};

inline AttentionOutput attention_forward(ad::Tape& tape, ad::Var h, ModelParameters& p) {
  if (h.cols() != p.dims.encoder_dim())
    throw ShapeError("attention: states have " + std::to_string(h.cols()) + " dims, expected " +
                     std::to_string(p.dims.encoder_dim()));
  ad::Var global = ad::mean_over_time(h);
  ad::Var z = ad::tanh(ad::linear_rows(ad::mul_rows(h, global), tape.param(p.att_w), tape.param(p.att_b)));
  ad::Var alpha = ad::softmax(ad::matmul(z, tape.param(p.att_v)));
  ad::Var context = ad::weighted_sum_rows(h, alpha);
  ad::Var attended = ad::tanh(ad::affine(context, tape.param(p.out_w), tape.param(p.out_b)));
  return {attended, alpha, context};
}

inline ad::Var emotion_head(ad::Tape& tape, ad::Var attended, ModelParameters& p) {
  return ad::affine(attended, tape.param(p.emo_w), tape.param(p.emo_b));
}

/// Domain classifier behind a gradient reversal layer.
inline ad::Var domain_head(ad::Tape& tape, ad::Var attended, ModelParameters& p, double lambda) {
  return ad::affine(ad::grad_reverse(attended, lambda), tape.param(p.dom_w), tape.param(p.dom_b));
}

enum class ForwardMode { plain, dat };

struct ForwardResult {
  ad::Var emotion_logits;
  std::optional<ad::Var> domain_logits;
  ad::Var attended;
  ad::Var attention_weights;
  ad::Var states;
};

inline ForwardResult model_forward(ad::Tape& tape, const ad::Matrix& features, ModelParameters& p,
                                   ForwardMode mode = ForwardMode::plain, double lambda = 0.0) {
  ad::Var x = tape.constant(features);
  ad::Var h = blstm_forward(tape, x, p);
  auto att = attention_forward(tape, h, p);
  ForwardResult r;
  r.states = h;
  r.attended = att.attended;
  r.attention_weights = att.weights;
  r.emotion_logits = emotion_head(tape, att.attended, p);
  if (mode == ForwardMode::dat) r.domain_logits = domain_head(tape, att.attended, p, lambda);
  return r;
}

inline ad::Matrix to_matrix(const FeatureSequence& seq) { return seq.frames.cast<double>(); }

/// Softmax posterior over emotion classes, no gradient bookkeeping.
inline ad::Vector predict_scores(ModelParameters& p, const ad::Matrix& features) {
  ad::Tape tape(false);
  auto r = model_forward(tape, features, p);
  return ad::softmax_values(r.emotion_logits.value()).col(0);
}

/// Attended representation (encoder output), no gradient bookkeeping.
inline ad::Vector encode(ModelParameters& p, const ad::Matrix& features) {
  ad::Tape tape(false);
  ad::Var h = blstm_forward(tape, tape.constant(features), p);
  return attention_forward(tape, h, p).attended.value().col(0);
}

// ---------------------------------------------------------------------------
// Model files: <stem>.bin parameters plus <stem>.meta text header.

struct ModelMeta {
  ModelDims dims;
  ClassSet classes = ClassSet::big_six();
  std::vector<std::string> domains;
  FeatureKind feature_kind = FeatureKind::lmfb;
};

inline KeyValueFile meta_to_kv(const ModelMeta& m) {
  KeyValueFile kv;
  kv.add("format", "sercc-model-1");
  kv.add("input_dim", std::to_string(m.dims.input_dim));
  kv.add("hidden", std::to_string(m.dims.hidden));
  kv.add("layers", std::to_string(m.dims.layers));
  kv.add("attention_dim", std::to_string(m.dims.attention_dim));
  kv.add("n_classes", std::to_string(m.dims.n_classes));
  kv.add("n_domains", std::to_string(m.dims.n_domains));
  kv.add("classes", m.classes.names_csv());
  std::string doms;
  for (std::size_t i = 0; i < m.domains.size(); ++i) doms += (i ? "," : "") + m.domains[i];
  kv.add("domains", doms);
  kv.add("feature_kind", std::string(to_string(m.feature_kind)));
  return kv;
}

inline ModelMeta meta_from_kv(const KeyValueFile& kv) {
  if (kv.get_or("format", "") != "sercc-model-1") throw FormatError(kv.source() + ": not a sercc model header");
  auto need = [&](const char* key) {
    auto v = kv.get(key);
    if (!v) throw FormatError(kv.source() + ": missing '" + key + "'");
    return *v;
  };
  ModelMeta m;
  m.dims.input_dim = static_cast<int>(parse_int(need("input_dim"), "input_dim"));
  m.dims.hidden = static_cast<int>(parse_int(need("hidden"), "hidden"));
  m.dims.layers = static_cast<int>(parse_int(need("layers"), "layers"));
  m.dims.attention_dim = static_cast<int>(parse_int(need("attention_dim"), "attention_dim"));
  m.dims.n_classes = static_cast<int>(parse_int(need("n_classes"), "n_classes"));
  m.dims.n_domains = static_cast<int>(parse_int(need("n_domains"), "n_domains"));
  m.classes = ClassSet::from_names(split_list(need("classes")));
  m.domains = split_list(kv.get_or("domains", ""));
  m.feature_kind = feature_kind_from_name(need("feature_kind"));
  if (static_cast<int>(m.classes.size()) != m.dims.n_classes)
    throw FormatError(kv.source() + ": class list does not match n_classes");
  return m;
}

inline void save_model(const std::filesystem::path& stem, const ModelParameters& p, const ModelMeta& meta) {
  const auto params = p.all();
  save_parameters(stem.string() + ".bin", params);
  std::ofstream os(stem.string() + ".meta");
  if (!os) throw IoError("cannot write " + stem.string() + ".meta");
  os << meta_to_kv(meta).to_string();
}

inline std::pair<ModelParameters, ModelMeta> load_model(const std::filesystem::path& stem) {
  auto meta = meta_from_kv(KeyValueFile::load(stem.string() + ".meta"));
  auto p = make_params(meta.dims);
  auto params = p.all();
  load_parameters(stem.string() + ".bin", params);
  return {std::move(p), std::move(meta)};
}

}  // namespace sercc

#endif  // SERCC_MODEL_HPP_
