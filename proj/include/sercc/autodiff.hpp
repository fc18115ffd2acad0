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

// Minimal reverse-mode differentiation over dense matrices. Vectors are
// n x 1 matrices; sequences are T x D with one row per time step.
//
// A Tape records nodes in creation order, which is a topological order, so
// backward() is a single reverse sweep. Parameters live outside the tape and
// receive accumulated gradients when backward() reaches their leaf.

#ifndef SERCC_AUTODIFF_HPP_
#define SERCC_AUTODIFF_HPP_

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sercc/error.hpp"

namespace sercc::ad {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Matrix v) : name(std::move(n)), value(std::move(v)) { zero_grad(); }

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
  Eigen::Index size() const { return value.size(); }
};

inline std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Matrix& value() const;
  const Matrix& grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }
  std::size_t id() const { return id_; }
  Tape* tape() const { return tape_; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  using Backward = std::function<void(const Matrix& grad_out)>;

  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool grad_enabled() const { return grad_enabled_; }

  Var constant(Matrix value) { return push(std::move(value), false, nullptr); }

  /// A differentiable input whose gradient is read back from the tape.
  Var leaf(Matrix value) { return push(std::move(value), grad_enabled_, nullptr); }

  /// Leaf bound to `p`; backward adds into p.grad. `p` must outlive the tape.
  Var param(Parameter& p) {
    Node n;
    n.ref = &p.value;
    n.requires_grad = grad_enabled_;
    if (grad_enabled_) {
      n.backward = [&p](const Matrix& g) {
        if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols()) p.zero_grad();
        p.grad += g;
      };
    }
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
  }

  const Matrix& value(std::size_t id) const {
    const Node& n = nodes_.at(id);
    return n.ref ? *n.ref : n.value;
  }
  const Matrix& grad(std::size_t id) const { return nodes_.at(id).grad; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  /// Records a computed node. `backward` may be null when no input needs grad.
  Var push(Matrix value, bool requires_grad, Backward backward) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad && grad_enabled_;
    if (n.requires_grad) n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
  }

  void accumulate(std::size_t id, const Matrix& g) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0) n.grad = g;
    else n.grad += g;
  }

  /// Reverse sweep from a scalar node. A tape supports one backward pass.
  void backward(Var loss) {
    if (loss.tape() != this) throw TapeError("backward: variable belongs to another tape");
    if (backward_done_) throw TapeError("backward: tape already differentiated; build a new tape");
    if (loss.rows() != 1 || loss.cols() != 1)
      throw ShapeError("backward: loss must be 1x1, got " + shape_str(loss.value()));
    backward_done_ = true;
    if (!nodes_[loss.id()].requires_grad) return;
    nodes_[loss.id()].grad = Matrix::Ones(1, 1);
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (n.grad.size() == 0) continue;
      ++n.visits;
      if (n.backward) n.backward(n.grad);
    }
  }

  std::size_t size() const { return nodes_.size(); }
  int visits(std::size_t id) const { return nodes_.at(id).visits; }

 private:
  struct Node {
    Matrix value;
    const Matrix* ref = nullptr;
    Matrix grad;
    bool requires_grad = false;
    int visits = 0;
    Backward backward;
  };

  std::vector<Node> nodes_;
  bool grad_enabled_;
  bool backward_done_ = false;
};

inline const Matrix& Var::value() const { return tape_->value(id_); }
inline const Matrix& Var::grad() const { return tape_->grad(id_); }

namespace detail {

inline void require_same_tape(const Var& a, const Var& b) {
  if (a.tape() != b.tape()) throw TapeError("operands live on different tapes");
}

inline void require_vector(const Var& x, const char* op) {
  if (x.cols() != 1) throw ShapeError(std::string(op) + ": expected a column vector, got " + shape_str(x.value()));
}

inline bool any_grad(Tape& t, std::initializer_list<Var> vs) {
  for (const auto& v : vs)
    if (t.requires_grad(v.id())) return true;
  return false;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace detail

inline Var add(Var a, Var b) {
  detail::require_same_tape(a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("add: " + shape_str(a.value()) + " vs " + shape_str(b.value()));
  Tape& t = *a.tape();
  return t.push(a.value() + b.value(), detail::any_grad(t, {a, b}), [&t, a, b](const Matrix& g) {
    t.accumulate(a.id(), g);
    t.accumulate(b.id(), g);
  });
}

/// Elementwise product.
inline Var mul(Var a, Var b) {
  detail::require_same_tape(a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("mul: " + shape_str(a.value()) + " vs " + shape_str(b.value()));
  Tape& t = *a.tape();
  return t.push(a.value().cwiseProduct(b.value()), detail::any_grad(t, {a, b}), [&t, a, b](const Matrix& g) {
    t.accumulate(a.id(), g.cwiseProduct(b.value()));
    t.accumulate(b.id(), g.cwiseProduct(a.value()));
  });
}

inline Var scale(Var a, double s) {
  Tape& t = *a.tape();
  return t.push(a.value() * s, detail::any_grad(t, {a}), [&t, a, s](const Matrix& g) { t.accumulate(a.id(), g * s); });
}

/// y = W x + b.
inline Var affine(Var x, Var w, Var b) {
  detail::require_same_tape(x, w);
  detail::require_same_tape(x, b);
  detail::require_vector(x, "affine");
  detail::require_vector(b, "affine");
  if (w.cols() != x.rows() || w.rows() != b.rows())
    throw ShapeError("affine: W " + shape_str(w.value()) + ", x " + shape_str(x.value()) + ", b " +
                     shape_str(b.value()));
  Tape& t = *x.tape();
  Matrix y = w.value() * x.value() + b.value();
  return t.push(std::move(y), detail::any_grad(t, {x, w, b}), [&t, x, w, b](const Matrix& g) {
    if (t.requires_grad(w.id())) t.accumulate(w.id(), g * x.value().transpose());
    if (t.requires_grad(x.id())) t.accumulate(x.id(), w.value().transpose() * g);
    t.accumulate(b.id(), g);
  });
}

/// General matrix product A B.
inline Var matmul(Var a, Var b) {
  detail::require_same_tape(a, b);
  if (a.cols() != b.rows()) throw ShapeError("matmul: " + shape_str(a.value()) + " * " + shape_str(b.value()));
  Tape& t = *a.tape();
  return t.push(a.value() * b.value(), detail::any_grad(t, {a, b}), [&t, a, b](const Matrix& g) {
    if (t.requires_grad(a.id())) t.accumulate(a.id(), g * b.value().transpose());
    if (t.requires_grad(b.id())) t.accumulate(b.id(), a.value().transpose() * g);
  });
}

/// Row-wise affine map: Y = X W^T + 1 b^T for X (T x n), W (m x n), b (m x 1).
inline Var linear_rows(Var x, Var w, Var b) {
  detail::require_same_tape(x, w);
  detail::require_same_tape(x, b);
  detail::require_vector(b, "linear_rows");
  if (w.cols() != x.cols() || w.rows() != b.rows())
    throw ShapeError("linear_rows: X " + shape_str(x.value()) + ", W " + shape_str(w.value()) + ", b " +
                     shape_str(b.value()));
  Tape& t = *x.tape();
  Matrix y = x.value() * w.value().transpose();
  y.rowwise() += b.value().col(0).transpose();
  return t.push(std::move(y), detail::any_grad(t, {x, w, b}), [&t, x, w, b](const Matrix& g) {
    if (t.requires_grad(x.id())) t.accumulate(x.id(), g * w.value());
    if (t.requires_grad(w.id())) t.accumulate(w.id(), g.transpose() * x.value());
    if (t.requires_grad(b.id())) t.accumulate(b.id(), g.colwise().sum().transpose());
  });
}

inline Var tanh(Var x) {
  Tape& t = *x.tape();
  Matrix y = x.value().array().tanh().matrix();
  return t.push(y, detail::any_grad(t, {x}), [&t, x, y](const Matrix& g) {
    t.accumulate(x.id(), (g.array() * (1.0 - y.array().square())).matrix());
  });
}

inline Var sigmoid(Var x) {
  Tape& t = *x.tape();
  Matrix y = x.value().unaryExpr([](double v) { return detail::sigmoid(v); });
  return t.push(y, detail::any_grad(t, {x}), [&t, x, y](const Matrix& g) {
    t.accumulate(x.id(), (g.array() * y.array() * (1.0 - y.array())).matrix());
  });
}

/// Numerically stable softmax of a column vector.
inline Matrix softmax_values(const Matrix& x) {
  Matrix e = (x.array() - x.maxCoeff()).exp().matrix();
  return e / e.sum();
}

inline Var softmax(Var x) {
  detail::require_vector(x, "softmax");
  if (x.rows() < 1) throw ShapeError("softmax: empty input");
  Tape& t = *x.tape();
  Matrix y = softmax_values(x.value());
  return t.push(y, detail::any_grad(t, {x}), [&t, x, y](const Matrix& g) {
    const double dot = (g.array() * y.array()).sum();
    t.accumulate(x.id(), (y.array() * (g.array() - dot)).matrix());
  });
}

/// -log softmax(logits)[target] as a 1x1 node.
inline Var cross_entropy(Var logits, std::size_t target) {
  detail::require_vector(logits, "cross_entropy");
  if (target >= static_cast<std::size_t>(logits.rows()))
    throw ArgumentError("cross_entropy: target " + std::to_string(target) + " out of range for " +
                        std::to_string(logits.rows()) + " classes");
  Tape& t = *logits.tape();
  const Matrix& z = logits.value();
  const double m = z.maxCoeff();
  const double lse = m + std::log((z.array() - m).exp().sum());
  Matrix loss(1, 1);
  loss(0, 0) = lse - z(static_cast<Eigen::Index>(target), 0);
  return t.push(std::move(loss), detail::any_grad(t, {logits}), [&t, logits, target](const Matrix& g) {
    Matrix d = softmax_values(logits.value());
    d(static_cast<Eigen::Index>(target), 0) -= 1.0;
    t.accumulate(logits.id(), d * g(0, 0));
  });
}

/// Identity forward; multiplies the incoming gradient by -lambda.
inline Var grad_reverse(Var x, double lambda) {
  if (!(lambda >= 0)) throw ArgumentError("grad_reverse: lambda must be >= 0");
  Tape& t = *x.tape();
  return t.push(x.value(), detail::any_grad(t, {x}),
                [&t, x, lambda](const Matrix& g) { t.accumulate(x.id(), -lambda * g); });
}

/// Column means of a T x D sequence, returned as D x 1.
inline Var mean_over_time(Var h) {
  if (h.rows() < 1) throw ShapeError("mean_over_time: sequence has no time steps");
  Tape& t = *h.tape();
  Matrix m = h.value().colwise().mean().transpose();
  return t.push(std::move(m), detail::any_grad(t, {h}), [&t, h](const Matrix& g) {
    const auto steps = h.rows();
    Matrix d = g.transpose().replicate(steps, 1) / static_cast<double>(steps);
    t.accumulate(h.id(), d);
  });
}

/// Each row of H (T x D) multiplied elementwise by g (D x 1).
inline Var mul_rows(Var h, Var g) {
  detail::require_same_tape(h, g);
  detail::require_vector(g, "mul_rows");
  if (h.cols() != g.rows()) throw ShapeError("mul_rows: " + shape_str(h.value()) + " vs " + shape_str(g.value()));
  Tape& t = *h.tape();
  Matrix y = h.value().array().rowwise() * g.value().col(0).transpose().array();
  return t.push(std::move(y), detail::any_grad(t, {h, g}), [&t, h, g](const Matrix& go) {
    if (t.requires_grad(h.id()))
      t.accumulate(h.id(), (go.array().rowwise() * g.value().col(0).transpose().array()).matrix());
    if (t.requires_grad(g.id()))
      t.accumulate(g.id(), go.cwiseProduct(h.value()).colwise().sum().transpose());
  });
}

/// H^T alpha for H (T x D) and alpha (T x 1): the alpha-weighted sum of rows.
inline Var weighted_sum_rows(Var h, Var alpha) {
  detail::require_same_tape(h, alpha);
  detail::require_vector(alpha, "weighted_sum_rows");
  if (h.rows() != alpha.rows())
    throw ShapeError("weighted_sum_rows: " + shape_str(h.value()) + " vs " + shape_str(alpha.value()));
  Tape& t = *h.tape();
  return t.push(h.value().transpose() * alpha.value(), detail::any_grad(t, {h, alpha}),
                [&t, h, alpha](const Matrix& g) {
                  if (t.requires_grad(h.id())) t.accumulate(h.id(), alpha.value() * g.transpose());
                  if (t.requires_grad(alpha.id())) t.accumulate(alpha.id(), h.value() * g);
                });
}

/// Horizontal concatenation [A B] of matrices with equal row counts.
inline Var concat_cols(Var a, Var b) {
  detail::require_same_tape(a, b);
  if (a.rows() != b.rows()) throw ShapeError("concat_cols: " + shape_str(a.value()) + " vs " + shape_str(b.value()));
  Tape& t = *a.tape();
  Matrix y(a.rows(), a.cols() + b.cols());
  y << a.value(), b.value();
  const auto split = a.cols();
  return t.push(std::move(y), detail::any_grad(t, {a, b}), [&t, a, b, split](const Matrix& g) {
    t.accumulate(a.id(), g.leftCols(split));
    t.accumulate(b.id(), g.rightCols(g.cols() - split));
  });
}

inline Var sum_all(std::initializer_list<Var> terms) {
  if (terms.size() == 0) throw ArgumentError("sum_all: no terms");
  Var acc = *terms.begin();
  for (auto it = terms.begin() + 1; it != terms.end(); ++it) acc = add(acc, *it);
  return acc;
}

// ---------------------------------------------------------------------------
// Fused LSTM layer

struct LstmWeights {
  Var w_ih;  // 4H x n, gate blocks ordered input, forget, cell, output
  Var w_hh;  // 4H x H
  Var bias;  // 4H x 1
};

/// Runs one unidirectional LSTM over X (T x n). With `reverse` the sequence is
/// consumed from t = T-1 down to 0. Row t of the result is the hidden state
/// at time t (T x H). Initial state is zero; backward is full BPTT.
inline Var lstm_layer(Var x, const LstmWeights& p, bool reverse) {
  detail::require_same_tape(x, p.w_ih);
  detail::require_same_tape(x, p.w_hh);
  detail::require_same_tape(x, p.bias);
  detail::require_vector(p.bias, "lstm_layer");
  const Eigen::Index hid = p.w_hh.cols();
  if (p.w_hh.rows() != 4 * hid || p.w_ih.rows() != 4 * hid || p.bias.rows() != 4 * hid)
    throw ShapeError("lstm_layer: gate weights must have 4H rows (H = " + std::to_string(hid) + ")");
  if (p.w_ih.cols() != x.cols())
    throw ShapeError("lstm_layer: input has " + std::to_string(x.cols()) + " features, W_ih expects " +
                     std::to_string(p.w_ih.cols()));
  const Eigen::Index steps = x.rows();
  if (steps < 1) throw ShapeError("lstm_layer: empty sequence");

  struct Cache {
    Matrix gates;  // T x 4H activated gates (i, f, g, o) per time row
    Matrix cell;   // T x H
    Matrix hidden; // T x H
  };
  auto cache = std::make_shared<Cache>();
  cache->gates.resize(steps, 4 * hid);
  cache->cell.resize(steps, hid);
  cache->hidden.resize(steps, hid);

  Tape& t = *x.tape();
  const Matrix& w_hh = p.w_hh.value();
  Matrix zx = x.value() * p.w_ih.value().transpose();
  zx.rowwise() += p.bias.value().col(0).transpose();

  Vector h = Vector::Zero(hid), c = Vector::Zero(hid);
  for (Eigen::Index k = 0; k < steps; ++k) {
    const Eigen::Index s = reverse ? steps - 1 - k : k;
    Vector z = zx.row(s).transpose() + w_hh * h;
    auto zi = z.segment(0, hid).unaryExpr([](double v) { return detail::sigmoid(v); });
    auto zf = z.segment(hid, hid).unaryExpr([](double v) { return detail::sigmoid(v); });
    Vector zg = z.segment(2 * hid, hid).array().tanh();
    auto zo = z.segment(3 * hid, hid).unaryExpr([](double v) { return detail::sigmoid(v); });
    Vector gi = zi, gf = zf, go = zo;
    c = gf.cwiseProduct(c) + gi.cwiseProduct(zg);
    h = go.cwiseProduct(c.array().tanh().matrix());
    cache->gates.row(s) << gi.transpose(), gf.transpose(), zg.transpose(), go.transpose();
    cache->cell.row(s) = c.transpose();
    cache->hidden.row(s) = h.transpose();
  }

  Matrix out = cache->hidden;
  const LstmWeights w = p;
  return t.push(std::move(out), detail::any_grad(t, {x, p.w_ih, p.w_hh, p.bias}),
                [&t, x, w, reverse, cache, hid, steps](const Matrix& g_out) {
                  const Matrix& w_hh = w.w_hh.value();
                  Matrix dz(steps, 4 * hid);
                  Vector dh_next = Vector::Zero(hid), dc_next = Vector::Zero(hid);
                  for (Eigen::Index k = steps; k-- > 0;) {
                    const Eigen::Index s = reverse ? steps - 1 - k : k;
                    const bool has_prev = k > 0;
                    const Eigen::Index prev = reverse ? s + 1 : s - 1;
                    auto gates = cache->gates.row(s).transpose();
                    Vector gi = gates.segment(0, hid), gf = gates.segment(hid, hid);
                    Vector gg = gates.segment(2 * hid, hid), go = gates.segment(3 * hid, hid);
                    Vector tc = cache->cell.row(s).transpose().array().tanh();
                    Vector c_prev = has_prev ? Vector(cache->cell.row(prev).transpose()) : Vector::Zero(hid);
                    Vector dh = g_out.row(s).transpose() + dh_next;
                    Vector d_o = dh.cwiseProduct(tc);
                    Vector dc = dh.cwiseProduct(go).cwiseProduct((1.0 - tc.array().square()).matrix()) + dc_next;
                    Vector d_f = dc.cwiseProduct(c_prev);
                    Vector d_i = dc.cwiseProduct(gg);
                    Vector d_g = dc.cwiseProduct(gi);
                    dc_next = dc.cwiseProduct(gf);
                    Vector z(4 * hid);
                    z << (d_i.array() * gi.array() * (1 - gi.array())).matrix(),
                        (d_f.array() * gf.array() * (1 - gf.array())).matrix(),
                        (d_g.array() * (1 - gg.array().square())).matrix(),
                        (d_o.array() * go.array() * (1 - go.array())).matrix();
                    dz.row(s) = z.transpose();
                    dh_next = w_hh.transpose() * z;
                  }
                  if (t.requires_grad(w.w_hh.id())) {
                    // h_{prev} for each step; zero at the first processed step.
                    Matrix h_prev = Matrix::Zero(steps, hid);
                    for (Eigen::Index k = 1; k < steps; ++k) {
                      const Eigen::Index s = reverse ? steps - 1 - k : k;
                      h_prev.row(s) = cache->hidden.row(reverse ? s + 1 : s - 1);
                    }
                    t.accumulate(w.w_hh.id(), dz.transpose() * h_prev);
                  }
                  if (t.requires_grad(w.w_ih.id())) t.accumulate(w.w_ih.id(), dz.transpose() * x.value());
                  if (t.requires_grad(w.bias.id())) t.accumulate(w.bias.id(), dz.colwise().sum().transpose());
                  if (t.requires_grad(x.id())) t.accumulate(x.id(), dz * w.w_ih.value());
                });
}

}  // namespace sercc::ad

#endif  // SERCC_AUTODIFF_HPP_
