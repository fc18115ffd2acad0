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

#ifndef SERCC_OPTIM_HPP_
#define SERCC_OPTIM_HPP_

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "sercc/autodiff.hpp"
#include "sercc/error.hpp"

namespace sercc {

/**
 * Adam with bias-corrected moment estimates (Kingma & Ba).
 *
 * Moments are allocated lazily on the first step and are matched to
 * parameters by position, so the same parameter list must be passed to
 * every call.
 */
struct AdamState {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long long step = 0;
  std::vector<ad::Matrix> m;
  std::vector<ad::Matrix> v;
};

inline void adam_step(std::span<ad::Parameter* const> params, AdamState& state) {
  for (const auto* p : params) {
    if (p->grad.rows() != p->value.rows() || p->grad.cols() != p->value.cols())
      throw OptimizerError("adam: gradient of '" + p->name + "' has shape " + ad::shape_str(p->grad) +
                           ", parameter is " + ad::shape_str(p->value));
    if (!p->grad.allFinite()) throw OptimizerError("adam: non-finite gradient in parameter '" + p->name + "'");
  }
  if (state.m.empty()) {
    for (const auto* p : params) {
      state.m.push_back(ad::Matrix::Zero(p->value.rows(), p->value.cols()));
      state.v.push_back(ad::Matrix::Zero(p->value.rows(), p->value.cols()));
    }
  }
  if (state.m.size() != params.size()) throw OptimizerError("adam: parameter list changed between steps");

  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = *params[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * p.grad;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * p.grad.cwiseAbs2();
    p.value.array() -= state.learning_rate * (state.m[i].array() / c1) /
                       ((state.v[i].array() / c2).sqrt() + state.epsilon);
  }
}

/// Multiplies the learning rate by `factor` once the monitored metric has
/// gone `patience` consecutive epochs without a strict improvement.
struct PlateauState {
  enum class Mode { maximize, minimize };

  Mode mode = Mode::maximize;
  double factor = 0.8;
  int patience = 4;
  double best = -std::numeric_limits<double>::infinity();
  int epochs_since_improvement = 0;

  PlateauState() = default;
  PlateauState(double factor_, int patience_, Mode mode_ = Mode::maximize)
      : mode(mode_), factor(factor_), patience(patience_) {
    if (!(factor > 0 && factor < 1)) throw ArgumentError("plateau: factor must be in (0, 1)");
    if (patience < 1) throw ArgumentError("plateau: patience must be >= 1");
    best = mode == Mode::maximize ? -std::numeric_limits<double>::infinity()
                                  : std::numeric_limits<double>::infinity();
  }
};

/// Returns the (possibly reduced) learning rate.
inline double plateau_step(PlateauState& s, double metric, double lr) {
  const bool improved = s.mode == PlateauState::Mode::maximize ? metric > s.best : metric < s.best;
  if (improved) {
    s.best = metric;
    s.epochs_since_improvement = 0;
    return lr;
  }
  if (++s.epochs_since_improvement >= s.patience) {
    s.epochs_since_improvement = 0;
    return lr * s.factor;
  }
  return lr;
}

}  // namespace sercc

#endif  // SERCC_OPTIM_HPP_
