// Copyright 2026 The lorpman Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Objective families: the two-parameter toy problem with its grid oracle
// front, a seeded shared-teacher multi-task dataset with tunable conflict, and
// a convex multi-task linear regression.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "lorpman/metrics.hpp"
#include "lorpman/network.hpp"

namespace lorpman {

// ---------------------------------------------------------------------------
// Toy problem
//
//   f1 = c1 h1 + c2 g1,   f2 = c1 h2 + c2 g2
//   h1 = log(max(|0.5(-t1 - 7) - tanh(-t2)|, 5e-6)) + 6
//   h2 = log(max(|0.5(-t1 + 3) - tanh(-t2) + 2|, 5e-6)) + 6
//   g1 = ((-t1 + 7)^2 + 0.1 (-t2 - 8)^2) / 10 - 20
//   g2 = ((-t1 - 7)^2 + 0.1 (-t2 - 8)^2) / 10 - 20
//   c1 = max(tanh(0.5 t2), 0),  c2 = max(tanh(-0.5 t2), 0)
// ---------------------------------------------------------------------------

using Vec2 = std::array<double, 2>;

struct ToyValues {
  double f1 = 0.0;
  double f2 = 0.0;
};

struct ToyGradients {
  Vec2 df1{};
  Vec2 df2{};
};

ToyValues toy_objectives(const Vec2& theta);
/// Analytic gradients; the clamp and the max(.,0) gates contribute a zero
/// subgradient on their flat side.
ToyGradients toy_gradients(const Vec2& theta);

/// Toy manifold state: theta(alpha) = theta0 + alpha_1 delta_1 + alpha_2 delta_2,
/// where only the first coordinate of each delta is trainable.
struct ToyState {
  Vec2 theta0{4.5, 4.5};
  std::array<Vec2, 2> deltas{Vec2{-4.5, 0.0}, Vec2{4.5, 0.0}};

  Vec2 at(const PreferenceVector& alpha) const;
};

/// Non-dominated image of a square parameter grid, sorted by f1 ascending.
FrontSample toy_grid_front(double resolution = 0.02, double lo = -10.0, double hi = 10.0);

/// Euclidean distance from `point` to the piecewise-linear curve through a
/// two-objective front sorted by its first coordinate.
double distance_to_front_2d(const FrontSample& sorted_front, std::span<const double> point);

// ---------------------------------------------------------------------------
// Synthetic multi-task data
// ---------------------------------------------------------------------------

struct SyntheticSpec {
  std::size_t tasks = 3;
  std::size_t input_dim = 8;
  std::size_t teacher_width = 16;
  double conflict = 0.5;  // gamma in [0, 1]
  std::size_t rows = 1000;
  double noise = 0.1;  // shared across tasks per row
  TaskKind kind = TaskKind::kRegression;
  std::size_t classes = 3;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Dataset {
  Batch train;
  Batch validation;
};

struct SyntheticProblem {
  SyntheticSpec spec;
  Matrix teacher;                  // teacher_width x input_dim
  Vector common;                   // teacher_width
  std::vector<Vector> directions;  // per-task unit vectors
  std::vector<TaskSpec> tasks;
  Dataset data;
};

/// y_i = tanh(x W^T) . (w_common + gamma (w_i - w_common)) + noise, then
/// standardised per task; classification bins the standardised score into
/// equal-frequency classes. Rows are split train/validation in order.
SyntheticProblem make_synthetic(const SyntheticSpec& spec);

// ---------------------------------------------------------------------------
// Convex problem: shared linear predictor w, f_i(w) = mean((X w - y_i)^2)
// with y_i = X v_i + noise, v_i = v_common + gamma (v_i' - v_common).
// ---------------------------------------------------------------------------

struct ConvexRegressionProblem {
  Matrix inputs;   // N x u
  Matrix targets;  // N x m

  std::size_t tasks() const noexcept { return targets.cols(); }
  std::size_t dim() const noexcept { return inputs.cols(); }
  Vector losses(std::span<const double> w) const;
  /// Row i is the gradient of f_i.
  Matrix gradients(std::span<const double> w) const;
};

ConvexRegressionProblem make_convex_regression(const SyntheticSpec& spec);

}  // namespace lorpman
