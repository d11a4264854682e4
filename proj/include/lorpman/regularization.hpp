// Copyright 2026 The lorpman Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Orthogonality penalty between task adapters and the multi-forward ordering
// penalty across a window of preferences.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lorpman/lowrank.hpp"
#include "lorpman/network.hpp"
#include "lorpman/random.hpp"

namespace lorpman {

struct OrthConfig {
  double lambda_o = 0.0;
  // Above this many tasks one random subset of `subset_size` tasks is used.
  std::size_t stochastic_threshold = 3;
  std::size_t subset_size = 3;
};

// ---------------------------------------------------------------------------
// Orthogonal regularisation
//
// For the selected tasks of one layer, w_i = flatten(B_i A_i) / ||B_i A_i||
// forms the columns of W and the penalty is ||W^T W - I||_F^2. Adapters whose
// product is exactly zero are treated as orthogonal to every other column and
// receive no gradient.
// ---------------------------------------------------------------------------

struct OrthLayerCache {
  std::vector<std::size_t> tasks;  // usable task indices, in order
  std::vector<Vector> directions;  // w_i
  std::vector<double> norms;       // ||B_i A_i||
  Matrix residual;                 // W^T W - I over the usable tasks
  std::vector<Adapter> adapters;   // copies of the usable (B, A) pairs
};

struct OrthLayerResult {
  double value = 0.0;
  bool degenerate = false;  // fewer than two usable adapters
  OrthLayerCache cache;
};

OrthLayerResult orth_loss_layer(std::span<const Adapter> adapters,
                                std::optional<std::span<const std::size_t>> subset = std::nullopt);

struct OrthNetworkResult {
  double value = 0.0;
  std::vector<std::size_t> subset;  // empty when every task was used
  std::vector<OrthLayerCache> layers;
};

/// Mean of the per-layer penalties. When m exceeds the stochastic threshold a
/// single subset is drawn from `rng` and shared by every layer.
/// Throws UnsupportedMode for a PaMaL model.
OrthNetworkResult orth_loss_network(const ManifoldModel& model, SeededRng& rng,
                                    const OrthConfig& config);

/// Draws `size` distinct task indices out of m, sorted ascending.
std::vector<std::size_t> sample_task_subset(std::size_t m, std::size_t size, SeededRng& rng);

/// Accumulates lambda_o * d(mean penalty)/d(B_i, A_i) into the adapter gradients.
void orth_loss_backward(const OrthNetworkResult& result, ModelGradients& grads, double lambda_o);

/// Single-layer form of the gradient, scaled by `factor`.
void orth_loss_layer_backward(const OrthLayerCache& cache, std::span<Adapter> g_adapters,
                              double factor);

// ---------------------------------------------------------------------------
// Multi-forward regularisation
// ---------------------------------------------------------------------------

enum class HingeOrientation {
  // hinge on f_i(alpha') - f_i(alpha) for alpha_i < alpha'_i: a preference that
  // weights task i more must not have a larger task-i loss.
  kPenalizeWrongOrdering,
  // hinge on f_i(alpha) - f_i(alpha') as literally written in the original
  // formula; penalises the expected ordering instead.
  kVerbatimSign,
};

struct MultiForwardConfig {
  double lambda_p = 0.0;
  HingeOrientation orientation = HingeOrientation::kPenalizeWrongOrdering;
};

struct MultiForwardResult {
  double value = 0.0;
  bool degenerate = false;  // fewer than two preferences
  Matrix subgradient;       // b x m, d(value)/d(losses(j, i))
};

/// losses(j, i) = f_i(theta(alpha^j)). Sums over tasks the log-mean-exp of the
/// clamped hinge over that task's edge set; tasks without edges contribute 0.
MultiForwardResult multi_forward_loss(const Matrix& losses,
                                      std::span<const PreferenceVector> alphas,
                                      HingeOrientation orientation);

}  // namespace lorpman
