// Copyright 2026 The lorpman Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Preference-combined layer parameterisations.
//
// A LowRankLayer holds a main weight theta0 (d x k), a bias, and m adapter
// pairs (B_i: d x r, A_i: r x k). Under a preference alpha its effective
// weight is
//
//     W(alpha) = theta0 + s * sum_i alpha_i * B_i * A_i
//
// so the set of weights reachable from the simplex is an affine image of it.
// The bias is never adapted per task.
//
// A PamalLayer is the full-rank baseline: m complete weight matrices mixed
// convexly, W(alpha) = sum_i alpha_i * theta_i.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lorpman/matrix.hpp"
#include "lorpman/random.hpp"

namespace lorpman {

struct Adapter {
  Matrix B;  // d x r
  Matrix A;  // r x k

  Matrix product() const { return matmul(B, A); }
};

struct LowRankLayer {
  Matrix theta0;  // d x k
  Vector bias0;   // d
  std::vector<Adapter> adapters;
  double scale = 1.0;
  std::size_t rank = 1;

  std::size_t out_dim() const noexcept { return theta0.rows(); }
  std::size_t in_dim() const noexcept { return theta0.cols(); }
  std::size_t tasks() const noexcept { return adapters.size(); }

  /// Throws ContractViolation if any invariant is broken.
  void validate() const;
};

struct PamalLayer {
  std::vector<Matrix> thetas;  // m of d x k
  std::vector<Vector> biases;  // m of d

  std::size_t out_dim() const noexcept { return thetas.front().rows(); }
  std::size_t in_dim() const noexcept { return thetas.front().cols(); }
  std::size_t tasks() const noexcept { return thetas.size(); }

  void validate() const;
};

struct LayerGradients {
  Matrix g_theta0;
  Vector g_bias0;
  std::vector<Adapter> g_adapters;

  static LayerGradients zeros_like(const LowRankLayer& layer);
  void zero();
};

struct PamalGradients {
  std::vector<Matrix> g_thetas;
  std::vector<Vector> g_biases;

  static PamalGradients zeros_like(const PamalLayer& layer);
  void zero();
};

/// Kaiming-uniform theta0, zero bias, B = 0, A ~ N(0, adapter_std^2).
LowRankLayer make_lowrank_layer(std::size_t out_dim, std::size_t in_dim, std::size_t tasks,
                                std::size_t rank, double scale, SeededRng& rng,
                                double adapter_std = 0.01);

/// Each base network gets its own Kaiming-uniform draw unless `identical`.
PamalLayer make_pamal_layer(std::size_t out_dim, std::size_t in_dim, std::size_t tasks,
                            SeededRng& rng, bool identical = false);

Matrix combine(const LowRankLayer& layer, const PreferenceVector& alpha);
Matrix combine_pamal(const PamalLayer& layer, const PreferenceVector& alpha);
Vector combine_pamal_bias(const PamalLayer& layer, const PreferenceVector& alpha);

/// Chain rule through W(alpha). Accumulates into `grads`:
///   g_theta0 += g_combined, g_bias0 += g_bias        (skipped when freeze_main)
///   gB_i     += s * alpha_i * g_combined * A_i^T
///   gA_i     += s * alpha_i * B_i^T * g_combined
void backprop_combined(const LowRankLayer& layer, const PreferenceVector& alpha,
                       const Matrix& g_combined, std::span<const double> g_bias,
                       LayerGradients& grads, bool freeze_main);

/// g_theta_i += alpha_i * g_combined, same for the biases.
void backprop_pamal(const PamalLayer& layer, const PreferenceVector& alpha,
                    const Matrix& g_combined, std::span<const double> g_bias,
                    PamalGradients& grads);

struct ParameterCount {
  std::size_t lorpman = 0;
  std::size_t pamal = 0;
};

/// Weight-matrix parameter counts for one d x k layer with m tasks at rank r:
/// (dk + m(dr + rk), m dk). Throws ParameterError for zero arguments.
ParameterCount parameter_count(std::size_t d, std::size_t k, std::size_t m, std::size_t r);

/// Cosine of the angle between the flattened matrices.
/// Throws DegenerateInput for a zero matrix, ContractViolation on shape mismatch.
double pairwise_cosine_similarity(const Matrix& a, const Matrix& b);

}  // namespace lorpman
