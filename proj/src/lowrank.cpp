// Copyright 2026 The lorpman Authors.
// SPDX-License-Identifier: Apache-2.0

#include "lorpman/lowrank.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lorpman/errors.hpp"

namespace lorpman {

namespace {

void require_alpha(std::size_t tasks, const PreferenceVector& alpha, const char* op) {
  if (alpha.size() != tasks) {
    throw ContractViolation(std::string(op) + ": preference has " +
                            std::to_string(alpha.size()) + " entries, layer has " +
                            std::to_string(tasks) + " tasks");
  }
}

Matrix kaiming_uniform(std::size_t out_dim, std::size_t in_dim, SeededRng& rng) {
  // ReLU gain: bound = sqrt(6 / fan_in)
  const double bound = std::sqrt(6.0 / static_cast<double>(in_dim));
  Matrix w(out_dim, in_dim);
  for (double& v : w.flat()) v = bound * (2.0 * rng.uniform() - 1.0);
  return w;
}

}  // namespace

void LowRankLayer::validate() const {
  const std::size_t d = out_dim(), k = in_dim();
  if (bias0.size() != d) throw ContractViolation("bias0 length does not match theta0 rows");
  if (!(scale > 0.0)) throw ContractViolation("scale must be positive");
  if (rank < 1 || rank > std::min(d, k)) {
    throw ContractViolation("rank " + std::to_string(rank) + " outside [1, min(d,k)] for " +
                            theta0.shape_string());
  }
  for (const auto& ad : adapters) {
    if (ad.B.rows() != d || ad.B.cols() != rank || ad.A.rows() != rank || ad.A.cols() != k) {
      throw ContractViolation("adapter shapes " + ad.B.shape_string() + ", " +
                              ad.A.shape_string() + " do not match layer " +
                              theta0.shape_string() + " at rank " + std::to_string(rank));
    }
  }
}

void PamalLayer::validate() const {
  if (thetas.empty() || thetas.size() != biases.size()) {
    throw ContractViolation("pamal layer needs matching non-empty weight and bias lists");
  }
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    if (!thetas[i].same_shape(thetas.front()) || biases[i].size() != thetas[i].rows()) {
      throw ContractViolation("pamal base networks disagree in shape");
    }
  }
}

LayerGradients LayerGradients::zeros_like(const LowRankLayer& layer) {
  LayerGradients g;
  g.g_theta0 = Matrix(layer.out_dim(), layer.in_dim());
  g.g_bias0.assign(layer.out_dim(), 0.0);
  g.g_adapters.reserve(layer.tasks());
  for (const auto& ad : layer.adapters) {
    g.g_adapters.push_back({Matrix(ad.B.rows(), ad.B.cols()), Matrix(ad.A.rows(), ad.A.cols())});
  }
  return g;
}

void LayerGradients::zero() {
  g_theta0.fill(0.0);
  std::fill(g_bias0.begin(), g_bias0.end(), 0.0);
  for (auto& ad : g_adapters) {
    ad.B.fill(0.0);
    ad.A.fill(0.0);
  }
}

PamalGradients PamalGradients::zeros_like(const PamalLayer& layer) {
  PamalGradients g;
  for (std::size_t i = 0; i < layer.tasks(); ++i) {
    g.g_thetas.emplace_back(layer.out_dim(), layer.in_dim());
    g.g_biases.emplace_back(layer.out_dim(), 0.0);
  }
  return g;
}

void PamalGradients::zero() {
  for (auto& m : g_thetas) m.fill(0.0);
  for (auto& b : g_biases) std::fill(b.begin(), b.end(), 0.0);
}

LowRankLayer make_lowrank_layer(std::size_t out_dim, std::size_t in_dim, std::size_t tasks,
                                std::size_t rank, double scale, SeededRng& rng,
                                double adapter_std) {
  LowRankLayer layer;
  layer.theta0 = kaiming_uniform(out_dim, in_dim, rng);
  layer.bias0.assign(out_dim, 0.0);
  layer.scale = scale;
  layer.rank = rank;
  for (std::size_t i = 0; i < tasks; ++i) {
    Adapter ad{Matrix(out_dim, rank), Matrix(rank, in_dim)};
    for (double& v : ad.A.flat()) v = adapter_std * rng.normal();
    layer.adapters.push_back(std::move(ad));
  }
  layer.validate();
  return layer;
}

PamalLayer make_pamal_layer(std::size_t out_dim, std::size_t in_dim, std::size_t tasks,
                            SeededRng& rng, bool identical) {
  PamalLayer layer;
  const Matrix shared = identical ? kaiming_uniform(out_dim, in_dim, rng) : Matrix();
  for (std::size_t i = 0; i < tasks; ++i) {
    layer.thetas.push_back(identical ? shared : kaiming_uniform(out_dim, in_dim, rng));
    layer.biases.emplace_back(out_dim, 0.0);
  }
  return layer;
}

namespace {

std::size_t anchor_index(const PreferenceVector& alpha) {
  std::size_t j = 0;
  for (std::size_t i = 1; i < alpha.size(); ++i)
    if (alpha[i] > alpha[j]) j = i;
  return j;
}

}  // namespace

Matrix combine(const LowRankLayer& layer, const PreferenceVector& alpha) {
  require_alpha(layer.tasks(), alpha, "combine");
  // Sum the adapter terms first so that cancelling adapters leave theta0 untouched.
  Matrix delta(layer.out_dim(), layer.in_dim());
  for (std::size_t i = 0; i < layer.tasks(); ++i) {
    const double coeff = layer.scale * alpha[i];
    if (coeff == 0.0) continue;
    add_matmul(delta, coeff, layer.adapters[i].B, layer.adapters[i].A);
  }
  delta += layer.theta0;
  return delta;
}

Matrix combine_pamal(const PamalLayer& layer, const PreferenceVector& alpha) {
  require_alpha(layer.tasks(), alpha, "combine_pamal");
  // Anchored at the heaviest base: vertices and identical bases come out exact.
  const std::size_t j = anchor_index(alpha);
  Matrix w = layer.thetas[j];
  for (std::size_t i = 0; i < layer.tasks(); ++i) {
    if (i == j || alpha[i] == 0.0) continue;
    Matrix d = layer.thetas[i];
    d -= layer.thetas[j];
    w.axpy(alpha[i], d);
  }
  return w;
}

Vector combine_pamal_bias(const PamalLayer& layer, const PreferenceVector& alpha) {
  require_alpha(layer.tasks(), alpha, "combine_pamal_bias");
  const std::size_t j = anchor_index(alpha);
  Vector b = layer.biases[j];
  for (std::size_t i = 0; i < layer.tasks(); ++i) {
    if (i == j || alpha[i] == 0.0) continue;
    for (std::size_t r = 0; r < b.size(); ++r)
      b[r] += alpha[i] * (layer.biases[i][r] - layer.biases[j][r]);
  }
  return b;
}

void backprop_combined(const LowRankLayer& layer, const PreferenceVector& alpha,
                       const Matrix& g_combined, std::span<const double> g_bias,
                       LayerGradients& grads, bool freeze_main) {
  require_alpha(layer.tasks(), alpha, "backprop_combined");
  if (!g_combined.same_shape(layer.theta0) || g_bias.size() != layer.out_dim()) {
    throw ContractViolation("backprop_combined: gradient " + g_combined.shape_string() +
                            " does not match layer " + layer.theta0.shape_string());
  }
  if (!grads.g_theta0.same_shape(layer.theta0) || grads.g_adapters.size() != layer.tasks()) {
    throw ContractViolation("backprop_combined: gradient buffer does not mirror the layer");
  }
  if (!freeze_main) {
    grads.g_theta0 += g_combined;
    for (std::size_t r = 0; r < g_bias.size(); ++r) grads.g_bias0[r] += g_bias[r];
  }
  for (std::size_t i = 0; i < layer.tasks(); ++i) {
    const double coeff = layer.scale * alpha[i];
    if (coeff == 0.0) continue;
    const Adapter& ad = layer.adapters[i];
    Adapter& g = grads.g_adapters[i];
    g.B.axpy(coeff, matmul_transpose_b(g_combined, ad.A));
    g.A.axpy(coeff, matmul_transpose_a(ad.B, g_combined));
  }
}

void backprop_pamal(const PamalLayer& layer, const PreferenceVector& alpha,
                    const Matrix& g_combined, std::span<const double> g_bias,
                    PamalGradients& grads) {
  require_alpha(layer.tasks(), alpha, "backprop_pamal");
  if (!g_combined.same_shape(layer.thetas.front()) || g_bias.size() != layer.out_dim()) {
    throw ContractViolation("backprop_pamal: gradient shape mismatch");
  }
  for (std::size_t i = 0; i < layer.tasks(); ++i) {
    if (alpha[i] == 0.0) continue;
    grads.g_thetas[i].axpy(alpha[i], g_combined);
    for (std::size_t r = 0; r < g_bias.size(); ++r) grads.g_biases[i][r] += alpha[i] * g_bias[r];
  }
}

ParameterCount parameter_count(std::size_t d, std::size_t k, std::size_t m, std::size_t r) {
  if (d == 0 || k == 0 || m == 0) throw ParameterError("parameter_count: d, k, m must be >= 1");
  if (r == 0) throw ParameterError("parameter_count: rank must be >= 1");
  return {d * k + m * (d * r + r * k), m * d * k};
}

double pairwise_cosine_similarity(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) {
    throw ContractViolation("cosine similarity: shape mismatch " + a.shape_string() + " vs " +
                            b.shape_string());
  }
  const double na = frobenius_norm(a), nb = frobenius_norm(b);
  if (na == 0.0 || nb == 0.0) throw DegenerateInput("cosine similarity of a zero matrix");
  const double c = dot(a.flat(), b.flat()) / (na * nb);
  return std::clamp(c, -1.0, 1.0);
}

}  // namespace lorpman
