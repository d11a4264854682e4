// Copyright 2026 The lorpman Authors.
// SPDX-License-Identifier: Apache-2.0

#include "lorpman/regularization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lorpman/errors.hpp"

namespace lorpman {

OrthLayerResult orth_loss_layer(std::span<const Adapter> adapters,
                                std::optional<std::span<const std::size_t>> subset) {
  std::vector<std::size_t> selected;
  if (subset) {
    selected.assign(subset->begin(), subset->end());
    for (std::size_t i : selected) {
      if (i >= adapters.size()) throw ContractViolation("orth_loss_layer: task index out of range");
    }
  } else {
    selected.resize(adapters.size());
    std::iota(selected.begin(), selected.end(), std::size_t{0});
  }

  OrthLayerResult result;
  OrthLayerCache& cache = result.cache;
  for (std::size_t i : selected) {
    Matrix product = adapters[i].product();
    const double n = frobenius_norm(product);
    if (n == 0.0) continue;
    Vector w(product.flat().begin(), product.flat().end());
    for (double& v : w) v /= n;
    cache.tasks.push_back(i);
    cache.directions.push_back(std::move(w));
    cache.norms.push_back(n);
    cache.adapters.push_back(adapters[i]);
  }
  const std::size_t k = cache.tasks.size();
  if (k < 2) {
    result.degenerate = true;
    cache = OrthLayerCache{};
    return result;
  }
  cache.residual = Matrix(k, k);
  double value = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      const double g = dot(cache.directions[i], cache.directions[j]) - (i == j ? 1.0 : 0.0);
      cache.residual(i, j) = g;
      cache.residual(j, i) = g;
      value += (i == j ? 1.0 : 2.0) * g * g;
    }
  }
  result.value = value;
  return result;
}

std::vector<std::size_t> sample_task_subset(std::size_t m, std::size_t size, SeededRng& rng) {
  if (size > m) throw ParameterError("task subset larger than the task count");
  // Partial Fisher-Yates.
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < size; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(m - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(size);
  std::sort(idx.begin(), idx.end());
  return idx;
}

OrthNetworkResult orth_loss_network(const ManifoldModel& model, SeededRng& rng,
                                    const OrthConfig& config) {
  if (model.mode != Mode::kLorpman) {
    throw UnsupportedMode("orthogonal regularisation needs low-rank adapters (pamal mode given)");
  }
  if (config.subset_size < 2) throw ParameterError("orthogonal subset size must be >= 2");
  OrthNetworkResult result;
  const std::size_t m = model.num_tasks();
  if (m > config.stochastic_threshold) {
    result.subset = sample_task_subset(m, std::min(config.subset_size, m), rng);
  }
  double total = 0.0;
  for (const auto& layer : model.lowrank) {
    OrthLayerResult lr =
        result.subset.empty()
            ? orth_loss_layer(layer.adapters)
            : orth_loss_layer(layer.adapters, std::span<const std::size_t>(result.subset));
    total += lr.value;
    result.layers.push_back(std::move(lr.cache));
  }
  result.value = total / static_cast<double>(model.lowrank.size());
  return result;
}

void orth_loss_layer_backward(const OrthLayerCache& cache, std::span<Adapter> g_adapters,
                              double factor) {
  const std::size_t k = cache.tasks.size();
  if (k < 2 || factor == 0.0) return;
  for (std::size_t a = 0; a < k; ++a) {
    // dR/dw_a = 4 * sum_b E_ab w_b (E symmetric)
    const Vector& w = cache.directions[a];
    Vector g_w(w.size(), 0.0);
    for (std::size_t b = 0; b < k; ++b) {
      const double e = cache.residual(a, b);
      if (e == 0.0) continue;
      const Vector& wb = cache.directions[b];
      for (std::size_t t = 0; t < w.size(); ++t) g_w[t] += 4.0 * e * wb[t];
    }
    // Through the normalisation: (I - w w^T) / ||v||
    const double radial = dot(w, g_w);
    const Adapter& ad = cache.adapters[a];
    Matrix g_product(ad.B.rows(), ad.A.cols());
    auto flat = g_product.flat();
    for (std::size_t t = 0; t < w.size(); ++t) {
      flat[t] = factor * (g_w[t] - radial * w[t]) / cache.norms[a];
    }
    Adapter& g = g_adapters[cache.tasks[a]];
    g.B += matmul_transpose_b(g_product, ad.A);
    g.A += matmul_transpose_a(ad.B, g_product);
  }
}

void orth_loss_backward(const OrthNetworkResult& result, ModelGradients& grads, double lambda_o) {
  if (lambda_o == 0.0 || result.layers.empty()) return;
  if (grads.lowrank.size() != result.layers.size()) {
    throw ContractViolation("orth_loss_backward: gradient buffer does not match the cache");
  }
  const double factor = lambda_o / static_cast<double>(result.layers.size());
  for (std::size_t l = 0; l < result.layers.size(); ++l) {
    orth_loss_layer_backward(result.layers[l], grads.lowrank[l].g_adapters, factor);
  }
}

MultiForwardResult multi_forward_loss(const Matrix& losses,
                                      std::span<const PreferenceVector> alphas,
                                      HingeOrientation orientation) {
  const std::size_t b = alphas.size();
  MultiForwardResult result;
  result.subgradient = Matrix(losses.rows(), losses.cols());
  if (losses.rows() != b) {
    throw ContractViolation("multi_forward_loss: " + std::to_string(losses.rows()) +
                            " loss rows but " + std::to_string(b) + " preferences");
  }
  if (b < 2) {
    result.degenerate = true;
    return result;
  }
  const std::size_t m = losses.cols();
  for (const auto& a : alphas) {
    if (a.size() != m) throw ContractViolation("multi_forward_loss: preference length mismatch");
  }

  struct Edge {
    std::size_t lo, hi;  // alpha^lo_i < alpha^hi_i
    double hinge;
  };
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < m; ++i) {
    edges.clear();
    for (std::size_t j = 0; j < b; ++j) {
      for (std::size_t jp = 0; jp < b; ++jp) {
        if (!(alphas[j][i] < alphas[jp][i])) continue;
        const double arg = orientation == HingeOrientation::kPenalizeWrongOrdering
                               ? losses(jp, i) - losses(j, i)
                               : losses(j, i) - losses(jp, i);
        edges.push_back({j, jp, arg});
      }
    }
    if (edges.empty()) continue;
    // log(mean(exp(h_e))) with h_e = max(arg, 0), stabilised by the max hinge.
    double top = 0.0;
    for (const auto& e : edges) top = std::max(top, e.hinge);
    double sum = 0.0;
    for (const auto& e : edges) sum += std::exp(std::max(e.hinge, 0.0) - top);
    result.value += top + std::log(sum / static_cast<double>(edges.size()));
    for (const auto& e : edges) {
      if (!(e.hinge > 0.0)) continue;
      const double weight = std::exp(e.hinge - top) / sum;
      const double sign = orientation == HingeOrientation::kPenalizeWrongOrdering ? 1.0 : -1.0;
      result.subgradient(e.hi, i) += sign * weight;
      result.subgradient(e.lo, i) -= sign * weight;
    }
  }
  return result;
}

}  // namespace lorpman
