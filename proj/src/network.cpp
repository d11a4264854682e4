// Copyright 2026 The lorpman Authors.
// SPDX-License-Identifier: Apache-2.0

#include "lorpman/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lorpman/errors.hpp"

namespace lorpman {

std::size_t ManifoldModel::input_dim() const {
  if (mode == Mode::kLorpman) return lowrank.front().in_dim();
  return pamal.front().in_dim();
}

void ManifoldModel::validate() const {
  const std::size_t m = tasks.size();
  if (m < 2) throw ContractViolation("model needs at least 2 tasks");
  if (heads.size() != m) throw ContractViolation("number of heads must equal number of tasks");
  if (depth() == 0) throw ContractViolation("model needs at least one bottom layer");
  std::size_t width = 0;
  for (std::size_t l = 0; l < depth(); ++l) {
    std::size_t in = 0, out = 0, layer_tasks = 0;
    if (mode == Mode::kLorpman) {
      lowrank[l].validate();
      in = lowrank[l].in_dim();
      out = lowrank[l].out_dim();
      layer_tasks = lowrank[l].tasks();
    } else {
      pamal[l].validate();
      in = pamal[l].in_dim();
      out = pamal[l].out_dim();
      layer_tasks = pamal[l].tasks();
    }
    if (layer_tasks != m) throw ContractViolation("bottom layer task count mismatch");
    if (l > 0 && in != width) {
      throw ContractViolation("bottom layer " + std::to_string(l) + " expects width " +
                              std::to_string(in) + ", previous layer gives " +
                              std::to_string(width));
    }
    width = out;
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (heads[i].weight.cols() != width || heads[i].weight.rows() != tasks[i].out_width() ||
        heads[i].bias.size() != tasks[i].out_width()) {
      throw ContractViolation("head " + std::to_string(i) + " does not conform");
    }
  }
}

ManifoldModel make_model(const ModelShape& shape, const ModelOptions& options, SeededRng& rng) {
  if (shape.hidden.empty()) throw ParameterError("model needs at least one hidden layer");
  if (shape.input_dim == 0) throw ParameterError("input dimension must be positive");
  const std::size_t m = shape.tasks.size();
  if (m < 2) throw ParameterError("model needs at least 2 tasks");
  for (const auto& t : shape.tasks) {
    if (t.kind == TaskKind::kClassification && t.classes < 2) {
      throw ParameterError("classification tasks need at least 2 classes");
    }
  }
  ManifoldModel model;
  model.mode = options.mode;
  model.tasks = shape.tasks;
  SeededRng init = rng.stream("init");
  std::size_t in = shape.input_dim;
  for (std::size_t width : shape.hidden) {
    if (options.mode == Mode::kLorpman) {
      if (options.rank < 1 || options.rank > std::min(width, in)) {
        throw ParameterError("rank " + std::to_string(options.rank) +
                             " outside [1, min(d,k)] for a " + std::to_string(width) + "x" +
                             std::to_string(in) + " layer");
      }
      if (!(options.scale > 0.0)) throw ParameterError("scale must be positive");
      model.lowrank.push_back(make_lowrank_layer(width, in, m, options.rank, options.scale, init,
                                                 options.adapter_std));
    } else {
      model.pamal.push_back(make_pamal_layer(width, in, m, init, options.pamal_identical_init));
    }
    in = width;
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  for (const auto& t : shape.tasks) {
    Head h{Matrix(t.out_width(), in), Vector(t.out_width(), 0.0)};
    for (double& v : h.weight.flat()) v = bound * (2.0 * init.uniform() - 1.0);
    model.heads.push_back(std::move(h));
  }
  model.validate();
  return model;
}

namespace {

// z = x * w^T + b, row-wise
Matrix affine(const Matrix& x, const Matrix& w, std::span<const double> b) {
  Matrix z = matmul_transpose_b(x, w);
  for (std::size_t r = 0; r < z.rows(); ++r) {
    auto row = z.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += b[c];
  }
  return z;
}

std::size_t class_index(double target, std::size_t classes, std::size_t task) {
  const double rounded = std::round(target);
  if (rounded != target || rounded < 0.0 || rounded >= static_cast<double>(classes)) {
    throw ContractViolation("task " + std::to_string(task) + ": target " +
                            std::to_string(target) + " is not a class index below " +
                            std::to_string(classes));
  }
  return static_cast<std::size_t>(rounded);
}

// Mean loss over the batch and, when `grad` is non-null, d(loss)/d(output).
double task_loss(const TaskSpec& task, std::size_t t, const Matrix& out, const Matrix& targets,
                 Matrix* grad) {
  const std::size_t q = out.rows();
  const double inv_q = 1.0 / static_cast<double>(q);
  double total = 0.0;
  if (grad) *grad = Matrix(out.rows(), out.cols());
  if (task.kind == TaskKind::kRegression) {
    for (std::size_t r = 0; r < q; ++r) {
      const double diff = out(r, 0) - targets(r, t);
      total += diff * diff;
      if (grad) (*grad)(r, 0) = 2.0 * diff * inv_q;
    }
    return total * inv_q;
  }
  for (std::size_t r = 0; r < q; ++r) {
    const auto row = out.row(r);
    const std::size_t label = class_index(targets(r, t), task.classes, t);
    const double top = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double v : row) sum += std::exp(v - top);
    const double log_norm = top + std::log(sum);
    total += log_norm - row[label];
    if (grad) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        const double p = std::exp(row[c] - log_norm);
        (*grad)(r, c) = (p - (c == label ? 1.0 : 0.0)) * inv_q;
      }
    }
  }
  return total * inv_q;
}

}  // namespace

ForwardResult forward(const ManifoldModel& model, const PreferenceVector& alpha,
                      const Batch& batch) {
  const std::size_t m = model.num_tasks();
  if (alpha.size() != m) {
    throw ContractViolation("forward: preference has " + std::to_string(alpha.size()) +
                            " entries, model has " + std::to_string(m) + " tasks");
  }
  if (batch.inputs.cols() != model.input_dim() || batch.targets.rows() != batch.inputs.rows() ||
      batch.targets.cols() != m || batch.rows() == 0) {
    throw ContractViolation("forward: batch " + batch.inputs.shape_string() + " / targets " +
                            batch.targets.shape_string() + " does not fit the model");
  }
  ForwardResult result;
  ForwardCache& cache = result.cache;
  cache.alpha.assign(alpha.values().begin(), alpha.values().end());
  cache.generation = model.generation;
  cache.targets = batch.targets;
  cache.layer_inputs.push_back(batch.inputs);
  for (std::size_t l = 0; l < model.depth(); ++l) {
    Matrix w;
    Vector b;
    if (model.mode == Mode::kLorpman) {
      w = combine(model.lowrank[l], alpha);
      b = model.lowrank[l].bias0;
    } else {
      w = combine_pamal(model.pamal[l], alpha);
      b = combine_pamal_bias(model.pamal[l], alpha);
    }
    Matrix z = affine(cache.layer_inputs.back(), w, b);
    if (!z.all_finite()) {
      throw NumericError("non-finite activation in bottom layer " + std::to_string(l));
    }
    Matrix h = z;
    for (double& v : h.flat()) v = std::max(v, 0.0);
    cache.pre_activations.push_back(std::move(z));
    cache.weights.push_back(std::move(w));
    cache.biases.push_back(std::move(b));
    cache.layer_inputs.push_back(std::move(h));
  }
  result.task_losses.resize(m);
  for (std::size_t t = 0; t < m; ++t) {
    Matrix out = affine(cache.layer_inputs.back(), model.heads[t].weight, model.heads[t].bias);
    if (!out.all_finite()) {
      throw NumericError("non-finite activation in head " + std::to_string(t));
    }
    result.task_losses[t] = task_loss(model.tasks[t], t, out, batch.targets, nullptr);
    cache.head_outputs.push_back(std::move(out));
  }
  return result;
}

ModelGradients ModelGradients::zeros_like(const ManifoldModel& model) {
  ModelGradients g;
  for (const auto& l : model.lowrank) g.lowrank.push_back(LayerGradients::zeros_like(l));
  for (const auto& l : model.pamal) g.pamal.push_back(PamalGradients::zeros_like(l));
  for (const auto& h : model.heads) {
    g.heads.push_back({Matrix(h.weight.rows(), h.weight.cols()), Vector(h.bias.size(), 0.0)});
  }
  return g;
}

void ModelGradients::zero() {
  for (auto& l : lowrank) l.zero();
  for (auto& l : pamal) l.zero();
  for (auto& h : heads) {
    h.weight.fill(0.0);
    std::fill(h.bias.begin(), h.bias.end(), 0.0);
  }
}

void backward(const ManifoldModel& model, const PreferenceVector& alpha,
              const ForwardCache& cache, std::span<const double> loss_weights,
              bool freeze_main, ModelGradients& grads, bool freeze_heads) {
  const std::size_t m = model.num_tasks();
  if (cache.generation != model.generation || cache.head_outputs.size() != m) {
    throw ContractViolation("backward: forward cache is stale (model changed since forward)");
  }
  if (!std::equal(cache.alpha.begin(), cache.alpha.end(), alpha.values().begin(),
                  alpha.values().end())) {
    throw ContractViolation("backward: preference differs from the one used in forward");
  }
  if (loss_weights.size() != m) throw ContractViolation("backward: loss weight count mismatch");

  const Matrix& bottom_out = cache.layer_inputs.back();
  Matrix d_hidden(bottom_out.rows(), bottom_out.cols());
  bool any = false;
  for (std::size_t t = 0; t < m; ++t) {
    const double w = loss_weights[t];
    if (w == 0.0) continue;
    any = true;
    Matrix d_out;
    task_loss(model.tasks[t], t, cache.head_outputs[t], cache.targets, &d_out);
    d_out *= w;
    if (!freeze_heads) {
      grads.heads[t].weight += matmul_transpose_a(d_out, bottom_out);
      for (std::size_t r = 0; r < d_out.rows(); ++r)
        for (std::size_t c = 0; c < d_out.cols(); ++c) grads.heads[t].bias[c] += d_out(r, c);
    }
    add_matmul(d_hidden, 1.0, d_out, model.heads[t].weight);
  }
  if (!any) return;

  for (std::size_t l = model.depth(); l-- > 0;) {
    const Matrix& z = cache.pre_activations[l];
    Matrix dz = std::move(d_hidden);
    for (std::size_t i = 0; i < dz.size(); ++i)
      if (z.flat()[i] <= 0.0) dz.flat()[i] = 0.0;
    const Matrix g_weight = matmul_transpose_a(dz, cache.layer_inputs[l]);
    Vector g_bias(dz.cols(), 0.0);
    for (std::size_t r = 0; r < dz.rows(); ++r)
      for (std::size_t c = 0; c < dz.cols(); ++c) g_bias[c] += dz(r, c);
    if (model.mode == Mode::kLorpman) {
      backprop_combined(model.lowrank[l], alpha, g_weight, g_bias, grads.lowrank[l], freeze_main);
    } else {
      backprop_pamal(model.pamal[l], alpha, g_weight, g_bias, grads.pamal[l]);
    }
    if (l > 0) d_hidden = matmul(dz, cache.weights[l]);
  }
}

double scalarize(std::span<const double> task_losses, const PreferenceVector& alpha) {
  if (task_losses.size() != alpha.size()) {
    throw ContractViolation("scalarize: " + std::to_string(task_losses.size()) +
                            " losses but " + std::to_string(alpha.size()) + " weights");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) s += alpha[i] * task_losses[i];
  return s;
}

}  // namespace lorpman
