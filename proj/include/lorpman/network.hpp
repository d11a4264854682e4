// Copyright 2026 The lorpman Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Shared-bottom ReLU MLP with m task heads. The bottom layers are combined
// under a preference vector (low-rank or full-rank PaMaL style); the heads are
// plain affine maps and are never combined.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lorpman/lowrank.hpp"
#include "lorpman/matrix.hpp"
#include "lorpman/random.hpp"

namespace lorpman {

enum class Mode { kLorpman, kPamal };

enum class TaskKind { kRegression, kClassification };

struct TaskSpec {
  TaskKind kind = TaskKind::kRegression;
  std::size_t classes = 0;  // classification only

  std::size_t out_width() const noexcept {
    return kind == TaskKind::kRegression ? 1 : classes;
  }
};

struct Head {
  Matrix weight;  // out_width x hidden
  Vector bias;
};

struct ModelShape {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden;  // widths of the bottom layers, at least one
  std::vector<TaskSpec> tasks;
};

struct ModelOptions {
  Mode mode = Mode::kLorpman;
  std::size_t rank = 1;
  double scale = 1.0;
  double adapter_std = 0.01;
  bool pamal_identical_init = false;
};

struct ManifoldModel {
  Mode mode = Mode::kLorpman;
  std::vector<LowRankLayer> lowrank;  // populated in lorpman mode
  std::vector<PamalLayer> pamal;      // populated in pamal mode
  std::vector<Head> heads;
  std::vector<TaskSpec> tasks;
  // Bumped on every parameter update so stale forward caches are detectable.
  std::uint64_t generation = 0;

  std::size_t num_tasks() const noexcept { return tasks.size(); }
  std::size_t depth() const noexcept {
    return mode == Mode::kLorpman ? lowrank.size() : pamal.size();
  }
  std::size_t input_dim() const;
  void touch() noexcept { ++generation; }
  void validate() const;
};

ManifoldModel make_model(const ModelShape& shape, const ModelOptions& options, SeededRng& rng);

/// A minibatch: q input rows and a q x m target table. Classification targets
/// hold class indices as exact integers.
struct Batch {
  Matrix inputs;
  Matrix targets;

  std::size_t rows() const noexcept { return inputs.rows(); }
};

struct ForwardCache {
  std::vector<double> alpha;
  std::uint64_t generation = 0;
  std::vector<Matrix> layer_inputs;  // input of each bottom layer, then the bottom output
  std::vector<Matrix> pre_activations;
  std::vector<Matrix> weights;  // combined weight per bottom layer
  std::vector<Vector> biases;   // combined bias per bottom layer
  std::vector<Matrix> head_outputs;
  Matrix targets;
};

struct ForwardResult {
  Vector task_losses;
  ForwardCache cache;
};

/// Per-task mean losses (MSE or softmax cross-entropy) at the combined
/// parameters. Throws NumericError naming the layer on a non-finite activation.
ForwardResult forward(const ManifoldModel& model, const PreferenceVector& alpha,
                      const Batch& batch);

struct ModelGradients {
  std::vector<LayerGradients> lowrank;
  std::vector<PamalGradients> pamal;
  std::vector<Head> heads;

  static ModelGradients zeros_like(const ManifoldModel& model);
  void zero();
};

/// Accumulates the gradient of sum_i loss_weights[i] * f_i into `grads`.
/// `freeze_main` stops theta0/bias0 accumulation (lorpman mode);
/// `freeze_heads` does the same for the task heads.
/// Throws ContractViolation if the cache is stale or belongs to another alpha.
void backward(const ManifoldModel& model, const PreferenceVector& alpha,
              const ForwardCache& cache, std::span<const double> loss_weights,
              bool freeze_main, ModelGradients& grads, bool freeze_heads = false);

double scalarize(std::span<const double> task_losses, const PreferenceVector& alpha);

}  // namespace lorpman
