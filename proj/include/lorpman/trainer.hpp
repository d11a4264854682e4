// Copyright 2026 The lorpman Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Training loop for preference-combined models.
//
// Each iteration draws a minibatch and b preferences from Dir(p), evaluates the
// model once per preference, and minimises
//
//     L = sum_j sum_i alpha^j_i f_i(theta(alpha^j)) + lambda_p R_p + lambda_o R_o
//
// The main weights (theta0, bias0) stop updating from `freeze_epoch` on; the
// adapters, and the heads unless `freeze_heads`, keep training.

#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lorpman/metrics.hpp"
#include "lorpman/network.hpp"
#include "lorpman/problems.hpp"
#include "lorpman/random.hpp"
#include "lorpman/regularization.hpp"

namespace lorpman {

struct OptimizerSpec {
  enum class Kind { kSgd, kAdam };
  Kind kind = Kind::kAdam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static OptimizerSpec sgd(double lr) { return {Kind::kSgd, lr}; }
  static OptimizerSpec adam(double lr) { return {Kind::kAdam, lr}; }
};

/// Per-tensor optimizer memory. Slots are created lazily in call order, so a
/// given caller must always present its tensors in the same order.
struct OptimizerState {
  struct Slot {
    Vector first;
    Vector second;
    std::uint64_t steps = 0;
  };
  std::vector<Slot> slots;
};

/// One update of `param` from `grad` using slot `slot` of `state`.
/// SGD: p -= lr g. Adam: bias-corrected first/second moments, per-slot step count.
void optimizer_step(std::span<double> param, std::span<const double> grad, OptimizerState& state,
                    std::size_t slot, const OptimizerSpec& spec);

struct HypervolumeConfig {
  Vector ref_offset;  // per task; gains are offset - loss, reference point 0
  std::size_t front_size = 0;            // 0: 11 / 66 / 100 by task count
  std::uint64_t mc_samples = 1'000'000;  // used when m > 3
};

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t freeze_epoch = 10;
  std::size_t window_b = 3;
  std::size_t batch_q = 64;
  Vector dirichlet_p;  // empty: all ones
  double lambda_p = 0.0;
  double lambda_o = 0.0;
  double scale_s = 1.0;
  std::size_t rank_r = 4;
  OptimizerSpec optimizer;
  std::uint64_t seed = 0;
  Mode mode = Mode::kLorpman;

  OrthConfig orth;  // lambda_o above takes precedence over orth.lambda_o
  HingeOrientation hinge = HingeOrientation::kPenalizeWrongOrdering;
  bool freeze_heads = false;
  std::size_t validate_every = 1;  // 0: only after the last epoch
  HypervolumeConfig hv;

  void validate(std::size_t tasks) const;
  Vector concentration(std::size_t tasks) const;
};

struct HypervolumePoint {
  std::size_t epoch = 0;  // number of completed epochs
  double value = 0.0;
  std::optional<double> stderr_estimate;
};

struct RunRecord {
  TrainConfig config;
  std::vector<double> epoch_loss;  // mean total loss per epoch
  std::vector<HypervolumePoint> validation_hv;
  std::size_t iterations = 0;
  double elapsed_seconds = 0.0;

  const HypervolumePoint& final_hv() const { return validation_hv.back(); }
};

struct PreferenceScheme {
  enum class Kind { kUniformGrid, kDirichlet };
  Kind kind = Kind::kUniformGrid;
  std::uint64_t seed = 0;
};

/// 11 for two tasks, 66 for three, 100 otherwise.
std::size_t default_front_size(std::size_t tasks);
/// Grid for up to three tasks, Dirichlet(1) draws beyond.
PreferenceScheme default_scheme(std::size_t tasks, std::uint64_t seed);

struct FrontEvaluation {
  std::vector<PreferenceVector> preferences;
  FrontSample losses;  // minimise orientation, one point per preference
};

/// Evaluates the per-task losses on `batch` at `n_prefs` preferences.
/// Grid sizes must be a simplex-grid count (C(H+m-1, m-1)).
FrontEvaluation sample_front(const ManifoldModel& model, const Batch& batch, std::size_t n_prefs,
                             const PreferenceScheme& scheme);

/// Hypervolume of a loss front after mapping to gains with `config.ref_offset`.
HypervolumeResult front_hypervolume(const FrontSample& losses, const HypervolumeConfig& config,
                                    std::uint64_t seed);

using EpochObserver = std::function<void(std::size_t completed_epochs, const ManifoldModel&)>;

/// Runs the full loop. The observer, if set, is called once before training
/// (0 completed epochs) and after every epoch. Throws NumericError naming the
/// iteration and the preference draws if the loss becomes non-finite.
RunRecord train(ManifoldModel& model, const Dataset& data, const TrainConfig& config,
                const EpochObserver& observer = {});

/// Per-epoch cosine similarity between the two base networks of each bottom
/// layer of a two-task PaMaL model; row 0 is the state before training.
std::vector<std::vector<double>> pamal_similarity_trace(ManifoldModel& model, const Dataset& data,
                                                        const TrainConfig& config);

/// Main-weight checksum (theta0 and bias0 of every bottom layer).
std::uint64_t main_weight_checksum(const ManifoldModel& model);
/// Checksum over every adapter matrix.
std::uint64_t adapter_checksum(const ManifoldModel& model);

// ---------------------------------------------------------------------------
// Toy manifold training
// ---------------------------------------------------------------------------

struct ToyTrainConfig {
  std::size_t iterations = 40000;
  std::size_t window_b = 4;
  Vec2 dirichlet_p{1.0, 1.0};
  OptimizerSpec optimizer = OptimizerSpec::adam(1e-3);
  std::size_t freeze_iteration = std::numeric_limits<std::size_t>::max();
  std::size_t record_every = 100;
  std::uint64_t seed = 0;
};

struct ToyTrajectoryPoint {
  std::size_t step = 0;
  std::size_t preference = 0;  // index into ToyRun::preferences
  Vec2 theta{};
  ToyValues values;
};

struct ToyRun {
  std::vector<PreferenceVector> preferences;  // (1,0), (0,1), (1/2,1/2)
  std::vector<ToyTrajectoryPoint> trajectory;
  ToyState final_state;
};

ToyRun train_toy(const ToyTrainConfig& config);

// ---------------------------------------------------------------------------
// Plain weighted-sum minimisation on the convex problem.
// ---------------------------------------------------------------------------

struct ScalarizedSolution {
  Vector weights;
  Vector losses;
  std::size_t iterations = 0;
  double gradient_norm = 0.0;
};

/// Full-batch gradient descent on sum_i alpha_i f_i(w) from w = 0 until the
/// gradient norm drops below `tolerance` or `max_iterations` is reached.
ScalarizedSolution minimize_scalarized(const ConvexRegressionProblem& problem,
                                       const PreferenceVector& alpha, double tolerance = 1e-12,
                                       std::size_t max_iterations = 200000);

}  // namespace lorpman
