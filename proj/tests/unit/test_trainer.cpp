// Copyright 2026 The lorpman Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "lorpman/errors.hpp"
#include "lorpman/trainer.hpp"
#include "test_util.hpp"

namespace lorpman {
namespace {

struct Fixture {
  SyntheticProblem problem;
  ManifoldModel model;
};

Fixture small_problem(Mode mode, std::uint64_t seed, std::size_t tasks = 3) {
  SyntheticSpec spec;
  spec.tasks = tasks;
  spec.input_dim = 6;
  spec.rows = 200;
  spec.seed = seed;
  Fixture f{make_synthetic(spec), {}};
  ModelOptions options;
  options.mode = mode;
  options.rank = 2;
  SeededRng rng(seed);
  f.model = make_model(ModelShape{6, {8, 8}, f.problem.tasks}, options, rng);
  return f;
}

TrainConfig small_config(Mode mode) {
  TrainConfig c;
  c.epochs = 4;
  c.freeze_epoch = 4;
  c.batch_q = 32;
  c.window_b = 2;
  c.rank_r = 2;
  c.mode = mode;
  c.lambda_o = mode == Mode::kLorpman ? 0.5 : 0.0;
  c.lambda_p = 0.1;
  c.optimizer = OptimizerSpec::adam(1e-2);
  return c;
}

TEST(Optimizer, SgdExamples) {
  OptimizerState state;
  Vector p{0.0, 3.0};
  optimizer_step(p, Vector{0.0, 0.0}, state, 0, OptimizerSpec::sgd(0.1));
  EXPECT_EQ(p, (Vector{0.0, 3.0}));
  optimizer_step(p, Vector{1.0, 0.0}, state, 0, OptimizerSpec::sgd(0.1));
  EXPECT_DOUBLE_EQ(p[0], -0.1);
}

TEST(Optimizer, AdamFirstStepAndConvergence) {
  OptimizerState state;
  Vector x{5.0};
  // Bias correction makes the first step exactly lr * sign(g) (up to eps).
  optimizer_step(x, Vector{10.0}, state, 0, OptimizerSpec::adam(0.1));
  EXPECT_NEAR(x[0], 4.9, 1e-9);
  for (int i = 1; i < 1000; ++i) optimizer_step(x, Vector{2.0 * x[0]}, state, 0, OptimizerSpec::adam(0.1));
  EXPECT_LT(std::abs(x[0]), 0.01);
  EXPECT_EQ(state.slots[0].steps, 1000u);
}

TEST(TrainConfig, Defaults) {
  const TrainConfig c;
  EXPECT_EQ(c.optimizer.kind, OptimizerSpec::Kind::kAdam);
  EXPECT_EQ(c.optimizer.beta1, 0.9);
  EXPECT_EQ(c.optimizer.beta2, 0.999);
  EXPECT_EQ(c.optimizer.eps, 1e-8);
  EXPECT_EQ(c.hinge, HingeOrientation::kPenalizeWrongOrdering);
  EXPECT_FALSE(c.freeze_heads);
  EXPECT_EQ(c.concentration(4), Vector(4, 1.0));
  EXPECT_EQ(default_front_size(2), 11u);
  EXPECT_EQ(default_front_size(3), 66u);
  EXPECT_EQ(default_front_size(7), 100u);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  c.freeze_epoch = c.epochs + 1;
  EXPECT_THROW(c.validate(3), ParameterError);
  c = {};
  c.window_b = 0;
  EXPECT_THROW(c.validate(3), ParameterError);
  c = {};
  c.batch_q = 0;
  EXPECT_THROW(c.validate(3), ParameterError);
  c = {};
  c.lambda_o = -1.0;
  EXPECT_THROW(c.validate(3), ParameterError);
  c = {};
  c.dirichlet_p = {1.0, 1.0};
  EXPECT_THROW(c.validate(3), ParameterError);
}

TEST(Train, ZeroEpochsChangesNothing) {
  Fixture f = small_problem(Mode::kLorpman, 1);
  const std::uint64_t main = main_weight_checksum(f.model), adapters = adapter_checksum(f.model);
  TrainConfig c = small_config(Mode::kLorpman);
  c.epochs = 0;
  c.freeze_epoch = 0;
  const RunRecord r = train(f.model, f.problem.data, c);
  EXPECT_TRUE(r.epoch_loss.empty());
  EXPECT_EQ(r.iterations, 0u);
  EXPECT_EQ(main_weight_checksum(f.model), main);
  EXPECT_EQ(adapter_checksum(f.model), adapters);
}

TEST(Train, FreezeAtZeroKeepsMainWeights) {
  Fixture f = small_problem(Mode::kLorpman, 2);
  const std::uint64_t main = main_weight_checksum(f.model), adapters = adapter_checksum(f.model);
  TrainConfig c = small_config(Mode::kLorpman);
  c.freeze_epoch = 0;
  train(f.model, f.problem.data, c);
  EXPECT_EQ(main_weight_checksum(f.model), main);
  EXPECT_NE(adapter_checksum(f.model), adapters);
}

TEST(Train, FreezeMidwayHoldsMainWeightsFromThen) {
  Fixture f = small_problem(Mode::kLorpman, 3);
  TrainConfig c = small_config(Mode::kLorpman);
  c.freeze_epoch = 2;
  std::vector<std::uint64_t> main, adapters;
  train(f.model, f.problem.data, c, [&](std::size_t, const ManifoldModel& m) {
    main.push_back(main_weight_checksum(m));
    adapters.push_back(adapter_checksum(m));
  });
  ASSERT_EQ(main.size(), 5u);
  EXPECT_NE(main[0], main[1]);
  EXPECT_NE(main[1], main[2]);
  EXPECT_EQ(main[2], main[3]);
  EXPECT_EQ(main[3], main[4]);
  EXPECT_NE(adapters[2], adapters[3]);
  EXPECT_NE(adapters[3], adapters[4]);
}

TEST(Train, DeterministicForSameSeed) {
  for (Mode mode : {Mode::kLorpman, Mode::kPamal}) {
    Fixture a = small_problem(mode, 4), b = small_problem(mode, 4);
    const TrainConfig c = small_config(mode);
    const RunRecord ra = train(a.model, a.problem.data, c), rb = train(b.model, b.problem.data, c);
    EXPECT_EQ(ra.epoch_loss, rb.epoch_loss);
    ASSERT_EQ(ra.validation_hv.size(), rb.validation_hv.size());
    for (std::size_t i = 0; i < ra.validation_hv.size(); ++i)
      EXPECT_EQ(ra.validation_hv[i].value, rb.validation_hv[i].value);
    EXPECT_EQ(main_weight_checksum(a.model), main_weight_checksum(b.model));
  }
}

TEST(Train, RecordsEpochStatistics) {
  Fixture f = small_problem(Mode::kLorpman, 5);
  TrainConfig c = small_config(Mode::kLorpman);
  const RunRecord r = train(f.model, f.problem.data, c);
  ASSERT_EQ(r.epoch_loss.size(), 4u);
  for (double v : r.epoch_loss) EXPECT_TRUE(std::isfinite(v));
  EXPECT_EQ(r.iterations, 4u * ((160 + 31) / 32));
  ASSERT_EQ(r.validation_hv.size(), 4u);
  EXPECT_EQ(r.final_hv().epoch, 4u);
  EXPECT_LT(r.epoch_loss.back(), r.epoch_loss.front());
  EXPECT_EQ(r.config.hv.ref_offset.size(), 3u);
}

TEST(Train, PamalRejectsNothingButSkipsOrthogonalPenalty) {
  Fixture f = small_problem(Mode::kPamal, 6);
  TrainConfig c = small_config(Mode::kPamal);
  EXPECT_NO_THROW(train(f.model, f.problem.data, c));
}

TEST(Train, ModeMismatchIsRejected) {
  Fixture f = small_problem(Mode::kPamal, 7);
  EXPECT_THROW(train(f.model, f.problem.data, small_config(Mode::kLorpman)), Error);
}

TEST(Scalarization, WeightedGradientEqualsSumOfTaskGradients) {
  Fixture f = small_problem(Mode::kLorpman, 8);
  for (LowRankLayer& l : f.model.lowrank)
    for (Adapter& a : l.adapters) a.B.fill(0.05);
  const PreferenceVector alpha({0.2, 0.5, 0.3});
  const ForwardResult res = forward(f.model, alpha, f.problem.data.validation);
  ModelGradients joint = ModelGradients::zeros_like(f.model);
  backward(f.model, alpha, res.cache, alpha.values(), false, joint);
  ModelGradients parts = ModelGradients::zeros_like(f.model);
  for (std::size_t i = 0; i < 3; ++i) {
    ModelGradients gi = ModelGradients::zeros_like(f.model);
    Vector w(3, 0.0);
    w[i] = 1.0;
    backward(f.model, alpha, res.cache, w, false, gi);
    for (std::size_t l = 0; l < gi.lowrank.size(); ++l) {
      parts.lowrank[l].g_theta0.axpy(alpha[i], gi.lowrank[l].g_theta0);
      for (std::size_t t = 0; t < 3; ++t) parts.lowrank[l].g_adapters[t].A.axpy(alpha[i], gi.lowrank[l].g_adapters[t].A);
    }
  }
  for (std::size_t l = 0; l < joint.lowrank.size(); ++l) {
    for (std::size_t e = 0; e < joint.lowrank[l].g_theta0.size(); ++e)
      EXPECT_NEAR(joint.lowrank[l].g_theta0.flat()[e], parts.lowrank[l].g_theta0.flat()[e], 1e-10);
    for (std::size_t t = 0; t < 3; ++t)
      for (std::size_t e = 0; e < joint.lowrank[l].g_adapters[t].A.size(); ++e)
        EXPECT_NEAR(joint.lowrank[l].g_adapters[t].A.flat()[e], parts.lowrank[l].g_adapters[t].A.flat()[e], 1e-10);
  }
}

TEST(SampleFront, GridPreferences) {
  Fixture f2 = small_problem(Mode::kLorpman, 9, 2);
  const FrontEvaluation e2 = sample_front(f2.model, f2.problem.data.validation, 11, default_scheme(2, 0));
  ASSERT_EQ(e2.preferences.size(), 11u);
  std::set<long> firsts;
  for (const PreferenceVector& a : e2.preferences) firsts.insert(std::lround(a[0] * 10.0));
  EXPECT_EQ(firsts.size(), 11u);
  EXPECT_EQ(*firsts.begin(), 0);
  EXPECT_EQ(*firsts.rbegin(), 10);

  Fixture f3 = small_problem(Mode::kLorpman, 10, 3);
  const FrontEvaluation e3 = sample_front(f3.model, f3.problem.data.validation, 66, default_scheme(3, 0));
  ASSERT_EQ(e3.preferences.size(), 66u);
  for (const PreferenceVector& a : e3.preferences) {
    const long i = std::lround(a[0] * 10), j = std::lround(a[1] * 10), k = std::lround(a[2] * 10);
    EXPECT_EQ(i + j + k, 10);
  }
  EXPECT_THROW(sample_front(f3.model, f3.problem.data.validation, 50, default_scheme(3, 0)), Error);
}

TEST(SampleFront, FreshLorpmanModelGivesOnePoint) {
  // B = 0 at initialisation, so every preference maps to the same weights.
  Fixture f = small_problem(Mode::kLorpman, 11, 3);
  const FrontEvaluation e = sample_front(f.model, f.problem.data.validation, 66, default_scheme(3, 0));
  for (const Vector& p : e.losses.points) EXPECT_EQ(p, e.losses.points.front());
}

TEST(SimilarityTrace, IdenticalAndIndependentInitialisation) {
  SyntheticSpec spec;
  spec.tasks = 2;
  spec.input_dim = 32;
  spec.rows = 200;
  const SyntheticProblem p = make_synthetic(spec);
  TrainConfig c = small_config(Mode::kPamal);
  c.epochs = 2;
  c.freeze_epoch = 2;
  ModelOptions options;
  options.mode = Mode::kPamal;
  options.pamal_identical_init = true;
  SeededRng rng(12);
  ManifoldModel same = make_model(ModelShape{32, {40}, p.tasks}, options, rng);
  EXPECT_NEAR(pamal_similarity_trace(same, p.data, c)[0][0], 1.0, 1e-12);
  options.pamal_identical_init = false;
  ManifoldModel indep = make_model(ModelShape{32, {40}, p.tasks}, options, rng);
  EXPECT_LT(std::abs(pamal_similarity_trace(indep, p.data, c)[0][0]), 0.1);

  SyntheticSpec three = spec;
  three.tasks = 3;
  const SyntheticProblem p3 = make_synthetic(three);
  ManifoldModel m3 = make_model(ModelShape{32, {8}, p3.tasks}, options, rng);
  EXPECT_THROW(pamal_similarity_trace(m3, p3.data, c), UnsupportedMode);
}

TEST(SimilarityTrace, TrainingRaisesFirstLayerSimilarity) {
  SyntheticSpec spec;
  spec.tasks = 2;
  spec.input_dim = 16;
  spec.rows = 400;
  spec.conflict = 0.3;
  const SyntheticProblem p = make_synthetic(spec);
  TrainConfig c = small_config(Mode::kPamal);
  c.epochs = 10;
  c.freeze_epoch = 10;
  c.lambda_p = 0.0;
  ModelOptions options;
  options.mode = Mode::kPamal;
  SeededRng rng(13);
  ManifoldModel model = make_model(ModelShape{16, {32}, p.tasks}, options, rng);
  const auto trace = pamal_similarity_trace(model, p.data, c);
  ASSERT_EQ(trace.size(), 11u);
  EXPECT_GT(trace.back()[0], trace.front()[0]);
}

TEST(Toy, TrainingIsDeterministicAndLabelsPreferences) {
  ToyTrainConfig c;
  c.iterations = 500;
  const ToyRun a = train_toy(c), b = train_toy(c);
  ASSERT_EQ(a.preferences.size(), 3u);
  EXPECT_EQ(a.preferences[2], PreferenceVector({0.5, 0.5}));
  EXPECT_EQ(a.final_state.deltas, b.final_state.deltas);
  EXPECT_EQ(a.final_state.theta0, b.final_state.theta0);
  // Second delta coordinates never train.
  EXPECT_EQ(a.final_state.deltas[0][1], 0.0);
  EXPECT_EQ(a.final_state.deltas[1][1], 0.0);
}

TEST(Toy, FreezeHoldsTheta0) {
  ToyTrainConfig c;
  c.iterations = 300;
  c.freeze_iteration = 0;
  const ToyRun r = train_toy(c);
  EXPECT_EQ(r.final_state.theta0, (Vec2{4.5, 4.5}));
  EXPECT_NE(r.final_state.deltas[0][0], -4.5);
}

TEST(Convex, ScalarizedMinimiserConverges) {
  SyntheticSpec spec;
  spec.rows = 200;
  const ConvexRegressionProblem p = make_convex_regression(spec);
  const ScalarizedSolution s = minimize_scalarized(p, PreferenceVector({0.2, 0.3, 0.5}), 1e-10);
  EXPECT_LT(s.gradient_norm, 1e-10);
}

}  // namespace
}  // namespace lorpman
