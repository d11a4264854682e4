// Copyright 2026 The lorpman Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lorpman/errors.hpp"
#include "lorpman/network.hpp"
#include "test_util.hpp"

namespace lorpman {
namespace {

using testing::central_difference;
using testing::random_matrix;
using testing::random_preference;
using testing::relative_error;

std::vector<TaskSpec> mixed_tasks() {
  return {TaskSpec{TaskKind::kRegression, 0}, TaskSpec{TaskKind::kClassification, 3},
          TaskSpec{TaskKind::kRegression, 0}};
}

ManifoldModel random_model(Mode mode, SeededRng& rng, std::vector<TaskSpec> tasks = mixed_tasks()) {
  ModelOptions options;
  options.mode = mode;
  options.rank = 2;
  options.scale = 1.5;
  ManifoldModel model = make_model(ModelShape{4, {5, 3}, std::move(tasks)}, options, rng);
  for (LowRankLayer& layer : model.lowrank) {
    for (Adapter& ad : layer.adapters) ad.B = random_matrix(ad.B.rows(), ad.B.cols(), rng, 0.5);
    for (double& b : layer.bias0) b = 0.1 * rng.normal();
  }
  for (PamalLayer& layer : model.pamal)
    for (Vector& b : layer.biases)
      for (double& v : b) v = 0.1 * rng.normal();
  for (Head& h : model.heads)
    for (double& v : h.bias) v = 0.1 * rng.normal();
  return model;
}

Batch random_batch(const ManifoldModel& model, std::size_t q, SeededRng& rng) {
  Batch batch{random_matrix(q, model.input_dim(), rng), Matrix(q, model.num_tasks())};
  for (std::size_t r = 0; r < q; ++r)
    for (std::size_t t = 0; t < model.num_tasks(); ++t)
      batch.targets(r, t) = model.tasks[t].kind == TaskKind::kRegression
                                ? rng.normal()
                                : static_cast<double>(rng.below(model.tasks[t].classes));
  return batch;
}

// Row-at-a-time re-implementation of the forward pass.
Vector naive_losses(const ManifoldModel& model, const PreferenceVector& alpha, const Batch& batch) {
  const std::size_t m = model.num_tasks();
  Vector losses(m, 0.0);
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    Vector h(batch.inputs.row(r).begin(), batch.inputs.row(r).end());
    for (std::size_t l = 0; l < model.depth(); ++l) {
      const std::size_t d = model.mode == Mode::kLorpman ? model.lowrank[l].out_dim() : model.pamal[l].out_dim();
      Vector z(d, 0.0);
      for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < h.size(); ++b) {
          double w = 0.0;
          if (model.mode == Mode::kLorpman) {
            const LowRankLayer& L = model.lowrank[l];
            w = L.theta0(a, b);
            for (std::size_t i = 0; i < m; ++i)
              for (std::size_t t = 0; t < L.rank; ++t)
                w += L.scale * alpha[i] * L.adapters[i].B(a, t) * L.adapters[i].A(t, b);
          } else {
            for (std::size_t i = 0; i < m; ++i) w += alpha[i] * model.pamal[l].thetas[i](a, b);
          }
          z[a] += w * h[b];
        }
        if (model.mode == Mode::kLorpman) {
          z[a] += model.lowrank[l].bias0[a];
        } else {
          for (std::size_t i = 0; i < m; ++i) z[a] += alpha[i] * model.pamal[l].biases[i][a];
        }
        z[a] = z[a] > 0.0 ? z[a] : 0.0;
      }
      h = z;
    }
    for (std::size_t t = 0; t < m; ++t) {
      const Head& head = model.heads[t];
      Vector out(head.weight.rows());
      for (std::size_t c = 0; c < out.size(); ++c) {
        out[c] = head.bias[c];
        for (std::size_t b = 0; b < h.size(); ++b) out[c] += head.weight(c, b) * h[b];
      }
      if (model.tasks[t].kind == TaskKind::kRegression) {
        losses[t] += (out[0] - batch.targets(r, t)) * (out[0] - batch.targets(r, t));
      } else {
        double z = 0.0;
        for (double v : out) z += std::exp(v);
        losses[t] += std::log(z) - out[static_cast<std::size_t>(batch.targets(r, t))];
      }
    }
  }
  for (double& v : losses) v /= static_cast<double>(batch.rows());
  return losses;
}

TEST(Forward, ZeroNetworkZeroTargetsGivesZeroLoss) {
  SeededRng rng(1);
  ManifoldModel model = random_model(Mode::kLorpman, rng, {TaskSpec{}, TaskSpec{}});
  for (LowRankLayer& l : model.lowrank) {
    l.theta0.fill(0.0);
    std::fill(l.bias0.begin(), l.bias0.end(), 0.0);
  }
  for (Head& h : model.heads) {
    h.weight.fill(0.0);
    std::fill(h.bias.begin(), h.bias.end(), 0.0);
  }
  Batch batch = random_batch(model, 7, rng);
  batch.targets.fill(0.0);
  const ForwardResult res = forward(model, PreferenceVector({0.3, 0.7}), batch);
  EXPECT_EQ(res.task_losses[0], 0.0);
  EXPECT_EQ(res.task_losses[1], 0.0);
}

TEST(Forward, ZeroLogitsGiveLogC) {
  SeededRng rng(2);
  ManifoldModel model = random_model(
      Mode::kLorpman, rng, {TaskSpec{TaskKind::kClassification, 5}, TaskSpec{TaskKind::kClassification, 2}});
  for (Head& h : model.heads) {
    h.weight.fill(0.0);
    std::fill(h.bias.begin(), h.bias.end(), 0.0);
  }
  const ForwardResult res = forward(model, PreferenceVector::uniform(2), random_batch(model, 9, rng));
  EXPECT_NEAR(res.task_losses[0], std::log(5.0), 1e-14);
  EXPECT_NEAR(res.task_losses[1], std::log(2.0), 1e-14);
}

TEST(Forward, MatchesNaiveOracle) {
  for (Mode mode : {Mode::kLorpman, Mode::kPamal}) {
    SeededRng rng(mode == Mode::kLorpman ? 3 : 4);
    const ManifoldModel model = random_model(mode, rng);
    for (int trial = 0; trial < 10; ++trial) {
      const Batch batch = random_batch(model, 6, rng);
      const PreferenceVector alpha = random_preference(3, rng);
      const Vector got = forward(model, alpha, batch).task_losses, ref = naive_losses(model, alpha, batch);
      for (std::size_t t = 0; t < 3; ++t) ASSERT_NEAR(got[t], ref[t], 1e-10);
    }
  }
}

TEST(Forward, ContinuousInPreference) {
  SeededRng rng(5);
  const ManifoldModel model = random_model(Mode::kLorpman, rng);
  const Batch batch = random_batch(model, 8, rng);
  const double eps = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    const PreferenceVector a = random_preference(3, rng);
    Vector shifted(a.values().begin(), a.values().end());
    const std::size_t from = shifted[0] > shifted[1] ? 0 : 1, to = 1 - from;
    shifted[from] -= eps;
    shifted[to] += eps;
    const Vector la = forward(model, a, batch).task_losses;
    const Vector lb = forward(model, PreferenceVector(shifted), batch).task_losses;
    for (std::size_t t = 0; t < 3; ++t) EXPECT_LE(std::abs(la[t] - lb[t]) / eps, 1e3);
  }
}

TEST(Forward, RejectsMismatchedInputs) {
  SeededRng rng(6);
  const ManifoldModel model = random_model(Mode::kLorpman, rng);
  const Batch batch = random_batch(model, 4, rng);
  EXPECT_THROW(forward(model, PreferenceVector::uniform(2), batch), ContractViolation);
  Batch bad{Matrix(4, 3), Matrix(4, 3)};
  EXPECT_THROW(forward(model, PreferenceVector::uniform(3), bad), ContractViolation);
}

TEST(Forward, NonFiniteActivationNamesLayer) {
  SeededRng rng(7);
  ManifoldModel model = random_model(Mode::kLorpman, rng);
  model.lowrank[1].theta0(0, 0) = std::numeric_limits<double>::infinity();
  try {
    forward(model, PreferenceVector::uniform(3), random_batch(model, 4, rng));
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("layer 1"), std::string::npos) << e.what();
  }
}

TEST(Forward, IdenticalPamalBasesAreIndependentOfPreference) {
  SeededRng rng(8);
  ModelOptions options;
  options.mode = Mode::kPamal;
  options.pamal_identical_init = true;
  const ManifoldModel model = make_model(ModelShape{4, {6}, mixed_tasks()}, options, rng);
  const Batch batch = random_batch(model, 10, rng);
  const Vector ref = forward(model, PreferenceVector::vertex(3, 0), batch).task_losses;
  for (int trial = 0; trial < 10; ++trial) {
    EXPECT_EQ(forward(model, random_preference(3, rng), batch).task_losses, ref);
  }
}

// Every parameter of the model as a flat list of pointers, with the matching
// gradient entry.
struct ParamView {
  std::vector<double*> params;
  std::vector<double*> grads;
  void add(std::span<double> p, std::span<double> g) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      params.push_back(&p[i]);
      grads.push_back(&g[i]);
    }
  }
};

ParamView view(ManifoldModel& model, ModelGradients& g) {
  ParamView v;
  for (std::size_t l = 0; l < model.lowrank.size(); ++l) {
    LowRankLayer& L = model.lowrank[l];
    LayerGradients& G = g.lowrank[l];
    v.add(L.theta0.flat(), G.g_theta0.flat());
    v.add(L.bias0, G.g_bias0);
    for (std::size_t i = 0; i < L.tasks(); ++i) {
      v.add(L.adapters[i].B.flat(), G.g_adapters[i].B.flat());
      v.add(L.adapters[i].A.flat(), G.g_adapters[i].A.flat());
    }
  }
  for (std::size_t l = 0; l < model.pamal.size(); ++l) {
    for (std::size_t i = 0; i < model.pamal[l].tasks(); ++i) {
      v.add(model.pamal[l].thetas[i].flat(), g.pamal[l].g_thetas[i].flat());
      v.add(model.pamal[l].biases[i], g.pamal[l].g_biases[i]);
    }
  }
  for (std::size_t t = 0; t < model.heads.size(); ++t) {
    v.add(model.heads[t].weight.flat(), g.heads[t].weight.flat());
    v.add(model.heads[t].bias, g.heads[t].bias);
  }
  return v;
}

void check_full_backward(Mode mode, std::uint64_t seed) {
  SeededRng rng(seed);
  ManifoldModel model = random_model(mode, rng);
  const Batch batch = random_batch(model, 5, rng);
  const PreferenceVector alpha = random_preference(3, rng);
  const Vector weights{rng.uniform() + 0.1, rng.uniform() + 0.1, rng.uniform() + 0.1};
  ModelGradients g = ModelGradients::zeros_like(model);
  const ForwardResult res = forward(model, alpha, batch);
  backward(model, alpha, res.cache, weights, false, g);
  auto loss = [&] {
    const Vector f = forward(model, alpha, batch).task_losses;
    return weights[0] * f[0] + weights[1] * f[1] + weights[2] * f[2];
  };
  ParamView v = view(model, g);
  for (std::size_t i = 0; i < v.params.size(); ++i) {
    const double fd = central_difference(v.params[i], loss);
    // Floor above the ~1e-10 roundoff of a central difference with h = 1e-6.
    ASSERT_LE(relative_error(*v.grads[i], fd, 1e-5), 1e-4) << "parameter " << i << " analytic " << *v.grads[i] << " fd " << fd;
  }
}

TEST(Backward, LorpmanMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) check_full_backward(Mode::kLorpman, seed);
}

TEST(Backward, PamalMatchesFiniteDifferences) {
  for (std::uint64_t seed = 10; seed < 14; ++seed) check_full_backward(Mode::kPamal, seed);
}

TEST(Backward, ZeroWeightsAddNothing) {
  SeededRng rng(20);
  ManifoldModel model = random_model(Mode::kLorpman, rng);
  const PreferenceVector alpha = random_preference(3, rng);
  ModelGradients g = ModelGradients::zeros_like(model);
  backward(model, alpha, forward(model, alpha, random_batch(model, 4, rng)).cache, Vector(3, 0.0), false, g);
  ParamView v = view(model, g);
  for (double* p : v.grads) ASSERT_EQ(*p, 0.0);
}

TEST(Backward, HeadsAreSeparate) {
  SeededRng rng(21);
  ManifoldModel model = random_model(Mode::kLorpman, rng);
  const PreferenceVector alpha = random_preference(3, rng);
  ModelGradients g = ModelGradients::zeros_like(model);
  backward(model, alpha, forward(model, alpha, random_batch(model, 4, rng)).cache, Vector{1.0, 0.0, 0.0},
           false, g);
  EXPECT_GT(frobenius_norm(g.heads[0].weight), 0.0);
  for (std::size_t t = 1; t < 3; ++t) {
    EXPECT_EQ(frobenius_norm(g.heads[t].weight), 0.0);
    EXPECT_EQ(norm2(g.heads[t].bias), 0.0);
  }
}

TEST(Backward, FreezeMainZeroesMainGradientsOnly) {
  SeededRng rng(22);
  ManifoldModel model = random_model(Mode::kLorpman, rng);
  const PreferenceVector alpha = random_preference(3, rng);
  ModelGradients g = ModelGradients::zeros_like(model);
  backward(model, alpha, forward(model, alpha, random_batch(model, 6, rng)).cache, Vector(3, 1.0), true, g);
  double adapters = 0.0, heads = 0.0;
  for (const LayerGradients& lg : g.lowrank) {
    EXPECT_EQ(frobenius_norm(lg.g_theta0), 0.0);
    EXPECT_EQ(norm2(lg.g_bias0), 0.0);
    for (const Adapter& a : lg.g_adapters) adapters += frobenius_norm(a.B) + frobenius_norm(a.A);
  }
  for (const Head& h : g.heads) heads += frobenius_norm(h.weight);
  EXPECT_GT(adapters, 0.0);
  EXPECT_GT(heads, 0.0);

  ModelGradients g2 = ModelGradients::zeros_like(model);
  backward(model, alpha, forward(model, alpha, random_batch(model, 6, rng)).cache, Vector(3, 1.0), true, g2,
           /*freeze_heads=*/true);
  for (const Head& h : g2.heads) EXPECT_EQ(frobenius_norm(h.weight), 0.0);
}

TEST(Backward, StaleOrForeignCacheIsRejected) {
  SeededRng rng(23);
  ManifoldModel model = random_model(Mode::kLorpman, rng);
  const PreferenceVector alpha = random_preference(3, rng);
  const ForwardResult res = forward(model, alpha, random_batch(model, 4, rng));
  ModelGradients g = ModelGradients::zeros_like(model);
  EXPECT_THROW(backward(model, PreferenceVector::uniform(3), res.cache, Vector(3, 1.0), false, g),
               ContractViolation);
  model.touch();
  EXPECT_THROW(backward(model, alpha, res.cache, Vector(3, 1.0), false, g), ContractViolation);
}

TEST(Scalarize, Examples) {
  const Vector f{1.0, 2.0, 3.0};
  EXPECT_NEAR(scalarize(f, PreferenceVector({0.2, 0.3, 0.5})), 2.3, 1e-15);
  EXPECT_EQ(scalarize(f, PreferenceVector::vertex(3, 2)), 3.0);
  EXPECT_NEAR(scalarize(Vector(3, 4.5), PreferenceVector({0.1, 0.6, 0.3})), 4.5, 1e-15);
  EXPECT_THROW(scalarize(f, PreferenceVector::uniform(2)), ContractViolation);
}

}  // namespace
}  // namespace lorpman
