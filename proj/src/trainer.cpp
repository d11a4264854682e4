// Copyright 2026 The lorpman Authors.
// SPDX-License-Identifier: Apache-2.0

#include "lorpman/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>
#include <string>

#include "lorpman/errors.hpp"

namespace lorpman {

void optimizer_step(std::span<double> param, std::span<const double> grad, OptimizerState& state,
                    std::size_t slot, const OptimizerSpec& spec) {
  if (param.size() != grad.size()) {
    throw ContractViolation("optimizer_step: parameter and gradient lengths differ");
  }
  if (spec.kind == OptimizerSpec::Kind::kSgd) {
    for (std::size_t i = 0; i < param.size(); ++i) param[i] -= spec.lr * grad[i];
    return;
  }
  if (state.slots.size() <= slot) state.slots.resize(slot + 1);
  auto& s = state.slots[slot];
  if (s.first.empty()) {
    s.first.assign(param.size(), 0.0);
    s.second.assign(param.size(), 0.0);
  } else if (s.first.size() != param.size()) {
    throw ContractViolation("optimizer_step: state slot " + std::to_string(slot) +
                            " has the wrong size");
  }
  ++s.steps;
  const double correction1 = 1.0 - std::pow(spec.beta1, static_cast<double>(s.steps));
  const double correction2 = 1.0 - std::pow(spec.beta2, static_cast<double>(s.steps));
  for (std::size_t i = 0; i < param.size(); ++i) {
    s.first[i] = spec.beta1 * s.first[i] + (1.0 - spec.beta1) * grad[i];
    s.second[i] = spec.beta2 * s.second[i] + (1.0 - spec.beta2) * grad[i] * grad[i];
    const double m_hat = s.first[i] / correction1;
    const double v_hat = s.second[i] / correction2;
    param[i] -= spec.lr * m_hat / (std::sqrt(v_hat) + spec.eps);
  }
}

void TrainConfig::validate(std::size_t tasks) const {
  if (freeze_epoch > epochs) throw ParameterError("freeze_epoch must not exceed epochs");
  if (window_b < 1) throw ParameterError("window_b must be >= 1");
  if (batch_q < 1) throw ParameterError("batch_q must be >= 1");
  if (!(lambda_p >= 0.0) || !(lambda_o >= 0.0)) {
    throw ParameterError("regularisation coefficients must be non-negative");
  }
  if (!(scale_s > 0.0)) throw ParameterError("scale_s must be positive");
  if (rank_r < 1) throw ParameterError("rank must be >= 1");
  if (!(optimizer.lr > 0.0)) throw ParameterError("learning rate must be positive");
  if (!dirichlet_p.empty() && dirichlet_p.size() != 1 && dirichlet_p.size() != tasks) {
    throw ParameterError("dirichlet_p needs 1 or " + std::to_string(tasks) + " entries");
  }
  for (double p : dirichlet_p) {
    if (!(p > 0.0)) throw ParameterError("dirichlet_p entries must be positive");
  }
  if (!hv.ref_offset.empty() && hv.ref_offset.size() != tasks) {
    throw ParameterError("hypervolume ref_offset needs one entry per task");
  }
}

Vector TrainConfig::concentration(std::size_t tasks) const {
  if (dirichlet_p.empty()) return Vector(tasks, 1.0);
  if (dirichlet_p.size() == 1) return Vector(tasks, dirichlet_p.front());
  return dirichlet_p;
}

std::size_t default_front_size(std::size_t tasks) {
  if (tasks == 2) return 11;
  if (tasks == 3) return 66;
  return 100;
}

PreferenceScheme default_scheme(std::size_t tasks, std::uint64_t seed) {
  if (tasks <= 3) return {PreferenceScheme::Kind::kUniformGrid, seed};
  return {PreferenceScheme::Kind::kDirichlet, seed};
}

namespace {

std::size_t binomial(std::size_t n, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::vector<PreferenceVector> front_preferences(std::size_t m, std::size_t n,
                                                const PreferenceScheme& scheme) {
  if (n == 0) throw ParameterError("front needs at least one preference");
  if (scheme.kind == PreferenceScheme::Kind::kUniformGrid) {
    for (std::size_t h = 1; binomial(h + m - 1, m - 1) <= n; ++h) {
      if (binomial(h + m - 1, m - 1) == n) return simplex_grid(m, h);
    }
    throw ParameterError("no simplex grid over " + std::to_string(m) + " tasks has " +
                         std::to_string(n) + " points");
  }
  SeededRng rng = SeededRng(scheme.seed).stream("front-preferences");
  const Vector ones(m, 1.0);
  std::vector<PreferenceVector> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_dirichlet(ones, rng));
  return out;
}

Vector default_offsets(const std::vector<TaskSpec>& tasks) {
  Vector out;
  for (const auto& t : tasks) {
    out.push_back(t.kind == TaskKind::kRegression ? 1.0
                                                  : std::log(static_cast<double>(t.classes)));
  }
  return out;
}

enum class Role { kMain, kAdapter, kHead };

// Visits every trainable tensor in a fixed order; the visit index doubles as
// the optimizer slot.
template <typename Fn>
void for_each_parameter(ManifoldModel& model, const ModelGradients& grads, Fn&& fn) {
  if (model.mode == Mode::kLorpman) {
    for (std::size_t l = 0; l < model.lowrank.size(); ++l) {
      auto& layer = model.lowrank[l];
      const auto& g = grads.lowrank[l];
      fn(layer.theta0.flat(), g.g_theta0.flat(), Role::kMain);
      fn(std::span<double>(layer.bias0), std::span<const double>(g.g_bias0), Role::kMain);
      for (std::size_t i = 0; i < layer.tasks(); ++i) {
        fn(layer.adapters[i].B.flat(), g.g_adapters[i].B.flat(), Role::kAdapter);
        fn(layer.adapters[i].A.flat(), g.g_adapters[i].A.flat(), Role::kAdapter);
      }
    }
  } else {
    for (std::size_t l = 0; l < model.pamal.size(); ++l) {
      auto& layer = model.pamal[l];
      const auto& g = grads.pamal[l];
      for (std::size_t i = 0; i < layer.tasks(); ++i) {
        fn(layer.thetas[i].flat(), g.g_thetas[i].flat(), Role::kAdapter);
        fn(std::span<double>(layer.biases[i]), std::span<const double>(g.g_biases[i]),
           Role::kAdapter);
      }
    }
  }
  for (std::size_t t = 0; t < model.heads.size(); ++t) {
    fn(model.heads[t].weight.flat(), grads.heads[t].weight.flat(), Role::kHead);
    fn(std::span<double>(model.heads[t].bias), std::span<const double>(grads.heads[t].bias),
       Role::kHead);
  }
}

Batch gather_rows(const Batch& src, std::span<const std::size_t> rows) {
  Batch out{Matrix(rows.size(), src.inputs.cols()), Matrix(rows.size(), src.targets.cols())};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy_n(src.inputs.row(rows[r]).begin(), src.inputs.cols(), out.inputs.row(r).begin());
    std::copy_n(src.targets.row(rows[r]).begin(), src.targets.cols(), out.targets.row(r).begin());
  }
  return out;
}

std::string describe(std::span<const PreferenceVector> alphas) {
  std::ostringstream os;
  os.precision(6);
  for (std::size_t j = 0; j < alphas.size(); ++j) {
    os << (j ? " " : "") << "(";
    for (std::size_t i = 0; i < alphas[j].size(); ++i) os << (i ? "," : "") << alphas[j][i];
    os << ")";
  }
  return os.str();
}

std::uint64_t fnv_bytes(std::uint64_t h, std::span<const double> values) {
  for (double v : values) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof v);
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace

FrontEvaluation sample_front(const ManifoldModel& model, const Batch& batch, std::size_t n_prefs,
                             const PreferenceScheme& scheme) {
  FrontEvaluation out;
  out.preferences = front_preferences(model.num_tasks(), n_prefs, scheme);
  out.losses.orientation = Orientation::kMinimize;
  for (const auto& alpha : out.preferences) {
    out.losses.points.push_back(forward(model, alpha, batch).task_losses);
  }
  return out;
}

HypervolumeResult front_hypervolume(const FrontSample& losses, const HypervolumeConfig& config,
                                    std::uint64_t seed) {
  const std::size_t m = config.ref_offset.size();
  const FrontSample gains = losses_to_gains(losses, config.ref_offset);
  const Vector ref(m, 0.0);
  if (m <= 3) return hypervolume(gains, ref, HypervolumeMethod::exact());
  return hypervolume(gains, ref, HypervolumeMethod::monte_carlo(config.mc_samples, seed));
}

std::uint64_t main_weight_checksum(const ManifoldModel& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& layer : model.lowrank) {
    h = fnv_bytes(h, layer.theta0.flat());
    h = fnv_bytes(h, layer.bias0);
  }
  return h;
}

std::uint64_t adapter_checksum(const ManifoldModel& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& layer : model.lowrank) {
    for (const auto& ad : layer.adapters) {
      h = fnv_bytes(h, ad.B.flat());
      h = fnv_bytes(h, ad.A.flat());
    }
  }
  return h;
}

RunRecord train(ManifoldModel& model, const Dataset& data, const TrainConfig& config,
                const EpochObserver& observer) {
  const auto started = std::chrono::steady_clock::now();
  const std::size_t m = model.num_tasks();
  config.validate(m);
  model.validate();
  if (config.mode != model.mode) {
    throw ContractViolation("train: config mode does not match the model's mode");
  }
  if (data.train.rows() == 0) throw ParameterError("training set is empty");

  RunRecord record;
  record.config = config;
  HypervolumeConfig hv = config.hv;
  if (hv.ref_offset.empty()) hv.ref_offset = default_offsets(model.tasks);
  record.config.hv.ref_offset = hv.ref_offset;
  const std::size_t front_size = hv.front_size ? hv.front_size : default_front_size(m);
  const PreferenceScheme scheme = default_scheme(m, config.seed);

  const SeededRng root(config.seed);
  SeededRng shuffle_rng = root.stream("data-shuffle");
  SeededRng pref_rng = root.stream("preferences");
  SeededRng orth_rng = root.stream("orth-subset");
  const Vector concentration = config.concentration(m);
  OrthConfig orth = config.orth;
  orth.lambda_o = config.lambda_o;

  auto validate_now = [&](std::size_t completed) {
    const FrontEvaluation front = sample_front(model, data.validation, front_size, scheme);
    const HypervolumeResult r =
        front_hypervolume(front.losses, hv, root.stream("validation-hv", completed).key());
    record.validation_hv.push_back({completed, r.value, r.stderr_estimate});
  };

  if (observer) observer(0, model);
  if (config.epochs == 0) {
    validate_now(0);
    record.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return record;
  }

  ModelGradients grads = ModelGradients::zeros_like(model);
  OptimizerState opt_state;
  std::vector<std::size_t> order(data.train.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<PreferenceVector> alphas;
  std::vector<ForwardResult> passes;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const bool freeze_main = model.mode == Mode::kLorpman && epoch >= config.freeze_epoch;
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    }
    double epoch_total = 0.0;
    std::size_t epoch_iters = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_q) {
      const std::size_t stop = std::min(order.size(), start + config.batch_q);
      const Batch batch =
          gather_rows(data.train, std::span<const std::size_t>(order).subspan(start, stop - start));

      alphas.clear();
      passes.clear();
      for (std::size_t j = 0; j < config.window_b; ++j) {
        alphas.push_back(sample_dirichlet(concentration, pref_rng));
      }
      Matrix losses(config.window_b, m);
      double total = 0.0;
      for (std::size_t j = 0; j < config.window_b; ++j) {
        passes.push_back(forward(model, alphas[j], batch));
        for (std::size_t i = 0; i < m; ++i) losses(j, i) = passes[j].task_losses[i];
        total += scalarize(passes[j].task_losses, alphas[j]);
      }
      MultiForwardResult mf;
      if (config.lambda_p > 0.0 && config.window_b >= 2) {
        mf = multi_forward_loss(losses, alphas, config.hinge);
        total += config.lambda_p * mf.value;
      }
      OrthNetworkResult orth_result;
      const bool use_orth = model.mode == Mode::kLorpman && config.lambda_o > 0.0;
      if (use_orth) {
        orth_result = orth_loss_network(model, orth_rng, orth);
        total += config.lambda_o * orth_result.value;
      }
      if (!std::isfinite(total)) {
        throw NumericError("non-finite loss at iteration " + std::to_string(record.iterations) +
                           " (epoch " + std::to_string(epoch) + ") for preferences " +
                           describe(alphas));
      }

      grads.zero();
      Vector weights(m);
      for (std::size_t j = 0; j < config.window_b; ++j) {
        for (std::size_t i = 0; i < m; ++i) {
          weights[i] = alphas[j][i];
          if (!mf.subgradient.empty()) weights[i] += config.lambda_p * mf.subgradient(j, i);
        }
        backward(model, alphas[j], passes[j].cache, weights, freeze_main, grads,
                 config.freeze_heads);
      }
      if (use_orth) orth_loss_backward(orth_result, grads, config.lambda_o);

      std::size_t slot = 0;
      for_each_parameter(model, grads, [&](std::span<double> p, std::span<const double> g, Role role) {
        const bool frozen = (role == Role::kMain && freeze_main) ||
                            (role == Role::kHead && config.freeze_heads);
        if (!frozen) optimizer_step(p, g, opt_state, slot, config.optimizer);
        ++slot;
      });
      model.touch();

      epoch_total += total;
      ++epoch_iters;
      ++record.iterations;
    }
    record.epoch_loss.push_back(epoch_total / static_cast<double>(epoch_iters));
    const std::size_t completed = epoch + 1;
    if (observer) observer(completed, model);
    const bool last = completed == config.epochs;
    if (last || (config.validate_every > 0 && completed % config.validate_every == 0)) {
      validate_now(completed);
    }
  }
  record.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return record;
}

std::vector<std::vector<double>> pamal_similarity_trace(ManifoldModel& model, const Dataset& data,
                                                        const TrainConfig& config) {
  if (model.mode != Mode::kPamal) {
    throw UnsupportedMode("similarity trace compares PaMaL base networks (lorpman model given)");
  }
  if (model.num_tasks() != 2) {
    throw UnsupportedMode("similarity trace needs exactly two base networks");
  }
  std::vector<std::vector<double>> trace;
  auto observe = [&trace](std::size_t, const ManifoldModel& m) {
    std::vector<double> row;
    for (const auto& layer : m.pamal) {
      row.push_back(pairwise_cosine_similarity(layer.thetas[0], layer.thetas[1]));
    }
    trace.push_back(std::move(row));
  };
  TrainConfig cfg = config;
  cfg.mode = Mode::kPamal;
  train(model, data, cfg, observe);
  return trace;
}

ToyRun train_toy(const ToyTrainConfig& config) {
  if (config.window_b < 1) throw ParameterError("window_b must be >= 1");
  if (config.record_every < 1) throw ParameterError("record_every must be >= 1");
  ToyRun run;
  run.preferences = {PreferenceVector({1.0, 0.0}), PreferenceVector({0.0, 1.0}),
                     PreferenceVector({0.5, 0.5})};
  ToyState state;
  auto record = [&](std::size_t step) {
    for (std::size_t k = 0; k < run.preferences.size(); ++k) {
      const Vec2 theta = state.at(run.preferences[k]);
      run.trajectory.push_back({step, k, theta, toy_objectives(theta)});
    }
  };
  record(0);

  SeededRng pref_rng = SeededRng(config.seed).stream("preferences");
  const Vector p(config.dirichlet_p.begin(), config.dirichlet_p.end());
  OptimizerState opt;
  for (std::size_t step = 0; step < config.iterations; ++step) {
    Vec2 g_theta0{0.0, 0.0};
    Vec2 g_delta{0.0, 0.0};  // first components only; second components are fixed
    for (std::size_t j = 0; j < config.window_b; ++j) {
      const PreferenceVector alpha = sample_dirichlet(p, pref_rng);
      const Vec2 theta = state.at(alpha);
      const ToyGradients g = toy_gradients(theta);
      const Vec2 g_scalar{alpha[0] * g.df1[0] + alpha[1] * g.df2[0],
                          alpha[0] * g.df1[1] + alpha[1] * g.df2[1]};
      if (!std::isfinite(g_scalar[0]) || !std::isfinite(g_scalar[1])) {
        throw NumericError("non-finite toy gradient at step " + std::to_string(step));
      }
      g_theta0[0] += g_scalar[0];
      g_theta0[1] += g_scalar[1];
      g_delta[0] += alpha[0] * g_scalar[0];
      g_delta[1] += alpha[1] * g_scalar[0];
    }
    if (step < config.freeze_iteration) {
      optimizer_step(state.theta0, g_theta0, opt, 0, config.optimizer);
    }
    double d1 = state.deltas[0][0], d2 = state.deltas[1][0];
    optimizer_step(std::span<double>(&d1, 1), std::span<const double>(&g_delta[0], 1), opt, 1,
                   config.optimizer);
    optimizer_step(std::span<double>(&d2, 1), std::span<const double>(&g_delta[1], 1), opt, 2,
                   config.optimizer);
    state.deltas[0][0] = d1;
    state.deltas[1][0] = d2;
    const std::size_t done = step + 1;
    if (done % config.record_every == 0 || done == config.iterations) record(done);
  }
  run.final_state = state;
  return run;
}

ScalarizedSolution minimize_scalarized(const ConvexRegressionProblem& problem,
                                       const PreferenceVector& alpha, double tolerance,
                                       std::size_t max_iterations) {
  if (alpha.size() != problem.tasks()) {
    throw ContractViolation("minimize_scalarized: preference length mismatch");
  }
  const std::size_t u = problem.dim();
  // Step 1/L with L = 2 lambda_max(X^T X / N), via power iteration.
  const Matrix gram = matmul_transpose_a(problem.inputs, problem.inputs);
  Vector v(u, 1.0);
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    Vector next(u, 0.0);
    for (std::size_t r = 0; r < u; ++r) next[r] = dot(gram.row(r), v);
    lambda = norm2(next);
    for (std::size_t r = 0; r < u; ++r) v[r] = next[r] / lambda;
  }
  const double lipschitz = 2.0 * lambda / static_cast<double>(problem.inputs.rows());
  const OptimizerSpec spec = OptimizerSpec::sgd(1.0 / lipschitz);

  ScalarizedSolution sol;
  sol.weights.assign(u, 0.0);
  OptimizerState state;
  Vector g(u);
  for (sol.iterations = 0; sol.iterations < max_iterations; ++sol.iterations) {
    const Matrix per_task = problem.gradients(sol.weights);
    std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t i = 0; i < problem.tasks(); ++i)
      for (std::size_t k = 0; k < u; ++k) g[k] += alpha[i] * per_task(i, k);
    sol.gradient_norm = norm2(g);
    if (sol.gradient_norm < tolerance) break;
    optimizer_step(sol.weights, g, state, 0, spec);
  }
  sol.losses = problem.losses(sol.weights);
  return sol;
}

}  // namespace lorpman
