// Copyright 2026 The lorpman Authors.
// SPDX-License-Identifier: Apache-2.0

#include "lorpman/theory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lorpman/errors.hpp"

namespace lorpman {

ConstructionWitness build_witness(std::size_t u, std::size_t m) {
  if (u < 1) throw ParameterError("witness needs u >= 1");
  if (m < 2) throw ParameterError("witness needs m >= 2");
  const std::size_t width = 2 * u + m;
  ConstructionWitness w{u, m, Matrix(width, u), Matrix(u + m, width), {}};
  for (std::size_t j = 0; j < u; ++j) {
    w.R(2 * j, j) = 1.0;
    w.R(2 * j + 1, j) = -1.0;
    w.S(j, 2 * j) = 1.0;
    w.S(j, 2 * j + 1) = -1.0;
  }
  for (std::size_t i = 0; i < m; ++i) {
    w.S(u + i, 2 * u + i) = 1.0;
    Vector indicator(width, 0.0);
    indicator[2 * u + i] = 1.0;
    w.U.push_back(std::move(indicator));
  }
  return w;
}

Vector reconstruct(const ConstructionWitness& witness, std::span<const double> x,
                   const PreferenceVector& alpha) {
  if (x.size() != witness.u || alpha.size() != witness.m) {
    throw ContractViolation("reconstruct: input sizes do not match the witness");
  }
  const std::size_t width = witness.R.rows();
  Vector hidden(width, 0.0);
  for (std::size_t r = 0; r < width; ++r) {
    double v = dot(witness.R.row(r), x);
    for (std::size_t i = 0; i < witness.m; ++i) v += alpha[i] * witness.U[i][r];
    hidden[r] = std::max(v, 0.0);
  }
  Vector out(witness.S.rows());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = dot(witness.S.row(r), hidden);
  return out;
}

Adapter rank_one_factors(const Vector& indicator, std::size_t d, std::size_t k) {
  if (d * k != indicator.size()) {
    throw ContractViolation("rank_one_factors: " + std::to_string(d) + "x" + std::to_string(k) +
                            " does not hold " + std::to_string(indicator.size()) + " entries");
  }
  const auto it = std::find_if(indicator.begin(), indicator.end(), [](double v) { return v != 0.0; });
  if (it == indicator.end() || std::count_if(it + 1, indicator.end(), [](double v) {
                                 return v != 0.0;
                               }) != 0) {
    throw DegenerateInput("rank_one_factors expects exactly one non-zero entry");
  }
  const auto pos = static_cast<std::size_t>(it - indicator.begin());
  Adapter f{Matrix(d, 1), Matrix(1, k)};
  f.B(pos / k, 0) = *it;
  f.A(0, pos % k) = 1.0;
  return f;
}

std::size_t matrix_rank(Matrix m, double tolerance) {
  std::size_t rank = 0;
  const std::size_t rows = m.rows(), cols = m.cols();
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t pivot = rank;
    for (std::size_t r = rank + 1; r < rows; ++r)
      if (std::abs(m(r, c)) > std::abs(m(pivot, c))) pivot = r;
    if (std::abs(m(pivot, c)) <= tolerance) continue;
    for (std::size_t k = 0; k < cols; ++k) std::swap(m(rank, k), m(pivot, k));
    for (std::size_t r = rank + 1; r < rows; ++r) {
      const double f = m(r, c) / m(rank, c);
      for (std::size_t k = c; k < cols; ++k) m(r, k) -= f * m(rank, k);
    }
    ++rank;
  }
  return rank;
}

Vector ReluMlp::operator()(std::span<const double> input) const {
  Vector act(input.begin(), input.end());
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Vector next(weights[l].rows());
    for (std::size_t r = 0; r < next.size(); ++r) {
      next[r] = dot(weights[l].row(r), act) + biases[l][r];
      if (l + 1 < weights.size()) next[r] = std::max(next[r], 0.0);
    }
    act = std::move(next);
  }
  return act;
}

ReluMlp ReluMlp::random(std::span<const std::size_t> widths, SeededRng& rng) {
  if (widths.size() < 2) throw ParameterError("ReluMlp needs input and output widths");
  ReluMlp g;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    Matrix w(widths[l + 1], widths[l]);
    for (double& v : w.flat()) v = rng.normal();
    Vector b(widths[l + 1]);
    for (double& v : b) v = rng.normal();
    g.weights.push_back(std::move(w));
    g.biases.push_back(std::move(b));
  }
  return g;
}

Vector compose_with_witness(const ConstructionWitness& witness, const ReluMlp& g,
                            std::span<const double> x, const PreferenceVector& alpha) {
  return g(reconstruct(witness, x, alpha));
}

namespace {

PreferenceVector random_preference(std::size_t m, SeededRng& rng) {
  return sample_dirichlet(Vector(m, 1.0), rng);
}

std::string format_error(double e) {
  std::ostringstream os;
  os.precision(3);
  os << "max error " << std::scientific << e;
  return os.str();
}

}  // namespace

std::vector<CheckResult> run_theory_checks(std::uint64_t seed, std::size_t trials) {
  SeededRng rng = SeededRng(seed).stream("theory-checks");
  std::vector<CheckResult> out;

  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t u = 1 + rng.below(8), m = 2 + rng.below(5);
    const auto w = build_witness(u, m);
    Vector x(u);
    for (double& v : x) v = 10.0 * rng.normal();
    const PreferenceVector alpha = random_preference(m, rng);
    const Vector got = reconstruct(w, x, alpha);
    for (std::size_t k = 0; k < u; ++k) worst = std::max(worst, std::abs(got[k] - x[k]));
    for (std::size_t i = 0; i < m; ++i) worst = std::max(worst, std::abs(got[u + i] - alpha[i]));
  }
  out.push_back({"reconstruction identity", worst <= 1e-12, format_error(worst)});

  bool all_rank_one = true;
  std::size_t shapes = 0;
  for (std::size_t u = 1; u <= 8; ++u) {
    for (std::size_t m = 2; m <= 6; ++m) {
      const auto w = build_witness(u, m);
      const std::size_t n = 2 * u + m;
      for (std::size_t d = 1; d <= n; ++d) {
        if (n % d != 0) continue;
        for (const auto& indicator : w.U) {
          const Adapter f = rank_one_factors(indicator, d, n / d);
          const Matrix reshaped(d, n / d, indicator);
          all_rank_one = all_rank_one && matrix_rank(reshaped) == 1 && f.product() == reshaped;
          ++shapes;
        }
      }
    }
  }
  out.push_back({"indicator reshapes to rank 1", all_rank_one,
                 std::to_string(shapes) + " reshapes checked"});

  double worst_compose = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t u = 1 + rng.below(8), m = 2 + rng.below(5);
    const auto w = build_witness(u, m);
    const std::size_t widths[] = {u + m, 1 + rng.below(12), 1 + rng.below(12), m};
    const ReluMlp g = ReluMlp::random(widths, rng);
    Vector x(u);
    for (double& v : x) v = rng.normal();
    const PreferenceVector alpha = random_preference(m, rng);
    Vector joint = x;
    joint.insert(joint.end(), alpha.values().begin(), alpha.values().end());
    const Vector direct = g(joint);
    const Vector composed = compose_with_witness(w, g, x, alpha);
    for (std::size_t k = 0; k < direct.size(); ++k) {
      const double scale = std::max(1.0, std::abs(direct[k]));
      worst_compose = std::max(worst_compose, std::abs(direct[k] - composed[k]) / scale);
    }
  }
  out.push_back({"composition with downstream MLP", worst_compose <= 1e-10,
                 format_error(worst_compose)});
  return out;
}

}  // namespace lorpman
