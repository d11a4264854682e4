// Copyright 2026 The lorpman Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Executable form of the construction showing that a ReLU network with a main
// weight plus rank-1 per-task terms can feed [x, alpha] to any downstream MLP.
//
// With 1-based indices:
//   R (2u+m) x u:    R[2j-1][j] = 1, R[2j][j] = -1
//   S (u+m) x (2u+m): S[j][2j-1] = 1, S[j][2j] = -1 for j <= u,
//                     S[u+i][2u+i] = 1
//   U_i in {0,1}^(2u+m): (U_i)_j = 1 iff j = 2u+i
// so that S relu(R x + sum_i alpha_i U_i) = [x, alpha], because
// relu(t) - relu(-t) = t and alpha_i >= 0 passes relu unchanged.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "lorpman/lowrank.hpp"
#include "lorpman/matrix.hpp"
#include "lorpman/random.hpp"

namespace lorpman {

struct ConstructionWitness {
  std::size_t u = 0;
  std::size_t m = 0;
  Matrix R;
  Matrix S;
  std::vector<Vector> U;
};

ConstructionWitness build_witness(std::size_t u, std::size_t m);

/// S relu(R x + sum_i alpha_i U_i)
Vector reconstruct(const ConstructionWitness& witness, std::span<const double> x,
                   const PreferenceVector& alpha);

/// Reshapes U_i into a d x k matrix (row-major, d k = 2u + m) and factors it
/// as B (d x 1) times A (1 x k).
Adapter rank_one_factors(const Vector& indicator, std::size_t d, std::size_t k);

/// Numerical rank by Gaussian elimination with partial pivoting.
std::size_t matrix_rank(Matrix m, double tolerance = 1e-12);

/// Plain ReLU MLP used as the downstream network g: hidden layers use ReLU,
/// the last layer is affine.
struct ReluMlp {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  Vector operator()(std::span<const double> input) const;
  static ReluMlp random(std::span<const std::size_t> widths, SeededRng& rng);
};

/// g(S relu(R x + sum alpha_i U_i)): the preference-conditioned network.
Vector compose_with_witness(const ConstructionWitness& witness, const ReluMlp& g,
                            std::span<const double> x, const PreferenceVector& alpha);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Randomised sweep of the reconstruction identity, the rank-1 reshaping and
/// the composition property.
std::vector<CheckResult> run_theory_checks(std::uint64_t seed = 0, std::size_t trials = 1000);

}  // namespace lorpman
