// Copyright 2026 The lorpman Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "lorpman/theory.hpp"
#include "test_util.hpp"

namespace lorpman {
namespace {

TEST(Witness, SmallestCase) {
  const ConstructionWitness w = build_witness(1, 2);
  EXPECT_EQ(w.R, (Matrix{{1}, {-1}, {0}, {0}}));
  ASSERT_EQ(w.U.size(), 2u);
  EXPECT_EQ(w.U[0], (Vector{0, 0, 1, 0}));
  EXPECT_EQ(w.U[1], (Vector{0, 0, 0, 1}));
  EXPECT_EQ(w.S, (Matrix{{1, -1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}));
}

TEST(Witness, IndicatorsAreRankOneUnitVectors) {
  for (std::size_t u = 1; u <= 5; ++u)
    for (std::size_t m = 2; m <= 4; ++m) {
      const ConstructionWitness w = build_witness(u, m);
      const std::size_t n = 2 * u + m;
      for (const Vector& ui : w.U) {
        double l1 = 0.0;
        for (double v : ui) l1 += std::abs(v);
        EXPECT_EQ(l1, 1.0);
        for (std::size_t d = 1; d <= n; ++d) {
          if (n % d) continue;
          const Adapter f = rank_one_factors(ui, d, n / d);
          EXPECT_EQ(matrix_rank(f.product()), 1u);
          EXPECT_EQ(f.product().data(), ui);
        }
      }
    }
}

TEST(Reconstruct, Examples) {
  const ConstructionWitness w = build_witness(2, 2);
  EXPECT_EQ(reconstruct(w, Vector{1, -2}, PreferenceVector({0.3, 0.7})), (Vector{1, -2, 0.3, 0.7}));
  EXPECT_EQ(reconstruct(w, Vector{0, 0}, PreferenceVector({0.6, 0.4})), (Vector{0, 0, 0.6, 0.4}));
}

TEST(Reconstruct, RandomSweepIsExact) {
  SeededRng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t u = 1 + rng.below(8), m = 2 + rng.below(5);
    const ConstructionWitness w = build_witness(u, m);
    Vector x(u);
    for (double& v : x) v = 10.0 * rng.normal();
    const PreferenceVector alpha = testing::random_preference(m, rng);
    const Vector out = reconstruct(w, x, alpha);
    for (std::size_t j = 0; j < u; ++j) ASSERT_NEAR(out[j], x[j], 1e-12);
    for (std::size_t i = 0; i < m; ++i) ASSERT_NEAR(out[u + i], alpha[i], 1e-12);
  }
}

TEST(Compose, MatchesDirectEvaluation) {
  SeededRng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t u = 1 + rng.below(6), m = 2 + rng.below(3);
    const std::vector<std::size_t> widths{u + m, 7, 5, 2};
    const ReluMlp g = ReluMlp::random(widths, rng);
    const ConstructionWitness w = build_witness(u, m);
    Vector x(u);
    for (double& v : x) v = rng.normal();
    const PreferenceVector alpha = testing::random_preference(m, rng);
    Vector joined = x;
    joined.insert(joined.end(), alpha.values().begin(), alpha.values().end());
    const Vector direct = g(joined), composed = compose_with_witness(w, g, x, alpha);
    for (std::size_t k = 0; k < direct.size(); ++k) ASSERT_NEAR(composed[k], direct[k], 1e-10);
  }
}

TEST(MatrixRank, Examples) {
  EXPECT_EQ(matrix_rank(Matrix::identity(4)), 4u);
  EXPECT_EQ(matrix_rank(Matrix(3, 3)), 0u);
  EXPECT_EQ(matrix_rank(Matrix{{1, 2}, {2, 4}}), 1u);
}

TEST(Checks, AllPass) {
  for (const CheckResult& r : run_theory_checks(3, 200)) EXPECT_TRUE(r.passed) << r.name << ": " << r.detail;
}

}  // namespace
}  // namespace lorpman
