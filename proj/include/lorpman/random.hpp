// Copyright 2026 The lorpman Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Seeded counter-based randomness and simplex sampling.

#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "lorpman/matrix.hpp"

namespace lorpman {

/// Counter-based generator: the n-th output is a fixed bijective mix of
/// (key, n), so a stream's output never depends on who else draws numbers.
/// Independent streams for distinct purposes are derived with stream(label).
///
/// Satisfies UniformRandomBitGenerator.
class SeededRng {
 public:
  using result_type = std::uint64_t;

  explicit SeededRng(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Standard normal draw (Marsaglia polar method, pairs cached).
  double normal() noexcept;
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept;

  /// Derives an independent stream keyed by (this stream's key, label).
  /// Does not advance this stream.
  SeededRng stream(std::string_view label) const;
  SeededRng stream(std::string_view label, std::uint64_t index) const;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  struct FromKey {};
  SeededRng(FromKey, std::uint64_t key) : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// A point on the probability simplex with at least two coordinates.
class PreferenceVector {
 public:
  /// Validates: size >= 2, entries >= 0 and finite, sum within 1e-9 of 1.
  explicit PreferenceVector(std::vector<double> alpha);

  static PreferenceVector vertex(std::size_t m, std::size_t i);
  static PreferenceVector uniform(std::size_t m);

  std::size_t size() const noexcept { return alpha_.size(); }
  double operator[](std::size_t i) const { return alpha_[i]; }
  std::span<const double> values() const noexcept { return alpha_; }

  friend bool operator==(const PreferenceVector&, const PreferenceVector&) = default;

 private:
  std::vector<double> alpha_;
};

/// Gamma(shape, 1) via Marsaglia-Tsang; shapes below 1 use the u^(1/a) boost.
/// Returns the natural log of the draw so tiny shapes cannot underflow.
double sample_log_gamma(double shape, SeededRng& rng);

/// Dir(p) by normalising independent Gamma(p_i, 1) draws.
/// Throws ParameterError if any p_i <= 0 or fewer than two entries.
PreferenceVector sample_dirichlet(std::span<const double> p, SeededRng& rng);

/// Every point i/H on the m-simplex with integer coordinates summing to H,
/// in lexicographic order of the first coordinates (descending).
std::vector<PreferenceVector> simplex_grid(std::size_t m, std::size_t divisions);

}  // namespace lorpman
