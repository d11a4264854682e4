// Copyright 2026 The lorpman Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Pareto dominance, non-dominated filtering and the hypervolume indicator.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lorpman/lowrank.hpp"
#include "lorpman/matrix.hpp"

namespace lorpman {

enum class Orientation { kMaximize, kMinimize };

struct FrontSample {
  std::vector<Vector> points;
  Orientation orientation = Orientation::kMinimize;

  std::size_t dim() const noexcept { return points.empty() ? 0 : points.front().size(); }
  /// Throws ContractViolation on ragged or non-finite points.
  void validate() const;
};

/// a is at least as good as b everywhere and strictly better somewhere.
bool dominates(std::span<const double> a, std::span<const double> b, Orientation orientation);

/// Points not dominated by any other point; exact duplicates are kept once.
FrontSample nondominated_filter(const FrontSample& front);

struct HypervolumeMethod {
  enum class Kind { kExact, kMonteCarlo };
  Kind kind = Kind::kExact;
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 0;

  static HypervolumeMethod exact() { return {}; }
  static HypervolumeMethod monte_carlo(std::uint64_t samples, std::uint64_t seed) {
    return {Kind::kMonteCarlo, samples, seed};
  }
};

struct HypervolumeResult {
  double value = 0.0;
  std::optional<double> stderr_estimate;  // Monte Carlo only
};

/// Lebesgue measure of the union of boxes spanned by each point and `ref`.
/// Points that do not weakly dominate the reference are ignored. The exact
/// method supports two and three objectives (sweep / slicing); Monte Carlo
/// samples uniformly in the bounding box of the usable points and the
/// reference, in fixed-size chunks drawn from labelled streams.
HypervolumeResult hypervolume(const FrontSample& front, std::span<const double> ref,
                              const HypervolumeMethod& method = HypervolumeMethod::exact());

/// Maps loss values onto a maximisation front: v -> offset_i - v_i.
FrontSample losses_to_gains(const FrontSample& losses, std::span<const double> offsets);

/// Mean over unordered task pairs of the cosine between flattened B_i A_i
/// products; `absolute` averages |cosine| instead.
/// Throws DegenerateInput if any product is zero.
double mean_pairwise_correlation(std::span<const Adapter> adapters, bool absolute = false);

}  // namespace lorpman
