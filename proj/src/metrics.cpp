// Copyright 2026 The lorpman Authors.
// SPDX-License-Identifier: Apache-2.0

#include "lorpman/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "lorpman/errors.hpp"
#include "lorpman/random.hpp"

namespace lorpman {

void FrontSample::validate() const {
  const std::size_t m = dim();
  for (const auto& p : points) {
    if (p.size() != m) throw ContractViolation("front points have differing dimensions");
    for (double v : p) {
      if (!std::isfinite(v)) throw ContractViolation("front point has a non-finite entry");
    }
  }
}

bool dominates(std::span<const double> a, std::span<const double> b, Orientation orientation) {
  if (a.size() != b.size()) {
    throw ContractViolation("dominates: dimension " + std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()));
  }
  bool strictly = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = orientation == Orientation::kMaximize ? a[k] - b[k] : b[k] - a[k];
    if (diff < 0.0) return false;
    if (diff > 0.0) strictly = true;
  }
  return strictly;
}

namespace {

// Points flipped so that larger is better.
std::vector<Vector> as_maximize(const FrontSample& front) {
  std::vector<Vector> out = front.points;
  if (front.orientation == Orientation::kMinimize) {
    for (auto& p : out)
      for (double& v : p) v = -v;
  }
  return out;
}

std::vector<Vector> filter_maximize_2d(std::vector<Vector> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vector& a, const Vector& b) {
    return a[0] != b[0] ? a[0] > b[0] : a[1] > b[1];
  });
  std::vector<Vector> kept;
  double best_y = -std::numeric_limits<double>::infinity();
  for (auto& p : pts) {
    if (p[1] > best_y) {
      best_y = p[1];
      kept.push_back(std::move(p));
    }
  }
  return kept;
}

std::vector<Vector> filter_maximize(std::vector<Vector> pts) {
  if (pts.empty()) return pts;
  if (pts.front().size() == 2) return filter_maximize_2d(std::move(pts));
  std::sort(pts.begin(), pts.end(), std::greater<>());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::vector<Vector> kept;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < pts.size() && !dominated; ++j) {
      dominated = j != i && dominates(pts[j], pts[i], Orientation::kMaximize);
    }
    if (!dominated) kept.push_back(pts[i]);
  }
  return kept;
}

// Area dominated by maximisation points (already shifted so ref = 0).
double area_2d(std::vector<std::pair<double, double>> pts) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second > b.second;
  });
  double area = 0.0, best_y = 0.0;
  for (const auto& [x, y] : pts) {
    if (y > best_y) {
      area += x * (y - best_y);
      best_y = y;
    }
  }
  return area;
}

double volume_3d(std::vector<Vector> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vector& a, const Vector& b) { return a[2] > b[2]; });
  double volume = 0.0;
  std::vector<std::pair<double, double>> slice;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    slice.emplace_back(pts[i][0], pts[i][1]);
    const double next_z = i + 1 < pts.size() ? pts[i + 1][2] : 0.0;
    const double height = pts[i][2] - next_z;
    if (height > 0.0) volume += area_2d(slice) * height;
  }
  return volume;
}

}  // namespace

FrontSample nondominated_filter(const FrontSample& front) {
  front.validate();
  FrontSample out;
  out.orientation = front.orientation;
  out.points = filter_maximize(as_maximize(front));
  if (front.orientation == Orientation::kMinimize) {
    for (auto& p : out.points)
      for (double& v : p) v = -v;
  }
  return out;
}

HypervolumeResult hypervolume(const FrontSample& front, std::span<const double> ref,
                              const HypervolumeMethod& method) {
  front.validate();
  const std::size_t m = ref.size();
  if (m <= 1) throw ContractViolation("hypervolume needs at least two objectives");
  if (!front.points.empty() && front.dim() != m) {
    throw ContractViolation("hypervolume: reference has " + std::to_string(m) +
                            " entries, points have " + std::to_string(front.dim()));
  }
  const double sign = front.orientation == Orientation::kMaximize ? 1.0 : -1.0;
  // Shift into the positive orthant with the reference at the origin.
  std::vector<Vector> usable;
  for (const auto& p : front.points) {
    Vector q(m);
    bool ok = true;
    for (std::size_t k = 0; k < m && ok; ++k) {
      q[k] = sign * (p[k] - ref[k]);
      ok = q[k] >= 0.0;
    }
    if (ok) usable.push_back(std::move(q));
  }
  HypervolumeResult result;
  if (method.kind == HypervolumeMethod::Kind::kMonteCarlo) result.stderr_estimate = 0.0;
  if (usable.empty()) return result;
  usable = filter_maximize(std::move(usable));

  if (method.kind == HypervolumeMethod::Kind::kExact) {
    if (m == 2) {
      std::vector<std::pair<double, double>> pts;
      for (const auto& p : usable) pts.emplace_back(p[0], p[1]);
      result.value = area_2d(std::move(pts));
    } else if (m == 3) {
      result.value = volume_3d(std::move(usable));
    } else {
      throw UnsupportedMode("exact hypervolume supports at most 3 objectives, got " +
                            std::to_string(m));
    }
    return result;
  }

  if (method.samples == 0) throw ParameterError("Monte Carlo hypervolume needs samples > 0");
  Vector upper(m, 0.0);
  for (const auto& p : usable)
    for (std::size_t k = 0; k < m; ++k) upper[k] = std::max(upper[k], p[k]);
  double box = 1.0;
  for (double u : upper) box *= u;
  if (box == 0.0) return result;

  // Most-dominating points first so hits exit early.
  std::sort(usable.begin(), usable.end(), [](const Vector& a, const Vector& b) {
    double pa = 0.0, pb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      pa += a[k];
      pb += b[k];
    }
    return pa > pb;
  });

  constexpr std::uint64_t kChunk = 1 << 16;
  const SeededRng root(method.seed);
  std::uint64_t hits = 0;
  Vector sample(m);
  for (std::uint64_t start = 0, chunk = 0; start < method.samples; start += kChunk, ++chunk) {
    SeededRng rng = root.stream("hypervolume-mc", chunk);
    const std::uint64_t n = std::min(kChunk, method.samples - start);
    for (std::uint64_t s = 0; s < n; ++s) {
      for (std::size_t k = 0; k < m; ++k) sample[k] = upper[k] * rng.uniform();
      for (const auto& p : usable) {
        std::size_t k = 0;
        while (k < m && sample[k] <= p[k]) ++k;
        if (k == m) {
          ++hits;
          break;
        }
      }
    }
  }
  const auto total = static_cast<double>(method.samples);
  const double frac = static_cast<double>(hits) / total;
  result.value = box * frac;
  result.stderr_estimate = box * std::sqrt(frac * (1.0 - frac) / total);
  return result;
}

FrontSample losses_to_gains(const FrontSample& losses, std::span<const double> offsets) {
  FrontSample out;
  out.orientation = Orientation::kMaximize;
  for (const auto& p : losses.points) {
    if (p.size() != offsets.size()) throw ContractViolation("losses_to_gains: offset length");
    Vector g(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) g[k] = offsets[k] - p[k];
    out.points.push_back(std::move(g));
  }
  return out;
}

double mean_pairwise_correlation(std::span<const Adapter> adapters, bool absolute) {
  const std::size_t m = adapters.size();
  if (m < 2) throw ContractViolation("mean_pairwise_correlation needs at least two adapters");
  std::vector<Matrix> products;
  products.reserve(m);
  for (const auto& ad : adapters) products.push_back(ad.product());
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double c = pairwise_cosine_similarity(products[i], products[j]);
      total += absolute ? std::abs(c) : c;
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

}  // namespace lorpman
