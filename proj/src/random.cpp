// Copyright 2026 The lorpman Authors.
// SPDX-License-Identifier: Apache-2.0

#include "lorpman/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "lorpman/errors.hpp"

namespace lorpman {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finaliser; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

SeededRng::SeededRng(std::uint64_t seed) : key_(mix64(seed ^ 0x6c6f72706d616eULL)) {}

SeededRng::result_type SeededRng::operator()() noexcept {
  const std::uint64_t n = counter_++;
  // Two rounds so that neighbouring keys and counters decorrelate.
  return mix64(mix64(key_ + kGolden * (n + 1)) ^ key_);
}

double SeededRng::uniform() noexcept {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double SeededRng::normal() noexcept {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  cached_normal_ = v * factor;
  has_cached_normal_ = true;
  return u * factor;
}

std::uint64_t SeededRng::below(std::uint64_t n) noexcept {
  // Lemire's nearly-divisionless bounded draw.
  std::uint64_t x = (*this)();
  __uint128_t product = static_cast<__uint128_t>(x) * n;
  auto low = static_cast<std::uint64_t>(product);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      x = (*this)();
      product = static_cast<__uint128_t>(x) * n;
      low = static_cast<std::uint64_t>(product);
    }
  }
  return static_cast<std::uint64_t>(product >> 64);
}

SeededRng SeededRng::stream(std::string_view label) const {
  return SeededRng(FromKey{}, mix64(key_ ^ mix64(fnv1a(label))));
}

SeededRng SeededRng::stream(std::string_view label, std::uint64_t index) const {
  return SeededRng(FromKey{}, mix64(key_ ^ mix64(fnv1a(label) + kGolden * (index + 1))));
}

PreferenceVector::PreferenceVector(std::vector<double> alpha) : alpha_(std::move(alpha)) {
  if (alpha_.size() < 2) {
    throw ParameterError("preference vector needs at least 2 entries, got " +
                         std::to_string(alpha_.size()));
  }
  double sum = 0.0;
  for (double a : alpha_) {
    if (!std::isfinite(a) || a < 0.0) {
      throw ParameterError("preference vector entries must be finite and >= 0");
    }
    sum += a;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ParameterError("preference vector sums to " + std::to_string(sum) + ", not 1");
  }
}

PreferenceVector PreferenceVector::vertex(std::size_t m, std::size_t i) {
  std::vector<double> a(m, 0.0);
  if (i >= m) throw ContractViolation("vertex index out of range");
  a[i] = 1.0;
  return PreferenceVector(std::move(a));
}

PreferenceVector PreferenceVector::uniform(std::size_t m) {
  return PreferenceVector(std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

double sample_log_gamma(double shape, SeededRng& rng) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw ParameterError("gamma shape must be positive, got " + std::to_string(shape));
  }
  if (shape < 1.0) {
    // Gamma(a) = Gamma(a + 1) * U^(1/a)
    const double boosted = sample_log_gamma(shape + 1.0, rng);
    double u;
    do {
      u = rng.uniform();
    } while (u == 0.0);
    return boosted + std::log(u) / shape;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return std::log(d * v);
    if (u > 0.0 && std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return std::log(d * v);
    }
  }
}

PreferenceVector sample_dirichlet(std::span<const double> p, SeededRng& rng) {
  if (p.size() < 2) throw ParameterError("dirichlet needs at least 2 concentration parameters");
  for (double pi : p) {
    if (!(pi > 0.0)) {
      throw ParameterError("dirichlet concentration must be positive, got " +
                           std::to_string(pi));
    }
  }
  std::vector<double> logs(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) logs[i] = sample_log_gamma(p[i], rng);
  const double top = *std::max_element(logs.begin(), logs.end());
  double sum = 0.0;
  for (double& l : logs) {
    l = std::exp(l - top);
    sum += l;
  }
  for (double& l : logs) l /= sum;
  // Absorb the rounding residue so the sum is 1 to the last bit or so.
  const double residue = 1.0 - std::accumulate(logs.begin(), logs.end(), 0.0);
  auto largest = std::max_element(logs.begin(), logs.end());
  *largest += residue;
  return PreferenceVector(std::move(logs));
}

std::vector<PreferenceVector> simplex_grid(std::size_t m, std::size_t divisions) {
  if (m < 2) throw ParameterError("simplex grid needs m >= 2");
  if (divisions == 0) throw ParameterError("simplex grid needs at least one division");
  std::vector<PreferenceVector> out;
  std::vector<std::size_t> counts(m, 0);
  const auto h = static_cast<double>(divisions);
  // Recursive enumeration of compositions of `divisions` into m parts,
  // first coordinate descending.
  auto recurse = [&](auto&& self, std::size_t pos, std::size_t remaining) -> void {
    if (pos + 1 == m) {
      counts[pos] = remaining;
      std::vector<double> alpha(m);
      for (std::size_t i = 0; i < m; ++i) alpha[i] = static_cast<double>(counts[i]) / h;
      out.emplace_back(std::move(alpha));
      return;
    }
    for (std::size_t c = remaining + 1; c-- > 0;) {
      counts[pos] = c;
      self(self, pos + 1, remaining - c);
    }
  };
  recurse(recurse, 0, divisions);
  return out;
}

}  // namespace lorpman
