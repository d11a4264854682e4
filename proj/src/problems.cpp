// Copyright 2026 The lorpman Authors.
// SPDX-License-Identifier: Apache-2.0

#include "lorpman/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "lorpman/errors.hpp"

namespace lorpman {

namespace {

constexpr double kClamp = 0.000005;

struct LogAbs {
  double value;
  double slope;  // d/d(arg), zero when clamped
};

LogAbs clamped_log_abs(double arg) {
  const double a = std::abs(arg);
  if (a > kClamp) return {std::log(a), 1.0 / arg};
  return {std::log(kClamp), 0.0};
}

}  // namespace

ToyValues toy_objectives(const Vec2& theta) {
  const double t1 = theta[0], t2 = theta[1];
  const double th = std::tanh(-t2);
  const double h1 = clamped_log_abs(0.5 * (-t1 - 7.0) - th).value + 6.0;
  const double h2 = clamped_log_abs(0.5 * (-t1 + 3.0) - th + 2.0).value + 6.0;
  const double tail = 0.1 * (-t2 - 8.0) * (-t2 - 8.0);
  const double g1 = ((-t1 + 7.0) * (-t1 + 7.0) + tail) / 10.0 - 20.0;
  const double g2 = ((-t1 - 7.0) * (-t1 - 7.0) + tail) / 10.0 - 20.0;
  const double c1 = std::max(std::tanh(0.5 * t2), 0.0);
  const double c2 = std::max(std::tanh(-0.5 * t2), 0.0);
  return {c1 * h1 + c2 * g1, c1 * h2 + c2 * g2};
}

ToyGradients toy_gradients(const Vec2& theta) {
  const double t1 = theta[0], t2 = theta[1];
  const double th = std::tanh(-t2);
  const double dth = -(1.0 - th * th);  // d tanh(-t2) / d t2

  const LogAbs l1 = clamped_log_abs(0.5 * (-t1 - 7.0) - th);
  const LogAbs l2 = clamped_log_abs(0.5 * (-t1 + 3.0) - th + 2.0);
  const double h1 = l1.value + 6.0, h2 = l2.value + 6.0;
  const Vec2 dh1{-0.5 * l1.slope, -dth * l1.slope};
  const Vec2 dh2{-0.5 * l2.slope, -dth * l2.slope};

  const double tail = 0.1 * (-t2 - 8.0) * (-t2 - 8.0);
  const double g1 = ((-t1 + 7.0) * (-t1 + 7.0) + tail) / 10.0 - 20.0;
  const double g2 = ((-t1 - 7.0) * (-t1 - 7.0) + tail) / 10.0 - 20.0;
  const double dtail = 0.02 * (t2 + 8.0);
  const Vec2 dg1{(t1 - 7.0) / 5.0, dtail};
  const Vec2 dg2{(t1 + 7.0) / 5.0, dtail};

  double c1 = 0.0, dc1 = 0.0, c2 = 0.0, dc2 = 0.0;
  if (t2 > 0.0) {
    c1 = std::tanh(0.5 * t2);
    dc1 = 0.5 * (1.0 - c1 * c1);
  } else if (t2 < 0.0) {
    c2 = std::tanh(-0.5 * t2);
    dc2 = -0.5 * (1.0 - c2 * c2);
  }

  ToyGradients g;
  g.df1 = {c1 * dh1[0] + c2 * dg1[0], dc1 * h1 + c1 * dh1[1] + dc2 * g1 + c2 * dg1[1]};
  g.df2 = {c1 * dh2[0] + c2 * dg2[0], dc1 * h2 + c1 * dh2[1] + dc2 * g2 + c2 * dg2[1]};
  return g;
}

Vec2 ToyState::at(const PreferenceVector& alpha) const {
  if (alpha.size() != 2) throw ContractViolation("toy manifold takes a 2-task preference");
  return {theta0[0] + alpha[0] * deltas[0][0] + alpha[1] * deltas[1][0],
          theta0[1] + alpha[0] * deltas[0][1] + alpha[1] * deltas[1][1]};
}

FrontSample toy_grid_front(double resolution, double lo, double hi) {
  if (!(resolution > 0.0) || !(hi > lo)) throw ParameterError("invalid toy grid");
  const auto steps = static_cast<std::size_t>(std::llround((hi - lo) / resolution));
  FrontSample grid;
  grid.orientation = Orientation::kMinimize;
  grid.points.reserve((steps + 1) * (steps + 1));
  for (std::size_t i = 0; i <= steps; ++i) {
    const double t1 = lo + static_cast<double>(i) * resolution;
    for (std::size_t j = 0; j <= steps; ++j) {
      const double t2 = lo + static_cast<double>(j) * resolution;
      const ToyValues v = toy_objectives({t1, t2});
      grid.points.push_back({v.f1, v.f2});
    }
  }
  FrontSample front = nondominated_filter(grid);
  std::sort(front.points.begin(), front.points.end());
  return front;
}

double distance_to_front_2d(const FrontSample& sorted_front, std::span<const double> point) {
  if (point.size() != 2) throw ContractViolation("distance_to_front_2d needs 2-d points");
  const auto& pts = sorted_front.points;
  if (pts.empty()) throw DegenerateInput("distance to an empty front");
  double best = std::hypot(point[0] - pts[0][0], point[1] - pts[0][1]);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double ax = pts[i][0], ay = pts[i][1];
    const double dx = pts[i + 1][0] - ax, dy = pts[i + 1][1] - ay;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? ((point[0] - ax) * dx + (point[1] - ay) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    best = std::min(best, std::hypot(point[0] - (ax + t * dx), point[1] - (ay + t * dy)));
  }
  return best;
}

void SyntheticSpec::validate() const {
  if (tasks < 2) throw ParameterError("synthetic problem needs at least 2 tasks");
  if (input_dim < 2) throw ParameterError("synthetic problem needs input_dim >= 2");
  if (teacher_width < 1) throw ParameterError("teacher width must be positive");
  if (rows < 10 * tasks) throw ParameterError("synthetic problem needs rows >= 10 * tasks");
  if (!(conflict >= 0.0 && conflict <= 1.0)) throw ParameterError("conflict must lie in [0, 1]");
  if (!(noise >= 0.0)) throw ParameterError("noise must be non-negative");
  if (kind == TaskKind::kClassification && classes < 2) {
    throw ParameterError("classification needs at least 2 classes");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ParameterError("train fraction must lie in (0, 1)");
  }
}

namespace {

Vector random_unit(std::size_t n, SeededRng& rng) {
  Vector v(n);
  double len = 0.0;
  while (len == 0.0) {
    for (double& x : v) x = rng.normal();
    len = norm2(v);
  }
  for (double& x : v) x /= len;
  return v;
}

// Draws `count` unit vectors; the first min(count, n) are mutually orthonormal.
std::vector<Vector> orthonormal_directions(std::size_t count, std::size_t n, SeededRng& rng) {
  std::vector<Vector> out;
  for (std::size_t i = 0; i < count; ++i) {
    Vector v = random_unit(n, rng);
    if (i < n) {
      for (const auto& u : out) {
        const double p = dot(v, u);
        for (std::size_t k = 0; k < n; ++k) v[k] -= p * u[k];
      }
      const double len = norm2(v);
      for (double& x : v) x /= len;
    }
    out.push_back(std::move(v));
  }
  return out;
}

void standardise_columns(Matrix& m) {
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) mean += m(r, c);
    mean /= static_cast<double>(m.rows());
    double var = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) var += (m(r, c) - mean) * (m(r, c) - mean);
    var /= static_cast<double>(m.rows());
    const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
    for (std::size_t r = 0; r < m.rows(); ++r) m(r, c) = (m(r, c) - mean) / sd;
  }
}

Dataset split(const Matrix& inputs, const Matrix& targets, double train_fraction) {
  const std::size_t n = inputs.rows();
  const auto n_train = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n))), 1, n - 1);
  auto rows = [](const Matrix& src, std::size_t begin, std::size_t end) {
    std::vector<double> data(src.data().begin() + static_cast<std::ptrdiff_t>(begin * src.cols()),
                             src.data().begin() + static_cast<std::ptrdiff_t>(end * src.cols()));
    return Matrix(end - begin, src.cols(), std::move(data));
  };
  return {{rows(inputs, 0, n_train), rows(targets, 0, n_train)},
          {rows(inputs, n_train, n), rows(targets, n_train, n)}};
}

}  // namespace

SyntheticProblem make_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  SeededRng root(spec.seed);
  SeededRng teacher_rng = root.stream("synthetic-teacher");
  SeededRng data_rng = root.stream("synthetic-data");

  SyntheticProblem p;
  p.spec = spec;
  const std::size_t u = spec.input_dim, h = spec.teacher_width, m = spec.tasks;
  p.teacher = Matrix(h, u);
  const double w_scale = 1.0 / std::sqrt(static_cast<double>(u));
  for (double& v : p.teacher.flat()) v = w_scale * teacher_rng.normal();
  auto dirs = orthonormal_directions(m + 1, h, teacher_rng);
  p.common = dirs.front();
  p.directions.assign(dirs.begin() + 1, dirs.end());

  std::vector<Vector> mixes(m, Vector(h));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < h; ++k)
      mixes[i][k] = p.common[k] + spec.conflict * (p.directions[i][k] - p.common[k]);

  Matrix inputs(spec.rows, u);
  for (double& v : inputs.flat()) v = data_rng.normal();
  Matrix features = matmul_transpose_b(inputs, p.teacher);
  for (double& v : features.flat()) v = std::tanh(v);
  Matrix targets(spec.rows, m);
  for (std::size_t r = 0; r < spec.rows; ++r) {
    const double shared_noise = spec.noise * data_rng.normal();
    for (std::size_t i = 0; i < m; ++i) targets(r, i) = dot(features.row(r), mixes[i]) + shared_noise;
  }
  standardise_columns(targets);

  if (spec.kind == TaskKind::kClassification) {
    for (std::size_t i = 0; i < m; ++i) {
      Vector col(spec.rows);
      for (std::size_t r = 0; r < spec.rows; ++r) col[r] = targets(r, i);
      Vector sorted = col;
      std::sort(sorted.begin(), sorted.end());
      Vector edges;
      for (std::size_t c = 1; c < spec.classes; ++c) edges.push_back(sorted[c * spec.rows / spec.classes]);
      for (std::size_t r = 0; r < spec.rows; ++r) {
        const auto cls = static_cast<double>(std::upper_bound(edges.begin(), edges.end(), col[r]) -
                                             edges.begin());
        targets(r, i) = cls;
      }
    }
  }
  p.tasks.assign(m, TaskSpec{spec.kind, spec.kind == TaskKind::kClassification ? spec.classes : 0});
  p.data = split(inputs, targets, spec.train_fraction);
  return p;
}

Vector ConvexRegressionProblem::losses(std::span<const double> w) const {
  if (w.size() != dim()) throw ContractViolation("convex problem: parameter length mismatch");
  Vector out(tasks(), 0.0);
  for (std::size_t r = 0; r < inputs.rows(); ++r) {
    const double pred = dot(inputs.row(r), w);
    for (std::size_t i = 0; i < tasks(); ++i) {
      const double d = pred - targets(r, i);
      out[i] += d * d;
    }
  }
  for (double& v : out) v /= static_cast<double>(inputs.rows());
  return out;
}

Matrix ConvexRegressionProblem::gradients(std::span<const double> w) const {
  if (w.size() != dim()) throw ContractViolation("convex problem: parameter length mismatch");
  Matrix g(tasks(), dim());
  const double scale = 2.0 / static_cast<double>(inputs.rows());
  for (std::size_t r = 0; r < inputs.rows(); ++r) {
    const auto x = inputs.row(r);
    const double pred = dot(x, w);
    for (std::size_t i = 0; i < tasks(); ++i) {
      const double d = scale * (pred - targets(r, i));
      for (std::size_t k = 0; k < dim(); ++k) g(i, k) += d * x[k];
    }
  }
  return g;
}

ConvexRegressionProblem make_convex_regression(const SyntheticSpec& spec) {
  spec.validate();
  SeededRng root(spec.seed);
  SeededRng teacher_rng = root.stream("convex-teacher");
  SeededRng data_rng = root.stream("convex-data");
  const std::size_t u = spec.input_dim, m = spec.tasks;
  auto dirs = orthonormal_directions(m + 1, u, teacher_rng);
  ConvexRegressionProblem p;
  p.inputs = Matrix(spec.rows, u);
  for (double& v : p.inputs.flat()) v = data_rng.normal();
  p.targets = Matrix(spec.rows, m);
  for (std::size_t r = 0; r < spec.rows; ++r) {
    const double shared_noise = spec.noise * data_rng.normal();
    for (std::size_t i = 0; i < m; ++i) {
      double y = shared_noise;
      for (std::size_t k = 0; k < u; ++k) {
        const double v = dirs[0][k] + spec.conflict * (dirs[i + 1][k] - dirs[0][k]);
        y += p.inputs(r, k) * v;
      }
      p.targets(r, i) = y;
    }
  }
  return p;
}

}  // namespace lorpman
