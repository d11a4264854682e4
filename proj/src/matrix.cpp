// Copyright 2026 The lorpman Authors.
// SPDX-License-Identifier: Apache-2.0

#include "lorpman/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "lorpman/errors.hpp"

namespace lorpman {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ContractViolation("matrix data length " + std::to_string(data_.size()) +
                            " does not match shape " + shape_string());
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ContractViolation("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::string Matrix::shape_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

void Matrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

namespace {
void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ContractViolation(std::string(op) + ": shape mismatch " + a.shape_string() +
                            " vs " + b.shape_string());
  }
}
}  // namespace

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_shape(*this, other, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require_same_shape(*this, other, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double factor) {
  for (double& v : data_) v *= factor;
  return *this;
}

void Matrix::axpy(double factor, const Matrix& other) {
  require_same_shape(*this, other, "axpy");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += factor * other.data_[i];
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix operator+(Matrix lhs, const Matrix& rhs) { return lhs += rhs; }
Matrix operator-(Matrix lhs, const Matrix& rhs) { return lhs -= rhs; }
Matrix operator*(double factor, Matrix m) { return m *= factor; }

void add_matmul(Matrix& out, double factor, const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ContractViolation("matmul: cannot multiply " + a.shape_string() + " by " +
                            b.shape_string());
  }
  if (out.rows() != a.rows() || out.cols() != b.cols()) {
    throw ContractViolation("matmul: output " + out.shape_string() + " does not fit " +
                            a.shape_string() + " * " + b.shape_string());
  }
  const std::size_t n = a.rows(), inner = a.cols(), p = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double* out_row = out.row(i).data();
    for (std::size_t k = 0; k < inner; ++k) {
      const double aik = factor * a(i, k);
      if (aik == 0.0) continue;
      const double* b_row = b.row(k).data();
      for (std::size_t j = 0; j < p; ++j) out_row[j] += aik * b_row[j];
    }
  }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ContractViolation("matmul: cannot multiply " + a.shape_string() + " by " +
                            b.shape_string());
  }
  Matrix c(a.rows(), b.cols());
  add_matmul(c, 1.0, a, b);
  return c;
}

Matrix matmul_transpose_b(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw ContractViolation("matmul_transpose_b: cannot multiply " + a.shape_string() +
                            " by transpose of " + b.shape_string());
  }
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) c(i, j) = dot(a.row(i), b.row(j));
  return c;
}

Matrix matmul_transpose_a(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw ContractViolation("matmul_transpose_a: cannot multiply transpose of " +
                            a.shape_string() + " by " + b.shape_string());
  }
  Matrix c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const auto a_row = a.row(k);
    const auto b_row = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a_row[i];
      if (aki == 0.0) continue;
      double* c_row = c.row(i).data();
      for (std::size_t j = 0; j < b.cols(); ++j) c_row[j] += aki * b_row[j];
    }
  }
  return c;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ContractViolation("dot: length mismatch " + std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double frobenius_norm(const Matrix& m) { return norm2(m.flat()); }

Vector flatten_normalize(const Matrix& m) {
  const double n = frobenius_norm(m);
  if (n == 0.0) {
    throw DegenerateInput("flatten_normalize: all-zero " + m.shape_string() + " matrix");
  }
  Vector out(m.flat().begin(), m.flat().end());
  for (double& v : out) v /= n;
  return out;
}

}  // namespace lorpman
