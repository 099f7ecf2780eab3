// Copyright 2026 The QNPE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qnpe {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad parameters, shapes, or violated preconditions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf or a vanishing denominator inside an iterative recurrence.
class NumericalBreakdown : public Error {
 public:
  using Error::Error;
};

/// A problem generator could not build a valid instance.
class GenerationError : public Error {
 public:
  using Error::Error;
};

/// Thread-safe monotone counter for matrix-vector products.
class MatvecCounter {
 public:
  void add(std::int64_t n = 1) { count_.fetch_add(n, std::memory_order_relaxed); }
  std::int64_t value() const { return count_.load(std::memory_order_relaxed); }

 private:
  std::atomic<std::int64_t> count_{0};
};

/// Matrix-free square linear map. When `symmetric` is set, `apply_transpose`
/// may be left empty and `apply` is used for both directions.
struct LinearOp {
  int dim = 0;
  std::function<Vector(const Vector&)> apply;
  std::function<Vector(const Vector&)> apply_transpose;
  bool symmetric = false;
  std::shared_ptr<MatvecCounter> counter;

  Vector mul(const Vector& v) const {
    if (counter) counter->add();
    return apply(v);
  }
  Vector mul_t(const Vector& v) const {
    if (counter) counter->add();
    return symmetric || !apply_transpose ? apply(v) : apply_transpose(v);
  }
};

/// Wraps a dense matrix as a LinearOp.
inline LinearOp dense_op(Matrix a, bool symmetric = false,
                         std::shared_ptr<MatvecCounter> counter = nullptr) {
  auto m = std::make_shared<const Matrix>(std::move(a));
  LinearOp op;
  op.dim = static_cast<int>(m->rows());
  op.apply = [m](const Vector& v) -> Vector { return (*m) * v; };
  op.apply_transpose = [m](const Vector& v) -> Vector { return m->transpose() * v; };
  op.symmetric = symmetric;
  op.counter = std::move(counter);
  return op;
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

/// Uniform sample from the unit sphere in R^dim.
inline Vector random_unit_vector(int dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  double norm = 0.0;
  while (norm == 0.0) {
    for (int i = 0; i < dim; ++i) v[i] = normal(rng);
    norm = v.norm();
  }
  return v / norm;
}

inline Vector random_normal_vector(int dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = normal(rng);
  return v;
}

}  // namespace qnpe
