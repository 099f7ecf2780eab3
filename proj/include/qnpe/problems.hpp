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

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>

#include "json.hpp"

#include "qnpe/common.hpp"
#include "qnpe/structure.hpp"

namespace qnpe {

enum class ProblemFamily { kQuadratic, kLogSumExp, kBilinear, kSparse, kCustom };

std::string family_name(ProblemFamily f);
ProblemFamily family_from_name(const std::string& name);

/// Everything needed to regenerate a synthetic instance bit-for-bit.
struct ProblemDescriptor {
  ProblemFamily family = ProblemFamily::kQuadratic;
  int dim = 0;
  double mu = 0.0;
  double l1 = 1.0;  // logsumexp: target L1 (<= 0 keeps the raw data scale)
  std::uint64_t seed = 0;
  int n_terms = 0;         // logsumexp
  double smoothing = 1.0;  // logsumexp
  int m = 0;               // bilinear
  int n = 0;               // bilinear
  int avg_degree = 0;      // sparse
  double eps_frac = 0.1;   // sparse

  nlohmann::json to_json() const;
  /// Throws InvalidArgument on unknown families or missing fields.
  static ProblemDescriptor from_json(const nlohmann::json& j);
};

/// Data of f(x,y) = (mu/2)|x|^2 + x^T C y - (mu/2)|y|^2, z = (x, y).
struct BilinearData {
  Matrix c;
  double mu = 0.0;
  int m = 0;
  int n = 0;
};

/// Smooth monotone operator F: R^d -> R^d with its constants.
struct Problem {
  int dim = 0;
  std::function<Vector(const Vector&)> eval;
  double mu = 0.0;
  double l1 = 1.0;
  double l2 = 0.0;
  StructureSpec structure;
  std::optional<Vector> known_root;
  /// Verification only. The solver never calls these.
  std::function<Vector(const Vector&, const Vector&)> jacobian_matvec;
  std::function<Vector(const Vector&, const Vector&)> jacobian_transpose_matvec;
  /// Set for minimization problems (F = grad f).
  std::function<double(const Vector&)> objective;
  std::optional<BilinearData> bilinear;
  ProblemDescriptor descriptor;

  Vector operator()(const Vector& z) const { return eval(z); }
  bool is_minimization() const { return static_cast<bool>(objective); }
};

Problem make_quadratic_min(int d, double mu, double l1, std::uint64_t seed);
/// F(z) = A(z - root) for a given symmetric positive semidefinite A.
Problem make_quadratic_from_matrix(const Matrix& a, const Vector& root);

/// `l1_target` rescales the data so the declared L1 equals it. A target equal
/// to mu zeroes the data and leaves F(z) = mu z.
Problem make_logsumexp_min(int d, int n_terms, double mu, double smoothing, std::uint64_t seed,
                           std::optional<double> l1_target = std::nullopt);
/// Rows of `a` are the a_i, `b` the offsets.
Problem make_logsumexp_from_data(const Matrix& a, const Vector& b, double mu, double smoothing);

Problem make_bilinear_minimax(int m, int n, double mu, double l1, std::uint64_t seed);
Problem make_bilinear_from_matrix(const Matrix& c, double mu);

Problem make_sparse_equation(int d, int avg_degree, double mu, double l1, std::uint64_t seed,
                             double eps_frac = 0.1);

/// Regenerates an instance from its descriptor.
Problem make_problem(const ProblemDescriptor& desc);

/// Dense Jacobian assembled column by column from jacobian_matvec.
Matrix dense_jacobian(const Problem& problem, const Vector& z);

struct WeakGapBall {
  Vector center;
  double radius = 1.0;
};
struct FunctionValueGap {};
struct PrimalDualBox {
  Vector x_lo, x_hi, y_lo, y_hi;
};
using GapSpec = std::variant<WeakGapBall, FunctionValueGap, PrimalDualBox>;

/// Restricted gap at z. The ball variant is a multistart projected-gradient
/// lower bound on the true value.
double evaluate_gap(const Problem& problem, const Vector& z, const GapSpec& spec);

/// max over the gap set of |z0 - z|^2 (exact for balls and boxes).
double max_sq_distance(const Vector& z0, const GapSpec& spec);

}  // namespace qnpe
