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

#include "qnpe/common.hpp"

namespace qnpe {

struct LanczosResult {
  Vector alpha;  // diagonal of T, length N
  Vector beta;   // off-diagonal of T, length N - 1
  Matrix basis;  // d x N, orthonormal columns
  int steps_taken = 0;
  bool broke_down = false;

  Matrix tridiagonal() const;
};

/// Lanczos from a uniformly random unit start vector. Stops early when the
/// next off-diagonal falls below 1e-12 times a running estimate of the
/// operator norm. Never takes more than d steps.
LanczosResult lanczos(const std::function<Vector(const Vector&)>& apply_sym, int d, int n_steps, Rng& rng,
                      bool reorthogonalize = true);

struct TridiagEigs {
  double lambda_max = 0.0;
  Vector z_max;
  double lambda_min = 0.0;
  Vector z_min;
};

/// Extreme eigenpairs of the symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta`, by Sturm bisection and inverse iteration.
/// Eigenvectors are unit norm with their largest-magnitude entry positive.
TridiagEigs tridiag_extreme_eigs(const Vector& alpha, const Vector& beta);

enum class SepCase { kCaseI, kCaseII };

/// Output of an approximate separation oracle. S = scale * left * right^T,
/// zero in Case I.
struct SepResult {
  double gamma = 0.0;
  SepCase sep_case = SepCase::kCaseI;
  double scale = 0.0;
  Vector left;
  Vector right;
  int lanczos_steps = 0;
  std::int64_t matvecs = 0;

  bool case_two() const { return sep_case == SepCase::kCaseII; }
  Matrix s_dense(int d) const;
  double s_frobenius_norm() const;
};

int ext_evec_steps(int d, double delta, double q);
int max_svec_steps(int d, double delta, double q);

/// Extreme eigenvector oracle on (W + W^T) / 2.
SepResult ext_evec(const LinearOp& w, double delta, double q, Rng& rng, bool reorthogonalize = true);

/// Top singular vector oracle via the augmented operator (u, v) -> (W v, W^T u).
SepResult max_svec(const LinearOp& w, double delta, double q, Rng& rng, bool reorthogonalize = true);

}  // namespace qnpe
