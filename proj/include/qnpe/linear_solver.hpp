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
#include <vector>

#include "qnpe/common.hpp"

namespace qnpe {

struct SolveReport {
  Vector solution;
  /// Recurrence residual |A s - b| at the returned iterate.
  double residual_norm = 0.0;
  int iterations = 0;
  std::int64_t matvecs = 0;
  bool converged = false;
  /// |s_k| and |r_k| for k = 0..iterations, filled when requested.
  std::vector<double> solution_norms;
  std::vector<double> residual_norms;
};

/// Inexact solve of A s = b from s_0 = 0, stopping at the first iterate with
/// |A s_k - b| <= rho_tol |s_k|. Conjugate Residual when op.symmetric is set,
/// CGLS otherwise. max_iters <= 0 selects 20 d.
///
/// Exhausting max_iters returns converged = false with the last iterate.
/// A vanishing or non-finite recurrence denominator throws NumericalBreakdown
/// unless the residual test already holds.
///
/// With `reorthogonalize`, CGLS keeps the normalized gradients A^T r_k and
/// orthogonalizes each new one against them (at most kCglsReorthVectors).
/// This costs no matvecs.
inline constexpr int kCglsReorthVectors = 256;

SolveReport linear_solve(const LinearOp& op, const Vector& b, double rho_tol, int max_iters = 0,
                         bool record_history = false, bool reorthogonalize = true);

/// v -> v + eta * (B v) over a base operator. Every application counts as one
/// base matvec on the base operator's counter.
LinearOp shifted_identity_op(const LinearOp& base, double eta);

}  // namespace qnpe
