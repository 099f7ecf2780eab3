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
#include <memory>

#include "qnpe/common.hpp"
#include "qnpe/spectral.hpp"
#include "qnpe/structure.hpp"

namespace qnpe {

/// Constants of the Jacobian feasible set
///   Z = { B in L : mu I <= sym(B) <= l1 I, |B|_op <= l1 }
/// and of its recentred image C = { -I <= sym(B^) <= I, |B^|_op <= 3, B^ in L }.
struct FeasibleSetParams {
  double mu = 0.0;
  double l1 = 1.0;
  StructureSpec structure;

  void validate(int dim) const;
};

/// B^ = (B - (l1 + mu) I) / l1
Matrix to_hat(const Matrix& b, const FeasibleSetParams& params);
Matrix from_hat(const Matrix& b_hat, const FeasibleSetParams& params);
StructuredMatrix to_hat(const StructuredMatrix& b, const FeasibleSetParams& params);
StructuredMatrix from_hat(const StructuredMatrix& b_hat, const FeasibleSetParams& params);

/// Dense membership test for scale * C, with absolute slack `tol`.
bool in_scaled_c(const Matrix& b_hat, const StructureSpec& structure, double scale, double tol = 1e-10);

/// Dense membership test for Z, with slack tol * l1.
bool in_z(const Matrix& b, const FeasibleSetParams& params, double tol = 1e-10);

enum class SepSource { kNone, kExtEvec, kMaxSvec };

struct SepFeasibleResult {
  double gamma = 0.0;
  SepCase sep_case = SepCase::kCaseI;
  /// Projected separating direction, zero in Case I.
  StructuredMatrix s;
  SepSource source = SepSource::kNone;
  SepResult ext;  // raw ExtEvec output
  SepResult svd;  // raw MaxSvec output (empty for symmetric structure)
  std::int64_t matvecs = 0;

  bool case_two() const { return sep_case == SepCase::kCaseII; }
};

/// Composed separation oracle for C. Symmetric structure calls ExtEvec(delta, q)
/// alone; other structures call ExtEvec(delta, q/2) and MaxSvec(delta, q/2)
/// and keep the larger gamma (ties go to ExtEvec).
SepFeasibleResult sep_feasible(const StructuredMatrix& w, double delta, double q,
                               const FeasibleSetParams& params, Rng& rng, bool reorthogonalize = true,
                               std::shared_ptr<MatvecCounter> counter = nullptr);

/// Dense entry point. Throws InvalidArgument unless W lies in the structure
/// subspace within 1e-10.
SepFeasibleResult sep_feasible(const Matrix& w, double delta, double q, const FeasibleSetParams& params,
                               Rng& rng, bool reorthogonalize = true);

}  // namespace qnpe
