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

#include "qnpe/separation.hpp"

#include <algorithm>
#include <cmath>

namespace qnpe {

void FeasibleSetParams::validate(int dim) const {
  if (!(mu >= 0) || !(l1 > 0) || !(mu <= l1) || !std::isfinite(l1))
    throw InvalidArgument("feasible set: requires 0 <= mu <= l1 and l1 > 0");
  structure.validate(dim);
}

Matrix to_hat(const Matrix& b, const FeasibleSetParams& params) {
  Matrix out = b;
  out.diagonal().array() -= params.l1 + params.mu;
  return out / params.l1;
}

Matrix from_hat(const Matrix& b_hat, const FeasibleSetParams& params) {
  Matrix out = params.l1 * b_hat;
  out.diagonal().array() += params.l1 + params.mu;
  return out;
}

StructuredMatrix to_hat(const StructuredMatrix& b, const FeasibleSetParams& params) {
  StructuredMatrix out = b;
  out.add_identity(-(params.l1 + params.mu));
  out.scale(1.0 / params.l1);
  return out;
}

StructuredMatrix from_hat(const StructuredMatrix& b_hat, const FeasibleSetParams& params) {
  StructuredMatrix out = b_hat;
  out.scale(params.l1);
  out.add_identity(params.l1 + params.mu);
  return out;
}

namespace {

double op_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

}  // namespace

bool in_scaled_c(const Matrix& b_hat, const StructureSpec& structure, double scale, double tol) {
  if (structure_residual(structure, b_hat) > tol) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (b_hat + b_hat.transpose()), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -scale - tol || es.eigenvalues().maxCoeff() > scale + tol) return false;
  return op_norm(b_hat) <= 3.0 * scale + tol;
}

bool in_z(const Matrix& b, const FeasibleSetParams& params, double tol) {
  const double slack = tol * params.l1;
  if (structure_residual(params.structure, b) > slack) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (b + b.transpose()), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < params.mu - slack || es.eigenvalues().maxCoeff() > params.l1 + slack)
    return false;
  return op_norm(b) <= params.l1 + slack;
}

SepFeasibleResult sep_feasible(const StructuredMatrix& w, double delta, double q,
                               const FeasibleSetParams& params, Rng& rng, bool reorthogonalize,
                               std::shared_ptr<MatvecCounter> counter) {
  params.validate(w.dim());
  if (!(w.structure() == params.structure)) throw InvalidArgument("sep: matrix structure mismatch");
  const LinearOp op = as_linear_op(w, counter);

  SepFeasibleResult out;
  out.s = StructuredMatrix::zero(params.structure, w.dim());
  const bool symmetric = params.structure.kind == StructureKind::kSymmetric;
  out.ext = ext_evec(op, delta, symmetric ? q : 0.5 * q, rng, reorthogonalize);
  out.matvecs = out.ext.matvecs;
  const SepResult* pick = &out.ext;
  out.source = SepSource::kExtEvec;
  if (!symmetric) {
    out.svd = max_svec(op, delta, 0.5 * q, rng, reorthogonalize);
    out.matvecs += out.svd.matvecs;
    if (out.svd.gamma > out.ext.gamma) {
      pick = &out.svd;
      out.source = SepSource::kMaxSvec;
    }
  }
  out.gamma = pick->gamma;
  out.sep_case = pick->sep_case;
  if (out.case_two()) out.s.add_projected_rank_one(pick->scale, pick->left, pick->right);
  return out;
}

SepFeasibleResult sep_feasible(const Matrix& w, double delta, double q, const FeasibleSetParams& params,
                               Rng& rng, bool reorthogonalize) {
  if (w.rows() != w.cols()) throw InvalidArgument("sep: matrix must be square");
  params.validate(static_cast<int>(w.rows()));
  const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
  if ((project_subspace(params.structure, w) - w).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw InvalidArgument("sep: input must lie in the structure subspace");
  return sep_feasible(StructuredMatrix::from_dense(params.structure, w), delta, q, params, rng,
                      reorthogonalize);
}

}  // namespace qnpe
