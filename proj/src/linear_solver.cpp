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

#include "qnpe/linear_solver.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace qnpe {

namespace {

bool finite(double x) { return std::isfinite(x); }

class Solver {
 public:
  Solver(const LinearOp& op, double rho, bool history, bool reorth)
      : op_(op), rho_(rho), history_(history), reorth_(reorth) {}

  Vector mul(const Vector& v) {
    ++report_.matvecs;
    return op_.mul(v);
  }
  Vector mul_t(const Vector& v) {
    ++report_.matvecs;
    return op_.mul_t(v);
  }

  void record(const Vector& s, double rnorm) {
    if (!history_) return;
    report_.solution_norms.push_back(s.norm());
    report_.residual_norms.push_back(rnorm);
  }

  bool done(const Vector& s, double rnorm) const { return rnorm <= rho_ * s.norm(); }

  SolveReport finish(Vector s, double rnorm, bool converged) {
    report_.solution = std::move(s);
    report_.residual_norm = rnorm;
    report_.converged = converged;
    return std::move(report_);
  }

  // A vanishing denominator means the Krylov space is exhausted.
  SolveReport breakdown(Vector s, double rnorm, const char* what) {
    if (done(s, rnorm)) return finish(std::move(s), rnorm, true);
    throw NumericalBreakdown(std::string("linear solver breakdown: ") + what + " after " +
                             std::to_string(report_.iterations) + " iterations");
  }

  SolveReport conjugate_residual(const Vector& b, int max_iters) {
    Vector s = Vector::Zero(b.size());
    Vector r = b;
    Vector ar = mul(r);
    Vector p = r;
    Vector ap = ar;
    double gamma = r.dot(ar);
    double rnorm = r.norm();
    record(s, rnorm);
    while (report_.iterations < max_iters) {
      const double qq = ap.squaredNorm();
      if (!finite(gamma) || !finite(qq)) throw NumericalBreakdown("linear solver: non-finite recurrence");
      if (!(gamma > 0) || !(qq > 0)) return breakdown(std::move(s), rnorm, "gamma or |q|^2 vanished");
      const double alpha = gamma / qq;
      s += alpha * p;
      r -= alpha * ap;
      ar = mul(r);
      const double gamma_next = r.dot(ar);
      const double beta = gamma_next / gamma;
      p = r + beta * p;
      ap = ar + beta * ap;
      gamma = gamma_next;
      rnorm = r.norm();
      ++report_.iterations;
      record(s, rnorm);
      if (!s.allFinite() || !finite(rnorm)) throw NumericalBreakdown("linear solver: non-finite iterate");
      if (done(s, rnorm)) return finish(std::move(s), rnorm, true);
    }
    return finish(std::move(s), rnorm, false);
  }

  SolveReport cgls(const Vector& b, int max_iters) {
    Vector s = Vector::Zero(b.size());
    Vector r = b;
    Vector g = mul_t(r);
    Vector p = g;
    double gamma = g.squaredNorm();
    double rnorm = r.norm();
    record(s, rnorm);
    std::vector<Vector> basis;
    if (reorth_ && gamma > 0 && finite(gamma)) basis.push_back(g / std::sqrt(gamma));
    while (report_.iterations < max_iters) {
      if (!finite(gamma)) throw NumericalBreakdown("linear solver: non-finite recurrence");
      if (!(gamma > 0)) return breakdown(std::move(s), rnorm, "gamma vanished");
      const Vector q = mul(p);
      const double qq = q.squaredNorm();
      if (!finite(qq)) throw NumericalBreakdown("linear solver: non-finite recurrence");
      if (!(qq > 0)) return breakdown(std::move(s), rnorm, "|q|^2 vanished");
      const double alpha = gamma / qq;
      s += alpha * p;
      r -= alpha * q;
      g = mul_t(r);
      if (!basis.empty())
        for (int pass = 0; pass < 2; ++pass)
          for (const Vector& v : basis) g -= v.dot(g) * v;
      const double gamma_next = g.squaredNorm();
      if (!basis.empty() && static_cast<int>(basis.size()) < kCglsReorthVectors && gamma_next > 0 &&
          finite(gamma_next))
        basis.push_back(g / std::sqrt(gamma_next));
      p = g + (gamma_next / gamma) * p;
      gamma = gamma_next;
      rnorm = r.norm();
      ++report_.iterations;
      record(s, rnorm);
      if (!s.allFinite() || !finite(rnorm)) throw NumericalBreakdown("linear solver: non-finite iterate");
      if (done(s, rnorm)) return finish(std::move(s), rnorm, true);
    }
    return finish(std::move(s), rnorm, false);
  }

 private:
  const LinearOp& op_;
  double rho_;
  bool history_;
  bool reorth_;
  SolveReport report_;
};

}  // namespace

SolveReport linear_solve(const LinearOp& op, const Vector& b, double rho_tol, int max_iters,
                         bool record_history, bool reorthogonalize) {
  if (!(rho_tol > 0)) throw InvalidArgument("linear solver: rho_tol must be positive");
  if (op.dim <= 0 || b.size() != op.dim) throw InvalidArgument("linear solver: dimension mismatch");
  if (!op.apply) throw InvalidArgument("linear solver: operator has no apply");
  if (!op.symmetric && !op.apply_transpose)
    throw InvalidArgument("linear solver: non-symmetric operator needs apply_transpose");
  if (!b.allFinite()) throw NumericalBreakdown("linear solver: right-hand side is not finite");
  if (max_iters <= 0) max_iters = 20 * op.dim;

  if (b.squaredNorm() == 0.0) {
    SolveReport rep;
    rep.solution = Vector::Zero(op.dim);
    rep.converged = true;
    if (record_history) {
      rep.solution_norms.push_back(0.0);
      rep.residual_norms.push_back(0.0);
    }
    return rep;
  }
  Solver solver(op, rho_tol, record_history, reorthogonalize);
  return op.symmetric ? solver.conjugate_residual(b, max_iters) : solver.cgls(b, max_iters);
}

LinearOp shifted_identity_op(const LinearOp& base, double eta) {
  LinearOp op;
  op.dim = base.dim;
  op.symmetric = base.symmetric;
  op.counter = base.counter;
  auto fwd = base.apply;
  op.apply = [fwd, eta](const Vector& v) -> Vector { return v + eta * fwd(v); };
  if (!base.symmetric && base.apply_transpose) {
    auto bwd = base.apply_transpose;
    op.apply_transpose = [bwd, eta](const Vector& v) -> Vector { return v + eta * bwd(v); };
  }
  return op;
}

}  // namespace qnpe
