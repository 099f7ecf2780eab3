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

#include "qnpe/line_search.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qnpe/linear_solver.hpp"

namespace qnpe {

void LineSearchParams::validate() const {
  if (!(alpha1 >= 0 && alpha1 < 0.5)) throw InvalidArgument("line search: alpha1 must lie in [0, 1/2)");
  if (!(alpha2 > 0 && alpha2 < 0.5)) throw InvalidArgument("line search: alpha2 must lie in (0, 1/2)");
  if (!(alpha1 + alpha2 < 1)) throw InvalidArgument("line search: alpha1 + alpha2 must be below 1");
  if (!(beta > 0 && beta < 1)) throw InvalidArgument("line search: beta must lie in (0, 1)");
  if (!(mu >= 0)) throw InvalidArgument("line search: mu must be nonnegative");
}

int default_max_backtracks(double sigma, double l1, const LineSearchParams& params) {
  const double ratio = sigma * 8.0 * l1 / params.alpha2;
  const double steps = std::ceil(std::log(ratio) / std::log(1.0 / params.beta));
  return std::max(0, 1 + static_cast<int>(std::max(steps, -1.0)) + 8);
}

LineSearchOutcome backtrack(const Vector& z, const Vector& g, const LinearOp& b_op, double sigma,
                            const LineSearchParams& params, const std::function<Vector(const Vector&)>& f_eval,
                            double l1) {
  params.validate();
  if (!(sigma > 0) || !std::isfinite(sigma)) throw InvalidArgument("line search: sigma must be positive");
  if (z.size() != b_op.dim || g.size() != b_op.dim) throw InvalidArgument("line search: dimension mismatch");
  if (!g.allFinite()) throw NumericalBreakdown("line search: F(z) is not finite");
  const int max_bt = params.max_backtracks >= 0 ? params.max_backtracks : default_max_backtracks(sigma, l1, params);

  LineSearchOutcome out;
  double eta = sigma;
  for (int i = 0;; ++i) {
    if (i > max_bt)
      throw LineSearchError("line search: exceeded " + std::to_string(max_bt) +
                                " backtracks (last eta " + std::to_string(eta / params.beta) +
                                "); check the Lipschitz constant",
                            out.trial_count, eta / params.beta);
    const double scale = std::sqrt(1.0 + eta * params.mu);
    const double rho_tol = params.alpha1 > 0 ? params.alpha1 * scale : 1e-12;
    const LinearOp a_op = shifted_identity_op(b_op, eta);
    const SolveReport rep = linear_solve(a_op, -eta * g, rho_tol, params.max_inner_iters);
    out.matvecs += rep.matvecs;
    out.inner_iterations += rep.iterations;
    if (!rep.converged)
      throw LineSearchError("line search: inner solve did not reach its tolerance in " +
                                std::to_string(rep.iterations) + " iterations",
                            out.trial_count + 1, eta);
    const Vector& s = rep.solution;
    Vector z_hat = z + s;
    Vector f_hat = f_eval(z_hat);
    ++out.trial_count;
    ++out.operator_evals;
    if (!f_hat.allFinite()) throw NumericalBreakdown("line search: F(z^) is not finite");
    const double snorm = s.norm();
    const double lhs = (s + eta * f_hat).norm();
    const double rhs = (params.alpha1 + params.alpha2) * scale * snorm;
    if (lhs <= rhs) {
      out.eta = eta;
      out.z_hat = std::move(z_hat);
      out.f_zhat = std::move(f_hat);
      out.backtracked = i > 0;
      out.residual_a = rep.residual_norm;
      out.bound_a = rho_tol * snorm;
      out.residual_b = lhs;
      out.bound_b = rhs;
      return out;
    }
    out.z_tilde = std::move(z_hat);
    out.f_ztilde = std::move(f_hat);
    out.eta_tilde = eta;
    eta *= params.beta;
  }
}

}  // namespace qnpe
