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

#include "qnpe/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>

#include <spdlog/spdlog.h>

namespace qnpe {

std::string mode_name(SolveMode m) {
  return m == SolveMode::kStronglyMonotone ? "strongly_monotone" : "monotone";
}

SolveMode mode_from_name(const std::string& name) {
  if (name == "strongly_monotone") return SolveMode::kStronglyMonotone;
  if (name == "monotone") return SolveMode::kMonotone;
  throw InvalidArgument("unknown solve mode '" + name + "'");
}

SolverConfig SolverConfig::defaults(SolveMode mode) {
  SolverConfig c;
  c.mode = mode;
  return c;
}

double step_size_floor(SolveMode mode, const LineSearchParams& ls, double l1) {
  const double c = mode == SolveMode::kStronglyMonotone ? 7.5 : 5.0;
  return ls.alpha2 * ls.beta / (c * l1);
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_iteration(const IterationRecord& rec, const Vector& z, const Vector& g, const LineSearchOutcome& ls,
                     const StructuredMatrix& b, SolveMode mode, double mu) {
  const Vector s = ls.z_hat - z;
  const double res_a = (s + ls.eta * (g + b.apply(s))).norm();
  const double res_b = (s + ls.eta * ls.f_zhat).norm();
  const double slack = 1e-12 * (1.0 + s.norm());
  if (res_a > ls.bound_a * (1 + 1e-8) + slack)
    throw CertificateViolation("iteration " + std::to_string(rec.k) + ": inexact linear solve condition violated");
  if (res_b > ls.bound_b * (1 + 1e-8) + slack)
    throw CertificateViolation("iteration " + std::to_string(rec.k) + ": proximal point condition violated");
  if (std::isnan(rec.dist)) return;
  if (mode == SolveMode::kStronglyMonotone) {
    if (rec.dist_next * rec.dist_next > rec.dist * rec.dist / (1 + 2 * rec.eta * mu) * (1 + 1e-8))
      throw CertificateViolation("iteration " + std::to_string(rec.k) + ": contraction violated");
  } else if (rec.dist_next > rec.dist + 1e-10) {
    throw CertificateViolation("iteration " + std::to_string(rec.k) + ": nonexpansion violated");
  }
}

}  // namespace

SolveResult solve(const Problem& problem, const Vector& z0, const SolverConfig& config,
                  const IterationObserver& observer) {
  const int d = problem.dim;
  if (z0.size() != d) throw InvalidArgument("solve: initial point has the wrong dimension");
  if (!z0.allFinite()) throw InvalidArgument("solve: initial point is not finite");
  if (!(problem.l1 > 0)) throw InvalidArgument("solve: l1 must be positive");
  const bool strong = config.mode == SolveMode::kStronglyMonotone;
  if (strong && !(problem.mu > 0))
    throw InvalidArgument("solve: strongly monotone mode requires mu > 0");
  if (config.max_iterations < 0) throw InvalidArgument("solve: max_iterations must be nonnegative");
  if (!(config.failure_budget > 0 && config.failure_budget < 1))
    throw InvalidArgument("solve: failure budget must lie in (0, 1)");

  const double mu = strong ? problem.mu : 0.0;
  LineSearchParams lsp = config.ls;
  lsp.mu = mu;
  lsp.validate();
  const double floor = step_size_floor(config.mode, lsp, problem.l1);
  double sigma = std::max(config.sigma0 > 0 ? config.sigma0 : 1.0 / problem.l1, floor);

  FeasibleSetParams fs{mu, problem.l1, problem.structure};
  LearnerParams lp = LearnerParams::defaults(strong ? LearnerOption::kOptionI : LearnerOption::kOptionII, fs, d,
                                             config.failure_budget);
  if (config.learner_rho) lp.rho = *config.learner_rho;
  if (config.learner_radius) lp.radius = *config.learner_radius;
  lp.reorthogonalize = config.reorthogonalize;
  const StructuredMatrix b0 = config.b0 ? StructuredMatrix::from_dense(problem.structure, *config.b0)
                                        : StructuredMatrix::identity(problem.structure, d, problem.l1);
  OnlineLearner learner(b0, lp, config.rng_seed);
  auto counter = std::make_shared<MatvecCounter>();

  RunTrace trace;
  trace.solver = "qnpe";
  trace.mode = config.mode;
  trace.dim = d;
  trace.mu = mu;
  trace.l1 = problem.l1;
  trace.alpha1 = lsp.alpha1;
  trace.alpha2 = lsp.alpha2;
  trace.beta = lsp.beta;
  trace.sigma0 = sigma;
  trace.z0 = z0;

  const auto start = Clock::now();
  const std::optional<Vector>& root = problem.known_root;
  Vector z = z0;
  Vector g = problem.eval(z);
  std::int64_t evals = 1;
  Vector zbar_acc = Vector::Zero(d);
  double sum_eta = 0.0;
  double dist = root ? (z - *root).norm() : kNaN;
  if (root) trace.initial_dist = dist;

  auto finalize = [&]() {
    trace.z_final = z;
    trace.final_f_norm = g.norm();
    if (root) trace.final_dist = (z - *root).norm();
    trace.sum_eta = sum_eta;
    if (!strong) trace.z_bar = sum_eta > 0 ? Vector(zbar_acc / sum_eta) : z0;
    trace.operator_evals = evals;
    trace.matvecs = counter->value() + learner.oracle_matvecs();
    trace.wall_seconds = seconds_since(start);
  };

  try {
    if (!g.allFinite()) throw NumericalBreakdown("solve: F(z0) is not finite");
    for (int k = 0;; ++k) {
      const double f_norm = g.norm();
      if (f_norm <= config.stop_tolerance) {
        trace.converged = true;
        trace.stop_reason = "tolerance";
        break;
      }
      if (k >= config.max_iterations) {
        trace.stop_reason = "max_iterations";
        break;
      }
      if (observer) observer(k, z, learner);

      const LinearOp b_op = learner.current_op(counter);
      LineSearchOutcome ls = backtrack(z, g, b_op, sigma, lsp, problem.eval, problem.l1);
      evals += ls.operator_evals;

      IterationRecord rec;
      rec.k = k;
      rec.eta = ls.eta;
      rec.theta = strong ? 1.0 / (1.0 + 2.0 * ls.eta * mu) : 1.0;
      rec.sigma = sigma;
      rec.f_norm = f_norm;
      rec.dist = dist;
      rec.step_norm = (ls.z_hat - z).norm();
      rec.backtracked = ls.backtracked;
      rec.trials = ls.trial_count;
      rec.loss = kNaN;
      rec.residual_a = ls.residual_a;
      rec.bound_a = ls.bound_a;
      rec.residual_b = ls.residual_b;
      rec.bound_b = ls.bound_b;
      rec.evals = evals;

      Vector z_next = rec.theta * (z - ls.eta * ls.f_zhat) + (1.0 - rec.theta) * ls.z_hat;
      if (!z_next.allFinite()) throw NumericalBreakdown("solve: iterate is not finite");
      if (root) {
        rec.dist_next = (z_next - *root).norm();
      } else {
        rec.dist_next = kNaN;
      }
      if (config.debug_certificates) check_iteration(rec, z, g, ls, learner.current(), config.mode, mu);

      if (!strong) {
        zbar_acc += ls.eta * ls.z_hat;
        sum_eta += ls.eta;
      }
      if (ls.backtracked) {
        learner.observe_loss({*ls.f_ztilde - g, *ls.z_tilde - z});
        rec.loss = learner.last_round().loss;
      }
      rec.matvecs = counter->value() + learner.oracle_matvecs();
      spdlog::debug("k={} eta={:.3e} |F|={:.3e} trials={} loss={:.3e}", k, rec.eta, f_norm, rec.trials, rec.loss);
      trace.records.push_back(rec);

      sigma = ls.eta / lsp.beta;
      z = std::move(z_next);
      dist = rec.dist_next;
      g = problem.eval(z);
      ++evals;
      if (!g.allFinite()) throw NumericalBreakdown("solve: F(z) is not finite");
    }
  } catch (const CertificateViolation& e) {
    finalize();
    throw SolverError(e.what(), std::move(trace), true);
  } catch (const SolverError&) {
    throw;
  } catch (const Error& e) {
    finalize();
    throw SolverError(e.what(), std::move(trace));
  }
  finalize();
  spdlog::debug("qnpe: {} iterations, |F| = {:.3e}, {} evals, stop: {}", trace.iterations(), trace.final_f_norm,
               trace.operator_evals, trace.stop_reason);
  SolveResult res;
  res.z_final = trace.z_final;
  res.z_bar = trace.z_bar;
  res.trace = std::move(trace);
  return res;
}

SolveResult extragradient_baseline(const Problem& problem, const Vector& z0, double step_size, int n_iters,
                                   double stop_tolerance) {
  const int d = problem.dim;
  if (z0.size() != d) throw InvalidArgument("extragradient: initial point has the wrong dimension");
  if (!(step_size > 0) || step_size > 1.0 / problem.l1 * (1 + 1e-12))
    throw InvalidArgument("extragradient: step size must lie in (0, 1/l1]");
  if (n_iters < 0) throw InvalidArgument("extragradient: n_iters must be nonnegative");

  RunTrace trace;
  trace.solver = "extragradient";
  trace.mode = problem.mu > 0 ? SolveMode::kStronglyMonotone : SolveMode::kMonotone;
  trace.dim = d;
  trace.mu = problem.mu;
  trace.l1 = problem.l1;
  trace.sigma0 = step_size;
  trace.z0 = z0;
  const auto start = Clock::now();
  const std::optional<Vector>& root = problem.known_root;

  Vector z = z0;
  Vector g = problem.eval(z);
  std::int64_t evals = 1;
  Vector zbar_acc = Vector::Zero(d);
  double sum_eta = 0.0;
  double dist = root ? (z - *root).norm() : kNaN;
  if (root) trace.initial_dist = dist;
  for (int k = 0;; ++k) {
    const double f_norm = g.norm();
    if (f_norm <= stop_tolerance) {
      trace.converged = true;
      trace.stop_reason = "tolerance";
      break;
    }
    if (k >= n_iters) {
      trace.stop_reason = "max_iterations";
      break;
    }
    const Vector z_hat = z - step_size * g;
    const Vector f_hat = problem.eval(z_hat);
    ++evals;
    Vector z_next = z - step_size * f_hat;
    IterationRecord rec;
    rec.k = k;
    rec.eta = step_size;
    rec.theta = 1.0;
    rec.sigma = step_size;
    rec.f_norm = f_norm;
    rec.dist = dist;
    rec.dist_next = root ? (z_next - *root).norm() : kNaN;
    rec.step_norm = (z_hat - z).norm();
    rec.trials = 1;
    rec.loss = kNaN;
    rec.residual_b = (z_hat - z + step_size * f_hat).norm();
    rec.evals = evals;
    trace.records.push_back(rec);
    zbar_acc += step_size * z_hat;
    sum_eta += step_size;
    z = std::move(z_next);
    dist = rec.dist_next;
    g = problem.eval(z);
    ++evals;
    if (!g.allFinite()) {
      trace.z_final = z;
      throw SolverError("extragradient: iterate diverged", std::move(trace));
    }
  }
  trace.z_final = z;
  trace.final_f_norm = g.norm();
  if (root) trace.final_dist = (z - *root).norm();
  trace.sum_eta = sum_eta;
  trace.z_bar = sum_eta > 0 ? Vector(zbar_acc / sum_eta) : z0;
  trace.operator_evals = evals;
  trace.wall_seconds = seconds_since(start);
  SolveResult res;
  res.z_final = trace.z_final;
  res.z_bar = trace.z_bar;
  res.trace = std::move(trace);
  return res;
}

}  // namespace qnpe
