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

// Acceptance suite. Prints one PASS/FAIL line per criterion; `--only N` runs a
// single criterion. Exit status is nonzero iff a selected criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oracles.hpp"
#include "qnpe/certificates.hpp"
#include "qnpe/experiment.hpp"
#include "qnpe/linear_solver.hpp"
#include "qnpe/online_learner.hpp"
#include "qnpe/solver.hpp"
#include "qnpe/spectral.hpp"

using namespace qnpe;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kContractionSlack = 1e-8;
constexpr double kFloorSlack = 1e-12;
constexpr double kNonexpansionSlack = 1e-10;
constexpr double kGapSlack = 1e-6;
constexpr double kSpectralSlack = 1e-10;
constexpr double kOptionTwoPsdSlack = 1e-8;
constexpr double kOracleRateBound = 0.1 + 3.0 * 0.009486832980505138;  // 0.1 + 3 sqrt(0.09 / 1000)
constexpr double kLinearResidualSlack = 1e-10;
constexpr double kKrylovNormSlack = 1e-8;
constexpr double kFdRelTol = 1e-5;
constexpr double kGradNormSlack = 1e-10;
constexpr double kSuperlinearFactor = 0.5;
constexpr double kDisplacementSlack = 1e-6;
// The grid runs stop once |F| drops by this factor, keeping distances well
// above the rounding floor of the contraction check.
constexpr double kGridStopFactor = 1e-8;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Vector start_point(int d, std::uint64_t seed) {
  Rng rng(seed * 7919 + 17);
  return oracle::gaussian_vector(d, rng);
}

struct GridRun {
  std::string name;
  Problem problem;
  RunTrace trace;
  SolverConfig config;
};

// Strongly monotone grid: quadratic and log-sum-exp, d in {10, 50, 200},
// mu / l1 in {1, 0.1, 0.01}, 3 seeds, l1 = 1.
std::vector<GridRun> strongly_monotone_grid() {
  std::vector<GridRun> runs;
  for (const char* family : {"quadratic", "logsumexp"})
    for (int d : {10, 50, 200})
      for (double ratio : {1.0, 0.1, 0.01})
        for (std::uint64_t seed : {1u, 2u, 3u}) {
          GridRun r;
          r.problem = std::string(family) == "quadratic" ? make_quadratic_min(d, ratio, 1.0, seed)
                                                          : make_logsumexp_min(d, 2 * d, ratio, 1.0, seed, 1.0);
          const Vector z0 = start_point(d, seed);
          r.config = SolverConfig::defaults(SolveMode::kStronglyMonotone);
          r.config.rng_seed = seed;
          r.config.max_iterations = 5000;
          r.config.stop_tolerance = kGridStopFactor * r.problem.eval(z0).norm();
          r.name = std::string(family) + " d=" + std::to_string(d) + " mu=" + fmt("%g", ratio) +
                   " seed=" + std::to_string(seed);
          r.trace = solve(r.problem, z0, r.config).trace;
          runs.push_back(std::move(r));
        }
  return runs;
}

// Monotone-mode runs: bilinear with mu = 0 plus monotone mode on strongly
// monotone problems.
std::vector<GridRun> monotone_runs() {
  std::vector<GridRun> runs;
  auto add = [&](std::string name, Problem p, std::uint64_t seed, int max_it) {
    GridRun r;
    r.problem = std::move(p);
    const Vector z0 = start_point(r.problem.dim, seed);
    r.config = SolverConfig::defaults(SolveMode::kMonotone);
    r.config.rng_seed = seed;
    r.config.max_iterations = max_it;
    r.config.stop_tolerance = kGridStopFactor * r.problem.eval(z0).norm();
    r.name = std::move(name);
    r.trace = solve(r.problem, z0, r.config).trace;
    runs.push_back(std::move(r));
  };
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    add("bilinear 10x10 seed=" + std::to_string(seed), make_bilinear_minimax(10, 10, 0.0, 1.0, seed), seed, 400);
    add("bilinear 20x15 seed=" + std::to_string(seed), make_bilinear_minimax(20, 15, 0.0, 1.0, seed), seed, 400);
    add("quadratic d=30 mu=0.1 seed=" + std::to_string(seed), make_quadratic_min(30, 0.1, 1.0, seed), seed, 2000);
    add("logsumexp d=30 mu=0.05 seed=" + std::to_string(seed), make_logsumexp_min(30, 60, 0.05, 1.0, seed, 1.0),
        seed, 2000);
    add("sparse d=40 seed=" + std::to_string(seed), make_sparse_equation(40, 3, 0.0, 1.0, seed), seed, 2000);
  }
  return runs;
}

Outcome criterion_1() {
  const auto runs = strongly_monotone_grid();
  int checked = 0, violations = 0, unconverged = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& r : runs) {
    if (!r.trace.converged) ++unconverged;
    for (const auto& rec : r.trace.records) {
      const double lhs = rec.dist_next * rec.dist_next;
      const double rhs = rec.dist * rec.dist / (1.0 + 2.0 * rec.eta * r.problem.mu);
      worst = std::max(worst, lhs / rhs);
      if (!(lhs <= rhs * (1.0 + kContractionSlack))) ++violations;
      ++checked;
    }
  }
  return {violations == 0 && checked > 0,
          std::to_string(runs.size()) + " runs, " + std::to_string(checked) + " iterations, " +
              std::to_string(violations) + " violations, worst ratio " + fmt("%.6f", worst) + ", " +
              std::to_string(unconverged) + " runs hit the iteration cap"};
}

Outcome criterion_2() {
  int violations = 0, runs = 0;
  double worst_strong = std::numeric_limits<double>::infinity(), worst_mono = worst_strong;
  for (const auto& r : strongly_monotone_grid()) {
    const double floor = r.config.ls.alpha2 * r.config.ls.beta / (7.5 * r.problem.l1);
    ++runs;
    for (const auto& rec : r.trace.records) {
      worst_strong = std::min(worst_strong, rec.eta / floor);
      if (!(rec.eta >= floor - kFloorSlack)) ++violations;
    }
  }
  for (const auto& r : monotone_runs()) {
    const double floor = r.config.ls.alpha2 * r.config.ls.beta / (5.0 * r.problem.l1);
    ++runs;
    for (const auto& rec : r.trace.records) {
      worst_mono = std::min(worst_mono, rec.eta / floor);
      if (!(rec.eta >= floor - kFloorSlack)) ++violations;
    }
  }
  return {violations == 0, std::to_string(runs) + " runs, " + std::to_string(violations) +
                               " violations, min eta/floor strongly monotone " + fmt("%.3f", worst_strong) +
                               ", monotone " + fmt("%.3f", worst_mono)};
}

Outcome criterion_3() {
  int violations = 0, runs = 0;
  double worst = 0.0;
  for (const auto& r : strongly_monotone_grid()) {
    const auto& t = r.trace;
    if (t.records.empty()) continue;
    ++runs;
    const double n = static_cast<double>(t.records.size());
    const double budget =
        3.0 * n + std::log(7.5 * t.sigma0 * r.problem.l1 / r.config.ls.alpha2) / std::log(1.0 / r.config.ls.beta);
    const double used = static_cast<double>(t.records.back().evals);
    worst = std::max(worst, used / budget);
    if (!(used <= budget)) ++violations;
  }
  return {violations == 0 && runs > 0, std::to_string(runs) + " runs, " + std::to_string(violations) +
                                           " violations, max evals/budget " + fmt("%.4f", worst)};
}

Outcome criterion_4() {
  int violations = 0, gap_fail = 0, runs = 0;
  double worst_gap_ratio = 0.0, worst_step = -std::numeric_limits<double>::infinity();
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const Problem p = make_bilinear_minimax(10, 10, 0.0, 1.0, seed);
    const Vector z0 = start_point(20, seed);
    SolverConfig cfg = SolverConfig::defaults(SolveMode::kMonotone);
    cfg.rng_seed = seed;
    cfg.max_iterations = 300;
    cfg.stop_tolerance = 1e-9;
    const SolveResult res = solve(p, z0, cfg);
    ++runs;
    for (const auto& rec : res.trace.records) {
      worst_step = std::max(worst_step, rec.dist_next - rec.dist);
      if (!(rec.dist_next <= rec.dist + kNonexpansionSlack)) ++violations;
    }
    double sum_eta = 0.0;
    for (const auto& rec : res.trace.records) sum_eta += rec.eta;
    if (!(sum_eta > 0) || !res.z_bar) {
      ++gap_fail;
      continue;
    }
    const PrimalDualBox box = default_gap_box(p, z0);
    const Vector& zs = *p.known_root;
    bool contains = true;
    for (int i = 0; i < 10; ++i) {
      contains &= box.x_lo(i) <= zs(i) && zs(i) <= box.x_hi(i);
      contains &= box.y_lo(i) <= zs(10 + i) && zs(10 + i) <= box.y_hi(i);
    }
    const double gap = evaluate_gap(p, *res.z_bar, box);
    const double bound = max_sq_distance(z0, box) / (2.0 * sum_eta);
    worst_gap_ratio = std::max(worst_gap_ratio, gap / bound);
    if (!contains || !(gap <= bound * (1.0 + kGapSlack))) ++gap_fail;
  }
  return {violations == 0 && gap_fail == 0,
          std::to_string(runs) + " runs, " + std::to_string(violations) + " nonexpansion violations (max increase " +
              fmt("%.2e", worst_step) + "), " + std::to_string(gap_fail) + " gap violations, max gap/bound " +
              fmt("%.3e", worst_gap_ratio)};
}

Outcome criterion_5() {
  struct Case {
    std::string name;
    Problem problem;
    SolveMode mode;
  };
  std::vector<Case> cases;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    cases.push_back({"general d=20", oracle::general_linear_problem(20, 0.1, 1.0, seed), SolveMode::kStronglyMonotone});
    cases.push_back({"general d=20 monotone", oracle::general_linear_problem(20, 0.1, 1.0, seed), SolveMode::kMonotone});
    cases.push_back({"quadratic d=30", make_quadratic_min(30, 0.05, 1.0, seed), SolveMode::kStronglyMonotone});
    cases.push_back({"logsumexp d=25", make_logsumexp_min(25, 50, 0.1, 1.0, seed, 1.0), SolveMode::kStronglyMonotone});
    cases.push_back({"bilinear 12x12", make_bilinear_minimax(12, 12, 0.0, 1.0, seed), SolveMode::kMonotone});
    cases.push_back({"bilinear 12x12 mu", make_bilinear_minimax(12, 12, 0.1, 1.0, seed), SolveMode::kStronglyMonotone});
    cases.push_back({"sparse d=30", make_sparse_equation(30, 3, 0.0, 1.0, seed), SolveMode::kMonotone});
  }
  int runs_used = 0, runs_excluded = 0, matrices = 0, violations = 0;
  double worst_psd = std::numeric_limits<double>::infinity(), worst_norm = 0.0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const Case& c = cases[i];
    const double mu = c.problem.mu, l1 = c.problem.l1;
    SolverConfig cfg = SolverConfig::defaults(c.mode);
    cfg.rng_seed = 100 + i;
    cfg.max_iterations = 300;
    cfg.stop_tolerance = 1e-9;
    int last_round = 0;
    bool oracle_failed = false;
    std::vector<Matrix> played;
    solve(c.problem, start_point(c.problem.dim, 200 + i), cfg, [&](int, const Vector&, const OnlineLearner& l) {
      played.push_back(l.current().to_dense());
      if (l.round() != last_round && l.last_sep()) {
        last_round = l.round();
        const Matrix w = l.w().to_dense();
        const double delta = l.params().delta(l.round());
        const SepFeasibleResult& s = *l.last_sep();
        if (!oracle::ext_evec_success(w, s.ext, delta)) oracle_failed = true;
        if (l.params().feasible.structure.kind != StructureKind::kSymmetric &&
            !oracle::max_svec_success(w, s.svd, delta))
          oracle_failed = true;
      }
    });
    if (oracle_failed) {
      ++runs_excluded;
      continue;
    }
    ++runs_used;
    for (const Matrix& b : played) {
      ++matrices;
      const double lmin = oracle::sym_eigs(b).minCoeff();
      const double nrm = oracle::op_norm(b);
      bool ok;
      if (c.mode == SolveMode::kStronglyMonotone) {
        worst_psd = std::min(worst_psd, lmin / (0.5 * mu));
        worst_norm = std::max(worst_norm, nrm / (6.5 * l1));
        ok = lmin >= 0.5 * mu - kSpectralSlack * l1 && nrm <= 6.5 * l1 * (1 + kSpectralSlack);
      } else {
        worst_norm = std::max(worst_norm, nrm / (4.0 * l1));
        ok = lmin >= -kOptionTwoPsdSlack * l1 && nrm <= 4.0 * l1 * (1 + kSpectralSlack);
      }
      if (!ok) ++violations;
    }
  }
  return {violations == 0 && runs_used > 0,
          std::to_string(runs_used) + " runs checked (" + std::to_string(runs_excluded) + " excluded by oracle failure), " +
              std::to_string(matrices) + " matrices, " + std::to_string(violations) +
              " violations, min lambda_min/(mu/2) " + fmt("%.3f", worst_psd) + ", max norm/bound " +
              fmt("%.3f", worst_norm)};
}

Outcome criterion_6() {
  constexpr int kCalls = 1000, kDim = 30;
  constexpr double kDelta = 0.25, kQ = 0.1;
  Rng rng(6006);
  std::uniform_real_distribution<double> scale(0.3, 3.0);
  int ext_fail = 0, svd_fail = 0;
  for (int t = 0; t < kCalls; ++t) {
    // Symmetric inputs with spectral radius spread around the boundary 1.
    Matrix s = oracle::sym(oracle::gaussian(kDim, kDim, rng));
    const Vector e = oracle::sym_eigs(s);
    s *= scale(rng) / std::max(e.maxCoeff(), -e.minCoeff());
    const SepResult r = ext_evec(dense_op(s, true), kDelta, kQ, rng);
    if (!oracle::ext_evec_success(s, r, kDelta)) ++ext_fail;
  }
  for (int t = 0; t < kCalls; ++t) {
    // General inputs with largest singular value spread around the boundary 3.
    Matrix g = oracle::gaussian(kDim, kDim, rng);
    g *= 3.0 * scale(rng) / oracle::op_norm(g);
    const SepResult r = max_svec(dense_op(g), kDelta, kQ, rng);
    if (!oracle::max_svec_success(g, r, kDelta)) ++svd_fail;
  }
  const double re = static_cast<double>(ext_fail) / kCalls, rs = static_cast<double>(svd_fail) / kCalls;
  return {re <= kOracleRateBound && rs <= kOracleRateBound,
          "ExtEvec failure rate " + fmt("%.3f", re) + ", MaxSvec failure rate " + fmt("%.3f", rs) + ", bound " +
              fmt("%.3f", kOracleRateBound)};
}

Outcome criterion_7() {
  constexpr int kSystems = 500, kDim = 40;
  Rng rng(7007);
  std::uniform_real_distribution<double> log_rho(std::log(1e-6), std::log(0.5));
  int converged = 0, residual_fail = 0, monotone_fail = 0;
  double worst_res = 0.0, worst_drop = 0.0;
  for (int t = 0; t < kSystems; ++t) {
    const bool symmetric = t % 2 == 0;
    const Matrix g = oracle::gaussian(kDim, kDim, rng);
    Matrix a = Matrix::Identity(kDim, kDim) + (t % 3 + 1) * g * g.transpose() / kDim;
    if (!symmetric) {
      const Matrix h = oracle::gaussian(kDim, kDim, rng);
      a += (t % 5 + 1) * (h - h.transpose()) / std::sqrt(static_cast<double>(kDim));
    }
    const Vector b = oracle::gaussian_vector(kDim, rng);
    const double rho = std::exp(log_rho(rng));
    const SolveReport r = linear_solve(dense_op(a, symmetric), b, rho, 0, true);
    for (std::size_t k = 1; k < r.solution_norms.size(); ++k) {
      const double drop = (r.solution_norms[k - 1] - r.solution_norms[k]) / r.solution_norms[k - 1];
      worst_drop = std::max(worst_drop, drop);
      if (drop > kKrylovNormSlack) ++monotone_fail;
    }
    if (!r.converged) continue;
    ++converged;
    const double res = (a * r.solution - b).norm();
    worst_res = std::max(worst_res, res / (rho * r.solution.norm()));
    if (!(res <= rho * r.solution.norm() * (1 + kLinearResidualSlack))) ++residual_fail;
  }
  return {residual_fail == 0 && monotone_fail == 0 && converged > 0,
          std::to_string(converged) + "/" + std::to_string(kSystems) + " converged, " + std::to_string(residual_fail) +
              " residual violations (max ratio " + fmt("%.4f", worst_res) + "), " + std::to_string(monotone_fail) +
              " norm decreases (max relative drop " + fmt("%.1e", worst_drop) + ")"};
}

Outcome criterion_8() {
  Rng rng(8008);
  std::uniform_int_distribution<int> dims(2, 12);
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  int fd_fail = 0, bound_fail = 0;
  double worst_rel = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int d = dims(rng);
    const Matrix b = scale(rng) * oracle::gaussian(d, d, rng);
    const Vector u = scale(rng) * oracle::gaussian_vector(d, rng);
    const Vector s = scale(rng) * oracle::gaussian_vector(d, rng);
    const Matrix g = jacobian_loss_gradient(b, u, s);
    Matrix fd(d, d);
    const double h = 1e-5 * std::max(1.0, b.cwiseAbs().maxCoeff());
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        Matrix bp = b, bm = b;
        bp(i, j) += h;
        bm(i, j) -= h;
        fd(i, j) = (jacobian_loss(bp, u, s) - jacobian_loss(bm, u, s)) / (2 * h);
      }
    const double rel = (fd - g).norm() / std::max(g.norm(), 1e-300);
    worst_rel = std::max(worst_rel, rel);
    if (!(rel <= kFdRelTol)) ++fd_fail;
    if (!(g.norm() <= 2.0 * std::sqrt(jacobian_loss(b, u, s)) + kGradNormSlack)) ++bound_fail;
  }
  return {fd_fail == 0 && bound_fail == 0, "100 samples, " + std::to_string(fd_fail) +
                                               " finite-difference mismatches (max relative error " +
                                               fmt("%.2e", worst_rel) + "), " + std::to_string(bound_fail) +
                                               " gradient-norm bound violations"};
}

double geometric_mean_ratio(const std::vector<IterationRecord>& recs, int from, int to) {
  double acc = 0.0;
  for (int k = from; k < to; ++k) acc += std::log(recs[k].dist_next / recs[k].dist);
  return std::exp(acc / (to - from));
}

Outcome criterion_9() {
  constexpr double kTarget = 1e-8;
  bool trend_ok = true, eg_ok = true;
  std::string detail;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Problem p = make_quadratic_min(50, 0.1, 1.0, seed);
    const Vector z0 = start_point(50, seed);
    SolverConfig cfg = SolverConfig::defaults(SolveMode::kStronglyMonotone);
    cfg.rng_seed = seed;
    cfg.max_iterations = 2000;
    cfg.stop_tolerance = 1e-3 * kTarget * p.eval(z0).norm();
    const RunTrace q = solve(p, z0, cfg).trace;
    const TargetHit hq = first_hit(q, kTarget);
    const int n = hq.iterations;
    double early = NAN, late = NAN;
    if (hq.reached && n >= 20) {
      early = geometric_mean_ratio(q.records, 0, 10);
      late = geometric_mean_ratio(q.records, n - 10, n);
    }
    const bool t_ok = late <= kSuperlinearFactor * early;
    trend_ok &= t_ok;

    const RunTrace e = extragradient_baseline(p, z0, 0.5 / p.l1, 100000, cfg.stop_tolerance).trace;
    const TargetHit he = first_hit(e, kTarget);
    // Extragradient progress when given the evaluations QNPE needed.
    bool eg_within_budget = false;
    for (const auto& rec : e.records)
      if (rec.evals + 1 <= hq.evals && rec.dist_next <= kTarget * *e.initial_dist) eg_within_budget = true;
    const bool c_ok = hq.reached && he.reached && hq.iterations < he.iterations && !eg_within_budget;
    eg_ok &= c_ok;
    detail += " seed " + std::to_string(seed) + ": N=" + std::to_string(n) + " ratio first10 " + fmt("%.3f", early) +
              " last10 " + fmt("%.3f", late) + ", iters/evals QNPE " + std::to_string(hq.iterations) + "/" +
              std::to_string(hq.evals) + " EG " + std::to_string(he.iterations) + "/" + std::to_string(he.evals) + ";";
  }
  return {trend_ok && eg_ok, std::string("trend ") + (trend_ok ? "ok" : "not met") + ", QNPE vs EG " +
                                 (eg_ok ? "ok" : "not met") + ";" + detail};
}

Outcome criterion_10() {
  struct Case {
    std::string name;
    Problem problem;
    SolveMode mode;
  };
  std::vector<Case> cases;
  for (std::uint64_t seed : {1u, 2u}) {
    cases.push_back({"symmetric quadratic d=40", make_quadratic_min(40, 0.1, 1.0, seed), SolveMode::kStronglyMonotone});
    cases.push_back({"symmetric logsumexp d=30", make_logsumexp_min(30, 60, 0.1, 1.0, seed, 1.0),
                     SolveMode::kStronglyMonotone});
    cases.push_back({"j-symmetric bilinear 20x25", make_bilinear_minimax(20, 25, 0.0, 1.0, seed), SolveMode::kMonotone});
    cases.push_back({"j-symmetric bilinear 15x15 mu", make_bilinear_minimax(15, 15, 0.1, 1.0, seed),
                     SolveMode::kStronglyMonotone});
    cases.push_back({"sparse d=50", make_sparse_equation(50, 3, 0.0, 1.0, seed), SolveMode::kMonotone});
    cases.push_back({"sparse d=50 mu", make_sparse_equation(50, 4, 0.1, 1.0, seed), SolveMode::kStronglyMonotone});
  }
  int matrices = 0, violations = 0, learner_rounds = 0;
  std::string kinds;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const Case& c = cases[i];
    SolverConfig cfg = SolverConfig::defaults(c.mode);
    cfg.rng_seed = 300 + i;
    cfg.max_iterations = 200;
    cfg.stop_tolerance = 1e-9;
    const StructureSpec st = c.problem.structure;
    if (st.kind == StructureKind::kGeneral) ++violations;  // the case must exercise a structure
    int rounds = 0;
    solve(c.problem, start_point(c.problem.dim, 400 + i), cfg, [&](int, const Vector&, const OnlineLearner& l) {
      ++matrices;
      rounds = l.round();
      if (!(l.current().structure() == st)) ++violations;
      if (structure_residual(st, l.current().to_dense()) != 0.0) ++violations;
    });
    learner_rounds += rounds;
  }
  return {violations == 0 && learner_rounds > 0, std::to_string(cases.size()) + " runs, " + std::to_string(matrices) +
                                                     " played matrices, " + std::to_string(learner_rounds) +
                                                     " learner updates, " + std::to_string(violations) +
                                                     " nonzero structure residuals"};
}

Outcome criterion_11() {
  std::vector<GridRun> runs = strongly_monotone_grid();
  for (auto& r : monotone_runs()) runs.push_back(std::move(r));
  int checked = 0, violations = 0;
  double worst = 0.0;
  for (const auto& r : runs) {
    if (!r.problem.known_root || !r.trace.initial_dist) continue;
    ++checked;
    double sum = 0.0;
    for (const auto& rec : r.trace.records) sum += rec.step_norm * rec.step_norm;
    const double d0 = (r.trace.z0 - *r.problem.known_root).squaredNorm();
    const double bound = d0 / (1.0 - r.config.ls.alpha1 - r.config.ls.alpha2);
    worst = std::max(worst, sum / bound);
    if (!(sum <= bound * (1.0 + kDisplacementSlack))) ++violations;
  }
  return {violations == 0 && checked > 0, std::to_string(checked) + " runs, " + std::to_string(violations) +
                                              " violations, max sum/bound " + fmt("%.4f", worst)};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome criterion_12() {
  const fs::path dir = fs::temp_directory_path() / "qnpe_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path cfg = dir / "config.json";
  std::ofstream(cfg) << R"({
  "problem": {"family": "logsumexp", "dim": 30, "n_terms": 60, "mu": 0.05, "l1": 1.0},
  "solvers": [{"solver": "qnpe", "mode": "strongly_monotone", "max_iterations": 300},
              {"solver": "qnpe", "label": "qnpe_mono", "mode": "monotone", "max_iterations": 300},
              {"solver": "extragradient", "max_iterations": 300}],
  "repetitions": 2,
  "seed": 12
})";
  int rc[2];
  for (int i = 0; i < 2; ++i) {
    const std::string cmd = std::string("\"") + QNPE_CLI_PATH + "\" run \"" + cfg.string() + "\" --out \"" +
                            (dir / ("out" + std::to_string(i))).string() + "\" > /dev/null 2>&1";
    rc[i] = std::system(cmd.c_str());
  }
  if (rc[0] != 0 || rc[1] != 0) {
    fs::remove_all(dir);
    return {false, "CLI exited with " + std::to_string(rc[0]) + " and " + std::to_string(rc[1])};
  }
  int files = 0, diffs = 0;
  for (const auto& entry : fs::directory_iterator(dir / "out0")) {
    if (entry.path().extension() != ".csv" || entry.path().filename().string().rfind("trace_", 0) != 0) continue;
    ++files;
    const fs::path other = dir / "out1" / entry.path().filename();
    const std::string a = slurp(entry.path());
    if (!fs::exists(other) || a != slurp(other) || a.empty()) ++diffs;
  }
  fs::remove_all(dir);
  return {files == 6 && diffs == 0,
          std::to_string(files) + " trace CSVs compared, " + std::to_string(diffs) + " differ"};
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qnpe acceptance suite"};
  int only = 0;
  app.add_option("--only", only, "run a single criterion (1-12)")->check(CLI::Range(1, 12));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all = {
      {1, "per-iteration linear contraction", criterion_1},
      {2, "step-size floor", criterion_2},
      {3, "operator-evaluation budget", criterion_3},
      {4, "monotone nonexpansion and gap decay", criterion_4},
      {5, "learner feasibility", criterion_5},
      {6, "oracle failure rates", criterion_6},
      {7, "linear solver contract", criterion_7},
      {8, "loss-gradient correctness", criterion_8},
      {9, "superlinear trend", criterion_9},
      {10, "structure preservation", criterion_10},
      {11, "cumulative displacement bound", criterion_11},
      {12, "determinism", criterion_12},
  };
  bool all_pass = true;
  for (const auto& c : all) {
    if (only != 0 && c.id != only) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all_pass &= o.pass;
    std::printf("criterion %2d: %s  %s: %s\n", c.id, o.pass ? "PASS" : "FAIL", c.title, o.detail.c_str());
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
