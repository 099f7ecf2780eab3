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
#include <vector>

#include "qnpe/common.hpp"
#include "qnpe/line_search.hpp"
#include "qnpe/online_learner.hpp"
#include "qnpe/problems.hpp"

namespace qnpe {

enum class SolveMode { kStronglyMonotone, kMonotone };

std::string mode_name(SolveMode m);
SolveMode mode_from_name(const std::string& name);

struct SolverConfig {
  SolveMode mode = SolveMode::kStronglyMonotone;
  LineSearchParams ls;
  /// User trial step; <= 0 selects 1 / l1. Raised to the step-size floor.
  double sigma0 = 0.0;
  double failure_budget = 0.01;
  int max_iterations = 1000;
  /// Stop once |F(z_k)| <= stop_tolerance.
  double stop_tolerance = 1e-10;
  std::uint64_t rng_seed = 0;
  /// Re-verify the line-search conditions and the contraction every iteration.
  bool debug_certificates = false;
  std::optional<double> learner_rho;
  std::optional<double> learner_radius;
  bool reorthogonalize = true;
  /// Initial Jacobian approximation; defaults to l1 I.
  std::optional<Matrix> b0;

  static SolverConfig defaults(SolveMode mode);
};

/// alpha2 beta / (7.5 l1) strongly monotone, alpha2 beta / (5 l1) monotone.
double step_size_floor(SolveMode mode, const LineSearchParams& ls, double l1);

struct IterationRecord {
  int k = 0;
  double eta = 0.0;
  double theta = 1.0;
  double sigma = 0.0;
  double f_norm = 0.0;     // |F(z_k)|
  double dist = 0.0;       // |z_k - z*|, NaN without a known root
  double dist_next = 0.0;  // |z_{k+1} - z*|
  double step_norm = 0.0;  // |z^_k - z_k|
  bool backtracked = false;
  int trials = 0;
  double loss = 0.0;  // l_k(B_k) when backtracked, NaN otherwise
  double residual_a = 0.0;
  double bound_a = 0.0;
  double residual_b = 0.0;
  double bound_b = 0.0;
  std::int64_t evals = 0;    // cumulative, excluding F(z_{k+1})
  std::int64_t matvecs = 0;  // cumulative base matvecs (line search and oracles)
};

struct RunTrace {
  std::string solver = "qnpe";
  SolveMode mode = SolveMode::kStronglyMonotone;
  int dim = 0;
  double mu = 0.0;
  double l1 = 1.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double beta = 0.0;
  double sigma0 = 0.0;
  std::vector<IterationRecord> records;
  Vector z0;
  Vector z_final;
  std::optional<Vector> z_bar;
  double sum_eta = 0.0;
  bool converged = false;
  std::string stop_reason;
  std::int64_t operator_evals = 0;  // every evaluation, including the final check
  std::int64_t matvecs = 0;
  double final_f_norm = 0.0;
  std::optional<double> initial_dist;
  std::optional<double> final_dist;
  double wall_seconds = 0.0;

  int iterations() const { return static_cast<int>(records.size()); }
};

struct SolveResult {
  Vector z_final;
  std::optional<Vector> z_bar;
  RunTrace trace;
};

/// Carries the partial trace of a failed solve.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, RunTrace trace, bool certificate = false)
      : Error(what), trace_(std::move(trace)), certificate_(certificate) {}
  const RunTrace& trace() const { return trace_; }
  /// True when an in-loop certificate check failed.
  bool certificate_failure() const { return certificate_; }

 private:
  RunTrace trace_;
  bool certificate_;
};

/// Raised by in-loop certificate checks when debug_certificates is set.
class CertificateViolation : public Error {
 public:
  using Error::Error;
};

/// Called at the start of iteration k with the learner playing B_k.
using IterationObserver = std::function<void(int k, const Vector& z, const OnlineLearner& learner)>;

SolveResult solve(const Problem& problem, const Vector& z0, const SolverConfig& config,
                  const IterationObserver& observer = nullptr);

/// Classical fixed-step extragradient with the same trace schema.
SolveResult extragradient_baseline(const Problem& problem, const Vector& z0, double step_size, int n_iters,
                                   double stop_tolerance = 0.0);

}  // namespace qnpe
