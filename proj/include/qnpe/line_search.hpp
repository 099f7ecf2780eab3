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

#include "qnpe/common.hpp"

namespace qnpe {

struct LineSearchParams {
  double alpha1 = 0.25;
  double alpha2 = 0.25;
  double beta = 0.5;
  double mu = 0.0;
  /// Negative selects 1 + ceil(log_{1/beta}(8 sigma l1 / alpha2)) + 8.
  int max_backtracks = -1;
  /// Inner solver cap; <= 0 selects 20 d.
  int max_inner_iters = 0;

  void validate() const;
};

int default_max_backtracks(double sigma, double l1, const LineSearchParams& params);

struct LineSearchOutcome {
  double eta = 0.0;
  Vector z_hat;
  Vector f_zhat;
  bool backtracked = false;
  /// Last rejected iterate, its operator value and step size.
  std::optional<Vector> z_tilde;
  std::optional<Vector> f_ztilde;
  double eta_tilde = 0.0;
  int trial_count = 0;
  int operator_evals = 0;
  /// |s + eta (g + B s)| and its bound at the accepted trial.
  double residual_a = 0.0;
  double bound_a = 0.0;
  /// |s + eta F(z^)| and its bound at the accepted trial.
  double residual_b = 0.0;
  double bound_b = 0.0;
  int inner_iterations = 0;
  std::int64_t matvecs = 0;
};

/// Raised when the trial budget is exhausted or an inner solve fails.
class LineSearchError : public Error {
 public:
  LineSearchError(const std::string& what, int trials, double last_eta)
      : Error(what), trials_(trials), last_eta_(last_eta) {}
  int trials() const { return trials_; }
  double last_eta() const { return last_eta_; }

 private:
  int trials_;
  double last_eta_;
};

/// Backtracking over eta in {sigma beta^i}. Each trial solves
/// (I + eta B) s = -eta g to relative tolerance alpha1 sqrt(1 + eta mu) and
/// evaluates F once at z + s. `g` must equal F(z).
LineSearchOutcome backtrack(const Vector& z, const Vector& g, const LinearOp& b_op, double sigma,
                            const LineSearchParams& params, const std::function<Vector(const Vector&)>& f_eval,
                            double l1);

}  // namespace qnpe
