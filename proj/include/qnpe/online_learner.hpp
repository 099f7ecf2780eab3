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
#include <memory>
#include <optional>

#include "json.hpp"

#include "qnpe/common.hpp"
#include "qnpe/separation.hpp"
#include "qnpe/structure.hpp"

namespace qnpe {

enum class LearnerOption { kOptionI, kOptionII };

struct LearnerParams {
  LearnerOption option = LearnerOption::kOptionI;
  double rho = 1.0 / 121.0;
  double radius = 1.0;
  /// Total failure budget p used by the default q_t schedule.
  double failure_budget = 0.01;
  FeasibleSetParams feasible;
  bool reorthogonalize = true;
  /// Optional overrides of the default schedules.
  std::function<double(int)> delta_schedule;
  std::function<double(int)> failure_schedule;

  /// Option I: rho = 1/121, delta_t = mu / (2 l1).
  /// Option II: rho = 1/81, delta_t = 1 / (2 (t+1)^(1/4)).
  /// Both: R = sqrt(d), q_t = p / (2.5 (t+1) ln^2(t+1)).
  static LearnerParams defaults(LearnerOption option, const FeasibleSetParams& feasible, int dim,
                                double failure_budget = 0.01);

  double delta(int t) const;
  /// Defined for t >= 1.
  double q(int t) const;
  void validate(int dim) const;
};

struct LossObservation {
  Vector u;  // F(z~) - F(z)
  Vector s;  // z~ - z
};

/// |u - B s|^2 / |s|^2
double jacobian_loss(const Matrix& b, const Vector& u, const Vector& s);
/// -2 (u - B s) s^T / |s|^2
Matrix jacobian_loss_gradient(const Matrix& b, const Vector& u, const Vector& s);

/// Per-round diagnostics of the most recent observe_loss call.
struct LearnerRoundInfo {
  double loss = 0.0;
  double grad_norm = 0.0;       // |G_t|_F
  double surrogate_norm = 0.0;  // |G~_t|_F
  double surrogate_coef = 0.0;  // max{0, -<G_t, W_t>/gamma_t}
  bool projected = false;       // ball projection was active
};

/// Projection-free online learner over the recentred Jacobian feasible set.
class OnlineLearner {
 public:
  /// W_0 = to_hat(B0). When `check_feasible` is set and d <= 400, B^0 must
  /// lie in C (checked densely).
  OnlineLearner(const StructuredMatrix& b0, LearnerParams params, std::uint64_t seed,
                bool check_feasible = true);

  int round() const { return round_; }
  const StructuredMatrix& current() const { return b_; }
  const StructuredMatrix& current_hat() const { return b_hat_; }
  const StructuredMatrix& w() const { return w_; }
  const LearnerParams& params() const { return params_; }
  const std::optional<SepFeasibleResult>& last_sep() const { return last_sep_; }
  const LearnerRoundInfo& last_round() const { return info_; }
  std::int64_t oracle_matvecs() const { return oracle_matvecs_; }

  /// Matvec closures for the played matrix. Sparse storage costs O(|pattern|),
  /// symmetric storage reuses apply for the transpose.
  LinearOp current_op(std::shared_ptr<MatvecCounter> counter = nullptr) const;

  /// One online round: gradient step on the surrogate, ball projection, then a
  /// separation query that sets the next played matrix.
  void observe_loss(const LossObservation& obs);

  /// Round, W, played matrix, and rng state.
  nlohmann::json snapshot() const;
  static OnlineLearner restore(const nlohmann::json& snap, LearnerParams params);

 private:
  OnlineLearner() = default;
  void play_from_w();

  LearnerParams params_;
  int dim_ = 0;
  int round_ = 0;
  StructuredMatrix w_;
  StructuredMatrix b_hat_;
  StructuredMatrix b_;
  std::optional<SepFeasibleResult> last_sep_;
  LearnerRoundInfo info_;
  Rng rng_;
  std::int64_t oracle_matvecs_ = 0;
};

}  // namespace qnpe
