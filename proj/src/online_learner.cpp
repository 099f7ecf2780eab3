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

#include "qnpe/online_learner.hpp"

#include <cmath>
#include <sstream>

namespace qnpe {

LearnerParams LearnerParams::defaults(LearnerOption option, const FeasibleSetParams& feasible, int dim,
                                      double failure_budget) {
  LearnerParams p;
  p.option = option;
  p.rho = option == LearnerOption::kOptionI ? 1.0 / 121.0 : 1.0 / 81.0;
  p.radius = std::sqrt(static_cast<double>(dim));
  p.failure_budget = failure_budget;
  p.feasible = feasible;
  return p;
}

double LearnerParams::delta(int t) const {
  if (delta_schedule) return delta_schedule(t);
  if (option == LearnerOption::kOptionI) return feasible.mu / (2.0 * feasible.l1);
  return 0.5 / std::pow(static_cast<double>(t + 1), 0.25);
}

double LearnerParams::q(int t) const {
  if (failure_schedule) return failure_schedule(t);
  if (t < 1) throw InvalidArgument("learner: q_t is defined for t >= 1");
  const double l = std::log(static_cast<double>(t + 1));
  return failure_budget / (2.5 * (t + 1) * l * l);
}

void LearnerParams::validate(int dim) const {
  feasible.validate(dim);
  if (!(rho > 0)) throw InvalidArgument("learner: rho must be positive");
  if (!(radius > 0)) throw InvalidArgument("learner: radius must be positive");
  if (!(failure_budget > 0 && failure_budget < 1)) throw InvalidArgument("learner: p must lie in (0, 1)");
  if (option == LearnerOption::kOptionI && !delta_schedule && !(feasible.mu > 0))
    throw InvalidArgument("learner: Option I needs mu > 0");
}

double jacobian_loss(const Matrix& b, const Vector& u, const Vector& s) {
  return (u - b * s).squaredNorm() / s.squaredNorm();
}

Matrix jacobian_loss_gradient(const Matrix& b, const Vector& u, const Vector& s) {
  return -2.0 * (u - b * s) * s.transpose() / s.squaredNorm();
}

OnlineLearner::OnlineLearner(const StructuredMatrix& b0, LearnerParams params, std::uint64_t seed,
                             bool check_feasible)
    : params_(std::move(params)), dim_(b0.dim()), rng_(seed) {
  params_.validate(dim_);
  if (!(b0.structure() == params_.feasible.structure)) throw InvalidArgument("learner: B0 structure mismatch");
  b_ = b0;
  w_ = to_hat(b0, params_.feasible);
  b_hat_ = w_;
  if (check_feasible && dim_ <= 400 && !in_scaled_c(w_.to_dense(), params_.feasible.structure, 1.0, 1e-9))
    throw InvalidArgument("learner: initial matrix is infeasible");
  if (w_.frobenius_norm() > params_.radius * (1.0 + 1e-12))
    throw InvalidArgument("learner: initial matrix lies outside the learner ball");
}

LinearOp OnlineLearner::current_op(std::shared_ptr<MatvecCounter> counter) const {
  return as_linear_op(b_, std::move(counter));
}

void OnlineLearner::observe_loss(const LossObservation& obs) {
  if (obs.s.size() != dim_ || obs.u.size() != dim_) throw InvalidArgument("learner: observation dimension");
  if (!obs.s.allFinite() || !obs.u.allFinite()) throw NumericalBreakdown("learner: non-finite observation");
  const double snorm = obs.s.stableNorm();
  if (!(snorm > 0)) throw InvalidArgument("learner: observation with zero step");
  const double l1 = params_.feasible.l1;
  // The loss only depends on (u, s) up to a common scale.
  const Vector s = obs.s / snorm;
  const Vector resid = obs.u / snorm - b_.apply(s);

  info_ = LearnerRoundInfo{};
  info_.loss = resid.squaredNorm();
  StructuredMatrix g = StructuredMatrix::zero(params_.feasible.structure, dim_);
  g.add_projected_rank_one(-2.0 / l1, resid, s);
  info_.grad_norm = g.frobenius_norm();

  if (round_ > 0 && last_sep_ && last_sep_->case_two()) {
    info_.surrogate_coef = std::max(0.0, -g.dot(w_) / last_sep_->gamma);
    if (info_.surrogate_coef > 0) g.axpy(info_.surrogate_coef, last_sep_->s);
  }
  info_.surrogate_norm = g.frobenius_norm();

  w_.axpy(-params_.rho, g);
  const double norm = w_.frobenius_norm();
  if (norm > params_.radius) {
    w_.scale(params_.radius / norm);
    info_.projected = true;
  }
  ++round_;
  play_from_w();
}

void OnlineLearner::play_from_w() {
  const double delta = params_.delta(round_);
  const double q = params_.q(round_);
  SepFeasibleResult sep = sep_feasible(w_, delta, q, params_.feasible, rng_, params_.reorthogonalize);
  oracle_matvecs_ += sep.matvecs;
  double divisor = sep.case_two() ? sep.gamma : 1.0;
  if (params_.option == LearnerOption::kOptionII) divisor *= 1.0 + delta;
  b_hat_ = w_;
  if (divisor != 1.0) b_hat_.scale(1.0 / divisor);
  b_ = from_hat(b_hat_, params_.feasible);
  last_sep_ = std::move(sep);
}

namespace {

nlohmann::json matrix_json(const StructuredMatrix& m) {
  nlohmann::json j;
  if (m.structure().kind == StructureKind::kSparse) {
    j["values"] = m.sparse_values();
  } else {
    const Matrix& d = m.dense_storage();
    j["dense"] = std::vector<double>(d.data(), d.data() + d.size());
  }
  return j;
}

StructuredMatrix matrix_from_json(const nlohmann::json& j, const StructureSpec& st, int dim) {
  if (st.kind == StructureKind::kSparse)
    return StructuredMatrix::from_storage(st, dim, Matrix(), j.at("values").get<std::vector<double>>());
  const auto v = j.at("dense").get<std::vector<double>>();
  if (v.size() != static_cast<std::size_t>(dim) * dim) throw InvalidArgument("snapshot: matrix size");
  Matrix m = Eigen::Map<const Matrix>(v.data(), dim, dim);
  return StructuredMatrix::from_storage(st, dim, std::move(m), {});
}

}  // namespace

nlohmann::json OnlineLearner::snapshot() const {
  nlohmann::json j;
  j["round"] = round_;
  j["dim"] = dim_;
  j["w"] = matrix_json(w_);
  j["b_hat"] = matrix_json(b_hat_);
  std::ostringstream rng_state;
  rng_state << rng_;
  j["rng"] = rng_state.str();
  j["oracle_matvecs"] = oracle_matvecs_;
  if (last_sep_ && last_sep_->case_two()) {
    j["sep"] = {{"gamma", last_sep_->gamma}, {"s", matrix_json(last_sep_->s)}};
  } else if (last_sep_) {
    j["sep"] = {{"gamma", last_sep_->gamma}};
  }
  return j;
}

OnlineLearner OnlineLearner::restore(const nlohmann::json& snap, LearnerParams params) {
  OnlineLearner l;
  try {
    l.params_ = std::move(params);
    l.dim_ = snap.at("dim").get<int>();
    l.params_.validate(l.dim_);
    l.round_ = snap.at("round").get<int>();
    const auto& st = l.params_.feasible.structure;
    l.w_ = matrix_from_json(snap.at("w"), st, l.dim_);
    l.b_hat_ = matrix_from_json(snap.at("b_hat"), st, l.dim_);
    l.b_ = from_hat(l.b_hat_, l.params_.feasible);
    std::istringstream rng_state(snap.at("rng").get<std::string>());
    rng_state >> l.rng_;
    l.oracle_matvecs_ = snap.value("oracle_matvecs", std::int64_t{0});
    if (snap.contains("sep")) {
      SepFeasibleResult sep;
      sep.gamma = snap.at("sep").at("gamma").get<double>();
      sep.s = StructuredMatrix::zero(st, l.dim_);
      if (snap.at("sep").contains("s")) {
        sep.sep_case = SepCase::kCaseII;
        sep.s = matrix_from_json(snap.at("sep").at("s"), st, l.dim_);
      }
      l.last_sep_ = std::move(sep);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("learner snapshot: ") + e.what());
  }
  return l;
}

}  // namespace qnpe
