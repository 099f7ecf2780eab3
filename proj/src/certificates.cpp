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

#include "qnpe/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qnpe {

bool CertificateReport::all_passed() const {
  return std::all_of(items.begin(), items.end(), [](const CertificateResult& c) { return c.passed; });
}

const CertificateResult* CertificateReport::find(const std::string& name) const {
  for (const auto& c : items)
    if (c.name == name) return &c;
  return nullptr;
}

nlohmann::json CertificateReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : items) {
    nlohmann::json j;
    j["name"] = c.name;
    j["passed"] = c.passed;
    j["worst_margin"] = std::isfinite(c.worst_margin) ? nlohmann::json(c.worst_margin) : nlohmann::json(nullptr);
    j["checked"] = c.checked;
    j["worst_index"] = c.worst_index;
    if (!c.detail.empty()) j["detail"] = c.detail;
    arr.push_back(j);
  }
  return {{"all_passed", all_passed()}, {"certificates", arr}};
}

PrimalDualBox default_gap_box(const Problem& problem, const Vector& z0) {
  if (!problem.bilinear) throw InvalidArgument("gap box: bilinear problem required");
  double r = z0.cwiseAbs().maxCoeff();
  if (problem.known_root) r = std::max(r, problem.known_root->cwiseAbs().maxCoeff());
  r += 1.0;
  const int m = problem.bilinear->m;
  const int n = problem.bilinear->n;
  return PrimalDualBox{Vector::Constant(m, -r), Vector::Constant(m, r), Vector::Constant(n, -r),
                       Vector::Constant(n, r)};
}

namespace {

// Accumulates "value <= bound" checks.
class Check {
 public:
  explicit Check(std::string name) { res_.name = std::move(name); res_.worst_margin = std::numeric_limits<double>::infinity(); }

  void le(double value, double bound, int index) {
    ++res_.checked;
    const double margin = (bound - value) / std::max(std::abs(bound), std::numeric_limits<double>::min());
    const bool ok = value <= bound;
    if (!ok) res_.passed = false;
    if (margin < res_.worst_margin || (!ok && res_.worst_index < 0)) {
      res_.worst_margin = margin;
      res_.worst_index = index;
    }
  }
  void fail(const std::string& why) {
    res_.passed = false;
    if (res_.detail.empty()) res_.detail = why;
  }
  void note(const std::string& what) { res_.detail = what; }
  CertificateResult done() {
    if (res_.checked == 0) res_.worst_margin = 0.0;
    return res_;
  }

 private:
  CertificateResult res_;
};

double log_base(double x, double beta) { return std::log(x) / std::log(1.0 / beta); }

void counters(const RunTrace& t, CertificateReport& rep) {
  Check c("counters");
  std::int64_t prev_e = 0, prev_m = 0;
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    const auto& r = t.records[i];
    c.le(static_cast<double>(prev_e), static_cast<double>(r.evals), static_cast<int>(i));
    c.le(static_cast<double>(prev_m), static_cast<double>(r.matvecs), static_cast<int>(i));
    if (r.k != static_cast<int>(i)) c.fail("iteration index out of sequence");
    if (!(r.theta > 0 && r.theta <= 1)) c.fail("theta outside (0, 1]");
    if (t.solver == "qnpe") {
      const double expected = t.mode == SolveMode::kStronglyMonotone ? 1.0 / (1.0 + 2.0 * r.eta * t.mu) : 1.0;
      if (std::abs(r.theta - expected) > 1e-12 * expected) c.fail("theta inconsistent with eta");
    }
    prev_e = r.evals;
    prev_m = r.matvecs;
  }
  rep.items.push_back(c.done());
}

void distance_checks(const RunTrace& t, CertificateReport& rep, bool strong) {
  if (strong) {
    Check c("contraction");
    for (std::size_t i = 0; i < t.records.size(); ++i) {
      const auto& r = t.records[i];
      c.le(r.dist_next * r.dist_next, r.dist * r.dist / (1.0 + 2.0 * r.eta * t.mu) * (1.0 + 1e-8),
           static_cast<int>(i));
    }
    rep.items.push_back(c.done());
  } else {
    Check c("nonexpansion");
    for (std::size_t i = 0; i < t.records.size(); ++i) {
      const auto& r = t.records[i];
      c.le(r.dist_next, r.dist + 1e-10, static_cast<int>(i));
    }
    rep.items.push_back(c.done());
  }
}

}  // namespace

CertificateReport verify_iteration_certificates(const RunTrace& trace, const Problem& problem) {
  CertificateReport rep;
  const bool has_root = problem.known_root.has_value() && trace.initial_dist.has_value();
  const bool strong = trace.mode == SolveMode::kStronglyMonotone;

  if (trace.solver == "extragradient") {
    if (has_root) distance_checks(trace, rep, false);
    counters(trace, rep);
    return rep;
  }

  {
    Check c("line_search_conditions");
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
      const auto& r = trace.records[i];
      const double tiny = 1e-300;
      c.le(r.residual_a, r.bound_a * (1.0 + 1e-10) + tiny, static_cast<int>(i));
      c.le(r.residual_b, r.bound_b * (1.0 + 1e-10) + tiny, static_cast<int>(i));
    }
    rep.items.push_back(c.done());
  }

  if (has_root) distance_checks(trace, rep, strong);

  const LineSearchParams ls{trace.alpha1, trace.alpha2, trace.beta, trace.mu, -1, 0};
  {
    Check c("step_size_floor");
    const double floor = step_size_floor(trace.mode, ls, trace.l1);
    for (std::size_t i = 0; i < trace.records.size(); ++i)
      c.le(floor - 1e-12, trace.records[i].eta, static_cast<int>(i));
    rep.items.push_back(c.done());
  }
  {
    Check c("eval_budget");
    if (!trace.records.empty()) {
      const double n = static_cast<double>(trace.records.size());
      const double cst = strong ? 7.5 : 5.0;
      const double bound = 3.0 * n + log_base(cst * trace.sigma0 * trace.l1 / trace.alpha2, trace.beta);
      c.le(static_cast<double>(trace.records.back().evals), bound, static_cast<int>(trace.records.size()) - 1);
    }
    rep.items.push_back(c.done());
  }
  {
    Check c("backtrack_lower_bound");
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
      const auto& r = trace.records[i];
      if (!r.backtracked) continue;
      if (!std::isfinite(r.loss)) {
        c.fail("backtracked iteration without a recorded loss");
        continue;
      }
      // eta sqrt(loss) > alpha2 beta, up to rounding in the recorded loss
      c.le(trace.alpha2 * trace.beta * (1.0 - 1e-9), r.eta * std::sqrt(r.loss), static_cast<int>(i));
    }
    rep.items.push_back(c.done());
  }
  {
    Check c("step_schedule");
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
      const auto& r = trace.records[i];
      const double sigma_expected = i == 0 ? trace.sigma0 : trace.records[i - 1].eta / trace.beta;
      if (std::abs(r.sigma - sigma_expected) > 1e-12 * sigma_expected) c.fail("trial step does not follow eta / beta");
      if (r.trials < 1 || r.backtracked != (r.trials > 1)) c.fail("trial count inconsistent with backtracking flag");
      const double eta_expected = r.sigma * std::pow(trace.beta, r.trials - 1);
      c.le(std::abs(r.eta - eta_expected), 1e-12 * eta_expected, static_cast<int>(i));
    }
    rep.items.push_back(c.done());
  }
  if (has_root) {
    Check c("cumulative_displacement");
    double sum = 0.0;
    for (const auto& r : trace.records) sum += r.step_norm * r.step_norm;
    const double d0 = *trace.initial_dist;
    c.le(sum, d0 * d0 / (1.0 - trace.alpha1 - trace.alpha2) * (1.0 + 1e-6), -1);
    rep.items.push_back(c.done());
  }
  if (!strong && problem.bilinear && trace.z_bar && !trace.records.empty()) {
    Check c("gap_bound");
    const GapSpec box = default_gap_box(problem, trace.z0);
    const double gap = evaluate_gap(problem, *trace.z_bar, box);
    const double bound = max_sq_distance(trace.z0, box) / (2.0 * trace.sum_eta);
    c.le(gap, bound * (1.0 + 1e-6), -1);
    rep.items.push_back(c.done());
  }
  counters(trace, rep);
  return rep;
}

}  // namespace qnpe
