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

#include <string>
#include <vector>

#include "json.hpp"

#include "qnpe/problems.hpp"
#include "qnpe/solver.hpp"

namespace qnpe {

struct CertificateResult {
  std::string name;
  bool passed = true;
  /// Smallest relative slack (bound - value) / |bound| seen; negative on failure.
  double worst_margin = 0.0;
  int checked = 0;
  int worst_index = -1;
  std::string detail;
};

struct CertificateReport {
  std::vector<CertificateResult> items;

  bool all_passed() const;
  const CertificateResult* find(const std::string& name) const;
  nlohmann::json to_json() const;
};

/// Box [-r, r]^d with r = max(|z0|_inf, |z*|_inf) + 1, used for the gap check
/// on bilinear problems.
PrimalDualBox default_gap_box(const Problem& problem, const Vector& z0);

/// Re-checks every per-iteration and whole-run certificate from recorded data.
/// QNPE traces get: line_search_conditions, contraction or nonexpansion,
/// step_size_floor, eval_budget, backtrack_lower_bound, step_schedule,
/// cumulative_displacement,
/// counters, and gap_bound for monotone bilinear runs. Extragradient traces get
/// nonexpansion and counters.
CertificateReport verify_iteration_certificates(const RunTrace& trace, const Problem& problem);

}  // namespace qnpe
