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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "qnpe/problems.hpp"
#include "qnpe/solver.hpp"

namespace qnpe {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 2,
  kExitCertificateFailure = 3,
  kExitSolverError = 4,
};

/// Config parse or validation failure. The message names the offending field
/// or the line and column of a syntax error.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct SolverSpec {
  std::string kind = "qnpe";  // "qnpe" or "extragradient"
  std::string label;          // file-name stem, defaults to kind
  SolverConfig qnpe;
  /// Extragradient step; <= 0 selects 1 / (2 l1).
  double eg_step = 0.0;
  int eg_max_iterations = 1000;
  double eg_stop_tolerance = 1e-10;

  nlohmann::json to_json() const;
  static SolverSpec from_json(const nlohmann::json& j, const std::string& where);
};

struct ExperimentConfig {
  ProblemDescriptor problem;
  std::vector<SolverSpec> solvers;
  int repetitions = 1;
  /// Repetition r uses seed + r for the problem, the initial point and the
  /// learner.
  std::uint64_t seed = 0;
  /// Gaussian initial point scale, ignored when z0 is set.
  double init_scale = 1.0;
  std::optional<Vector> z0;

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);
};

struct RunOptions {
  std::optional<std::uint64_t> seed_override;
  int threads = 1;
  bool debug_certificates = false;
};

ProblemDescriptor descriptor_for_rep(const ExperimentConfig& config, int rep);
Vector initial_point(const ExperimentConfig& config, const Problem& problem, int rep);

/// Runs every (solver, repetition) pair and writes config.json,
/// problem_rep<r>.json, trace_<label>_rep<r>.{csv,jsonl}, runs.json,
/// summary.json and certificates.json into out_dir.
int cmd_run(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
            const RunOptions& options = {});

/// cmd_run plus comparison.csv and comparison.txt at targets 1e-2, 1e-4, 1e-6.
int cmd_compare(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
                const RunOptions& options = {});

/// Rebuilds each problem from its descriptor, reloads each trace and re-runs
/// the certificate checks.
int cmd_verify(const std::filesystem::path& run_dir);

struct TargetHit {
  double epsilon = 0.0;
  bool reached = false;
  int iterations = 0;
  std::int64_t evals = 0;
  std::int64_t matvecs = 0;
};

/// First iterate with |z_k - z*| <= eps |z0 - z*| (or |F(z_k)| <= eps |F(z0)|
/// without a known root). Counts include the evaluation at z_k.
TargetHit first_hit(const RunTrace& trace, double epsilon);

}  // namespace qnpe
