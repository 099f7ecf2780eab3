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

#include "qnpe/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "qnpe/certificates.hpp"
#include "qnpe/trace_io.hpp"

namespace qnpe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; });
    if (!ok) throw ConfigError(where + "." + it.key() + ": unknown field");
  }
}

template <typename T>
T get_or(const json& j, const char* key, const std::string& where, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  os << text;
  if (!os) throw Error("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

json parse_with_location(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    int line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(what + ": syntax error at line " + std::to_string(line) + ", column " + std::to_string(col));
  }
}

}  // namespace

nlohmann::json SolverSpec::to_json() const {
  json j;
  j["solver"] = kind;
  j["label"] = label;
  if (kind == "qnpe") {
    j["mode"] = mode_name(qnpe.mode);
    j["alpha1"] = qnpe.ls.alpha1;
    j["alpha2"] = qnpe.ls.alpha2;
    j["beta"] = qnpe.ls.beta;
    j["sigma0"] = qnpe.sigma0;
    j["failure_budget"] = qnpe.failure_budget;
    j["max_iterations"] = qnpe.max_iterations;
    j["stop_tolerance"] = qnpe.stop_tolerance;
    j["reorthogonalize"] = qnpe.reorthogonalize;
    j["learner_rho"] = qnpe.learner_rho ? json(*qnpe.learner_rho) : json(nullptr);
    j["learner_radius"] = qnpe.learner_radius ? json(*qnpe.learner_radius) : json(nullptr);
  } else {
    j["step"] = eg_step;
    j["max_iterations"] = eg_max_iterations;
    j["stop_tolerance"] = eg_stop_tolerance;
  }
  return j;
}

SolverSpec SolverSpec::from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": must be an object");
  SolverSpec s;
  if (!j.contains("solver")) throw ConfigError(where + ".solver: missing field");
  s.kind = get_or<std::string>(j, "solver", where, "");
  s.label = get_or<std::string>(j, "label", where, s.kind);
  if (s.label.empty() || s.label.find_first_of("/\\ .") != std::string::npos)
    throw ConfigError(where + ".label: must be a non-empty file-name stem");
  if (s.kind == "qnpe") {
    check_keys(j, where,
               {"solver", "label", "mode", "alpha1", "alpha2", "beta", "sigma0", "failure_budget", "max_iterations",
                "stop_tolerance", "reorthogonalize", "learner_rho", "learner_radius"});
    const std::string mode = get_or<std::string>(j, "mode", where, "strongly_monotone");
    try {
      s.qnpe.mode = mode_from_name(mode);
    } catch (const Error&) {
      throw ConfigError(where + ".mode: unknown mode '" + mode + "'");
    }
    s.qnpe.ls.alpha1 = get_or<double>(j, "alpha1", where, s.qnpe.ls.alpha1);
    s.qnpe.ls.alpha2 = get_or<double>(j, "alpha2", where, s.qnpe.ls.alpha2);
    s.qnpe.ls.beta = get_or<double>(j, "beta", where, s.qnpe.ls.beta);
    s.qnpe.sigma0 = get_or<double>(j, "sigma0", where, s.qnpe.sigma0);
    s.qnpe.failure_budget = get_or<double>(j, "failure_budget", where, s.qnpe.failure_budget);
    s.qnpe.max_iterations = get_or<int>(j, "max_iterations", where, s.qnpe.max_iterations);
    s.qnpe.stop_tolerance = get_or<double>(j, "stop_tolerance", where, s.qnpe.stop_tolerance);
    s.qnpe.reorthogonalize = get_or<bool>(j, "reorthogonalize", where, true);
    if (j.contains("learner_rho") && !j.at("learner_rho").is_null())
      s.qnpe.learner_rho = get_or<double>(j, "learner_rho", where, 0.0);
    if (j.contains("learner_radius") && !j.at("learner_radius").is_null())
      s.qnpe.learner_radius = get_or<double>(j, "learner_radius", where, 0.0);
    try {
      LineSearchParams ls = s.qnpe.ls;
      ls.mu = 0.0;
      ls.validate();
    } catch (const Error& e) {
      throw ConfigError(where + ": " + e.what());
    }
    if (!(s.qnpe.failure_budget > 0 && s.qnpe.failure_budget < 1))
      throw ConfigError(where + ".failure_budget: must lie in (0, 1)");
    if (s.qnpe.max_iterations < 0) throw ConfigError(where + ".max_iterations: must be nonnegative");
    if (!(s.qnpe.stop_tolerance >= 0)) throw ConfigError(where + ".stop_tolerance: must be nonnegative");
    if (s.qnpe.learner_rho && !(*s.qnpe.learner_rho > 0)) throw ConfigError(where + ".learner_rho: must be positive");
    if (s.qnpe.learner_radius && !(*s.qnpe.learner_radius > 0))
      throw ConfigError(where + ".learner_radius: must be positive");
  } else if (s.kind == "extragradient") {
    check_keys(j, where, {"solver", "label", "step", "max_iterations", "stop_tolerance"});
    s.eg_step = get_or<double>(j, "step", where, 0.0);
    s.eg_max_iterations = get_or<int>(j, "max_iterations", where, s.eg_max_iterations);
    s.eg_stop_tolerance = get_or<double>(j, "stop_tolerance", where, s.eg_stop_tolerance);
    if (s.eg_max_iterations < 0) throw ConfigError(where + ".max_iterations: must be nonnegative");
    if (!(s.eg_stop_tolerance >= 0)) throw ConfigError(where + ".stop_tolerance: must be nonnegative");
  } else {
    throw ConfigError(where + ".solver: unknown solver '" + s.kind + "'");
  }
  return s;
}

nlohmann::json ExperimentConfig::to_json() const {
  json j;
  j["problem"] = problem.to_json();
  j["solvers"] = json::array();
  for (const auto& s : solvers) j["solvers"].push_back(s.to_json());
  j["repetitions"] = repetitions;
  j["seed"] = seed;
  j["init_scale"] = init_scale;
  j["z0"] = z0 ? vector_json(*z0) : json(nullptr);
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  check_keys(j, "config", {"problem", "solvers", "repetitions", "seed", "init_scale", "z0"});
  ExperimentConfig c;
  if (!j.contains("problem")) throw ConfigError("config.problem: missing field");
  try {
    c.problem = ProblemDescriptor::from_json(j.at("problem"));
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("config.") + e.what());
  }
  if (!j.contains("solvers") || !j.at("solvers").is_array() || j.at("solvers").empty())
    throw ConfigError("config.solvers: must be a non-empty array");
  std::set<std::string> labels;
  for (std::size_t i = 0; i < j.at("solvers").size(); ++i) {
    SolverSpec s = SolverSpec::from_json(j.at("solvers")[i], "config.solvers[" + std::to_string(i) + "]");
    if (!labels.insert(s.label).second)
      throw ConfigError("config.solvers[" + std::to_string(i) + "].label: duplicate label '" + s.label + "'");
    c.solvers.push_back(std::move(s));
  }
  c.repetitions = get_or<int>(j, "repetitions", "config", 1);
  if (c.repetitions < 1) throw ConfigError("config.repetitions: must be at least 1");
  c.seed = get_or<std::uint64_t>(j, "seed", "config", c.problem.seed);
  c.init_scale = get_or<double>(j, "init_scale", "config", 1.0);
  if (!(c.init_scale >= 0) || !std::isfinite(c.init_scale)) throw ConfigError("config.init_scale: must be >= 0");
  if (j.contains("z0") && !j.at("z0").is_null()) {
    try {
      c.z0 = vector_from_json(j.at("z0"));
    } catch (const json::exception&) {
      throw ConfigError("config.z0: must be an array of numbers");
    }
    if (c.z0->size() != c.problem.dim)
      throw ConfigError("config.z0: length " + std::to_string(c.z0->size()) + " does not match dimension " +
                        std::to_string(c.problem.dim));
  }
  return c;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  return from_json(parse_with_location(text, "config"));
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) { return parse(read_text(path)); }

ProblemDescriptor descriptor_for_rep(const ExperimentConfig& config, int rep) {
  ProblemDescriptor d = config.problem;
  d.seed = config.seed + static_cast<std::uint64_t>(rep);
  return d;
}

Vector initial_point(const ExperimentConfig& config, const Problem& problem, int rep) {
  if (config.z0) return *config.z0;
  Rng rng(config.seed + static_cast<std::uint64_t>(rep) + 0x9e3779b97f4a7c15ULL);
  return config.init_scale * random_normal_vector(problem.dim, rng);
}

TargetHit first_hit(const RunTrace& trace, double epsilon) {
  TargetHit h;
  h.epsilon = epsilon;
  if (trace.initial_dist) {
    const double target = epsilon * *trace.initial_dist;
    if (*trace.initial_dist <= target) {
      h.reached = true;
      h.evals = 1;
      return h;
    }
    for (std::size_t k = 0; k < trace.records.size(); ++k) {
      const auto& r = trace.records[k];
      if (r.dist_next <= target) {
        h.reached = true;
        h.iterations = static_cast<int>(k) + 1;
        h.evals = r.evals + 1;
        h.matvecs = r.matvecs;
        return h;
      }
    }
    return h;
  }
  if (trace.records.empty()) return h;
  const double target = epsilon * trace.records.front().f_norm;
  for (std::size_t k = 0; k <= trace.records.size(); ++k) {
    const double f = k < trace.records.size() ? trace.records[k].f_norm : trace.final_f_norm;
    if (f <= target) {
      h.reached = true;
      h.iterations = static_cast<int>(k);
      h.evals = k == 0 ? 1 : trace.records[k - 1].evals + 1;
      h.matvecs = k == 0 ? 0 : trace.records[k - 1].matvecs;
      return h;
    }
  }
  return h;
}

namespace {

struct Task {
  int rep = 0;
  std::size_t solver = 0;
};

struct TaskResult {
  enum class Status { kOk, kCertificateFailure, kSolverError } status = Status::kOk;
  std::string error;
  RunTrace trace;
  CertificateReport report;
  bool have_trace = false;
};

const char* status_name(TaskResult::Status s) {
  switch (s) {
    case TaskResult::Status::kOk:
      return "ok";
    case TaskResult::Status::kCertificateFailure:
      return "certificate_failure";
    case TaskResult::Status::kSolverError:
      return "solver_error";
  }
  return "unknown";
}

std::string trace_stem(const SolverSpec& s, int rep) { return "trace_" + s.label + "_rep" + std::to_string(rep); }

TaskResult run_task(const SolverSpec& spec, const Problem& problem, const Vector& z0, std::uint64_t seed,
                    const RunOptions& options) {
  TaskResult out;
  try {
    SolveResult res;
    if (spec.kind == "qnpe") {
      SolverConfig cfg = spec.qnpe;
      cfg.rng_seed = seed;
      cfg.debug_certificates = cfg.debug_certificates || options.debug_certificates;
      res = solve(problem, z0, cfg);
    } else {
      const double step = spec.eg_step > 0 ? spec.eg_step : 0.5 / problem.l1;
      res = extragradient_baseline(problem, z0, step, spec.eg_max_iterations, spec.eg_stop_tolerance);
    }
    out.trace = std::move(res.trace);
    out.have_trace = true;
  } catch (const SolverError& e) {
    out.trace = e.trace();
    out.have_trace = true;
    out.error = e.what();
    out.status = e.certificate_failure() ? TaskResult::Status::kCertificateFailure : TaskResult::Status::kSolverError;
    spdlog::error("{}: {}", spec.label, e.what());
  } catch (const Error& e) {
    out.error = e.what();
    out.status = TaskResult::Status::kSolverError;
    spdlog::error("{}: {}", spec.label, e.what());
  }
  if (out.have_trace && out.status != TaskResult::Status::kSolverError) {
    out.report = verify_iteration_certificates(out.trace, problem);
    if (!out.report.all_passed()) out.status = TaskResult::Status::kCertificateFailure;
  }
  return out;
}

struct Experiment {
  ExperimentConfig config;
  std::vector<Task> tasks;
  std::vector<TaskResult> results;
  int exit_code = kExitOk;
};

// Loads, validates and runs everything; writes the run directory.
Experiment execute(const fs::path& config_path, const fs::path& out_dir, const RunOptions& options) {
  Experiment ex;
  ex.config = ExperimentConfig::load(config_path);
  if (options.seed_override) ex.config.seed = *options.seed_override;
  const ExperimentConfig& cfg = ex.config;

  std::vector<ProblemDescriptor> descs;
  std::vector<Problem> problems;
  std::vector<Vector> starts;
  for (int r = 0; r < cfg.repetitions; ++r) {
    descs.push_back(descriptor_for_rep(cfg, r));
    try {
      problems.push_back(make_problem(descs.back()));
    } catch (const Error& e) {
      throw ConfigError(std::string("config.problem: ") + e.what());
    }
    starts.push_back(initial_point(cfg, problems.back(), r));
  }
  const Problem& p0 = problems.front();
  for (std::size_t i = 0; i < cfg.solvers.size(); ++i) {
    const SolverSpec& s = cfg.solvers[i];
    const std::string where = "config.solvers[" + std::to_string(i) + "]";
    if (s.kind == "qnpe" && s.qnpe.mode == SolveMode::kStronglyMonotone && !(p0.mu > 0))
      throw ConfigError(where + ".mode: strongly_monotone requires mu > 0 but the problem has mu = " +
                        format_double(p0.mu));
    if (s.kind == "extragradient" && s.eg_step > 1.0 / p0.l1)
      throw ConfigError(where + ".step: must not exceed 1 / l1 = " + format_double(1.0 / p0.l1));
  }

  fs::create_directories(out_dir);
  write_text(out_dir / "config.json", cfg.to_json().dump(2) + "\n");
  for (int r = 0; r < cfg.repetitions; ++r)
    write_text(out_dir / ("problem_rep" + std::to_string(r) + ".json"), descs[r].to_json().dump(2) + "\n");

  for (int r = 0; r < cfg.repetitions; ++r)
    for (std::size_t i = 0; i < cfg.solvers.size(); ++i) ex.tasks.push_back({r, i});
  ex.results.resize(ex.tasks.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t t = next++; t < ex.tasks.size(); t = next++) {
      const Task& task = ex.tasks[t];
      const SolverSpec& spec = cfg.solvers[task.solver];
      spdlog::debug("running {} rep {}", spec.label, task.rep);
      TaskResult res = run_task(spec, problems[task.rep], starts[task.rep],
                                cfg.seed + static_cast<std::uint64_t>(task.rep), options);
      if (res.have_trace) {
        const std::string stem = trace_stem(spec, task.rep);
        std::ostringstream csv, jsonl;
        write_trace_csv(csv, res.trace);
        write_trace_jsonl(jsonl, res.trace);
        write_text(out_dir / (stem + ".csv"), csv.str());
        write_text(out_dir / (stem + ".jsonl"), jsonl.str());
      }
      ex.results[t] = std::move(res);
    }
  };
  const int n_threads = std::max(1, std::min<int>(options.threads, static_cast<int>(ex.tasks.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  json runs = json::array();
  json summary = json::array();
  json certs = json::array();
  bool any_solver_error = false, any_cert_failure = false;
  for (std::size_t t = 0; t < ex.tasks.size(); ++t) {
    const Task& task = ex.tasks[t];
    const SolverSpec& spec = cfg.solvers[task.solver];
    const TaskResult& res = ex.results[t];
    any_solver_error |= res.status == TaskResult::Status::kSolverError;
    any_cert_failure |= res.status == TaskResult::Status::kCertificateFailure;

    json run;
    run["label"] = spec.label;
    run["solver"] = spec.kind;
    run["rep"] = task.rep;
    run["problem"] = "problem_rep" + std::to_string(task.rep) + ".json";
    run["status"] = status_name(res.status);
    run["error"] = res.error;
    run["trace"] = res.have_trace ? json(trace_stem(spec, task.rep) + ".csv") : json(nullptr);
    run["meta"] = res.have_trace ? trace_meta_json(res.trace) : json(nullptr);
    runs.push_back(run);

    json s;
    s["label"] = spec.label;
    s["rep"] = task.rep;
    s["status"] = status_name(res.status);
    if (res.have_trace) {
      const RunTrace& tr = res.trace;
      s["iterations"] = tr.iterations();
      s["converged"] = tr.converged;
      s["stop_reason"] = tr.stop_reason;
      s["final_f_norm"] = tr.final_f_norm;
      s["final_dist"] = tr.final_dist ? json(*tr.final_dist) : json(nullptr);
      s["operator_evals"] = tr.operator_evals;
      s["matvecs"] = tr.matvecs;
      s["wall_seconds"] = tr.wall_seconds;
    }
    summary.push_back(s);

    json c;
    c["label"] = spec.label;
    c["rep"] = task.rep;
    c["status"] = status_name(res.status);
    c["report"] = res.report.to_json();
    certs.push_back(c);
  }
  write_text(out_dir / "runs.json", json{{"format", "qnpe-runs-v1"}, {"runs", runs}}.dump(2) + "\n");
  write_text(out_dir / "summary.json", json{{"runs", summary}}.dump(2) + "\n");
  write_text(out_dir / "certificates.json",
             json{{"all_passed", !any_cert_failure && !any_solver_error}, {"runs", certs}}.dump(2) + "\n");

  ex.exit_code = any_solver_error ? kExitSolverError : any_cert_failure ? kExitCertificateFailure : kExitOk;
  return ex;
}

void write_comparison(const Experiment& ex, const fs::path& out_dir) {
  const std::vector<double> targets = {1e-2, 1e-4, 1e-6};
  std::ostringstream csv, txt;
  csv << "label,solver,rep,metric,epsilon,reached,iterations,evals,matvecs\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %4s %-9s %8s %10s %10s %12s\n", "solver", "rep", "metric", "epsilon",
                "iterations", "evals", "matvecs");
  txt << line;
  for (std::size_t t = 0; t < ex.tasks.size(); ++t) {
    const auto& task = ex.tasks[t];
    const auto& spec = ex.config.solvers[task.solver];
    const auto& res = ex.results[t];
    if (!res.have_trace) continue;
    const char* metric = res.trace.initial_dist ? "distance" : "residual";
    for (double eps : targets) {
      const TargetHit h = first_hit(res.trace, eps);
      csv << spec.label << ',' << spec.kind << ',' << task.rep << ',' << metric << ',' << format_double(eps) << ','
          << (h.reached ? 1 : 0) << ',';
      if (h.reached)
        csv << h.iterations << ',' << h.evals << ',' << h.matvecs << '\n';
      else
        csv << ",,\n";
      if (h.reached)
        std::snprintf(line, sizeof line, "%-16s %4d %-9s %8.0e %10d %10lld %12lld\n", spec.label.c_str(), task.rep,
                      metric, eps, h.iterations, static_cast<long long>(h.evals), static_cast<long long>(h.matvecs));
      else
        std::snprintf(line, sizeof line, "%-16s %4d %-9s %8.0e %10s %10s %12s\n", spec.label.c_str(), task.rep,
                      metric, eps, "-", "-", "-");
      txt << line;
    }
  }
  write_text(out_dir / "comparison.csv", csv.str());
  write_text(out_dir / "comparison.txt", txt.str());
}

}  // namespace

int cmd_run(const fs::path& config_path, const fs::path& out_dir, const RunOptions& options) {
  try {
    return execute(config_path, out_dir, options).exit_code;
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfigError;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolverError;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfigError;
  }
}

int cmd_compare(const fs::path& config_path, const fs::path& out_dir, const RunOptions& options) {
  try {
    {
      const ExperimentConfig cfg = ExperimentConfig::load(config_path);
      if (cfg.solvers.size() < 2) throw ConfigError("config.solvers: compare needs at least 2 solvers");
    }
    const Experiment ex = execute(config_path, out_dir, options);
    write_comparison(ex, out_dir);
    return ex.exit_code;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfigError;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolverError;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfigError;
  }
}

int cmd_verify(const fs::path& run_dir) {
  try {
    if (!fs::is_directory(run_dir)) throw ConfigError("verify: " + run_dir.string() + " is not a directory");
    const fs::path runs_path = run_dir / "runs.json";
    if (!fs::exists(runs_path)) throw ConfigError("verify: no runs.json in " + run_dir.string());
    const json runs = parse_with_location(read_text(runs_path), "runs.json");
    if (!runs.contains("runs") || !runs.at("runs").is_array() || runs.at("runs").empty())
      throw ConfigError("verify: runs.json lists no runs");

    bool all_ok = true;
    int checked = 0;
    for (const auto& run : runs.at("runs")) {
      if (!run.contains("trace") || run.at("trace").is_null()) continue;
      const std::string label = run.value("label", "?");
      const fs::path trace_path = run_dir / run.at("trace").get<std::string>();
      const fs::path problem_path = run_dir / run.at("problem").get<std::string>();
      ProblemDescriptor desc;
      try {
        desc = ProblemDescriptor::from_json(parse_with_location(read_text(problem_path), problem_path.string()));
      } catch (const InvalidArgument& e) {
        throw ConfigError(problem_path.string() + ": " + e.what());
      }
      const Problem problem = make_problem(desc);
      std::ifstream is(trace_path, std::ios::binary);
      if (!is) throw ConfigError("verify: missing trace " + trace_path.string());
      std::vector<IterationRecord> records;
      try {
        records = read_trace_csv(is);
      } catch (const InvalidArgument& e) {
        throw ConfigError(trace_path.string() + ": " + e.what());
      }
      RunTrace trace;
      try {
        trace = trace_from_meta(run.at("meta"), std::move(records));
      } catch (const std::exception& e) {
        throw ConfigError(trace_path.string() + ": " + e.what());
      }
      if (trace.dim != problem.dim || trace.z0.size() != problem.dim)
        throw ConfigError(trace_path.string() + ": dimension does not match its problem descriptor");
      const CertificateReport rep = verify_iteration_certificates(trace, problem);
      ++checked;
      for (const auto& c : rep.items) {
        if (!c.passed) {
          all_ok = false;
          std::fprintf(stderr, "FAIL %s rep %d: %s (index %d%s%s)\n", label.c_str(), run.value("rep", -1),
                       c.name.c_str(), c.worst_index, c.detail.empty() ? "" : ", ", c.detail.c_str());
        }
      }
    }
    if (checked == 0) throw ConfigError("verify: no traces to check");
    std::printf("%d traces checked, %s\n", checked, all_ok ? "all certificates pass" : "certificate failures");
    return all_ok ? kExitOk : kExitCertificateFailure;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfigError;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error: corrupt run directory: %s\n", e.what());
    return kExitConfigError;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfigError;
  }
}

}  // namespace qnpe
