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

#include "qnpe/trace_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

namespace qnpe {

const std::vector<std::string>& trace_csv_columns() {
  static const std::vector<std::string> cols = {
      "k",          "eta",     "theta",      "sigma",   "f_norm", "dist",  "dist_next", "step_norm", "backtracked",
      "trials",     "loss",    "residual_a", "bound_a", "residual_b", "bound_b", "evals", "matvecs"};
  return cols;
}

namespace {

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& s, int line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw InvalidArgument("trace csv: bad number '" + s + "' on line " + std::to_string(line));
  return v;
}

long long parse_int(const std::string& s, int line) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size())
    throw InvalidArgument("trace csv: bad integer '" + s + "' on line " + std::to_string(line));
  return v;
}

// JSON has no NaN; store it as null.
nlohmann::json num(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }
double from_num(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

void write_trace_csv(std::ostream& os, const RunTrace& trace) {
  os << kTraceCsvVersion << '\n';
  const auto& cols = trace_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& r : trace.records) {
    os << r.k << ',' << fmt(r.eta) << ',' << fmt(r.theta) << ',' << fmt(r.sigma) << ',' << fmt(r.f_norm) << ','
       << fmt(r.dist) << ',' << fmt(r.dist_next) << ',' << fmt(r.step_norm) << ',' << (r.backtracked ? 1 : 0) << ','
       << r.trials << ',' << fmt(r.loss) << ',' << fmt(r.residual_a) << ',' << fmt(r.bound_a) << ','
       << fmt(r.residual_b) << ',' << fmt(r.bound_b) << ',' << r.evals << ',' << r.matvecs << '\n';
  }
}

std::vector<IterationRecord> read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kTraceCsvVersion)
    throw InvalidArgument("trace csv: missing version line '" + std::string(kTraceCsvVersion) + "'");
  if (!std::getline(is, line)) throw InvalidArgument("trace csv: missing header");
  {
    std::string expected;
    const auto& cols = trace_csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) expected += (i ? "," : "") + cols[i];
    if (line != expected) throw InvalidArgument("trace csv: unexpected header");
  }
  std::vector<IterationRecord> out;
  int lineno = 2;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != trace_csv_columns().size())
      throw InvalidArgument("trace csv: wrong field count on line " + std::to_string(lineno));
    IterationRecord r;
    r.k = static_cast<int>(parse_int(f[0], lineno));
    r.eta = parse_double(f[1], lineno);
    r.theta = parse_double(f[2], lineno);
    r.sigma = parse_double(f[3], lineno);
    r.f_norm = parse_double(f[4], lineno);
    r.dist = parse_double(f[5], lineno);
    r.dist_next = parse_double(f[6], lineno);
    r.step_norm = parse_double(f[7], lineno);
    r.backtracked = parse_int(f[8], lineno) != 0;
    r.trials = static_cast<int>(parse_int(f[9], lineno));
    r.loss = parse_double(f[10], lineno);
    r.residual_a = parse_double(f[11], lineno);
    r.bound_a = parse_double(f[12], lineno);
    r.residual_b = parse_double(f[13], lineno);
    r.bound_b = parse_double(f[14], lineno);
    r.evals = parse_int(f[15], lineno);
    r.matvecs = parse_int(f[16], lineno);
    out.push_back(r);
  }
  return out;
}

void write_trace_jsonl(std::ostream& os, const RunTrace& trace) {
  for (const auto& r : trace.records) {
    nlohmann::json j;
    j["k"] = r.k;
    j["eta"] = num(r.eta);
    j["theta"] = num(r.theta);
    j["sigma"] = num(r.sigma);
    j["f_norm"] = num(r.f_norm);
    j["dist"] = num(r.dist);
    j["dist_next"] = num(r.dist_next);
    j["step_norm"] = num(r.step_norm);
    j["backtracked"] = r.backtracked;
    j["trials"] = r.trials;
    j["loss"] = num(r.loss);
    j["residual_a"] = num(r.residual_a);
    j["bound_a"] = num(r.bound_a);
    j["residual_b"] = num(r.residual_b);
    j["bound_b"] = num(r.bound_b);
    j["evals"] = r.evals;
    j["matvecs"] = r.matvecs;
    os << j.dump() << '\n';
  }
}

nlohmann::json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

nlohmann::json trace_meta_json(const RunTrace& t) {
  nlohmann::json j;
  j["solver"] = t.solver;
  j["mode"] = mode_name(t.mode);
  j["dim"] = t.dim;
  j["mu"] = t.mu;
  j["l1"] = t.l1;
  j["alpha1"] = t.alpha1;
  j["alpha2"] = t.alpha2;
  j["beta"] = t.beta;
  j["sigma0"] = t.sigma0;
  j["iterations"] = t.iterations();
  j["converged"] = t.converged;
  j["stop_reason"] = t.stop_reason;
  j["operator_evals"] = t.operator_evals;
  j["matvecs"] = t.matvecs;
  j["final_f_norm"] = num(t.final_f_norm);
  j["initial_dist"] = t.initial_dist ? num(*t.initial_dist) : nlohmann::json(nullptr);
  j["final_dist"] = t.final_dist ? num(*t.final_dist) : nlohmann::json(nullptr);
  j["sum_eta"] = t.sum_eta;
  j["z0"] = vector_json(t.z0);
  j["z_final"] = vector_json(t.z_final);
  j["z_bar"] = t.z_bar ? vector_json(*t.z_bar) : nlohmann::json(nullptr);
  return j;
}

RunTrace trace_from_meta(const nlohmann::json& j, std::vector<IterationRecord> records) {
  RunTrace t;
  try {
    t.solver = j.at("solver").get<std::string>();
    t.mode = mode_from_name(j.at("mode").get<std::string>());
    t.dim = j.at("dim").get<int>();
    t.mu = j.at("mu").get<double>();
    t.l1 = j.at("l1").get<double>();
    t.alpha1 = j.at("alpha1").get<double>();
    t.alpha2 = j.at("alpha2").get<double>();
    t.beta = j.at("beta").get<double>();
    t.sigma0 = j.at("sigma0").get<double>();
    t.converged = j.at("converged").get<bool>();
    t.stop_reason = j.at("stop_reason").get<std::string>();
    t.operator_evals = j.at("operator_evals").get<std::int64_t>();
    t.matvecs = j.at("matvecs").get<std::int64_t>();
    t.final_f_norm = from_num(j.at("final_f_norm"));
    if (!j.at("initial_dist").is_null()) t.initial_dist = j.at("initial_dist").get<double>();
    if (!j.at("final_dist").is_null()) t.final_dist = j.at("final_dist").get<double>();
    t.sum_eta = j.at("sum_eta").get<double>();
    t.z0 = vector_from_json(j.at("z0"));
    t.z_final = vector_from_json(j.at("z_final"));
    if (!j.at("z_bar").is_null()) t.z_bar = vector_from_json(j.at("z_bar"));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("trace metadata: ") + e.what());
  }
  if (records.size() != static_cast<std::size_t>(j.value("iterations", -1)))
    throw InvalidArgument("trace metadata: iteration count does not match the trace");
  t.records = std::move(records);
  return t;
}

}  // namespace qnpe
