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

// qnpe run <config> --out <dir>
// qnpe compare <config> --out <dir>
// qnpe verify <dir>

#include <cstdlib>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include "qnpe/experiment.hpp"

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("qnpe");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("QNPE_LOG")) spdlog::set_level(spdlog::level::from_str(lvl));

  CLI::App app{"Quasi-Newton proximal extragradient benchmarks"};
  app.require_subcommand(1);

  std::string config_path, out_dir, run_dir;
  std::uint64_t seed = 0;
  qnpe::RunOptions opts;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "Experiment config (JSON)")->required();
    sub->add_option("--out", out_dir, "Output directory")->required();
    sub->add_option("--seed", seed, "Override the config seed");
    sub->add_option("--threads", opts.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--debug-certificates", opts.debug_certificates, "Check certificates inside the solver loop");
  };
  CLI::App* run = app.add_subcommand("run", "Run every solver on every repetition");
  add_common(run);
  CLI::App* compare = app.add_subcommand("compare", "Run and tabulate iterations to target accuracy");
  add_common(compare);
  CLI::App* verify = app.add_subcommand("verify", "Re-check certificates from a run directory");
  verify->add_option("dir", run_dir, "Run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qnpe::kExitConfigError;
  }

  for (CLI::App* sub : {run, compare})
    if (sub->parsed() && sub->count("--seed") > 0) opts.seed_override = seed;

  if (run->parsed()) return qnpe::cmd_run(config_path, out_dir, opts);
  if (compare->parsed()) return qnpe::cmd_compare(config_path, out_dir, opts);
  return qnpe::cmd_verify(run_dir);
}
