// Copyright 2026 The vaeis Authors.
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

// vaeis run|report: experiment runner front end.
//
// Exit codes: 0 success, 1 other error, 2 configuration error, 3 every replication
// failed.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <vaeis/experiment.hpp>

namespace {

constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitAllFailed = 3;

struct RunArgs {
  std::string config_path;
  std::optional<std::string> experiment;
  std::optional<std::uint64_t> seed;
  std::optional<int> n_rep;
  std::optional<int> threads;
  std::optional<std::string> out;
  std::vector<std::string> overrides;
};

nlohmann::json load_config(const RunArgs& args) {
  nlohmann::json j = nlohmann::json::object();
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in) throw vaeis::experiment::ConfigError("--config", "cannot open " + args.config_path);
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw vaeis::experiment::ConfigError("--config", std::string("invalid JSON: ") + e.what());
    }
  }
  for (const std::string& kv : args.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw vaeis::experiment::ConfigError("--set", "expected key=value");
    const std::string value = kv.substr(eq + 1);
    // Numbers, booleans and arrays parse as JSON; anything else is a string.
    j[kv.substr(0, eq)] = nlohmann::json::accept(value) ? nlohmann::json::parse(value) : nlohmann::json(value);
  }
  if (args.experiment) {
    // A new experiment id restarts from that experiment's defaults.
    j["experiment"] = *args.experiment;
  }
  if (args.seed) j["seed"] = *args.seed;
  if (args.n_rep) j["n_rep"] = *args.n_rep;
  if (args.threads) j["threads"] = *args.threads;
  if (args.out) j["out"] = *args.out;
  return j;
}

int do_run(const RunArgs& args) {
  vaeis::experiment::ExperimentConfig config;
  try {
    config = vaeis::experiment::config_from_json(load_config(args));
    vaeis::experiment::validate(config);
  } catch (const vaeis::experiment::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  const auto outcome = vaeis::experiment::run(config, std::cerr);
  std::cout << vaeis::experiment::summary_csv(outcome.summary);
  if (outcome.succeeded == 0) {
    std::cerr << "all " << outcome.failed << " replications failed\n";
    return kExitAllFailed;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive importance sampling with VAE proposals"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "Run an experiment and write its artifacts");
  run->add_option("--config", run_args.config_path, "JSON config file")->check(CLI::ExistingFile);
  run->add_option("--experiment", run_args.experiment,
                  "ais-bimodal-d10 | ais-copula-d20 | ce-fourbranches-d100 | ce-duffing-d200 | custom");
  run->add_option("--seed", run_args.seed, "Master seed");
  run->add_option("--n-rep", run_args.n_rep, "Number of replications");
  run->add_option("--threads", run_args.threads, "Replications run concurrently");
  run->add_option("--out", run_args.out, "Output directory");
  run->add_option("--set", run_args.overrides, "Override any config field, key=value")->take_all();

  std::string in_dir;
  CLI::App* report = app.add_subcommand("report", "Summarize a run directory");
  report->add_option("--in", in_dir, "Run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return do_run(run_args);
    std::cout << vaeis::experiment::report(in_dir);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
}
