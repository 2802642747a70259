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

#ifndef VAEIS_EXPERIMENT_HPP
#define VAEIS_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <vaeis/core.hpp>

/**
 * \file
 * \brief Config-driven experiment runner and its on-disk artifacts.
 *
 * A run directory holds results.json (config, one record per replication, summary),
 * samples.csv and histograms.csv (final sample of the first successful replication),
 * summary.csv and manifest.txt.
 */

namespace vaeis::experiment {

inline constexpr const char* kVersion = "0.1.0";

/// Invalid configuration; field() names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(field) {}
  [[nodiscard]] const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ExperimentConfig {
  /// ais-bimodal-d10, ais-copula-d20, ce-fourbranches-d100, ce-duffing-d200 or custom.
  std::string experiment = "ce-fourbranches-d100";
  /// vae, gm-J or single-gaussian.
  std::string family = "vae";
  std::size_t dim = 100;
  Eigen::Index samples = 10000;
  int iterations = 10;  ///< AIS draws
  int max_levels = 20;  ///< CE levels
  double rho = 0.25;
  double threshold = 3.5;  ///< four-branches failure level
  std::size_t latent_dim = 2;
  std::size_t pseudo_inputs = 75;
  std::size_t components = 1000;  ///< M, draws in the finite mixture
  std::vector<std::size_t> hidden{128, 128};
  int epochs = 30;
  int batch_size = 256;
  double learning_rate = 1e-3;
  double min_ess = 1.1;
  bool warm_start = false;
  double start_mean = 0.0;  ///< AIS start N(start_mean 1, start_std^2 I)
  double start_std = 1.0;
  std::string log_target;  ///< custom only, see expression.hpp
  bool keep_snapshots = false;
  int n_rep = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out = "out";

  [[nodiscard]] bool is_ce() const { return experiment.rfind("ce-", 0) == 0; }
};

/// Paper settings for `id`. Throws ConfigError("experiment", ...) for an unknown id.
ExperimentConfig defaults_for(const std::string& id);

/// Defaults of j["experiment"] overlaid with the other keys of j. Unknown keys and
/// wrong types throw ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);

/// Throws ConfigError naming the first bad field.
void validate(const ExperimentConfig& config);

struct Replication {
  int index = 0;
  bool ok = false;
  double seconds = 0.0;
  nlohmann::json record;
  Matrix points;   ///< final sample
  Vector weights;  ///< AIS: normalized weights. CE: indicator f/q / N.
  Vector scores;   ///< CE only
};

/// Runs replication `index` on stream make_stream(seed, index). Failures are caught
/// and recorded, never thrown.
Replication run_replication(const ExperimentConfig& config, int index);

/// Summary of a results.json document.
nlohmann::json summarize(const nlohmann::json& results);
/// Table-layout CSV of a summary.
std::string summary_csv(const nlohmann::json& summary);

/// 60 bins per marginal; reference_pdf is the target marginal (AIS), the input
/// marginal (CE) or empty (custom).
std::string histograms_csv(const ExperimentConfig& config, const Matrix& points);
std::string samples_csv(const ExperimentConfig& config, const Replication& rep);

struct RunOutcome {
  int succeeded = 0;
  int failed = 0;
  nlohmann::json summary;
};

/// Runs all replications (config.threads at a time) and writes the artifacts into
/// config.out. Progress goes to `log`.
RunOutcome run(const ExperimentConfig& config, std::ostream& log);

/// Recomputes the summary from dir/results.json, rewrites dir/summary.csv and
/// returns its text. Throws std::runtime_error when results are missing.
std::string report(const std::filesystem::path& dir);

}  // namespace vaeis::experiment

#endif
