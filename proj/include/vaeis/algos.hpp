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

#ifndef VAEIS_ALGOS_HPP
#define VAEIS_ALGOS_HPP

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <vaeis/core.hpp>
#include <vaeis/dists.hpp>
#include <vaeis/proposal.hpp>
#include <vaeis/vae.hpp>

/**
 * \file
 * \brief Importance-sampling estimators and the two adaptive drivers.
 *
 * ais_run draws from the current proposal, weights by the unnormalized target and
 * refits, returning only the last weighted sample. ce_run is multi-level
 * cross-entropy: each level fits the proposal to the points above an intermediate
 * threshold, set by a quantile of the scores, until the threshold reaches the failure
 * level.
 */

namespace vaeis::algos {

struct IsEstimate {
  double p = 0.0;
  double se = 0.0;
};

/// p = (1/N) sum indicator_n exp(log_f_n - log_q_n); se = sample std of the summands / sqrt(N).
IsEstimate is_estimate(const Vector& log_f, const Vector& log_q, const Vector& indicator);

/// Linear-interpolation empirical quantile (sorted x_(1..n), position q (n-1)).
double quantile(std::span<const double> values, double q);

/// 1 / sum w^2 for weights summing to one.
double ess(std::span<const double> normalized_weights);

/// exp(log_w - logsumexp(log_w)); -inf entries become 0.
Vector normalize_log_weights(const Vector& log_weights);

/// Fitted proposal: exact density and sampler.
class Proposal {
 public:
  virtual ~Proposal() = default;
  [[nodiscard]] virtual Eigen::Index dim() const = 0;
  [[nodiscard]] virtual Matrix sample(Eigen::Index n, Rng& rng) const = 0;
  [[nodiscard]] virtual Vector logpdf(const Matrix& points) const = 0;
  [[nodiscard]] virtual nlohmann::json to_json() const = 0;
};

class DiagGaussianProposal final : public Proposal {
 public:
  explicit DiagGaussianProposal(dists::DiagGaussian g);
  [[nodiscard]] Eigen::Index dim() const override { return g_.dim(); }
  [[nodiscard]] Matrix sample(Eigen::Index n, Rng& rng) const override;
  [[nodiscard]] Vector logpdf(const Matrix& points) const override;
  [[nodiscard]] nlohmann::json to_json() const override;

 private:
  dists::DiagGaussian g_;
};

class MixtureProposal final : public Proposal {
 public:
  explicit MixtureProposal(dists::GaussianMixture mixture) : mixture_(std::move(mixture)) {}
  [[nodiscard]] Eigen::Index dim() const override { return mixture_.dim(); }
  [[nodiscard]] Matrix sample(Eigen::Index n, Rng& rng) const override { return mixture_.sample(n, rng); }
  [[nodiscard]] Vector logpdf(const Matrix& points) const override { return mixture_.logpdf(points); }
  [[nodiscard]] nlohmann::json to_json() const override;
  [[nodiscard]] const dists::GaussianMixture& mixture() const { return mixture_; }

 private:
  dists::GaussianMixture mixture_;
};

class VaeProposal final : public Proposal {
 public:
  VaeProposal(vae::VaeModel model, vae::FiniteMixtureProposal mixture)
      : model_(std::move(model)), mixture_(std::move(mixture)) {}
  [[nodiscard]] Eigen::Index dim() const override { return mixture_.dim(); }
  [[nodiscard]] Matrix sample(Eigen::Index n, Rng& rng) const override { return mixture_.sample(n, rng); }
  [[nodiscard]] Vector logpdf(const Matrix& points) const override { return mixture_.logpdf(points); }
  /// The finite mixture only; the model is available through model().
  [[nodiscard]] nlohmann::json to_json() const override;
  [[nodiscard]] const vae::VaeModel& model() const { return model_; }
  [[nodiscard]] const vae::FiniteMixtureProposal& mixture() const { return mixture_; }

 private:
  vae::VaeModel model_;
  vae::FiniteMixtureProposal mixture_;
};

/// A parametric family refit to weighted samples.
class ProposalFamily {
 public:
  virtual ~ProposalFamily() = default;
  [[nodiscard]] virtual std::string name() const = 0;
  /// `log_weights` are unnormalized; -inf means weight zero. `info` receives
  /// family-specific fit diagnostics.
  virtual std::unique_ptr<Proposal> fit(const Matrix& points, const Vector& log_weights, Rng& rng,
                                        nlohmann::json* info) = 0;
};

class VaeFamily final : public ProposalFamily {
 public:
  VaeFamily(vae::TrainConfig config, std::size_t components, bool warm_start = false)
      : config_(std::move(config)), components_(components), warm_start_(warm_start) {}
  [[nodiscard]] std::string name() const override { return "vae"; }
  std::unique_ptr<Proposal> fit(const Matrix& points, const Vector& log_weights, Rng& rng,
                                nlohmann::json* info) override;

 private:
  vae::TrainConfig config_;
  std::size_t components_;
  bool warm_start_;
  std::optional<vae::VaeModel> previous_;
};

/// Full-covariance Gaussian mixture by weighted EM; one component gives the
/// single-Gaussian family.
class GaussianMixtureFamily final : public ProposalFamily {
 public:
  explicit GaussianMixtureFamily(int components, dists::EmOptions options = {})
      : components_(components), options_(options) {}
  [[nodiscard]] std::string name() const override;
  std::unique_ptr<Proposal> fit(const Matrix& points, const Vector& log_weights, Rng& rng,
                                nlohmann::json* info) override;

 private:
  int components_;
  dists::EmOptions options_;
};

struct AisIteration {
  int iteration = 0;
  double ess = 0.0;
  double max_log_weight = 0.0;
  nlohmann::json fit;       ///< fit diagnostics of the proposal built from this sample
  nlohmann::json snapshot;  ///< proposal used for this sample, when requested
};

struct AisOptions {
  int iterations = 10;
  Eigen::Index samples = 10000;
  /// Abort when the ESS of an iteration falls below this.
  double min_ess = 1.1;
  bool keep_snapshots = false;
  /// Called after each completed iteration, including its fit.
  std::function<void(const AisIteration&)> on_iteration{};
};

struct AisResult {
  Matrix points;
  Vector weights;  ///< normalized, sum one
  std::vector<AisIteration> trace;
};

class AisFailure : public std::runtime_error {
 public:
  AisFailure(const std::string& what, std::vector<AisIteration> trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  [[nodiscard]] const std::vector<AisIteration>& trace() const { return trace_; }

 private:
  std::vector<AisIteration> trace_;
};

/**
 * `iterations` draws of `samples` points, with a refit between consecutive draws.
 * Throws AisFailure when an iteration's ESS is below `min_ess` or a fit fails.
 */
AisResult ais_run(const dists::UnnormalizedDensity& target, ProposalFamily& family, const Proposal& start,
                  const AisOptions& options, Rng& rng);

/// Failure iff score(x) >= threshold; inputs distributed according to `input`.
struct PerformanceProblem {
  std::string name;
  std::size_t dim = 0;
  double threshold = 0.0;
  std::function<Vector(const Matrix&)> scores;
  std::shared_ptr<const Proposal> input;
};

struct CeLevel {
  int level = 0;
  double gamma = 0.0;
  Eigen::Index above = 0;
  nlohmann::json fit;
  nlohmann::json snapshot;
};

struct CeOptions {
  double rho = 0.25;
  Eigen::Index samples = 10000;
  int max_levels = 20;
  bool keep_snapshots = false;
  /// Called once per level, after its fit (or final estimate).
  std::function<void(const CeLevel&)> on_level{};
};

struct CeResult {
  double p = 0.0;
  double se = 0.0;
  std::vector<CeLevel> levels;
  Eigen::Index n_total = 0;
  bool converged = false;
  std::string note;
  /// Sample of the last level with its scores and log(f / q) ratios.
  Matrix points;
  Vector scores;
  Vector log_ratios;

  [[nodiscard]] std::vector<double> thresholds() const;
};

CeResult ce_run(const PerformanceProblem& problem, ProposalFamily& family, const CeOptions& options, Rng& rng);

nlohmann::json to_json(const AisIteration& it);
nlohmann::json to_json(const CeResult& result);

}  // namespace vaeis::algos

#endif
