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

#ifndef VAEIS_DISTS_HPP
#define VAEIS_DISTS_HPP

#include <functional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include <vaeis/core.hpp>

namespace vaeis::dists {

/// Gaussian with diagonal covariance.
struct DiagGaussian {
  Vector mean;
  Vector std;

  [[nodiscard]] Eigen::Index dim() const { return mean.size(); }
};

/// Exact log-density. Throws ShapeError on dimension mismatch and
/// std::invalid_argument on a nonpositive standard deviation.
double diag_gaussian_logpdf(std::span<const double> x, const DiagGaussian& g);

/// n x d matrix of draws.
Matrix diag_gaussian_sample(const DiagGaussian& g, Eigen::Index n, Rng& rng);

/// Closed-form KL(q || p) between diagonal Gaussians.
double kl_diag_gaussians(const DiagGaussian& q, const DiagGaussian& p);

/// Finite mixture of full-covariance Gaussians.
class GaussianMixture {
 public:
  GaussianMixture(Vector weights, std::vector<Vector> means, std::vector<Eigen::MatrixXd> covariances);

  [[nodiscard]] Eigen::Index dim() const { return means_.front().size(); }
  [[nodiscard]] std::size_t components() const { return means_.size(); }
  [[nodiscard]] const Vector& weights() const { return weights_; }
  [[nodiscard]] const Vector& mean(std::size_t j) const { return means_[j]; }
  [[nodiscard]] const Eigen::MatrixXd& covariance(std::size_t j) const { return covariances_[j]; }

  /// log N(x; mean_j, cov_j) for every row of `points`, as an n x J matrix.
  [[nodiscard]] Matrix component_logpdf(const Matrix& points) const;
  [[nodiscard]] double logpdf(std::span<const double> x) const;
  [[nodiscard]] Vector logpdf(const Matrix& points) const;
  [[nodiscard]] Matrix sample(Eigen::Index n, Rng& rng) const;

  [[nodiscard]] nlohmann::json to_json() const;
  static GaussianMixture from_json(const nlohmann::json& j);

 private:
  Vector weights_;
  std::vector<Vector> means_;
  std::vector<Eigen::MatrixXd> covariances_;
  std::vector<Eigen::MatrixXd> chol_;  // lower Cholesky factors
  std::vector<double> log_norm_;       // -d/2 log 2pi - 1/2 log det
};

struct EmOptions {
  int max_sweeps = 100;
  double relative_tolerance = 1e-8;
  double regularization = 1e-6;
};

struct EmResult {
  GaussianMixture mixture;
  /// Weighted log-likelihood sum_n w_n log g(x_n) (weights normalized to sum 1)
  /// before the first sweep and after every sweep.
  std::vector<double> log_likelihood;
  int sweeps = 0;
  int reseeds = 0;
  /// False if the weighted log-likelihood decreased between two sweeps that were not
  /// separated by a re-seed.
  bool monotone = true;
};

/// Weighted k-means++ seeding: first center drawn proportionally to the weights, next
/// ones proportionally to weight times squared distance to the closest center.
std::vector<Vector> weighted_kmeanspp(const Matrix& points, std::span<const double> weights, int components,
                                      Rng& rng);

/// Weighted EM from a given starting mixture.
EmResult fit_weighted_em(const Matrix& points, std::span<const double> weights, GaussianMixture start,
                         const EmOptions& options = {});

/// Weighted EM seeded by weighted k-means++; initial covariances are the weighted
/// sample covariance, initial mixture weights uniform.
EmResult fit_weighted_em(const Matrix& points, std::span<const double> weights, int components, Rng& rng,
                         const EmOptions& options = {});

/// Target density known up to a constant.
struct UnnormalizedDensity {
  std::size_t dim = 0;
  std::function<double(std::span<const double>)> log_unnorm;
};

/// log of N(x; 2.5*1, I) + N(x; -2.5*1, I) in dimension 10 (normalizing constant dropped).
double bimodal_log_unnorm(std::span<const double> x);
UnnormalizedDensity bimodal_target(std::size_t dim = 10, double offset = 2.5);

}  // namespace vaeis::dists

#endif
