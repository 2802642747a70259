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

#ifndef VAEIS_METRICS_HPP
#define VAEIS_METRICS_HPP

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <vaeis/core.hpp>

namespace vaeis::metrics {

/// Sample standard deviation (n - 1) over the mean.
double cov_of(std::span<const double> estimates);

/// Plain Monte Carlo budget for the same COV, (1 - p) / (p cov^2), divided by n_total.
double nu_mc(double p, double cov, double n_total);

/// 1-nearest-neighbour estimate of KL(P || Q) from samples of P and Q, clipped at 0.
double knn_kl(const Matrix& sample_p, const Matrix& sample_q);

enum class ModesFound { kNone, kOne, kBoth };
const char* to_string(ModesFound m);

/**
 * Assigns each point to the nearer of +offset*1 and -offset*1. A mode counts as found
 * when it holds at least 20% of the points and its cluster mean lies within 1.0 of
 * its center.
 */
ModesFound bimodal_success(const Matrix& sample, double offset = 2.5);

/// 1-Wasserstein distance between two one-dimensional empirical distributions.
double wasserstein1(std::span<const double> a, std::span<const double> b);

/// One-sample Kolmogorov-Smirnov statistic against `cdf`.
double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf);

struct ReplicationSummary {
  std::vector<double> estimates;
  double n_total = 0.0;
  std::vector<double> wall_seconds;

  [[nodiscard]] double mean() const;
  /// Empty with fewer than two estimates.
  [[nodiscard]] std::optional<double> cov() const;
  [[nodiscard]] std::optional<double> nu() const;
};

}  // namespace vaeis::metrics

#endif
