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

#include <vaeis/metrics.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include <vaeis/kernels.hpp>

namespace vaeis::metrics {

double cov_of(std::span<const double> estimates) {
  if (estimates.size() < 2) {
    throw std::invalid_argument("cov_of: need at least two estimates");
  }
  const double n = static_cast<double>(estimates.size());
  const double mean = std::accumulate(estimates.begin(), estimates.end(), 0.0) / n;
  if (mean == 0.0) {
    throw std::invalid_argument("cov_of: zero mean");
  }
  double ss = 0.0;
  for (double e : estimates) {
    ss += (e - mean) * (e - mean);
  }
  return std::sqrt(ss / (n - 1.0)) / std::abs(mean);
}

double nu_mc(double p, double cov, double n_total) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("nu_mc: p must lie in (0, 1)");
  }
  if (!(cov > 0.0) || !(n_total > 0.0)) {
    throw std::invalid_argument("nu_mc: cov and n_total must be positive");
  }
  return (1.0 - p) / (p * cov * cov) / n_total;
}

double knn_kl(const Matrix& sample_p, const Matrix& sample_q) {
  if (sample_p.cols() != sample_q.cols()) {
    throw ShapeError("knn_kl: samples have different dimensions");
  }
  if (sample_p.rows() < 100 || sample_q.rows() < 100) {
    throw std::invalid_argument("knn_kl: need at least 100 points per sample");
  }
  constexpr double kFloor = 1e-12;
  const Vector rho = kernels::nearest_distance_parallel(sample_p, sample_p, true);
  const Vector nu = kernels::nearest_distance_parallel(sample_p, sample_q, false);
  const auto n = static_cast<double>(sample_p.rows());
  const auto m = static_cast<double>(sample_q.rows());
  const auto d = static_cast<double>(sample_p.cols());
  double s = 0.0;
  for (Eigen::Index i = 0; i < rho.size(); ++i) {
    s += std::log(std::max(nu[i], kFloor)) - std::log(std::max(rho[i], kFloor));
  }
  return std::max(0.0, d / n * s + std::log(m / (n - 1.0)));
}

const char* to_string(ModesFound m) {
  switch (m) {
    case ModesFound::kNone:
      return "none";
    case ModesFound::kOne:
      return "one";
    case ModesFound::kBoth:
      return "both";
  }
  return "none";
}

ModesFound bimodal_success(const Matrix& sample, double offset) {
  const Eigen::Index d = sample.cols();
  if (sample.rows() == 0) {
    return ModesFound::kNone;
  }
  Vector sums[2] = {Vector::Zero(d), Vector::Zero(d)};
  Eigen::Index counts[2] = {0, 0};
  for (Eigen::Index r = 0; r < sample.rows(); ++r) {
    // Nearer to +offset*1 iff the coordinate sum is positive.
    const int k = sample.row(r).sum() >= 0.0 ? 0 : 1;
    sums[k] += sample.row(r).transpose();
    ++counts[k];
  }
  int found = 0;
  for (int k = 0; k < 2; ++k) {
    if (static_cast<double>(counts[k]) < 0.2 * static_cast<double>(sample.rows())) {
      continue;
    }
    const Vector center = Vector::Constant(d, k == 0 ? offset : -offset);
    if ((sums[k] / static_cast<double>(counts[k]) - center).norm() <= 1.0) {
      ++found;
    }
  }
  return found == 2 ? ModesFound::kBoth : found == 1 ? ModesFound::kOne : ModesFound::kNone;
}

double wasserstein1(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("wasserstein1: empty sample");
  }
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  // Integrate |F_x - F_y| over the merged support.
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double prev = std::min(x.front(), y.front());
  double total = 0.0;
  while (i < x.size() || j < y.size()) {
    const double next = j >= y.size() || (i < x.size() && x[i] <= y[j]) ? x[i] : y[j];
    total += std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny) * (next - prev);
    prev = next;
    while (i < x.size() && x[i] == next) {
      ++i;
    }
    while (j < y.size() && y[j] == next) {
      ++j;
    }
  }
  return total;
}

double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) {
    throw std::invalid_argument("ks_statistic: empty sample");
  }
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ReplicationSummary::mean() const {
  if (estimates.empty()) {
    throw std::invalid_argument("ReplicationSummary: no estimates");
  }
  return std::accumulate(estimates.begin(), estimates.end(), 0.0) / static_cast<double>(estimates.size());
}

std::optional<double> ReplicationSummary::cov() const {
  if (estimates.size() < 2 || mean() == 0.0) {
    return std::nullopt;
  }
  return cov_of(estimates);
}

std::optional<double> ReplicationSummary::nu() const {
  const auto c = cov();
  const double p = estimates.empty() ? 0.0 : mean();
  if (!c || !(*c > 0.0) || !(p > 0.0 && p < 1.0) || !(n_total > 0.0)) {
    return std::nullopt;
  }
  return nu_mc(p, *c, n_total);
}

}  // namespace vaeis::metrics
