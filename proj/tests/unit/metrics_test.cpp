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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include <vaeis/copula.hpp>
#include <vaeis/metrics.hpp>

namespace {

using vaeis::Matrix;
using vaeis::Vector;
namespace metrics = vaeis::metrics;

TEST(Cov, ConstantListIsZero) {
  const std::vector<double> x(5, 3.7);
  EXPECT_EQ(metrics::cov_of(x), 0.0);
}

TEST(Cov, TwoPoints) {
  const std::vector<double> x{1.0, 3.0};
  EXPECT_NEAR(metrics::cov_of(x), std::sqrt(2.0) / 2.0, 1e-15);
}

TEST(Cov, MatchesLongHand) {
  vaeis::Rng rng(1);
  const Vector v = vaeis::standard_normal(37, 1, rng).col(0).array() + 4.0;
  const std::vector<double> x(v.begin(), v.end());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / 37.0;
  double ss = 0.0;
  for (double e : x) ss += (e - mean) * (e - mean);
  EXPECT_NEAR(metrics::cov_of(x), std::sqrt(ss / 36.0) / mean, 1e-13);
}

TEST(Cov, ScaleInvariant) {
  const std::vector<double> x{1e-4, 1.2e-4, 0.9e-4, 1.1e-4};
  std::vector<double> y(x);
  for (double& e : y) e *= 1234.5;
  EXPECT_NEAR(metrics::cov_of(x), metrics::cov_of(y), 1e-13);
}

TEST(Cov, Errors) {
  EXPECT_THROW((void)metrics::cov_of(std::vector<double>{1.0}), std::invalid_argument);
  EXPECT_THROW((void)metrics::cov_of(std::vector<double>{-1.0, 1.0}), std::invalid_argument);
}

TEST(NuMc, TableRows) {
  EXPECT_NEAR(metrics::nu_mc(9.310e-4, 0.0531, 40000), 9.515, 0.005);
  EXPECT_NEAR(metrics::nu_mc(4.27e-4, 0.0869, 30000), 10.33, 0.005);
}

TEST(NuMc, FixedPointAndMonotonicity) {
  const double p = 1e-3;
  const double n = 5000;
  const double cov = std::sqrt((1.0 - p) / (p * n));
  EXPECT_NEAR(metrics::nu_mc(p, cov, n), 1.0, 1e-12);
  EXPECT_GT(metrics::nu_mc(p, 0.9 * cov, n), metrics::nu_mc(p, cov, n));
  EXPECT_THROW((void)metrics::nu_mc(0.0, 0.1, n), std::invalid_argument);
  EXPECT_THROW((void)metrics::nu_mc(1.0, 0.1, n), std::invalid_argument);
  EXPECT_THROW((void)metrics::nu_mc(0.5, 0.0, n), std::invalid_argument);
}

TEST(KnnKl, SameDistributionNearZero) {
  vaeis::Rng rng(2);
  const Matrix p = vaeis::standard_normal(10000, 10, rng);
  const Matrix q = vaeis::standard_normal(10000, 10, rng);
  EXPECT_NEAR(metrics::knn_kl(p, q), 0.0, 0.05);
}

TEST(KnnKl, ShiftedGaussian) {
  vaeis::Rng rng(3);
  const Matrix p = vaeis::standard_normal(10000, 1, rng).array() + 1.0;
  const Matrix q = vaeis::standard_normal(10000, 1, rng);
  EXPECT_NEAR(metrics::knn_kl(p, q), 0.5, 0.1);
}

TEST(KnnKl, PermutationInvariant) {
  vaeis::Rng rng(4);
  const Matrix p = vaeis::standard_normal(500, 3, rng).array() + 0.5;
  const Matrix q = vaeis::standard_normal(500, 3, rng);
  const Matrix p_rev = p.colwise().reverse();
  const Matrix q_rev = q.colwise().reverse();
  EXPECT_NEAR(metrics::knn_kl(p, q), metrics::knn_kl(p_rev, q_rev), 1e-12);
}

TEST(KnnKl, Errors) {
  EXPECT_THROW((void)metrics::knn_kl(Matrix::Zero(200, 2), Matrix::Zero(200, 3)), vaeis::ShapeError);
  EXPECT_THROW((void)metrics::knn_kl(Matrix::Zero(50, 2), Matrix::Zero(200, 2)), std::invalid_argument);
  // Duplicates hit the distance floor instead of producing log 0.
  EXPECT_TRUE(std::isfinite(metrics::knn_kl(Matrix::Zero(200, 2), Matrix::Ones(200, 2))));
}

Matrix bimodal_sample(Eigen::Index n, double fraction_positive, vaeis::Rng& rng) {
  Matrix x = vaeis::standard_normal(n, 10, rng);
  const auto n_pos = static_cast<Eigen::Index>(fraction_positive * static_cast<double>(n));
  x.topRows(n_pos).array() += 2.5;
  x.bottomRows(n - n_pos).array() -= 2.5;
  return x;
}

TEST(BimodalSuccess, Cases) {
  vaeis::Rng rng(5);
  EXPECT_EQ(metrics::bimodal_success(bimodal_sample(10000, 0.5, rng)), metrics::ModesFound::kBoth);
  EXPECT_EQ(metrics::bimodal_success(bimodal_sample(10000, 1.0, rng)), metrics::ModesFound::kOne);
  EXPECT_EQ(metrics::bimodal_success(bimodal_sample(10000, 0.1, rng)), metrics::ModesFound::kOne);
  EXPECT_EQ(metrics::bimodal_success(vaeis::standard_normal(10000, 10, rng)), metrics::ModesFound::kNone);
  EXPECT_STREQ(metrics::to_string(metrics::ModesFound::kBoth), "both");
}

TEST(Wasserstein, ShiftAndIdentity) {
  const std::vector<double> a{0.0, 1.0, 2.0, 3.0};
  std::vector<double> b(a);
  EXPECT_EQ(metrics::wasserstein1(a, b), 0.0);
  for (double& e : b) e += 0.75;
  EXPECT_NEAR(metrics::wasserstein1(a, b), 0.75, 1e-15);
  const std::vector<double> c{0.0, 0.0, 1.0};
  const std::vector<double> d{1.0};
  EXPECT_NEAR(metrics::wasserstein1(c, d), 2.0 / 3.0, 1e-15);
}

TEST(Ks, DetectsMismatch) {
  vaeis::Rng rng(6);
  const Vector z = vaeis::standard_normal(20000, 1, rng).col(0);
  const std::vector<double> x(z.begin(), z.end());
  EXPECT_LT(metrics::ks_statistic(x, vaeis::dists::normal_cdf), 0.015);
  EXPECT_GT(metrics::ks_statistic(x, [](double v) { return vaeis::dists::normal_cdf(v - 0.2); }), 0.05);
  EXPECT_EQ(metrics::ks_statistic(std::vector<double>{0.0}, [](double) { return 0.5; }), 0.5);
}

TEST(Summary, SingleReplicationHasNoCov) {
  metrics::ReplicationSummary s{{9e-4}, 40000, {1.0}};
  EXPECT_EQ(s.mean(), 9e-4);
  EXPECT_FALSE(s.cov().has_value());
  EXPECT_FALSE(s.nu().has_value());
}

TEST(Summary, Rows) {
  metrics::ReplicationSummary s{{8e-4, 1e-3}, 40000, {1.0, 2.0}};
  EXPECT_NEAR(s.mean(), 9e-4, 1e-18);
  ASSERT_TRUE(s.cov().has_value());
  EXPECT_NEAR(*s.cov(), metrics::cov_of(s.estimates), 1e-15);
  EXPECT_NEAR(*s.nu(), metrics::nu_mc(9e-4, *s.cov(), 40000), 1e-12);
}

}  // namespace
