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

#include <gmock/gmock.h>

#include <cmath>
#include <numbers>

#include <vaeis/problems.hpp>

namespace {

using vaeis::Matrix;
using vaeis::Vector;
namespace problems = vaeis::problems;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

TEST(FourBranches, OriginScoresZero) {
  const std::vector<double> x(6, 0.0);
  EXPECT_EQ(problems::four_branches_score(x), 0.0);
  EXPECT_LT(problems::four_branches_score(x), problems::kFourBranchesThreshold);
}

TEST(FourBranches, DirectEvaluation) {
  const std::vector<double> x{3.0, 3.0};
  EXPECT_NEAR(problems::four_branches_score(x), 6.0 / std::sqrt(2.0), 1e-12);
  const std::vector<double> y{3.0, -1.0};
  EXPECT_NEAR(problems::four_branches_score(y), 4.0 / std::sqrt(2.0), 1e-12);
}

TEST(FourBranches, OddDimensionThrows) {
  const std::vector<double> x{1.0, 2.0, 3.0};
  EXPECT_THROW((void)problems::four_branches_score(x), std::invalid_argument);
  EXPECT_THROW((void)problems::four_branches_problem(5), std::invalid_argument);
}

TEST(FourBranches, SymmetricUnderNegationAndHalfSwap) {
  vaeis::Rng rng(1);
  const Matrix x = vaeis::standard_normal(50, 8, rng);
  const Vector s = problems::four_branches_scores(x);
  const Vector neg = problems::four_branches_scores(-x);
  Matrix swapped(50, 8);
  swapped << x.rightCols(4), x.leftCols(4);
  const Vector sw = problems::four_branches_scores(swapped);
  for (Eigen::Index i = 0; i < 50; ++i) {
    EXPECT_NEAR(s[i], neg[i], 1e-14);
    EXPECT_NEAR(s[i], sw[i], 1e-14);
    EXPECT_EQ(s[i], problems::four_branches_score(vaeis::row_span(x, i)));
  }
}

TEST(FourBranches, ClosedFormProbability) {
  const double expected = 1.0 - std::pow(2.0 * normal_cdf(3.5) - 1.0, 2);
  EXPECT_NEAR(problems::four_branches_probability(3.5), expected, 1e-15);
  EXPECT_NEAR(problems::four_branches_probability(3.5), 9.30e-4, 0.005e-4);
}

TEST(FourBranches, MonteCarloAgreesWithClosedForm) {
  vaeis::Rng rng(2);
  const double t = 2.0;
  const double p = problems::four_branches_probability(t);
  const Eigen::Index n = 1000000;
  const Vector s = problems::four_branches_scores(vaeis::standard_normal(n, 4, rng));
  const double hat = static_cast<double>((s.array() >= t).count()) / static_cast<double>(n);
  EXPECT_NEAR(hat, p, 4.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n)));
}

TEST(DuffingForcing, ZeroInputGivesZero) {
  const problems::DuffingParams params;
  const std::vector<double> x(200, 0.0);
  for (double a : {0.0, 0.37, 1.9}) {
    EXPECT_EQ(problems::duffing_forcing(x, params, a), 0.0);
  }
}

TEST(DuffingForcing, AtTimeZeroOnlyCosineTermsRemain) {
  const problems::DuffingParams params;
  vaeis::Rng rng(3);
  const Vector x = vaeis::standard_normal(200, 1, rng).col(0);
  EXPECT_NEAR(problems::duffing_forcing({x.data(), 200}, params, 0.0), -params.sigma() * x.head(100).sum(), 1e-13);
}

TEST(DuffingForcing, LinearInInput) {
  const problems::DuffingParams params;
  vaeis::Rng rng(4);
  const Vector x = vaeis::standard_normal(200, 1, rng).col(0);
  const Vector y = -2.5 * x;
  EXPECT_NEAR(problems::duffing_forcing({y.data(), 200}, params, 0.8),
              -2.5 * problems::duffing_forcing({x.data(), 200}, params, 0.8), 1e-12);
}

TEST(Rk4, ConstantSystemStaysPut) {
  const auto end = problems::rk4_integrate([](double, double, double) { return std::pair{0.0, 0.0}; },
                                           {0.25, -1.0, 0.0}, 2.0, 1e-2);
  EXPECT_EQ(end.u, 0.25);
  EXPECT_EQ(end.v, -1.0);
  EXPECT_NEAR(end.a, 2.0, 1e-12);
}

TEST(Rk4, LinearOscillatorMatchesClosedForm) {
  problems::DuffingParams params;
  const double cm = params.damping / params.mass;
  const double km = params.stiffness / params.mass;
  const auto f = [&](double, double u, double v) { return std::pair{v, -cm * v - km * u}; };
  const auto end = problems::rk4_integrate(f, {0.0, 1.5, 0.0}, 2.0, 1e-3);
  const double decay = 0.5 * cm;
  const double wd = std::sqrt(km - decay * decay);
  const double exact = 1.5 / wd * std::exp(-decay * 2.0) * std::sin(wd * 2.0);
  EXPECT_NEAR(end.u, exact, 1e-6);
}

TEST(Rk4, FourthOrderConvergence) {
  const problems::DuffingParams params;
  vaeis::Rng rng(5);
  const Vector x = vaeis::standard_normal(200, 1, rng).col(0);
  const double reference = problems::duffing_displacement({x.data(), 200}, params, 1e-4);
  const double e1 = std::abs(problems::duffing_displacement({x.data(), 200}, params, 0.02) - reference);
  const double e2 = std::abs(problems::duffing_displacement({x.data(), 200}, params, 0.01) - reference);
  EXPECT_GE(e1 / e2, 12.0);
  EXPECT_LE(e1 / e2, 20.0);
}

TEST(Rk4, BlowUpReportsTime) {
  // u' = u^2 from u = 1 blows up at a = 1.
  try {
    (void)problems::rk4_integrate([](double, double u, double) { return std::pair{u * u, 0.0}; }, {1.0, 0.0, 0.0},
                                  2.0, 1e-3);
    FAIL() << "expected NumericError";
  } catch (const vaeis::NumericError& e) {
    EXPECT_THAT(e.what(), ::testing::HasSubstr("at a = "));
  }
}

TEST(Duffing, OriginIsSafe) {
  const problems::DuffingParams params;
  const std::vector<double> x(200, 0.0);
  EXPECT_LT(problems::duffing_score(x, params), 0.0);
}

TEST(Duffing, BoundaryScoresZero) {
  problems::DuffingParams params;
  const std::vector<double> x(200, 0.0);
  params.upper = problems::duffing_displacement(x, params);
  EXPECT_EQ(problems::duffing_score(x, params), 0.0);
}

TEST(Duffing, BatchMatchesReferencePath) {
  const problems::DuffingParams params;
  const problems::DuffingBatch batch(params);
  vaeis::Rng rng(6);
  const Matrix x = vaeis::standard_normal(20, 200, rng);
  const Vector s = batch.scores_serial(x);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    EXPECT_NEAR(s[i], problems::duffing_score(vaeis::row_span(x, i), params), 1e-10);
  }
}

TEST(Duffing, ParallelIsBitIdenticalToSerial) {
  const problems::DuffingBatch batch;
  vaeis::Rng rng(7);
  const Matrix x = 3.0 * vaeis::standard_normal(150, 200, rng);
  const Vector serial = batch.scores_serial(x);
  for (int threads : {1, 2, 4}) {
    EXPECT_TRUE((batch.scores_parallel(x, threads).array() == serial.array()).all()) << threads << " threads";
  }
  EXPECT_TRUE((batch.scores_serial(x).array() == serial.array()).all());
}

TEST(Duffing, ProblemWiring) {
  const auto p = problems::duffing_problem();
  EXPECT_EQ(p.dim, 200u);
  EXPECT_EQ(p.threshold, 0.0);
  vaeis::Rng rng(8);
  const Matrix x = p.input->sample(4, rng);
  EXPECT_EQ(p.scores(x), problems::DuffingBatch().scores_serial(x));
}

}  // namespace
