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

#ifndef VAEIS_PROBLEMS_HPP
#define VAEIS_PROBLEMS_HPP

#include <functional>
#include <numbers>
#include <span>

#include <vaeis/algos.hpp>
#include <vaeis/core.hpp>

/**
 * \file
 * \brief Reliability benchmarks, written as scores with failure iff score >= threshold.
 */

namespace vaeis::problems {

inline constexpr double kFourBranchesThreshold = 3.5;

/// max(|s1|, |s2|) with s1 = sum(x)/sqrt(d), s2 = (sum of first half - sum of second half)/sqrt(d).
/// Throws for odd or zero dimension.
double four_branches_score(std::span<const double> x);
Vector four_branches_scores(const Matrix& points);

/// P(score >= t) for standard normal inputs: 1 - (2 Phi(t) - 1)^2, any even d.
double four_branches_probability(double t = kFourBranchesThreshold);

algos::PerformanceProblem four_branches_problem(std::size_t dim, double threshold = kFourBranchesThreshold);

/// m u'' + c u' + k (u + gamma u^3) = -m sigma sum_i (x_i cos(w_i a) + x_{d/2+i} sin(w_i a)).
struct DuffingParams {
  double mass = 1000.0;
  double damping = 200.0 * std::numbers::pi;
  double stiffness = 1000.0 * 4.0 * std::numbers::pi * std::numbers::pi;
  double cubic = 1.0;
  std::size_t dim = 200;
  double upper = 0.1;
  double lower = -0.06;
  double horizon = 2.0;
  double u0 = 0.0;
  double v0 = 1.5;

  [[nodiscard]] double delta_omega() const { return 30.0 * std::numbers::pi / static_cast<double>(dim); }
  [[nodiscard]] double sigma() const { return std::sqrt(0.01 * delta_omega()); }
  /// Circular frequency of term i, 1-based.
  [[nodiscard]] double omega(std::size_t i) const { return static_cast<double>(i) * delta_omega(); }
};

struct OdeState {
  double u = 0.0;
  double v = 0.0;
  double a = 0.0;
};

/// Right-hand side (u', v') of a second-order scalar system written in first-order form.
using Derivative = std::function<std::pair<double, double>(double a, double u, double v)>;

/// Classical fixed-step RK4 from y0.a to `horizon`. Throws NumericError carrying the
/// time at which the state became non-finite.
OdeState rk4_integrate(const Derivative& f, OdeState y0, double horizon, double h);

/// Forcing per unit mass at time a: -sigma sum_i (x_i cos(w_i a) + x_{d/2+i} sin(w_i a)).
double duffing_forcing(std::span<const double> x, const DuffingParams& params, double a);

/// Displacement at the horizon (reference path, direct trigonometric forcing).
double duffing_displacement(std::span<const double> x, const DuffingParams& params, double h = 1e-3);

/// max(u - upper, lower - u) at the horizon; +inf if the integration blows up.
double duffing_score(std::span<const double> x, const DuffingParams& params, double h = 1e-3);

/**
 * Batched scoring with a precomputed forcing table. The serial and OpenMP versions
 * share the per-chunk routine and agree bitwise; they agree with duffing_score to
 * rounding.
 */
class DuffingBatch {
 public:
  explicit DuffingBatch(DuffingParams params = {}, double h = 1e-3);

  [[nodiscard]] const DuffingParams& params() const { return params_; }
  [[nodiscard]] Vector scores_serial(const Matrix& points) const;
  [[nodiscard]] Vector scores_parallel(const Matrix& points, int threads = 0) const;

 private:
  void score_chunk(const Matrix& points, Eigen::Index begin, Eigen::Index end, double* out) const;

  DuffingParams params_;
  double h_;
  int steps_;
  Matrix table_;  // (2 steps + 1) x d, forcing coefficients at half steps
};

inline constexpr double kDuffingReferenceProbability = 4.28e-4;

algos::PerformanceProblem duffing_problem(const DuffingParams& params = {}, double h = 1e-3);

}  // namespace vaeis::problems

#endif
