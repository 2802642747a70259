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

#ifndef VAEIS_COPULA_HPP
#define VAEIS_COPULA_HPP

#include <span>
#include <vector>

#include <vaeis/core.hpp>
#include <vaeis/dists.hpp>

/**
 * \file
 * \brief Univariate marginals and the 20-dimensional normal-copula target.
 */

namespace vaeis::dists {

double normal_cdf(double z);
/// Upper tail 1 - Phi(z), accurate for large z.
double normal_ccdf(double z);
double normal_quantile(double u);

enum class MarginalFamily { kNormal, kStudent, kLogNormal, kTriangular };

/// One-dimensional marginal distribution.
/**
 * Parameters by family:
 *  - kNormal: (mean, std)
 *  - kStudent: (dof, location, scale)
 *  - kLogNormal: (mu, sigma) of the underlying normal
 *  - kTriangular: (lower, mode, upper)
 */
class Marginal {
 public:
  static Marginal normal(double mean, double std);
  static Marginal student(double dof, double location, double scale);
  static Marginal log_normal(double mu, double sigma);
  static Marginal triangular(double lower, double mode, double upper);

  [[nodiscard]] MarginalFamily family() const { return family_; }
  /// -inf outside the support.
  [[nodiscard]] double log_pdf(double x) const;
  [[nodiscard]] double cdf(double x) const;
  [[nodiscard]] double ccdf(double x) const;
  /// Throws std::domain_error for u outside (0, 1).
  [[nodiscard]] double inverse_cdf(double u) const;

  /// Phi^{-1}(F(x)), computed from the tail that keeps precision.
  [[nodiscard]] double to_normal_score(double x) const;
  /// F^{-1}(Phi(z)).
  [[nodiscard]] double from_normal_score(double z) const;

  [[nodiscard]] double mean() const;
  [[nodiscard]] double std() const;

 private:
  Marginal(MarginalFamily family, double a, double b, double c) : family_(family), a_(a), b_(b), c_(c) {}
  [[nodiscard]] double invert_numerically(double u) const;

  MarginalFamily family_;
  double a_;
  double b_;
  double c_;
};

/// Density defined by marginals tied together with a normal copula.
class CopulaTarget {
 public:
  CopulaTarget(std::vector<Marginal> marginals, Eigen::MatrixXd correlation);

  /// The 20-dimensional target: Student(4,-2,1), LogNormal(0,1), Triangular(1,3,5),
  /// 17 x Normal(2,1), with tridiagonal correlation 1 / 0.25.
  static CopulaTarget standard();

  [[nodiscard]] std::size_t dim() const { return marginals_.size(); }
  [[nodiscard]] const std::vector<Marginal>& marginals() const { return marginals_; }
  [[nodiscard]] const Eigen::MatrixXd& correlation() const { return correlation_; }

  /// Exact log-density; -inf outside the marginal supports.
  [[nodiscard]] double log_pdf(std::span<const double> x) const;
  [[nodiscard]] Matrix sample(Eigen::Index n, Rng& rng) const;
  [[nodiscard]] UnnormalizedDensity as_target() const;

 private:
  std::vector<Marginal> marginals_;
  Eigen::MatrixXd correlation_;
  Eigen::MatrixXd chol_;
  Eigen::MatrixXd precision_minus_identity_;
  double half_log_det_ = 0.0;
};

}  // namespace vaeis::dists

#endif
