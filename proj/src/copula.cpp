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

#include <vaeis/copula.hpp>

#include <cmath>
#include <limits>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>

namespace vaeis::dists {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_ccdf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::domain_error("normal_quantile: u must lie in (0, 1)");
  }
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

Marginal Marginal::normal(double mean, double std) {
  if (!(std > 0.0)) {
    throw std::invalid_argument("Marginal::normal: std must be positive");
  }
  return {MarginalFamily::kNormal, mean, std, 0.0};
}

Marginal Marginal::student(double dof, double location, double scale) {
  if (!(dof > 0.0) || !(scale > 0.0)) {
    throw std::invalid_argument("Marginal::student: dof and scale must be positive");
  }
  return {MarginalFamily::kStudent, dof, location, scale};
}

Marginal Marginal::log_normal(double mu, double sigma) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("Marginal::log_normal: sigma must be positive");
  }
  return {MarginalFamily::kLogNormal, mu, sigma, 0.0};
}

Marginal Marginal::triangular(double lower, double mode, double upper) {
  if (!(lower < upper) || mode < lower || mode > upper) {
    throw std::invalid_argument("Marginal::triangular: need lower <= mode <= upper, lower < upper");
  }
  return {MarginalFamily::kTriangular, lower, mode, upper};
}

double Marginal::log_pdf(double x) const {
  switch (family_) {
    case MarginalFamily::kNormal: {
      const double u = (x - a_) / b_;
      return -0.5 * kLogTwoPi - std::log(b_) - 0.5 * u * u;
    }
    case MarginalFamily::kStudent: {
      const double nu = a_;
      const double t = (x - b_) / c_;
      return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * std::numbers::pi) -
             std::log(c_) - 0.5 * (nu + 1.0) * std::log1p(t * t / nu);
    }
    case MarginalFamily::kLogNormal: {
      if (!(x > 0.0)) {
        return -kInf;
      }
      const double u = (std::log(x) - a_) / b_;
      return -0.5 * kLogTwoPi - std::log(b_) - std::log(x) - 0.5 * u * u;
    }
    case MarginalFamily::kTriangular: {
      if (x < a_ || x > c_) {
        return -kInf;
      }
      const double width = c_ - a_;
      const double dens = x <= b_ ? (b_ > a_ ? 2.0 * (x - a_) / (width * (b_ - a_)) : 2.0 / width)
                                  : 2.0 * (c_ - x) / (width * (c_ - b_));
      return dens > 0.0 ? std::log(dens) : -kInf;
    }
  }
  return -kInf;
}

double Marginal::cdf(double x) const {
  switch (family_) {
    case MarginalFamily::kNormal:
      return normal_cdf((x - a_) / b_);
    case MarginalFamily::kStudent: {
      const double t = (x - b_) / c_;
      const double tail = 0.5 * boost::math::ibeta(0.5 * a_, 0.5, a_ / (a_ + t * t));
      return t < 0.0 ? tail : 1.0 - tail;
    }
    case MarginalFamily::kLogNormal:
      return x > 0.0 ? normal_cdf((std::log(x) - a_) / b_) : 0.0;
    case MarginalFamily::kTriangular:
      if (x <= a_) {
        return 0.0;
      }
      if (x >= c_) {
        return 1.0;
      }
      if (x <= b_) {
        return (x - a_) * (x - a_) / ((c_ - a_) * (b_ - a_));
      }
      return 1.0 - (c_ - x) * (c_ - x) / ((c_ - a_) * (c_ - b_));
  }
  return 0.0;
}

double Marginal::ccdf(double x) const {
  switch (family_) {
    case MarginalFamily::kNormal:
      return normal_ccdf((x - a_) / b_);
    case MarginalFamily::kStudent: {
      const double t = (x - b_) / c_;
      const double tail = 0.5 * boost::math::ibeta(0.5 * a_, 0.5, a_ / (a_ + t * t));
      return t > 0.0 ? tail : 1.0 - tail;
    }
    case MarginalFamily::kLogNormal:
      return x > 0.0 ? normal_ccdf((std::log(x) - a_) / b_) : 1.0;
    case MarginalFamily::kTriangular:
      if (x <= a_) {
        return 1.0;
      }
      if (x >= c_) {
        return 0.0;
      }
      if (x > b_) {
        return (c_ - x) * (c_ - x) / ((c_ - a_) * (c_ - b_));
      }
      return 1.0 - (x - a_) * (x - a_) / ((c_ - a_) * (b_ - a_));
  }
  return 0.0;
}

double Marginal::invert_numerically(double u) const {
  // Bracket, then Newton steps that fall back to bisection when they leave it.
  double lo = b_ - c_;
  double hi = b_ + c_;
  while (cdf(lo) > u) {
    hi = lo;
    lo = b_ - 2.0 * (b_ - lo);
  }
  while (cdf(hi) < u) {
    lo = hi;
    hi = b_ + 2.0 * (hi - b_);
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = cdf(x) - u;
    if (f == 0.0) {
      return x;
    }
    if (f < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double dens = std::exp(log_pdf(x));
    double next = x - f / dens;
    if (!(next > lo && next < hi)) {
      next = 0.5 * (lo + hi);
    }
    if (std::abs(next - x) <= 1e-12 * std::max(1.0, std::abs(x))) {
      return next;
    }
    x = next;
  }
  return x;
}

double Marginal::inverse_cdf(double u) const {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::domain_error("Marginal::inverse_cdf: u must lie in (0, 1)");
  }
  switch (family_) {
    case MarginalFamily::kNormal:
      return a_ + b_ * normal_quantile(u);
    case MarginalFamily::kStudent:
      return invert_numerically(u);
    case MarginalFamily::kLogNormal:
      return std::exp(a_ + b_ * normal_quantile(u));
    case MarginalFamily::kTriangular: {
      const double split = (b_ - a_) / (c_ - a_);
      if (u <= split) {
        return a_ + std::sqrt(u * (c_ - a_) * (b_ - a_));
      }
      return c_ - std::sqrt((1.0 - u) * (c_ - a_) * (c_ - b_));
    }
  }
  return 0.0;
}

double Marginal::to_normal_score(double x) const {
  switch (family_) {
    case MarginalFamily::kNormal:
      return (x - a_) / b_;
    case MarginalFamily::kLogNormal:
      return x > 0.0 ? (std::log(x) - a_) / b_ : -kInf;
    case MarginalFamily::kStudent:
    case MarginalFamily::kTriangular: {
      const double lower = cdf(x);
      if (lower <= 0.0) {
        return -kInf;
      }
      if (lower < 0.5) {
        return normal_quantile(lower);
      }
      const double upper = ccdf(x);
      return upper <= 0.0 ? kInf : -normal_quantile(upper);
    }
  }
  return 0.0;
}

double Marginal::from_normal_score(double z) const {
  switch (family_) {
    case MarginalFamily::kNormal:
      return a_ + b_ * z;
    case MarginalFamily::kLogNormal:
      return std::exp(a_ + b_ * z);
    case MarginalFamily::kStudent:
      // Symmetric about the location, so the upper tail mirrors the lower one.
      return z <= 0.0 ? invert_numerically(normal_cdf(z)) : 2.0 * b_ - invert_numerically(normal_cdf(-z));
    case MarginalFamily::kTriangular: {
      if (z <= 0.0) {
        return inverse_cdf(normal_cdf(z));
      }
      const double upper = normal_ccdf(z);
      const double split = (c_ - b_) / (c_ - a_);
      if (upper <= split) {
        return c_ - std::sqrt(upper * (c_ - a_) * (c_ - b_));
      }
      return inverse_cdf(1.0 - upper);
    }
  }
  return 0.0;
}

double Marginal::mean() const {
  switch (family_) {
    case MarginalFamily::kNormal:
      return a_;
    case MarginalFamily::kStudent:
      return b_;
    case MarginalFamily::kLogNormal:
      return std::exp(a_ + 0.5 * b_ * b_);
    case MarginalFamily::kTriangular:
      return (a_ + b_ + c_) / 3.0;
  }
  return 0.0;
}

double Marginal::std() const {
  switch (family_) {
    case MarginalFamily::kNormal:
      return b_;
    case MarginalFamily::kStudent:
      return a_ > 2.0 ? c_ * std::sqrt(a_ / (a_ - 2.0)) : kInf;
    case MarginalFamily::kLogNormal:
      return std::sqrt(std::expm1(b_ * b_) * std::exp(2.0 * a_ + b_ * b_));
    case MarginalFamily::kTriangular:
      return std::sqrt((a_ * a_ + b_ * b_ + c_ * c_ - a_ * b_ - a_ * c_ - b_ * c_) / 18.0);
  }
  return 0.0;
}

CopulaTarget::CopulaTarget(std::vector<Marginal> marginals, Eigen::MatrixXd correlation)
    : marginals_(std::move(marginals)), correlation_(std::move(correlation)) {
  const auto d = static_cast<Eigen::Index>(marginals_.size());
  if (correlation_.rows() != d || correlation_.cols() != d) {
    throw ShapeError("CopulaTarget: correlation matrix does not match the marginal count");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(correlation_);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("CopulaTarget: correlation matrix is not positive definite");
  }
  chol_ = llt.matrixL();
  half_log_det_ = chol_.diagonal().array().log().sum();
  precision_minus_identity_ = llt.solve(Eigen::MatrixXd::Identity(d, d)) - Eigen::MatrixXd::Identity(d, d);
}

CopulaTarget CopulaTarget::standard() {
  std::vector<Marginal> m;
  m.push_back(Marginal::student(4.0, -2.0, 1.0));
  m.push_back(Marginal::log_normal(0.0, 1.0));
  m.push_back(Marginal::triangular(1.0, 3.0, 5.0));
  for (int i = 3; i < 20; ++i) {
    m.push_back(Marginal::normal(2.0, 1.0));
  }
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(20, 20);
  for (int i = 0; i + 1 < 20; ++i) {
    r(i, i + 1) = 0.25;
    r(i + 1, i) = 0.25;
  }
  return {std::move(m), std::move(r)};
}

double CopulaTarget::log_pdf(std::span<const double> x) const {
  if (x.size() != dim()) {
    throw ShapeError("CopulaTarget: point dimension mismatch");
  }
  const auto d = static_cast<Eigen::Index>(dim());
  Vector z(d);
  double log_marg = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto& m = marginals_[static_cast<std::size_t>(i)];
    const double lp = m.log_pdf(x[static_cast<std::size_t>(i)]);
    if (!std::isfinite(lp)) {
      return -kInf;
    }
    log_marg += lp;
    z[i] = m.to_normal_score(x[static_cast<std::size_t>(i)]);
    if (!std::isfinite(z[i])) {
      return -kInf;
    }
  }
  return log_marg - 0.5 * z.dot(precision_minus_identity_ * z) - half_log_det_;
}

Matrix CopulaTarget::sample(Eigen::Index n, Rng& rng) const {
  const auto d = static_cast<Eigen::Index>(dim());
  Matrix eps = standard_normal(n, d, rng);
  Matrix out(n, d);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Vector z = chol_ * eps.row(r).transpose();
    for (Eigen::Index i = 0; i < d; ++i) {
      out(r, i) = marginals_[static_cast<std::size_t>(i)].from_normal_score(z[i]);
    }
  }
  return out;
}

UnnormalizedDensity CopulaTarget::as_target() const {
  return {dim(), [self = *this](std::span<const double> x) { return self.log_pdf(x); }};
}

}  // namespace vaeis::dists
