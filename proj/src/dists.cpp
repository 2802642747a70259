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

#include <vaeis/dists.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace vaeis {

double log_sum_exp(std::span<const double> values) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values) {
    m = std::max(m, v);
  }
  if (!std::isfinite(m)) {
    return m;
  }
  double s = 0.0;
  for (double v : values) {
    s += std::exp(v - m);
  }
  return m + std::log(s);
}

}  // namespace vaeis

namespace vaeis::dists {

double diag_gaussian_logpdf(std::span<const double> x, const DiagGaussian& g) {
  if (static_cast<Eigen::Index>(x.size()) != g.mean.size() || g.std.size() != g.mean.size()) {
    throw ShapeError("diag_gaussian_logpdf: dimension mismatch");
  }
  double acc = 0.0;
  for (Eigen::Index j = 0; j < g.mean.size(); ++j) {
    const double s = g.std[j];
    if (!(s > 0.0)) {
      throw std::invalid_argument("diag_gaussian_logpdf: nonpositive standard deviation");
    }
    const double u = (x[static_cast<std::size_t>(j)] - g.mean[j]) / s;
    acc += -0.5 * kLogTwoPi - std::log(s) - 0.5 * u * u;
  }
  return acc;
}

Matrix diag_gaussian_sample(const DiagGaussian& g, Eigen::Index n, Rng& rng) {
  Matrix eps = standard_normal(n, g.dim(), rng);
  Matrix out = eps.array().rowwise() * g.std.transpose().array();
  out.rowwise() += g.mean.transpose();
  return out;
}

double kl_diag_gaussians(const DiagGaussian& q, const DiagGaussian& p) {
  if (q.dim() != p.dim()) {
    throw ShapeError("kl_diag_gaussians: dimension mismatch");
  }
  double kl = 0.0;
  for (Eigen::Index j = 0; j < q.dim(); ++j) {
    const double ratio = q.std[j] / p.std[j];
    const double diff = (q.mean[j] - p.mean[j]) / p.std[j];
    kl += 0.5 * (ratio * ratio + diff * diff - 1.0) - std::log(ratio);
  }
  return kl;
}

GaussianMixture::GaussianMixture(Vector weights, std::vector<Vector> means, std::vector<Eigen::MatrixXd> covariances)
    : weights_(std::move(weights)), means_(std::move(means)), covariances_(std::move(covariances)) {
  const auto J = means_.size();
  if (J == 0 || static_cast<std::size_t>(weights_.size()) != J || covariances_.size() != J) {
    throw ShapeError("GaussianMixture: inconsistent component counts");
  }
  if ((weights_.array() < 0.0).any() || std::abs(weights_.sum() - 1.0) > 1e-9) {
    throw std::invalid_argument("GaussianMixture: weights must lie on the simplex");
  }
  weights_ /= weights_.sum();
  const Eigen::Index d = means_.front().size();
  for (std::size_t j = 0; j < J; ++j) {
    if (means_[j].size() != d || covariances_[j].rows() != d || covariances_[j].cols() != d) {
      throw ShapeError("GaussianMixture: component " + std::to_string(j) + " has the wrong dimension");
    }
    covariances_[j] = 0.5 * (covariances_[j] + covariances_[j].transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(covariances_[j]);
    if (llt.info() != Eigen::Success) {
      throw NumericError("GaussianMixture: covariance " + std::to_string(j) + " is not positive definite");
    }
    Eigen::MatrixXd L = llt.matrixL();
    const double log_det = 2.0 * L.diagonal().array().log().sum();
    log_norm_.push_back(-0.5 * static_cast<double>(d) * kLogTwoPi - 0.5 * log_det);
    chol_.push_back(std::move(L));
  }
}

Matrix GaussianMixture::component_logpdf(const Matrix& points) const {
  if (points.cols() != dim()) {
    throw ShapeError("GaussianMixture: point dimension mismatch");
  }
  const auto J = static_cast<Eigen::Index>(components());
  Matrix out(points.rows(), J);
  for (Eigen::Index j = 0; j < J; ++j) {
    Eigen::MatrixXd diff = (points.rowwise() - means_[static_cast<std::size_t>(j)].transpose()).transpose();
    chol_[static_cast<std::size_t>(j)].triangularView<Eigen::Lower>().solveInPlace(diff);
    out.col(j) = (log_norm_[static_cast<std::size_t>(j)] - 0.5 * diff.colwise().squaredNorm().array()).matrix().transpose();
  }
  return out;
}

Vector GaussianMixture::logpdf(const Matrix& points) const {
  Matrix comp = component_logpdf(points);
  const Eigen::RowVectorXd log_w = weights_.array().log().matrix().transpose();
  comp.rowwise() += log_w;
  Vector out(points.rows());
  for (Eigen::Index i = 0; i < comp.rows(); ++i) {
    out[i] = log_sum_exp(row_span(comp, i));
  }
  return out;
}

double GaussianMixture::logpdf(std::span<const double> x) const {
  Matrix m = Eigen::Map<const Matrix>(x.data(), 1, static_cast<Eigen::Index>(x.size()));
  return logpdf(m)[0];
}

Matrix GaussianMixture::sample(Eigen::Index n, Rng& rng) const {
  std::discrete_distribution<std::size_t> pick(weights_.data(), weights_.data() + weights_.size());
  std::normal_distribution<double> normal;
  Matrix out(n, dim());
  Vector eps(dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t j = pick(rng);
    for (Eigen::Index k = 0; k < dim(); ++k) {
      eps[k] = normal(rng);
    }
    out.row(i) = (means_[j] + chol_[j] * eps).transpose();
  }
  return out;
}

nlohmann::json GaussianMixture::to_json() const {
  nlohmann::json j;
  j["weights"] = std::vector<double>(weights_.data(), weights_.data() + weights_.size());
  auto& comps = j["components"] = nlohmann::json::array();
  for (std::size_t k = 0; k < components(); ++k) {
    Eigen::MatrixXd c = covariances_[k];
    std::vector<double> flat(static_cast<std::size_t>(c.size()));
    for (Eigen::Index r = 0; r < c.rows(); ++r) {
      for (Eigen::Index s = 0; s < c.cols(); ++s) {
        flat[static_cast<std::size_t>(r * c.cols() + s)] = c(r, s);
      }
    }
    comps.push_back({{"mean", std::vector<double>(means_[k].data(), means_[k].data() + means_[k].size())},
                     {"covariance", flat}});
  }
  return j;
}

GaussianMixture GaussianMixture::from_json(const nlohmann::json& j) {
  auto w = j.at("weights").get<std::vector<double>>();
  std::vector<Vector> means;
  std::vector<Eigen::MatrixXd> covs;
  for (const auto& c : j.at("components")) {
    auto m = c.at("mean").get<std::vector<double>>();
    auto flat = c.at("covariance").get<std::vector<double>>();
    const auto d = static_cast<Eigen::Index>(m.size());
    means.emplace_back(Eigen::Map<Vector>(m.data(), d));
    covs.emplace_back(Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(flat.data(), d, d));
  }
  return GaussianMixture(Eigen::Map<Vector>(w.data(), static_cast<Eigen::Index>(w.size())), std::move(means),
                         std::move(covs));
}

namespace {

Vector normalized(std::span<const double> weights, std::size_t n) {
  if (weights.size() != n) {
    throw ShapeError("weighted EM: weight count does not match point count");
  }
  Vector w(static_cast<Eigen::Index>(n));
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      throw std::invalid_argument("weighted EM: weights must be finite and nonnegative");
    }
    w[static_cast<Eigen::Index>(i)] = weights[i];
    total += weights[i];
  }
  if (!(total > 0.0)) {
    throw std::invalid_argument("weighted EM: all weights are zero");
  }
  return w / total;
}

Eigen::MatrixXd weighted_covariance(const Matrix& x, const Vector& w, const Vector& mean, double reg) {
  Matrix centered = x.rowwise() - mean.transpose();
  Eigen::MatrixXd cov = centered.transpose() * w.asDiagonal() * centered;
  cov += reg * Eigen::MatrixXd::Identity(x.cols(), x.cols());
  return cov;
}

double weighted_loglik(const GaussianMixture& g, const Matrix& x, const Vector& w, Matrix* log_resp) {
  Matrix comp = g.component_logpdf(x);
  const Eigen::RowVectorXd log_pi = g.weights().array().log().matrix().transpose();
  comp.rowwise() += log_pi;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < comp.rows(); ++i) {
    const double lse = log_sum_exp(row_span(comp, i));
    if (w[i] > 0.0) {
      ll += w[i] * lse;
    }
    comp.row(i).array() -= lse;
  }
  if (log_resp != nullptr) {
    *log_resp = std::move(comp);
  }
  return ll;
}

}  // namespace

std::vector<Vector> weighted_kmeanspp(const Matrix& points, std::span<const double> weights, int components,
                                      Rng& rng) {
  const Vector w = normalized(weights, static_cast<std::size_t>(points.rows()));
  std::vector<Vector> centers;
  std::vector<double> d2(static_cast<std::size_t>(points.rows()), std::numeric_limits<double>::infinity());
  std::vector<double> score(static_cast<std::size_t>(points.rows()));
  for (int c = 0; c < components; ++c) {
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      score[static_cast<std::size_t>(i)] = c == 0 ? w[i] : w[i] * d2[static_cast<std::size_t>(i)];
    }
    if (std::accumulate(score.begin(), score.end(), 0.0) <= 0.0) {
      for (Eigen::Index i = 0; i < points.rows(); ++i) {
        score[static_cast<std::size_t>(i)] = w[i];
      }
    }
    std::discrete_distribution<Eigen::Index> pick(score.begin(), score.end());
    const Eigen::Index chosen = pick(rng);
    centers.emplace_back(points.row(chosen).transpose());
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      const double dist = (points.row(i).transpose() - centers.back()).squaredNorm();
      d2[static_cast<std::size_t>(i)] = std::min(d2[static_cast<std::size_t>(i)], dist);
    }
  }
  return centers;
}

EmResult fit_weighted_em(const Matrix& points, std::span<const double> weights, GaussianMixture start,
                         const EmOptions& options) {
  const Vector w = normalized(weights, static_cast<std::size_t>(points.rows()));
  const Eigen::Index d = points.cols();
  const auto J = start.components();
  if (start.dim() != d) {
    throw ShapeError("weighted EM: starting mixture has the wrong dimension");
  }
  Eigen::Index heaviest = 0;
  w.maxCoeff(&heaviest);
  const Vector global_mean = points.transpose() * w;
  const Eigen::MatrixXd global_cov = weighted_covariance(points, w, global_mean, options.regularization);

  EmResult result{std::move(start), {}, 0, 0, true};
  Matrix log_resp;
  double ll = weighted_loglik(result.mixture, points, w, &log_resp);
  result.log_likelihood.push_back(ll);
  bool reseeded_last = false;

  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    Vector pi(static_cast<Eigen::Index>(J));
    std::vector<Vector> means;
    std::vector<Eigen::MatrixXd> covs;
    bool reseeded = false;
    for (std::size_t j = 0; j < J; ++j) {
      const Vector r = (exp_or_zero(log_resp.col(static_cast<Eigen::Index>(j)).array()) * w.array()).matrix();
      const double mass = r.sum();
      if (!(mass > 1e-300)) {
        // Empty component: restart it at the heaviest point.
        reseeded = true;
        ++result.reseeds;
        pi[static_cast<Eigen::Index>(j)] = 1.0 / static_cast<double>(J);
        means.emplace_back(points.row(heaviest).transpose());
        covs.push_back(global_cov);
        continue;
      }
      pi[static_cast<Eigen::Index>(j)] = mass;
      Vector mu = points.transpose() * r / mass;
      covs.push_back(weighted_covariance(points, r / mass, mu, options.regularization));
      means.push_back(std::move(mu));
    }
    pi /= pi.sum();
    result.mixture = GaussianMixture(std::move(pi), std::move(means), std::move(covs));
    const double next = weighted_loglik(result.mixture, points, w, &log_resp);
    result.log_likelihood.push_back(next);
    ++result.sweeps;
    if (!reseeded && !reseeded_last && next < ll - 1e-9 * std::max(1.0, std::abs(ll))) {
      result.monotone = false;
    }
    reseeded_last = reseeded;
    const double gain = next - ll;
    ll = next;
    if (!reseeded && std::abs(gain) < options.relative_tolerance * std::max(1.0, std::abs(ll))) {
      break;
    }
  }
  return result;
}

EmResult fit_weighted_em(const Matrix& points, std::span<const double> weights, int components, Rng& rng,
                         const EmOptions& options) {
  if (components < 1) {
    throw std::invalid_argument("weighted EM: need at least one component");
  }
  if (points.rows() <= components) {
    throw std::invalid_argument("weighted EM: need more points than components");
  }
  const Vector w = normalized(weights, static_cast<std::size_t>(points.rows()));
  const Vector global_mean = points.transpose() * w;
  const Eigen::MatrixXd global_cov = weighted_covariance(points, w, global_mean, options.regularization);
  std::vector<Vector> centers = weighted_kmeanspp(points, weights, components, rng);
  std::vector<Eigen::MatrixXd> covs(static_cast<std::size_t>(components), global_cov);
  Vector pi = Vector::Constant(components, 1.0 / components);
  return fit_weighted_em(points, weights, GaussianMixture(std::move(pi), std::move(centers), std::move(covs)),
                         options);
}

namespace {

double symmetric_pair_log(std::span<const double> x, double offset) {
  double a = 0.0;
  double b = 0.0;
  for (double v : x) {
    a += (v - offset) * (v - offset);
    b += (v + offset) * (v + offset);
  }
  const double norm = -0.5 * static_cast<double>(x.size()) * kLogTwoPi;
  const double la = norm - 0.5 * a;
  const double lb = norm - 0.5 * b;
  const double m = std::max(la, lb);
  return m + std::log1p(std::exp(std::min(la, lb) - m));
}

}  // namespace

double bimodal_log_unnorm(std::span<const double> x) { return symmetric_pair_log(x, 2.5); }

UnnormalizedDensity bimodal_target(std::size_t dim, double offset) {
  return {dim, [offset](std::span<const double> x) { return symmetric_pair_log(x, offset); }};
}

}  // namespace vaeis::dists
