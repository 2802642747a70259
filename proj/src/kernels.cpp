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

#include <vaeis/kernels.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <omp.h>

namespace vaeis::kernels {

DiagMixtureTable::DiagMixtureTable(const Matrix& means, const Matrix& stds) {
  if (means.rows() != stds.rows() || means.cols() != stds.cols() || means.rows() == 0) {
    throw ShapeError("DiagMixtureTable: means and stds must be the same nonempty M x d shape");
  }
  if (!(stds.array() > 0.0).all()) {
    throw std::invalid_argument("DiagMixtureTable: standard deviations must be positive");
  }
  const auto m = means.rows();
  const auto d = means.cols();
  means_t_ = means.transpose();
  inv_std_t_ = stds.cwiseInverse().transpose();
  log_norm_.resize(m);
  const double log_m = std::log(static_cast<double>(m));
  for (Eigen::Index j = 0; j < m; ++j) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      s += std::log(stds(j, i));
    }
    log_norm_[j] = -s - 0.5 * static_cast<double>(d) * kLogTwoPi - log_m;
  }
}

double DiagMixtureTable::logpdf_row(const double* x, double* scratch) const {
  const Eigen::Index m = components();
  const Eigen::Index d = dim();
  std::fill(scratch, scratch + m, 0.0);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double xi = x[i];
    const double* mu = means_t_.data() + i * m;
    const double* is = inv_std_t_.data() + i * m;
#pragma omp simd
    for (Eigen::Index j = 0; j < m; ++j) {
      const double u = (xi - mu[j]) * is[j];
      scratch[j] += u * u;
    }
  }
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < m; ++j) {
    scratch[j] = log_norm_[j] - 0.5 * scratch[j];
    best = std::max(best, scratch[j]);
  }
  if (!std::isfinite(best)) {
    return best;
  }
  double acc = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    acc += std::exp(scratch[j] - best);
  }
  return best + std::log(acc);
}

namespace {

void check_mixture_input(const DiagMixtureTable& table, const Matrix& points) {
  if (points.cols() != table.dim()) {
    throw ShapeError("diag_mixture_logpdf: points have " + std::to_string(points.cols()) +
                     " columns, mixture has dimension " + std::to_string(table.dim()));
  }
}

double nearest_row(const Matrix& reference_t, const double* q, Eigen::Index skip, double* scratch) {
  const Eigen::Index n = reference_t.cols();
  const Eigen::Index d = reference_t.rows();
  std::fill(scratch, scratch + n, 0.0);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double qi = q[i];
    const double* r = reference_t.data() + i * n;
#pragma omp simd
    for (Eigen::Index j = 0; j < n; ++j) {
      const double u = qi - r[j];
      scratch[j] += u * u;
    }
  }
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j != skip) {
      best = std::min(best, scratch[j]);
    }
  }
  return std::sqrt(best);
}

void check_nearest_input(const Matrix& query, const Matrix& reference, bool exclude_self) {
  if (query.cols() != reference.cols()) {
    throw ShapeError("nearest_distance: query and reference dimensions differ");
  }
  if (reference.rows() < (exclude_self ? 2 : 1)) {
    throw std::invalid_argument("nearest_distance: reference set too small");
  }
  if (exclude_self && query.rows() != reference.rows()) {
    throw ShapeError("nearest_distance: exclude_self needs query and reference to be the same set");
  }
}

int resolve_threads(int threads) { return threads > 0 ? threads : omp_get_max_threads(); }

}  // namespace

Vector diag_mixture_logpdf_serial(const DiagMixtureTable& table, const Matrix& points) {
  check_mixture_input(table, points);
  Vector out(points.rows());
  std::vector<double> scratch(static_cast<std::size_t>(table.components()));
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    out[r] = table.logpdf_row(points.data() + r * points.cols(), scratch.data());
  }
  return out;
}

Vector diag_mixture_logpdf_parallel(const DiagMixtureTable& table, const Matrix& points, int threads) {
  check_mixture_input(table, points);
  Vector out(points.rows());
  const Eigen::Index n = points.rows();
#pragma omp parallel num_threads(resolve_threads(threads))
  {
    std::vector<double> scratch(static_cast<std::size_t>(table.components()));
#pragma omp for schedule(static)
    for (Eigen::Index r = 0; r < n; ++r) {
      out[r] = table.logpdf_row(points.data() + r * points.cols(), scratch.data());
    }
  }
  return out;
}

Vector nearest_distance_serial(const Matrix& query, const Matrix& reference, bool exclude_self) {
  check_nearest_input(query, reference, exclude_self);
  const Matrix reference_t = reference.transpose();
  Vector out(query.rows());
  std::vector<double> scratch(static_cast<std::size_t>(reference.rows()));
  for (Eigen::Index r = 0; r < query.rows(); ++r) {
    out[r] = nearest_row(reference_t, query.data() + r * query.cols(), exclude_self ? r : -1, scratch.data());
  }
  return out;
}

Vector nearest_distance_parallel(const Matrix& query, const Matrix& reference, bool exclude_self, int threads) {
  check_nearest_input(query, reference, exclude_self);
  const Matrix reference_t = reference.transpose();
  Vector out(query.rows());
  const Eigen::Index n = query.rows();
#pragma omp parallel num_threads(resolve_threads(threads))
  {
    std::vector<double> scratch(static_cast<std::size_t>(reference.rows()));
#pragma omp for schedule(static)
    for (Eigen::Index r = 0; r < n; ++r) {
      out[r] = nearest_row(reference_t, query.data() + r * query.cols(), exclude_self ? r : -1, scratch.data());
    }
  }
  return out;
}

}  // namespace vaeis::kernels
