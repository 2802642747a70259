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

#include <vaeis/problems.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <omp.h>

#include <vaeis/copula.hpp>

namespace vaeis::problems {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr Eigen::Index kChunk = 64;

int step_count(double horizon, double h) {
  if (!(h > 0.0) || !(horizon > 0.0)) {
    throw std::invalid_argument("rk4: step and horizon must be positive");
  }
  const double ratio = horizon / h;
  const double steps = std::round(ratio);
  if (std::abs(ratio - steps) > 1e-9 * ratio) {
    throw std::invalid_argument("rk4: step does not divide the horizon");
  }
  return static_cast<int>(steps);
}

std::shared_ptr<const algos::Proposal> standard_normal_input(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return std::make_shared<algos::DiagGaussianProposal>(dists::DiagGaussian{Vector::Zero(d), Vector::Ones(d)});
}

}  // namespace

double four_branches_score(std::span<const double> x) {
  const std::size_t d = x.size();
  if (d == 0 || d % 2 != 0) {
    throw std::invalid_argument("four_branches_score: dimension must be even and positive");
  }
  double first = 0.0;
  double second = 0.0;
  for (std::size_t i = 0; i < d / 2; ++i) {
    first += x[i];
    second += x[d / 2 + i];
  }
  const double r = std::sqrt(static_cast<double>(d));
  return std::max(std::abs(first + second), std::abs(first - second)) / r;
}

Vector four_branches_scores(const Matrix& points) {
  Vector out(points.rows());
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    out[r] = four_branches_score(row_span(points, r));
  }
  return out;
}

double four_branches_probability(double t) {
  const double inside = 1.0 - 2.0 * dists::normal_ccdf(t);
  return 1.0 - inside * inside;
}

algos::PerformanceProblem four_branches_problem(std::size_t dim, double threshold) {
  if (dim == 0 || dim % 2 != 0) {
    throw std::invalid_argument("four_branches_problem: dimension must be even and positive");
  }
  return {"four-branches", dim, threshold, four_branches_scores, standard_normal_input(dim)};
}

OdeState rk4_integrate(const Derivative& f, OdeState y0, double horizon, double h) {
  const int steps = step_count(horizon - y0.a, h);
  OdeState y = y0;
  for (int s = 0; s < steps; ++s) {
    const double a = y0.a + static_cast<double>(s) * h;
    const auto [k1u, k1v] = f(a, y.u, y.v);
    const auto [k2u, k2v] = f(a + 0.5 * h, y.u + 0.5 * h * k1u, y.v + 0.5 * h * k1v);
    const auto [k3u, k3v] = f(a + 0.5 * h, y.u + 0.5 * h * k2u, y.v + 0.5 * h * k2v);
    const auto [k4u, k4v] = f(a + h, y.u + h * k3u, y.v + h * k3v);
    y.u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
    y.v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    y.a = a + h;
    if (!std::isfinite(y.u) || !std::isfinite(y.v)) {
      throw NumericError("rk4_integrate: state became non-finite at a = " + std::to_string(y.a));
    }
  }
  return y;
}

double duffing_forcing(std::span<const double> x, const DuffingParams& params, double a) {
  const std::size_t half = params.dim / 2;
  if (x.size() != params.dim) {
    throw ShapeError("duffing_forcing: expected " + std::to_string(params.dim) + " inputs");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < half; ++i) {
    const double w = params.omega(i + 1);
    s += x[i] * std::cos(w * a) + x[half + i] * std::sin(w * a);
  }
  return -params.sigma() * s;
}

double duffing_displacement(std::span<const double> x, const DuffingParams& params, double h) {
  const double c = params.damping / params.mass;
  const double k = params.stiffness / params.mass;
  const double g = params.cubic;
  const Derivative f = [&](double a, double u, double v) {
    return std::pair{v, duffing_forcing(x, params, a) - c * v - k * (u + g * u * u * u)};
  };
  return rk4_integrate(f, {params.u0, params.v0, 0.0}, params.horizon, h).u;
}

double duffing_score(std::span<const double> x, const DuffingParams& params, double h) {
  try {
    const double u = duffing_displacement(x, params, h);
    return std::max(u - params.upper, params.lower - u);
  } catch (const NumericError&) {
    return kInf;
  }
}

DuffingBatch::DuffingBatch(DuffingParams params, double h)
    : params_(params), h_(h), steps_(step_count(params.horizon, h)) {
  if (params_.dim == 0 || params_.dim % 2 != 0) {
    throw std::invalid_argument("DuffingBatch: dimension must be even and positive");
  }
  const auto d = static_cast<Eigen::Index>(params_.dim);
  const Eigen::Index half = d / 2;
  const double sigma = params_.sigma();
  table_.resize(2 * steps_ + 1, d);
  for (Eigen::Index j = 0; j < table_.rows(); ++j) {
    const double a = static_cast<double>(j) * 0.5 * h_;
    for (Eigen::Index i = 0; i < half; ++i) {
      const double w = params_.omega(static_cast<std::size_t>(i + 1));
      table_(j, i) = -sigma * std::cos(w * a);
      table_(j, half + i) = -sigma * std::sin(w * a);
    }
  }
}

void DuffingBatch::score_chunk(const Matrix& points, Eigen::Index begin, Eigen::Index end, double* out) const {
  const Eigen::Index p = end - begin;
  const Eigen::Index d = points.cols();
  const Eigen::Index rows = table_.rows();
  // forcing(j, q) = sum_i table(j, i) x_q(i), accumulated in a fixed order.
  Matrix xt = points.middleRows(begin, p).transpose();  // d x p
  Matrix forcing = Matrix::Zero(rows, p);
  for (Eigen::Index j = 0; j < rows; ++j) {
    double* fj = forcing.data() + j * p;
    const double* tj = table_.data() + j * d;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double t = tj[i];
      const double* xi = xt.data() + i * p;
#pragma omp simd
      for (Eigen::Index q = 0; q < p; ++q) {
        fj[q] += t * xi[q];
      }
    }
  }
  const double c = params_.damping / params_.mass;
  const double k = params_.stiffness / params_.mass;
  const double g = params_.cubic;
  const double h = h_;
  std::array<double, kChunk> u{};
  std::array<double, kChunk> v{};
  std::fill_n(u.begin(), p, params_.u0);
  std::fill_n(v.begin(), p, params_.v0);
  auto acc = [&](double f, double uu, double vv) { return f - c * vv - k * (uu + g * uu * uu * uu); };
  for (int s = 0; s < steps_; ++s) {
    const double* f0 = forcing.data() + (2 * s) * p;
    const double* f1 = forcing.data() + (2 * s + 1) * p;
    const double* f2 = forcing.data() + (2 * s + 2) * p;
#pragma omp simd
    for (Eigen::Index q = 0; q < p; ++q) {
      const double k1u = v[q];
      const double k1v = acc(f0[q], u[q], v[q]);
      const double k2u = v[q] + 0.5 * h * k1v;
      const double k2v = acc(f1[q], u[q] + 0.5 * h * k1u, v[q] + 0.5 * h * k1v);
      const double k3u = v[q] + 0.5 * h * k2v;
      const double k3v = acc(f1[q], u[q] + 0.5 * h * k2u, v[q] + 0.5 * h * k2v);
      const double k4u = v[q] + h * k3v;
      const double k4v = acc(f2[q], u[q] + h * k3u, v[q] + h * k3v);
      u[q] += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
      v[q] += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
  }
  for (Eigen::Index q = 0; q < p; ++q) {
    out[q] = std::isfinite(u[q]) && std::isfinite(v[q]) ? std::max(u[q] - params_.upper, params_.lower - u[q]) : kInf;
  }
}

Vector DuffingBatch::scores_serial(const Matrix& points) const {
  if (static_cast<std::size_t>(points.cols()) != params_.dim) {
    throw ShapeError("DuffingBatch: expected " + std::to_string(params_.dim) + " columns");
  }
  Vector out(points.rows());
  for (Eigen::Index b = 0; b < points.rows(); b += kChunk) {
    score_chunk(points, b, std::min(points.rows(), b + kChunk), out.data() + b);
  }
  return out;
}

Vector DuffingBatch::scores_parallel(const Matrix& points, int threads) const {
  if (static_cast<std::size_t>(points.cols()) != params_.dim) {
    throw ShapeError("DuffingBatch: expected " + std::to_string(params_.dim) + " columns");
  }
  Vector out(points.rows());
  const Eigen::Index chunks = (points.rows() + kChunk - 1) / kChunk;
  const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(nt)
  for (Eigen::Index c = 0; c < chunks; ++c) {
    const Eigen::Index b = c * kChunk;
    score_chunk(points, b, std::min(points.rows(), b + kChunk), out.data() + b);
  }
  return out;
}

algos::PerformanceProblem duffing_problem(const DuffingParams& params, double h) {
  auto batch = std::make_shared<const DuffingBatch>(params, h);
  return {"duffing", params.dim, 0.0, [batch](const Matrix& x) { return batch->scores_parallel(x); },
          standard_normal_input(params.dim)};
}

}  // namespace vaeis::problems
