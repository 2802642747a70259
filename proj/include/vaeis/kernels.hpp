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

#ifndef VAEIS_KERNELS_HPP
#define VAEIS_KERNELS_HPP

#include <vaeis/core.hpp>

/**
 * \file
 * \brief Hot loops shared by the proposals and metrics.
 *
 * Every kernel comes as a serial reference and an OpenMP version. Both call the same
 * per-row routine, so their results are bit-identical for any thread count.
 */

namespace vaeis::kernels {

/// Equal-weight mixture of M diagonal Gaussians, stored component-minor for
/// vectorization across components.
class DiagMixtureTable {
 public:
  /// `means` and `stds` are M x d.
  DiagMixtureTable(const Matrix& means, const Matrix& stds);

  [[nodiscard]] Eigen::Index dim() const { return means_t_.rows(); }
  [[nodiscard]] Eigen::Index components() const { return means_t_.cols(); }

  /// log (1/M) sum_m N(x; mean_m, diag(std_m^2)) for one point.
  /// `scratch` must hold components() doubles.
  double logpdf_row(const double* x, double* scratch) const;

 private:
  Matrix means_t_;    // d x M
  Matrix inv_std_t_;  // d x M
  Vector log_norm_;   // M, includes -log M
};

Vector diag_mixture_logpdf_serial(const DiagMixtureTable& table, const Matrix& points);
/// `threads` <= 0 uses the OpenMP default.
Vector diag_mixture_logpdf_parallel(const DiagMixtureTable& table, const Matrix& points, int threads = 0);

/// Euclidean distance from each query row to its nearest reference row. With
/// `exclude_self`, query i skips reference i (query and reference are the same set).
Vector nearest_distance_serial(const Matrix& query, const Matrix& reference, bool exclude_self);
Vector nearest_distance_parallel(const Matrix& query, const Matrix& reference, bool exclude_self,
                                 int threads = 0);

}  // namespace vaeis::kernels

#endif
