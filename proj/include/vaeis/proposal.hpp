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

#ifndef VAEIS_PROPOSAL_HPP
#define VAEIS_PROPOSAL_HPP

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include <vaeis/core.hpp>
#include <vaeis/kernels.hpp>
#include <vaeis/vae.hpp>

namespace vaeis::vae {

/**
 * Equal-weight mixture of M decoder Gaussians g(x | Z_m), with the anchors Z_m drawn
 * once from the prior. Components are stored in raw coordinates, so the density is
 * exact and needs no further Jacobian correction.
 */
class FiniteMixtureProposal {
 public:
  /// `anchors` is M x d_z; `means` and `stds` are M x d in raw coordinates.
  FiniteMixtureProposal(Matrix anchors, Matrix means, Matrix stds);

  [[nodiscard]] Eigen::Index dim() const { return means_.cols(); }
  [[nodiscard]] Eigen::Index components() const { return means_.rows(); }
  [[nodiscard]] const Matrix& anchors() const { return anchors_; }
  [[nodiscard]] const Matrix& means() const { return means_; }
  [[nodiscard]] const Matrix& stds() const { return stds_; }

  [[nodiscard]] double logpdf(std::span<const double> x) const;
  /// `threads` <= 0 uses the OpenMP default; the result does not depend on it.
  [[nodiscard]] Vector logpdf(const Matrix& points, int threads = 0) const;
  [[nodiscard]] Matrix sample(Eigen::Index n, Rng& rng) const;

  [[nodiscard]] nlohmann::json to_json() const;
  static FiniteMixtureProposal from_json(const nlohmann::json& j);

 private:
  Matrix anchors_;
  Matrix means_;
  Matrix stds_;
  kernels::DiagMixtureTable table_;
};

FiniteMixtureProposal build_proposal(const VaeModel& model, std::size_t components, Rng& rng);

/// Draws from the joint p(z) g(x|z); x in raw coordinates.
struct JointSample {
  Matrix points;
  Matrix latents;
};
JointSample sample_joint(const VaeModel& model, Eigen::Index n, Rng& rng);

/**
 * Plug-in density estimate (1/N) sum_k g(x_n | z_k) reusing the sample's own latents.
 * Kept as a diagnostic: used as an importance-sampling denominator it is biased.
 * Returns log values.
 */
Vector naive_marginal_estimate(const VaeModel& model, const JointSample& sample);

}  // namespace vaeis::vae

#endif
