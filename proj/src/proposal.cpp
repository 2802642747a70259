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

#include <vaeis/proposal.hpp>

#include <vector>

namespace vaeis::vae {

namespace {

struct RawHeads {
  Matrix means;
  Matrix stds;
};

RawHeads decode_to_raw(const VaeModel& model, const Matrix& latents) {
  const auto [mean, log_std] = decode_batch(model, latents);
  RawHeads out;
  out.means = ((mean.array().rowwise() * model.norm.scale.transpose().array()).rowwise() +
               model.norm.shift.transpose().array())
                  .matrix();
  out.stds = (log_std.array().exp().rowwise() * model.norm.scale.transpose().array()).matrix();
  return out;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw std::invalid_argument("proposal checkpoint: matrix data has the wrong length");
  }
  return Eigen::Map<const Matrix>(data.data(), rows, cols);
}

nlohmann::json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

}  // namespace

FiniteMixtureProposal::FiniteMixtureProposal(Matrix anchors, Matrix means, Matrix stds)
    : anchors_(std::move(anchors)), means_(std::move(means)), stds_(std::move(stds)), table_(means_, stds_) {
  if (anchors_.rows() != means_.rows()) {
    throw ShapeError("FiniteMixtureProposal: anchor count does not match component count");
  }
}

double FiniteMixtureProposal::logpdf(std::span<const double> x) const {
  if (static_cast<Eigen::Index>(x.size()) != dim()) {
    throw ShapeError("FiniteMixtureProposal: point dimension mismatch");
  }
  std::vector<double> scratch(static_cast<std::size_t>(components()));
  return table_.logpdf_row(x.data(), scratch.data());
}

Vector FiniteMixtureProposal::logpdf(const Matrix& points, int threads) const {
  return kernels::diag_mixture_logpdf_parallel(table_, points, threads);
}

Matrix FiniteMixtureProposal::sample(Eigen::Index n, Rng& rng) const {
  std::uniform_int_distribution<Eigen::Index> pick(0, components() - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(n, dim());
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::Index m = pick(rng);
    for (Eigen::Index c = 0; c < dim(); ++c) {
      out(r, c) = means_(m, c) + stds_(m, c) * normal(rng);
    }
  }
  return out;
}

nlohmann::json FiniteMixtureProposal::to_json() const {
  return {{"format", "vaeis-finite-mixture"},
          {"version", 1},
          {"anchors", matrix_to_json(anchors_)},
          {"means", matrix_to_json(means_)},
          {"stds", matrix_to_json(stds_)}};
}

FiniteMixtureProposal FiniteMixtureProposal::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "vaeis-finite-mixture") {
    throw std::invalid_argument("FiniteMixtureProposal::from_json: wrong format tag");
  }
  return {matrix_from_json(j.at("anchors")), matrix_from_json(j.at("means")), matrix_from_json(j.at("stds"))};
}

FiniteMixtureProposal build_proposal(const VaeModel& model, std::size_t components, Rng& rng) {
  if (components < 1) {
    throw std::invalid_argument("build_proposal: need at least one component");
  }
  Matrix anchors = vampprior_sample(model, static_cast<Eigen::Index>(components), rng);
  auto heads = decode_to_raw(model, anchors);
  return {std::move(anchors), std::move(heads.means), std::move(heads.stds)};
}

JointSample sample_joint(const VaeModel& model, Eigen::Index n, Rng& rng) {
  JointSample out;
  out.latents = vampprior_sample(model, n, rng);
  const auto heads = decode_to_raw(model, out.latents);
  out.points = heads.means + heads.stds.cwiseProduct(standard_normal(n, heads.means.cols(), rng));
  return out;
}

Vector naive_marginal_estimate(const VaeModel& model, const JointSample& sample) {
  const auto heads = decode_to_raw(model, sample.latents);
  const kernels::DiagMixtureTable table(heads.means, heads.stds);
  return kernels::diag_mixture_logpdf_parallel(table, sample.points);
}

}  // namespace vaeis::vae
