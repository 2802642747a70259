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

#include <vaeis/algos.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace vaeis::algos {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector evaluate_target(const dists::UnnormalizedDensity& target, const Matrix& points) {
  Vector out(points.rows());
  const Eigen::Index n = points.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index r = 0; r < n; ++r) {
    out[r] = target.log_unnorm(row_span(points, r));
  }
  return out;
}

}  // namespace

IsEstimate is_estimate(const Vector& log_f, const Vector& log_q, const Vector& indicator) {
  const Eigen::Index n = log_f.size();
  if (log_q.size() != n || indicator.size() != n) {
    throw ShapeError("is_estimate: input lengths differ");
  }
  if (n == 0) {
    throw std::invalid_argument("is_estimate: empty sample");
  }
  Vector terms(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (indicator[i] == 0.0) {
      terms[i] = 0.0;
      continue;
    }
    const double w = std::exp(log_f[i] - log_q[i]);
    if (!std::isfinite(w)) {
      throw NumericError("is_estimate: non-finite likelihood ratio at index " + std::to_string(i));
    }
    terms[i] = indicator[i] * w;
  }
  IsEstimate out;
  out.p = terms.mean();
  if (n > 1) {
    const double var = (terms.array() - out.p).square().sum() / static_cast<double>(n - 1);
    out.se = std::sqrt(var / static_cast<double>(n));
  }
  return out;
}

double quantile(std::span<const double> values, double q) {
  if (values.empty()) {
    throw std::invalid_argument("quantile: empty input");
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::invalid_argument("quantile: q must lie in [0, 1]");
  }
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0 || v[lo] == v[hi]) {
    return v[lo];
  }
  if (std::isinf(v[lo]) || std::isinf(v[hi])) {
    return std::isinf(v[lo]) ? v[lo] : v[hi];
  }
  return v[lo] + frac * (v[hi] - v[lo]);
}

double ess(std::span<const double> normalized_weights) {
  double s = 0.0;
  for (double w : normalized_weights) {
    if (w < 0.0) {
      throw std::invalid_argument("ess: negative weight");
    }
    s += w * w;
  }
  if (s == 0.0) {
    throw std::invalid_argument("ess: all weights zero");
  }
  return 1.0 / s;
}

Vector normalize_log_weights(const Vector& log_weights) {
  const double lse = log_sum_exp({log_weights.data(), static_cast<std::size_t>(log_weights.size())});
  if (!std::isfinite(lse)) {
    throw DegenerateWeightsError("normalize_log_weights: no finite log-weight", 0.0);
  }
  return exp_or_zero(log_weights.array() - lse).matrix();
}

DiagGaussianProposal::DiagGaussianProposal(dists::DiagGaussian g) : g_(std::move(g)) {
  if (g_.mean.size() != g_.std.size() || !(g_.std.array() > 0.0).all()) {
    throw std::invalid_argument("DiagGaussianProposal: need matching sizes and positive stds");
  }
}

Matrix DiagGaussianProposal::sample(Eigen::Index n, Rng& rng) const { return dists::diag_gaussian_sample(g_, n, rng); }

Vector DiagGaussianProposal::logpdf(const Matrix& points) const {
  Vector out(points.rows());
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    out[r] = dists::diag_gaussian_logpdf(row_span(points, r), g_);
  }
  return out;
}

nlohmann::json DiagGaussianProposal::to_json() const {
  return {{"family", "diag-gaussian"},
          {"mean", std::vector<double>(g_.mean.begin(), g_.mean.end())},
          {"std", std::vector<double>(g_.std.begin(), g_.std.end())}};
}

nlohmann::json MixtureProposal::to_json() const { return {{"family", "gaussian-mixture"}, {"mixture", mixture_.to_json()}}; }

nlohmann::json VaeProposal::to_json() const { return {{"family", "vae"}, {"mixture", mixture_.to_json()}}; }

std::unique_ptr<Proposal> VaeFamily::fit(const Matrix& points, const Vector& log_weights, Rng& rng,
                                         nlohmann::json* info) {
  const vae::WeightedDataset data{points, log_weights};
  const vae::VaeModel* warm = warm_start_ && previous_ ? &*previous_ : nullptr;
  auto trained = vae::train_vae(data, config_, rng, warm);
  auto mixture = vae::build_proposal(trained.model, components_, rng);
  if (info != nullptr) {
    const auto& t = trained.trace;
    *info = {{"ess", t.ess},
             {"vp_steps", t.vp.steps},
             {"vp_max_error", t.vp.max_error},
             {"ae_final_loss", t.ae_final_loss},
             {"improved", t.improved}};
    if (!t.epochs.empty()) {
      (*info)["final_loss"] = t.epochs.back().loss;
      (*info)["final_kl"] = t.epochs.back().kl;
    }
  }
  if (warm_start_) {
    previous_ = trained.model;
  }
  return std::make_unique<VaeProposal>(std::move(trained.model), std::move(mixture));
}

std::string GaussianMixtureFamily::name() const {
  return components_ == 1 ? "single-gaussian" : "gm-" + std::to_string(components_);
}

std::unique_ptr<Proposal> GaussianMixtureFamily::fit(const Matrix& points, const Vector& log_weights, Rng& rng,
                                                     nlohmann::json* info) {
  const Vector w = normalize_log_weights(log_weights);
  auto result = dists::fit_weighted_em(points, {w.data(), static_cast<std::size_t>(w.size())}, components_, rng,
                                       options_);
  if (info != nullptr) {
    *info = {{"ess", ess({w.data(), static_cast<std::size_t>(w.size())})},
             {"sweeps", result.sweeps},
             {"reseeds", result.reseeds},
             {"monotone", result.monotone},
             {"log_likelihood", result.log_likelihood.empty() ? 0.0 : result.log_likelihood.back()}};
  }
  return std::make_unique<MixtureProposal>(std::move(result.mixture));
}

AisResult ais_run(const dists::UnnormalizedDensity& target, ProposalFamily& family, const Proposal& start,
                  const AisOptions& options, Rng& rng) {
  if (options.iterations < 1 || options.samples < 2) {
    throw std::invalid_argument("ais_run: need at least one iteration and two samples");
  }
  if (static_cast<Eigen::Index>(target.dim) != start.dim()) {
    throw ShapeError("ais_run: target and start proposal dimensions differ");
  }
  std::vector<AisIteration> trace;
  const Proposal* current = &start;
  std::unique_ptr<Proposal> owned;
  for (int it = 1; it <= options.iterations; ++it) {
    AisIteration rec;
    rec.iteration = it;
    if (options.keep_snapshots) {
      rec.snapshot = current->to_json();
    }
    const Matrix x = current->sample(options.samples, rng);
    const Vector log_w = evaluate_target(target, x) - current->logpdf(x);
    if (log_w.hasNaN()) {
      throw AisFailure("ais_run: NaN log-weight at iteration " + std::to_string(it), trace);
    }
    rec.max_log_weight = log_w.maxCoeff();
    if (!std::isfinite(rec.max_log_weight)) {
      trace.push_back(rec);
      throw AisFailure("ais_run: no point with positive weight at iteration " + std::to_string(it), trace);
    }
    const Vector w = normalize_log_weights(log_w);
    rec.ess = ess({w.data(), static_cast<std::size_t>(w.size())});
    if (rec.ess < options.min_ess) {
      trace.push_back(rec);
      throw AisFailure("ais_run: effective sample size " + std::to_string(rec.ess) + " at iteration " +
                           std::to_string(it),
                       trace);
    }
    if (it == options.iterations) {
      if (options.on_iteration) {
        options.on_iteration(rec);
      }
      trace.push_back(rec);
      return {x, w, std::move(trace)};
    }
    try {
      owned = family.fit(x, log_w, rng, &rec.fit);
    } catch (const std::exception& e) {
      trace.push_back(rec);
      throw AisFailure(std::string("ais_run: fit failed at iteration ") + std::to_string(it) + ": " + e.what(),
                       trace);
    }
    current = owned.get();
    if (options.on_iteration) {
      options.on_iteration(rec);
    }
    trace.push_back(std::move(rec));
  }
  throw std::logic_error("ais_run: unreachable");
}

std::vector<double> CeResult::thresholds() const {
  std::vector<double> out;
  for (const auto& l : levels) {
    out.push_back(l.gamma);
  }
  return out;
}

CeResult ce_run(const PerformanceProblem& problem, ProposalFamily& family, const CeOptions& options, Rng& rng) {
  if (!(options.rho > 0.0 && options.rho < 1.0)) {
    throw std::invalid_argument("ce_run: rho must lie in (0, 1)");
  }
  if (options.max_levels < 1 || options.samples < 2) {
    throw std::invalid_argument("ce_run: need max_levels >= 1 and at least two samples");
  }
  if (!problem.input || !problem.scores) {
    throw std::invalid_argument("ce_run: problem needs an input density and a score function");
  }
  CeResult result;
  const Proposal* current = problem.input.get();
  std::unique_ptr<Proposal> owned;
  double previous_gamma = -kInf;
  for (int level = 1; level <= options.max_levels; ++level) {
    CeLevel rec;
    rec.level = level;
    if (options.keep_snapshots) {
      rec.snapshot = current->to_json();
    }
    const Matrix x = current->sample(options.samples, rng);
    const Vector s = problem.scores(x);
    result.n_total += options.samples;
    if (s.hasNaN()) {
      throw NumericError("ce_run: NaN score at level " + std::to_string(level));
    }
    const double q = quantile({s.data(), static_cast<std::size_t>(s.size())}, 1.0 - options.rho);
    rec.gamma = std::max(std::min(problem.threshold, q), previous_gamma);
    previous_gamma = rec.gamma;
    rec.above = (s.array() >= rec.gamma).count();

    const Vector log_f = problem.input->logpdf(x);
    const Vector log_q = level == 1 ? log_f : current->logpdf(x);
    if (rec.gamma >= problem.threshold || level == options.max_levels || rec.above == 0) {
      const Vector indicator = (s.array() >= problem.threshold).cast<double>().matrix();
      const IsEstimate est = is_estimate(log_f, log_q, indicator);
      result.p = est.p;
      result.se = est.se;
      result.converged = rec.gamma >= problem.threshold;
      result.points = x;
      result.scores = s;
      result.log_ratios = log_f - log_q;
      if (!result.converged) {
        result.note = rec.above == 0 ? "no sample reached the intermediate threshold"
                                     : "maximum number of levels reached";
      }
      if (options.on_level) {
        options.on_level(rec);
      }
      result.levels.push_back(std::move(rec));
      return result;
    }
    Vector log_w(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      log_w[i] = s[i] >= rec.gamma ? log_f[i] - log_q[i] : -kInf;
    }
    owned = family.fit(x, log_w, rng, &rec.fit);
    current = owned.get();
    if (options.on_level) {
      options.on_level(rec);
    }
    result.levels.push_back(std::move(rec));
  }
  return result;
}

nlohmann::json to_json(const AisIteration& it) {
  nlohmann::json j{{"iteration", it.iteration}, {"ess", it.ess}, {"max_log_weight", it.max_log_weight}};
  if (!it.fit.is_null()) {
    j["fit"] = it.fit;
  }
  if (!it.snapshot.is_null()) {
    j["snapshot"] = it.snapshot;
  }
  return j;
}

nlohmann::json to_json(const CeResult& result) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& l : result.levels) {
    nlohmann::json j{{"level", l.level}, {"gamma", l.gamma}, {"above", l.above}};
    if (!l.fit.is_null()) {
      j["fit"] = l.fit;
    }
    if (!l.snapshot.is_null()) {
      j["snapshot"] = l.snapshot;
    }
    levels.push_back(std::move(j));
  }
  return {{"p", result.p},         {"se", result.se},     {"n_total", result.n_total},
          {"converged", result.converged}, {"note", result.note}, {"levels", std::move(levels)}};
}

}  // namespace vaeis::algos
