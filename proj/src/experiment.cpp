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

#include <vaeis/experiment.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <Eigen/Core>

#include <vaeis/algos.hpp>
#include <vaeis/copula.hpp>
#include <vaeis/dists.hpp>
#include <vaeis/expression.hpp>
#include <vaeis/metrics.hpp>
#include <vaeis/problems.hpp>

namespace vaeis::experiment {
namespace {

using json = nlohmann::json;

constexpr double kBimodalOffset = 2.5;
constexpr int kHistogramBins = 60;
// Stream offset for the fresh reference samples used by the sample-quality metrics.
constexpr std::uint64_t kMetricsStream = 1ULL << 32;

const std::vector<std::string> kExperiments{"ais-bimodal-d10", "ais-copula-d20", "ce-fourbranches-d100",
                                            "ce-duffing-d200", "custom"};

std::string fmt(double v, int digits = 17) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// 0 for "vae", J for "gm-J", 1 for "single-gaussian", -1 otherwise.
int mixture_components(const std::string& family) {
  if (family == "vae") return 0;
  if (family == "single-gaussian") return 1;
  if (family.rfind("gm-", 0) == 0 && family.size() > 3 &&
      family.find_first_not_of("0123456789", 3) == std::string::npos) {
    const int j = std::stoi(family.substr(3));
    return j >= 1 ? j : -1;
  }
  return -1;
}

std::string method_label(const std::string& experiment, const std::string& family) {
  std::string prefix = experiment.rfind("ce-", 0) == 0 ? "CE-" : "AIS-";
  const int j = mixture_components(family);
  if (j == 0) return prefix + "VAE";
  if (j == 1) return prefix + "SG";
  return prefix + "GM" + std::to_string(j);
}

template <typename T>
void read(const json& j, const std::string& key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(key, "wrong type (" + std::string(j.at(key).type_name()) + ")");
  }
}

void atomic_write(const std::filesystem::path& path, const std::string& text) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::unique_ptr<algos::ProposalFamily> make_family(const ExperimentConfig& c) {
  const int j = mixture_components(c.family);
  if (j > 0) return std::make_unique<algos::GaussianMixtureFamily>(j);
  vae::TrainConfig t;
  t.latent_dim = c.latent_dim;
  t.pseudo_inputs = c.pseudo_inputs;
  t.hidden = c.hidden;
  t.epochs = c.epochs;
  t.batch_size = c.batch_size;
  t.learning_rate = c.learning_rate;
  t.min_ess = c.min_ess;
  return std::make_unique<algos::VaeFamily>(t, c.components, c.warm_start);
}

algos::PerformanceProblem make_problem(const ExperimentConfig& c) {
  if (c.experiment == "ce-fourbranches-d100") return problems::four_branches_problem(c.dim, c.threshold);
  problems::DuffingParams params;
  params.dim = c.dim;
  return problems::duffing_problem(params);
}

dists::UnnormalizedDensity make_target(const ExperimentConfig& c) {
  if (c.experiment == "ais-bimodal-d10") return dists::bimodal_target(c.dim, kBimodalOffset);
  if (c.experiment == "ais-copula-d20") return dists::CopulaTarget::standard().as_target();
  return {c.dim, expression::compile(c.log_target, c.dim)};
}

Matrix bimodal_sample(Eigen::Index n, std::size_t dim, Rng& rng) {
  Matrix x = standard_normal(n, static_cast<Eigen::Index>(dim), rng);
  std::bernoulli_distribution coin(0.5);
  for (Eigen::Index i = 0; i < n; ++i) {
    x.row(i).array() += coin(rng) ? kBimodalOffset : -kBimodalOffset;
  }
  return x;
}

std::vector<double> column(const Matrix& x, Eigen::Index j) {
  std::vector<double> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = x(i, j);
  return out;
}

void ais_metrics(const ExperimentConfig& c, Replication& rep) {
  Rng rng = make_stream(c.seed, kMetricsStream + static_cast<std::uint64_t>(rep.index));
  const Eigen::Index n = rep.points.rows();
  if (c.experiment == "ais-bimodal-d10") {
    rep.record["modes_found"] = metrics::to_string(metrics::bimodal_success(rep.points, kBimodalOffset));
    rep.record["kl"] = metrics::knn_kl(rep.points, bimodal_sample(n, c.dim, rng));
  } else if (c.experiment == "ais-copula-d20") {
    const Matrix fresh = dists::CopulaTarget::standard().sample(n, rng);
    json w1 = json::array();
    double worst = 0.0;
    for (Eigen::Index j = 0; j < fresh.cols(); ++j) {
      const double w = metrics::wasserstein1(column(rep.points, j), column(fresh, j));
      w1.push_back(w);
      worst = std::max(worst, w);
    }
    rep.record["w1"] = std::move(w1);
    rep.record["w1_max"] = worst;
  }
}

struct Bins {
  double lo = 0.0;
  double hi = 0.0;
};

}  // namespace

ExperimentConfig defaults_for(const std::string& id) {
  ExperimentConfig c;
  c.experiment = id;
  if (id == "ais-bimodal-d10") {
    c.dim = 10;
    c.latent_dim = 4;
  } else if (id == "ais-copula-d20") {
    c.dim = 20;
    c.latent_dim = 8;
    c.start_std = std::sqrt(2.0);
  } else if (id == "ce-fourbranches-d100") {
    c.dim = 100;
    c.rho = 0.25;
    c.threshold = problems::kFourBranchesThreshold;
  } else if (id == "ce-duffing-d200") {
    c.dim = 200;
    c.rho = 0.15;
    c.threshold = 0.0;
  } else if (id == "custom") {
    c.dim = 2;
    c.samples = 2000;
    c.iterations = 5;
    c.latent_dim = 1;
    c.pseudo_inputs = 10;
    c.components = 200;
    c.log_target = "-0.5 * ((x0 - 1)^2 + (x1 + 1)^2)";
  } else {
    throw ConfigError("experiment", "unknown experiment '" + id + "'");
  }
  return c;
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
  std::string id = "ce-fourbranches-d100";
  read(j, "experiment", id);
  ExperimentConfig c = defaults_for(id);
  static const std::set<std::string> known{
      "experiment", "family",     "dim",          "samples",     "iterations",    "max_levels", "rho",
      "threshold",  "latent_dim", "pseudo_inputs", "components", "hidden",        "epochs",     "batch_size",
      "learning_rate", "min_ess", "warm_start",   "start_mean",  "start_std",     "log_target", "keep_snapshots",
      "n_rep",      "seed",       "threads",      "out"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError(key, "unknown field");
  }
  read(j, "family", c.family);
  read(j, "dim", c.dim);
  read(j, "samples", c.samples);
  read(j, "iterations", c.iterations);
  read(j, "max_levels", c.max_levels);
  read(j, "rho", c.rho);
  read(j, "threshold", c.threshold);
  read(j, "latent_dim", c.latent_dim);
  read(j, "pseudo_inputs", c.pseudo_inputs);
  read(j, "components", c.components);
  read(j, "hidden", c.hidden);
  read(j, "epochs", c.epochs);
  read(j, "batch_size", c.batch_size);
  read(j, "learning_rate", c.learning_rate);
  read(j, "min_ess", c.min_ess);
  read(j, "warm_start", c.warm_start);
  read(j, "start_mean", c.start_mean);
  read(j, "start_std", c.start_std);
  read(j, "log_target", c.log_target);
  read(j, "keep_snapshots", c.keep_snapshots);
  read(j, "n_rep", c.n_rep);
  read(j, "seed", c.seed);
  read(j, "threads", c.threads);
  read(j, "out", c.out);
  return c;
}

json to_json(const ExperimentConfig& c) {
  return {{"experiment", c.experiment},
          {"family", c.family},
          {"dim", c.dim},
          {"samples", c.samples},
          {"iterations", c.iterations},
          {"max_levels", c.max_levels},
          {"rho", c.rho},
          {"threshold", c.threshold},
          {"latent_dim", c.latent_dim},
          {"pseudo_inputs", c.pseudo_inputs},
          {"components", c.components},
          {"hidden", c.hidden},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"min_ess", c.min_ess},
          {"warm_start", c.warm_start},
          {"start_mean", c.start_mean},
          {"start_std", c.start_std},
          {"log_target", c.log_target},
          {"keep_snapshots", c.keep_snapshots},
          {"n_rep", c.n_rep},
          {"seed", c.seed},
          {"threads", c.threads},
          {"out", c.out}};
}

void validate(const ExperimentConfig& c) {
  if (std::find(kExperiments.begin(), kExperiments.end(), c.experiment) == kExperiments.end()) {
    throw ConfigError("experiment", "unknown experiment '" + c.experiment + "'");
  }
  if (mixture_components(c.family) < 0) {
    throw ConfigError("family", "expected vae, gm-J or single-gaussian, got '" + c.family + "'");
  }
  if (c.dim == 0) throw ConfigError("dim", "must be positive");
  if (c.experiment == "ais-copula-d20" && c.dim != 20) throw ConfigError("dim", "the copula target is 20-dimensional");
  if ((c.experiment == "ce-fourbranches-d100" || c.experiment == "ce-duffing-d200") && c.dim % 2 != 0) {
    throw ConfigError("dim", "must be even");
  }
  if (c.samples < 2) throw ConfigError("samples", "must be at least 2");
  if (c.iterations < 1) throw ConfigError("iterations", "must be positive");
  if (c.max_levels < 1) throw ConfigError("max_levels", "must be positive");
  if (!(c.rho > 0.0 && c.rho < 1.0)) throw ConfigError("rho", "must lie in (0, 1)");
  if (c.latent_dim == 0) throw ConfigError("latent_dim", "must be positive");
  if (c.family == "vae" && c.latent_dim >= c.dim) throw ConfigError("latent_dim", "must be smaller than dim");
  if (c.pseudo_inputs == 0) throw ConfigError("pseudo_inputs", "must be positive");
  if (c.components == 0) throw ConfigError("components", "must be positive");
  if (c.hidden.empty() || std::find(c.hidden.begin(), c.hidden.end(), 0u) != c.hidden.end()) {
    throw ConfigError("hidden", "needs at least one positive width");
  }
  if (c.epochs < 1) throw ConfigError("epochs", "must be positive");
  if (c.batch_size < 1) throw ConfigError("batch_size", "must be positive");
  if (!(c.learning_rate > 0.0)) throw ConfigError("learning_rate", "must be positive");
  if (!(c.start_std > 0.0)) throw ConfigError("start_std", "must be positive");
  if (c.n_rep < 1) throw ConfigError("n_rep", "must be positive");
  if (c.threads < 1) throw ConfigError("threads", "must be positive");
  if (c.out.empty()) throw ConfigError("out", "must not be empty");
  if (c.experiment == "custom") {
    if (c.log_target.empty()) throw ConfigError("log_target", "required for the custom experiment");
    try {
      (void)expression::compile(c.log_target, c.dim);
    } catch (const expression::ParseError& e) {
      throw ConfigError("log_target", e.what());
    }
  }
}

Replication run_replication(const ExperimentConfig& c, int index) {
  Replication rep;
  rep.index = index;
  rep.record = {{"index", index}};
  const auto start_time = std::chrono::steady_clock::now();
  Rng rng = make_stream(c.seed, static_cast<std::uint64_t>(index));
  try {
    auto family = make_family(c);
    if (c.is_ce()) {
      algos::CeOptions options;
      options.rho = c.rho;
      options.samples = c.samples;
      options.max_levels = c.max_levels;
      options.keep_snapshots = c.keep_snapshots;
      const algos::CeResult r = algos::ce_run(make_problem(c), *family, options, rng);
      rep.record["p"] = r.p;
      rep.record["se"] = r.se;
      rep.record["n_total"] = r.n_total;
      rep.record["converged"] = r.converged;
      rep.record["ce"] = algos::to_json(r);
      rep.points = r.points;
      rep.scores = r.scores;
      const Vector indicator = (r.scores.array() >= c.threshold).cast<double>().matrix();
      rep.weights = (indicator.array() * r.log_ratios.array().exp()).matrix() / static_cast<double>(c.samples);
    } else {
      const dists::DiagGaussian g{Vector::Constant(static_cast<Eigen::Index>(c.dim), c.start_mean),
                                  Vector::Constant(static_cast<Eigen::Index>(c.dim), c.start_std)};
      const algos::DiagGaussianProposal start(g);
      algos::AisOptions options;
      options.iterations = c.iterations;
      options.samples = c.samples;
      options.min_ess = c.min_ess;
      options.keep_snapshots = c.keep_snapshots;
      algos::AisResult r;
      try {
        r = algos::ais_run(make_target(c), *family, start, options, rng);
      } catch (const algos::AisFailure& e) {
        json trace = json::array();
        for (const auto& it : e.trace()) trace.push_back(algos::to_json(it));
        rep.record["trace"] = std::move(trace);
        throw;
      }
      json trace = json::array();
      for (const auto& it : r.trace) trace.push_back(algos::to_json(it));
      rep.record["trace"] = std::move(trace);
      rep.record["final_ess"] = r.trace.back().ess;
      rep.points = std::move(r.points);
      rep.weights = std::move(r.weights);
      ais_metrics(c, rep);
    }
    rep.ok = true;
  } catch (const std::exception& e) {
    rep.ok = false;
    rep.record["error"] = e.what();
  }
  rep.record["status"] = rep.ok ? "ok" : "failed";
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
  rep.record["seconds"] = rep.seconds;
  return rep;
}

json summarize(const json& results) {
  const ExperimentConfig c = config_from_json(results.at("config"));
  const json& reps = results.at("replications");
  json s{{"method", method_label(c.experiment, c.family)},
         {"experiment", c.experiment},
         {"n_rep", reps.size()}};
  std::vector<const json*> ok;
  for (const auto& r : reps) {
    if (r.at("status") == "ok") ok.push_back(&r);
  }
  s["n_ok"] = ok.size();
  if (c.is_ce()) {
    if (ok.empty()) {
      s["N_tot"] = nullptr;
      s["p_mean"] = nullptr;
      s["COV"] = nullptr;
      s["nu_MC"] = nullptr;
      return s;
    }
    metrics::ReplicationSummary rs;
    double n_total = 0.0;
    for (const json* r : ok) {
      rs.estimates.push_back(r->at("p").get<double>());
      n_total += r->at("n_total").get<double>();
    }
    rs.n_total = n_total / static_cast<double>(ok.size());
    s["N_tot"] = rs.n_total;
    s["p_mean"] = rs.mean();
    std::optional<double> cov;
    std::optional<double> nu;
    try {
      cov = rs.cov();
      nu = rs.nu();
    } catch (const std::invalid_argument&) {
      // Zero mean or a boundary estimate: the ratios are undefined.
    }
    s["COV"] = cov ? json(*cov) : json(nullptr);
    s["nu_MC"] = nu ? json(*nu) : json(nullptr);
    return s;
  }
  double ess_sum = 0.0;
  for (const json* r : ok) ess_sum += r->at("final_ess").get<double>();
  s["final_ess_mean"] = ok.empty() ? json(nullptr) : json(ess_sum / static_cast<double>(ok.size()));
  if (c.experiment == "ais-bimodal-d10") {
    int success = 0;
    double kl = 0.0;
    for (const json* r : ok) {
      if (r->at("modes_found") == "both") {
        ++success;
        kl += r->at("kl").get<double>();
      }
    }
    s["success_rate"] = static_cast<double>(success) / static_cast<double>(reps.size());
    s["kl_mean_success"] = success > 0 ? json(kl / success) : json(nullptr);
  } else if (c.experiment == "ais-copula-d20") {
    double w1 = 0.0;
    for (const json* r : ok) w1 += r->at("w1_max").get<double>();
    s["w1_max_mean"] = ok.empty() ? json(nullptr) : json(w1 / static_cast<double>(ok.size()));
  }
  return s;
}

std::string summary_csv(const json& summary) {
  std::vector<std::string> columns{"method"};
  const std::string experiment = summary.at("experiment");
  if (experiment.rfind("ce-", 0) == 0) {
    columns.insert(columns.end(), {"N_tot", "p_mean", "COV", "nu_MC"});
  } else if (experiment == "ais-bimodal-d10") {
    columns.insert(columns.end(), {"success_rate", "kl_mean_success"});
  } else if (experiment == "ais-copula-d20") {
    columns.push_back("w1_max_mean");
  }
  columns.insert(columns.end(), {"final_ess_mean", "n_rep", "n_ok"});
  std::ostringstream out;
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) {
    out << (i ? "," : "");
    if (!summary.contains(columns[i])) continue;
    const json& v = summary.at(columns[i]);
    if (v.is_string()) {
      out << v.get<std::string>();
    } else if (v.is_number_integer() || v.is_number_unsigned()) {
      out << v.dump();
    } else if (v.is_number()) {
      out << fmt(v.get<double>(), 10);
    }
  }
  out << '\n';
  return out.str();
}

std::string histograms_csv(const ExperimentConfig& c, const Matrix& points) {
  std::ostringstream out;
  out << "dim,bin_left,bin_right,count,density,reference_pdf\n";
  const auto copula = c.experiment == "ais-copula-d20" ? std::optional(dists::CopulaTarget::standard()) : std::nullopt;
  const double n = static_cast<double>(points.rows());
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    Bins b;
    std::function<double(double)> pdf;
    if (c.experiment == "ais-bimodal-d10") {
      const double half = 5.0 * std::sqrt(1.0 + kBimodalOffset * kBimodalOffset);
      b = {-half, half};
      pdf = [](double x) {
        const double k = 0.5 / std::sqrt(2.0 * std::numbers::pi);
        return k * (std::exp(-0.5 * (x - kBimodalOffset) * (x - kBimodalOffset)) +
                    std::exp(-0.5 * (x + kBimodalOffset) * (x + kBimodalOffset)));
      };
    } else if (copula) {
      const dists::Marginal& m = copula->marginals()[static_cast<std::size_t>(j)];
      b = {m.mean() - 5.0 * m.std(), m.mean() + 5.0 * m.std()};
      pdf = [m](double x) { return std::exp(m.log_pdf(x)); };
    } else if (c.is_ce()) {
      b = {-5.0, 5.0};
      pdf = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); };
    } else {
      const double mean = points.col(j).mean();
      const double sd = std::sqrt((points.col(j).array() - mean).square().sum() / std::max(1.0, n - 1.0));
      b = {mean - 5.0 * std::max(sd, 1e-12), mean + 5.0 * std::max(sd, 1e-12)};
    }
    const double width = (b.hi - b.lo) / kHistogramBins;
    std::vector<long> counts(kHistogramBins, 0);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      const double k = std::floor((points(i, j) - b.lo) / width);
      if (k >= 0.0 && k < kHistogramBins) ++counts[static_cast<std::size_t>(k)];
    }
    for (int k = 0; k < kHistogramBins; ++k) {
      const double left = b.lo + k * width;
      const double right = left + width;
      out << j + 1 << ',' << fmt(left) << ',' << fmt(right) << ',' << counts[static_cast<std::size_t>(k)] << ','
          << fmt(static_cast<double>(counts[static_cast<std::size_t>(k)]) / (n * width)) << ',';
      if (pdf) out << fmt(pdf(0.5 * (left + right)));
      out << '\n';
    }
  }
  return out.str();
}

std::string samples_csv(const ExperimentConfig& c, const Replication& rep) {
  std::ostringstream out;
  for (Eigen::Index j = 0; j < rep.points.cols(); ++j) out << 'x' << j + 1 << ',';
  if (c.is_ce()) out << "score,";
  out << "weight\n";
  for (Eigen::Index i = 0; i < rep.points.rows(); ++i) {
    for (Eigen::Index j = 0; j < rep.points.cols(); ++j) out << fmt(rep.points(i, j)) << ',';
    if (c.is_ce()) out << fmt(rep.scores[i]) << ',';
    out << fmt(rep.weights[i]) << '\n';
  }
  return out.str();
}

RunOutcome run(const ExperimentConfig& c, std::ostream& log) {
  validate(c);
  const std::filesystem::path dir(c.out);
  std::filesystem::create_directories(dir);
  const auto start_time = std::chrono::steady_clock::now();
  std::vector<Replication> reps(static_cast<std::size_t>(c.n_rep));

#pragma omp parallel for schedule(dynamic, 1) num_threads(c.threads)
  for (int i = 0; i < c.n_rep; ++i) {
    Replication r = run_replication(c, i);
#pragma omp critical(vaeis_experiment_log)
    {
      log << "replication " << i << ": " << r.record["status"].get<std::string>();
      if (r.record.contains("p")) log << " p = " << fmt(r.record["p"].get<double>(), 6);
      if (r.record.contains("modes_found")) log << " modes = " << r.record["modes_found"].get<std::string>();
      if (r.record.contains("error")) log << " (" << r.record["error"].get<std::string>() << ")";
      log << " [" << fmt(r.seconds, 4) << " s]" << std::endl;
    }
    reps[static_cast<std::size_t>(i)] = std::move(r);
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();

  RunOutcome outcome;
  json results{{"config", to_json(c)}, {"version", kVersion}, {"replications", json::array()}};
  const Replication* first_ok = nullptr;
  for (const auto& r : reps) {
    results["replications"].push_back(r.record);
    if (r.ok) {
      ++outcome.succeeded;
      if (first_ok == nullptr) first_ok = &r;
    } else {
      ++outcome.failed;
    }
  }
  outcome.summary = summarize(results);
  results["summary"] = outcome.summary;

  atomic_write(dir / "results.json", results.dump(2) + "\n");
  atomic_write(dir / "summary.csv", summary_csv(outcome.summary));
  atomic_write(dir / "config.json", to_json(c).dump(2) + "\n");
  if (first_ok != nullptr) {
    atomic_write(dir / "samples.csv", samples_csv(c, *first_ok));
    atomic_write(dir / "histograms.csv", histograms_csv(c, first_ok->points));
  }

  std::ostringstream manifest;
  manifest << "vaeis " << kVersion << "\n"
           << "compiler: " << __VERSION__ << "\n"
           << "eigen: " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << "\n"
           << "experiment: " << c.experiment << "\n"
           << "seed: " << c.seed << "\n"
           << "threads: " << c.threads << "\n"
           << "replication streams: make_stream(seed, index)\n"
           << "samples/histograms from replication: " << (first_ok ? std::to_string(first_ok->index) : "none")
           << "\n"
           << "reproduce: vaeis run --config " << (dir / "config.json").string() << " --threads 1\n"
           << "config: " << to_json(c).dump() << "\n";
  for (const auto& r : reps) {
    manifest << "replication " << r.index << ": " << (r.ok ? "ok" : "failed") << ", " << fmt(r.seconds, 6)
             << " s\n";
  }
  manifest << "total: " << fmt(total, 6) << " s\n";
  atomic_write(dir / "manifest.txt", manifest.str());
  return outcome;
}

std::string report(const std::filesystem::path& dir) {
  const std::filesystem::path path = dir / "results.json";
  std::ifstream in(path);
  if (!in) throw std::runtime_error("report: cannot open " + path.string());
  json results;
  try {
    in >> results;
  } catch (const json::exception& e) {
    throw std::runtime_error("report: " + path.string() + " is not valid JSON: " + e.what());
  }
  const std::string csv = summary_csv(summarize(results));
  atomic_write(dir / "summary.csv", csv);
  return csv;
}

}  // namespace vaeis::experiment
