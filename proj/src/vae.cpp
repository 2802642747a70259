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

#include <vaeis/vae.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace vaeis::vae {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Matrix row_matrix(std::span<const double> x) {
  return Eigen::Map<const Matrix>(x.data(), 1, static_cast<Eigen::Index>(x.size()));
}

std::vector<std::size_t> layer_dims(std::size_t in, std::span<const std::size_t> hidden, std::size_t out) {
  std::vector<std::size_t> dims{in};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  return dims;
}

Matrix gather_rows(const Matrix& m, std::span<const Eigen::Index> idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(idx[i]);
  }
  return out;
}

Vector gather(const Vector& v, std::span<const Eigen::Index> idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = v[idx[i]];
  }
  return out;
}

// Encoder heads of the pseudo-inputs, evaluated outside the tape.
std::pair<Matrix, Matrix> prior_components(const VaeModel& model) {
  return nets::gaussian_head_eval(nets::mlp_eval(model.encoder, pseudo_inputs(model)));
}

// log N(z_b; mu_k, diag(exp(2 ls_k))) for all b, k, as a B x K tape node.
ad::Var pairwise_log_normal(ad::Var z, ad::Var mu, ad::Var log_std) {
  const Eigen::Index dz = z.cols();
  const ad::Var inv_var = ad::exp(ad::affine(log_std, -2.0, 0.0));
  ad::Var quad;
  for (Eigen::Index j = 0; j < dz; ++j) {
    const ad::Var diff = ad::slice_cols(z, j, 1) - ad::transpose(ad::slice_cols(mu, j, 1));
    const ad::Var term = ad::square(diff) * ad::transpose(ad::slice_cols(inv_var, j, 1));
    quad = j == 0 ? term : quad + term;
  }
  const ad::Var log_det = ad::transpose(ad::sum(log_std, ad::Axis::kCols));
  return ad::affine(quad, -0.5, -0.5 * static_cast<double>(dz) * kLogTwoPi) - log_det;
}

template <typename F>
auto with_term(const char* term, F&& f) {
  try {
    return f();
  } catch (const NumericError& e) {
    throw NumericError(std::string("welbo: non-finite ") + term + " term (" + e.what() + ")");
  }
}

ad::Var negative_elbo(ad::Tape& tape, const VaeModel& model, const Matrix& batch, const Vector* weights, Rng& rng,
                      MinibatchStats* stats) {
  if (batch.rows() == 0) {
    throw std::invalid_argument("welbo_minibatch: empty batch");
  }
  if (static_cast<std::size_t>(batch.cols()) != model.dim) {
    throw ShapeError("welbo_minibatch: batch width " + std::to_string(batch.cols()) + ", model dimension " +
                     std::to_string(model.dim));
  }
  if (weights != nullptr && weights->size() != batch.rows()) {
    throw ShapeError("welbo_minibatch: weight count does not match batch size");
  }
  const Eigen::Index b = batch.rows();
  const auto dz = static_cast<Eigen::Index>(model.latent_dim);
  const auto d = static_cast<Eigen::Index>(model.dim);

  const ad::Var x = tape.constant(batch);
  const Matrix eps = standard_normal(b, dz, rng);

  ad::Var z;
  ad::Var log_q;
  with_term("encoder", [&] {
    const auto post = nets::gaussian_head(nets::mlp_forward(tape, model.encoder, x));
    z = post.mean + ad::exp(post.log_std) * tape.constant(eps);
    const Matrix q_const =
        (-0.5 * eps.array().square().rowwise().sum() - 0.5 * static_cast<double>(dz) * kLogTwoPi).matrix();
    log_q = tape.constant(q_const) - ad::sum(post.log_std, ad::Axis::kCols);
    return 0;
  });

  const ad::Var log_g = with_term("reconstruction", [&] {
    const auto lik = nets::gaussian_head(nets::mlp_forward(tape, model.decoder, z));
    const ad::Var u = (x - lik.mean) * ad::exp(ad::affine(lik.log_std, -1.0, 0.0));
    const ad::Var per = ad::affine(ad::square(u), -0.5, 0.0) - lik.log_std;
    return ad::sum(per, ad::Axis::kCols) + (-0.5 * static_cast<double>(d) * kLogTwoPi);
  });

  const ad::Var log_p = with_term("prior", [&] {
    const auto k = static_cast<Eigen::Index>(model.pseudo_inputs);
    const ad::Var u = nets::mlp_forward(tape, model.vpnet, tape.constant(Matrix::Identity(k, k)));
    const auto comp = nets::gaussian_head(nets::mlp_forward(tape, model.encoder, u));
    const ad::Var pair = pairwise_log_normal(z, comp.mean, comp.log_std);
    return ad::log_sum_exp(pair, ad::Axis::kCols) + (-std::log(static_cast<double>(k)));
  });

  return with_term("loss", [&] {
    const ad::Var kl = log_q - log_p;
    const ad::Var per = kl - log_g;
    if (stats != nullptr) {
      stats->reconstruction = log_g.value().mean();
      stats->kl = kl.value().mean();
    }
    if (weights == nullptr) {
      return ad::mean(per);
    }
    return ad::mean(tape.constant(*weights) * per);
  });
}

std::vector<Eigen::Index> shuffled_indices(Eigen::Index n, Rng& rng) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

Vector json_vector(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

NormalizationAffine NormalizationAffine::identity(Eigen::Index dim) {
  return {Vector::Zero(dim), Vector::Ones(dim)};
}

Matrix NormalizationAffine::to_normalized(const Matrix& raw) const {
  if (raw.cols() != shift.size()) {
    throw ShapeError("normalization: point width does not match");
  }
  return ((raw.rowwise() - shift.transpose()).array().rowwise() / scale.transpose().array()).matrix();
}

Matrix NormalizationAffine::to_raw(const Matrix& normalized) const {
  if (normalized.cols() != shift.size()) {
    throw ShapeError("normalization: point width does not match");
  }
  return ((normalized.array().rowwise() * scale.transpose().array()).rowwise() + shift.transpose().array()).matrix();
}

double NormalizationAffine::log_jacobian() const { return scale.array().log().sum(); }

std::vector<ad::Parameter*> VaeModel::parameters() {
  std::vector<ad::Parameter*> out = encoder.parameters();
  for (auto* p : decoder.parameters()) {
    out.push_back(p);
  }
  for (auto* p : vpnet.parameters()) {
    out.push_back(p);
  }
  return out;
}

VaeModel make_model(std::size_t dim, std::size_t latent_dim, std::size_t pseudo_inputs,
                    std::span<const std::size_t> hidden, Rng& rng) {
  if (latent_dim < 1 || latent_dim >= dim) {
    throw std::invalid_argument("make_model: need 1 <= latent_dim < dim");
  }
  if (pseudo_inputs < 1) {
    throw std::invalid_argument("make_model: need at least one pseudo-input");
  }
  VaeModel m;
  m.dim = dim;
  m.latent_dim = latent_dim;
  m.pseudo_inputs = pseudo_inputs;
  m.encoder = nets::init_params(layer_dims(dim, hidden, 2 * latent_dim), rng, "encoder");
  m.decoder = nets::init_params(layer_dims(latent_dim, hidden, 2 * dim), rng, "decoder");
  const std::size_t vp_dims[] = {pseudo_inputs, dim};
  m.vpnet = nets::init_params(vp_dims, rng, "vpnet", nets::Activation::kIdentity, false);
  m.norm = NormalizationAffine::identity(static_cast<Eigen::Index>(dim));
  return m;
}

Vector WeightedDataset::normalized_weights() const {
  if (log_weights.size() != points.rows()) {
    throw ShapeError("WeightedDataset: log-weight count does not match point count");
  }
  if (log_weights.size() == 0) {
    throw std::invalid_argument("WeightedDataset: empty dataset");
  }
  const double top = log_weights.maxCoeff();
  if (!std::isfinite(top)) {
    throw DegenerateWeightsError("WeightedDataset: no finite log-weight", 0.0);
  }
  Vector w = exp_or_zero(log_weights.array() - top).matrix();
  w *= static_cast<double>(w.size()) / w.sum();
  return w;
}

double WeightedDataset::ess() const {
  const Vector w = normalized_weights();
  return w.sum() * w.sum() / w.squaredNorm();
}

NormalizationAffine fit_normalization(const WeightedDataset& data, double scale_floor) {
  const Vector w = data.normalized_weights() / static_cast<double>(data.size());
  const Vector mean = data.points.transpose() * w;
  const Matrix centered = data.points.rowwise() - mean.transpose();
  Vector var = centered.array().square().matrix().transpose() * w;
  Vector scale = var.cwiseSqrt().cwiseMax(scale_floor);
  return {mean, scale};
}

dists::DiagGaussian encode(const VaeModel& model, std::span<const double> x) {
  const auto [mean, log_std] =
      nets::gaussian_head_eval(nets::mlp_eval(model.encoder, model.norm.to_normalized(row_matrix(x))));
  return {mean.row(0).transpose(), log_std.row(0).transpose().array().exp().matrix()};
}

dists::DiagGaussian decode(const VaeModel& model, std::span<const double> z) {
  const auto [mean, log_std] = decode_batch(model, row_matrix(z));
  return {mean.row(0).transpose(), log_std.row(0).transpose().array().exp().matrix()};
}

dists::DiagGaussian decode_raw(const VaeModel& model, std::span<const double> z) {
  const auto g = decode(model, z);
  return {model.norm.shift + model.norm.scale.cwiseProduct(g.mean), model.norm.scale.cwiseProduct(g.std)};
}

std::pair<Matrix, Matrix> decode_batch(const VaeModel& model, const Matrix& latents) {
  return nets::gaussian_head_eval(nets::mlp_eval(model.decoder, latents));
}

Matrix pseudo_inputs(const VaeModel& model) {
  const auto k = static_cast<Eigen::Index>(model.pseudo_inputs);
  return nets::mlp_eval(model.vpnet, Matrix::Identity(k, k));
}

Vector vampprior_logpdf(const VaeModel& model, const Matrix& latents) {
  if (static_cast<std::size_t>(latents.cols()) != model.latent_dim) {
    throw ShapeError("vampprior_logpdf: latent width mismatch");
  }
  const auto [mu, log_std] = prior_components(model);
  const Eigen::Index k = mu.rows();
  const Eigen::Index dz = mu.cols();
  const Matrix inv_std = (-log_std.array()).exp().matrix();
  Vector norm_k(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    norm_k[j] = -log_std.row(j).sum() - 0.5 * static_cast<double>(dz) * kLogTwoPi;
  }
  Vector out(latents.rows());
  std::vector<double> terms(static_cast<std::size_t>(k));
  for (Eigen::Index r = 0; r < latents.rows(); ++r) {
    for (Eigen::Index j = 0; j < k; ++j) {
      double q = 0.0;
      for (Eigen::Index c = 0; c < dz; ++c) {
        const double u = (latents(r, c) - mu(j, c)) * inv_std(j, c);
        q += u * u;
      }
      terms[static_cast<std::size_t>(j)] = norm_k[j] - 0.5 * q;
    }
    out[r] = log_sum_exp(terms) - std::log(static_cast<double>(k));
  }
  return out;
}

Matrix vampprior_sample(const VaeModel& model, Eigen::Index n, Rng& rng) {
  const auto [mu, log_std] = prior_components(model);
  std::uniform_int_distribution<Eigen::Index> pick(0, mu.rows() - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(n, mu.cols());
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::Index k = pick(rng);
    for (Eigen::Index c = 0; c < mu.cols(); ++c) {
      out(r, c) = mu(k, c) + std::exp(log_std(k, c)) * normal(rng);
    }
  }
  return out;
}

ad::Var welbo_minibatch(ad::Tape& tape, const VaeModel& model, const Matrix& batch, const Vector& weights,
                        Rng& rng, MinibatchStats* stats) {
  return negative_elbo(tape, model, batch, &weights, rng, stats);
}

ad::Var elbo_minibatch(ad::Tape& tape, const VaeModel& model, const Matrix& batch, Rng& rng, MinibatchStats* stats) {
  return negative_elbo(tape, model, batch, nullptr, rng, stats);
}

std::vector<Eigen::Index> weighted_sample_without_replacement(const Vector& log_weights, std::size_t k, Rng& rng) {
  // Key log(E_i) - log w_i with E_i ~ Exp(1); the k smallest keys form the sample.
  std::exponential_distribution<double> expo(1.0);
  std::vector<std::pair<double, Eigen::Index>> keys;
  keys.reserve(static_cast<std::size_t>(log_weights.size()));
  for (Eigen::Index i = 0; i < log_weights.size(); ++i) {
    const double e = expo(rng);
    if (std::isfinite(log_weights[i])) {
      keys.emplace_back(std::log(e) - log_weights[i], i);
    }
  }
  if (keys.size() < k) {
    throw std::invalid_argument("weighted_sample_without_replacement: only " + std::to_string(keys.size()) +
                                " positive weights for " + std::to_string(k) + " picks");
  }
  std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(k), keys.end());
  std::vector<Eigen::Index> out(k);
  for (std::size_t i = 0; i < k; ++i) {
    out[i] = keys[i].second;
  }
  return out;
}

VpPretrainResult pretrain_vpnet(VaeModel& model, const Matrix& normalized_points, const Vector& log_weights,
                                Rng& rng, const VpPretrainOptions& options) {
  VpPretrainResult result;
  result.selected = weighted_sample_without_replacement(log_weights, model.pseudo_inputs, rng);
  const Matrix targets = gather_rows(normalized_points, result.selected);
  const auto k = static_cast<Eigen::Index>(model.pseudo_inputs);
  const Matrix eye = Matrix::Identity(k, k);
  nets::Adam adam(model.vpnet.parameters(), {options.learning_rate});
  auto max_error = [&] { return (pseudo_inputs(model) - targets).rowwise().norm().maxCoeff(); };
  result.max_error = max_error();
  while (result.steps < options.max_steps &&
         (result.steps < options.min_steps || result.max_error > options.tolerance)) {
    ad::Tape tape;
    const ad::Var u = nets::mlp_forward(tape, model.vpnet, tape.constant(eye));
    const ad::Var loss = ad::mean(ad::square(u - tape.constant(targets)));
    adam.step(tape.backward(loss));
    ++result.steps;
    result.max_error = max_error();
  }
  return result;
}

ad::Var autoencoder_loss(ad::Tape& tape, const VaeModel& model, const Matrix& batch, const Vector& weights) {
  if (weights.size() != batch.rows()) {
    throw ShapeError("autoencoder_loss: weight count does not match batch size");
  }
  try {
    const ad::Var x = tape.constant(batch);
    const auto post = nets::gaussian_head(nets::mlp_forward(tape, model.encoder, x));
    const auto lik = nets::gaussian_head(nets::mlp_forward(tape, model.decoder, post.mean));
    const ad::Var mse = ad::mean(ad::square(x - lik.mean), ad::Axis::kCols);
    const ad::Var penalty = (1.0 / static_cast<double>(model.latent_dim)) *
                            ad::sum(ad::square(2.0 * post.log_std), ad::Axis::kCols);
    return ad::mean(tape.constant(weights) * (mse + penalty));
  } catch (const NumericError& e) {
    throw NumericError(std::string("autoencoder pre-training: non-finite loss (") + e.what() + ")");
  }
}

double pretrain_autoencoder(VaeModel& model, const Matrix& normalized_points, const Vector& weights, Rng& rng,
                            const AePretrainOptions& options) {
  std::vector<ad::Parameter*> params = model.encoder.parameters();
  for (auto* p : model.decoder.parameters()) {
    params.push_back(p);
  }
  nets::Adam adam(params, {options.learning_rate});
  const Eigen::Index n = normalized_points.rows();
  const auto bs = static_cast<std::size_t>(std::max(1, options.batch_size));
  std::vector<Eigen::Index> order;
  std::size_t cursor = 0;
  double last = 0.0;
  for (int step = 0; step < options.steps; ++step) {
    if (cursor >= order.size()) {
      order = shuffled_indices(n, rng);
      cursor = 0;
    }
    const std::size_t end = std::min(order.size(), cursor + bs);
    const std::span<const Eigen::Index> idx(order.data() + cursor, end - cursor);
    cursor = end;
    ad::Tape tape;
    const ad::Var loss = autoencoder_loss(tape, model, gather_rows(normalized_points, idx), gather(weights, idx));
    last = loss.scalar();
    adam.step(tape.backward(loss));
  }
  return last;
}

TrainResult train_vae(const WeightedDataset& data, const TrainConfig& config, Rng& rng, const VaeModel* warm_start) {
  TrainResult result;
  TrainTrace& trace = result.trace;
  trace.ess = data.ess();
  if (trace.ess < config.min_ess) {
    throw DegenerateWeightsError("train_vae: effective sample size " + std::to_string(trace.ess) + " below " +
                                     std::to_string(config.min_ess),
                                 trace.ess);
  }
  const auto dim = static_cast<std::size_t>(data.points.cols());
  VaeModel& model = result.model;
  if (warm_start != nullptr) {
    if (warm_start->dim != dim) {
      throw ShapeError("train_vae: warm-start model has a different dimension");
    }
    model = *warm_start;
  } else {
    model = make_model(dim, config.latent_dim, config.pseudo_inputs, config.hidden, rng);
  }
  model.norm = fit_normalization(data, config.scale_floor);
  const Matrix xn = model.norm.to_normalized(data.points);
  const Vector w = data.normalized_weights();

  if (config.pretrain && warm_start == nullptr) {
    trace.vp = pretrain_vpnet(model, xn, data.log_weights, rng, config.vp_pretrain);
    trace.ae_final_loss = pretrain_autoencoder(model, xn, w, rng, config.ae_pretrain);
  }

  nets::Adam adam(model.parameters(), {config.learning_rate});
  const Eigen::Index n = xn.rows();
  const auto bs = static_cast<std::size_t>(std::max(1, config.batch_size));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto order = shuffled_indices(n, rng);
    EpochRecord rec;
    rec.epoch = epoch + 1;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t end = std::min(order.size(), start + bs);
      const std::span<const Eigen::Index> idx(order.data() + start, end - start);
      ad::Tape tape;
      MinibatchStats stats;
      const ad::Var loss = welbo_minibatch(tape, model, gather_rows(xn, idx), gather(w, idx), rng, &stats);
      const double share = static_cast<double>(idx.size()) / static_cast<double>(n);
      rec.loss += share * loss.scalar();
      rec.kl += share * stats.kl;
      rec.reconstruction += share * stats.reconstruction;
      adam.step(tape.backward(loss));
    }
    trace.epochs.push_back(rec);
  }
  if (trace.epochs.size() >= 2) {
    trace.improved = trace.epochs.back().loss < trace.epochs.front().loss;
  }
  return result;
}

nlohmann::json to_json(const VaeModel& model) {
  return {{"format", "vaeis-vae"},
          {"version", 1},
          {"dim", model.dim},
          {"latent_dim", model.latent_dim},
          {"pseudo_inputs", model.pseudo_inputs},
          {"norm",
           {{"shift", std::vector<double>(model.norm.shift.begin(), model.norm.shift.end())},
            {"scale", std::vector<double>(model.norm.scale.begin(), model.norm.scale.end())}}},
          {"encoder", nets::to_json(model.encoder)},
          {"decoder", nets::to_json(model.decoder)},
          {"vpnet", nets::to_json(model.vpnet)}};
}

VaeModel model_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "vaeis-vae" || j.value("version", 0) != 1) {
    throw std::invalid_argument("model_from_json: not a version-1 vaeis-vae checkpoint");
  }
  VaeModel m;
  m.dim = j.at("dim").get<std::size_t>();
  m.latent_dim = j.at("latent_dim").get<std::size_t>();
  m.pseudo_inputs = j.at("pseudo_inputs").get<std::size_t>();
  m.norm = {json_vector(j.at("norm").at("shift")), json_vector(j.at("norm").at("scale"))};
  m.encoder = nets::mlp_from_json(j.at("encoder"), "encoder");
  m.decoder = nets::mlp_from_json(j.at("decoder"), "decoder");
  m.vpnet = nets::mlp_from_json(j.at("vpnet"), "vpnet");
  if (m.encoder.input_dim() != m.dim || m.encoder.output_dim() != 2 * m.latent_dim ||
      m.decoder.input_dim() != m.latent_dim || m.decoder.output_dim() != 2 * m.dim ||
      m.vpnet.input_dim() != m.pseudo_inputs || m.vpnet.output_dim() != m.dim ||
      static_cast<std::size_t>(m.norm.shift.size()) != m.dim || static_cast<std::size_t>(m.norm.scale.size()) != m.dim) {
    throw std::invalid_argument("model_from_json: inconsistent network shapes");
  }
  return m;
}

void write_trace_csv(std::ostream& out, const TrainTrace& trace) {
  out << "epoch,loss,kl,reconstruction\n";
  out.precision(17);
  for (const auto& e : trace.epochs) {
    out << e.epoch << ',' << e.loss << ',' << e.kl << ',' << e.reconstruction << '\n';
  }
}

}  // namespace vaeis::vae
