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

#ifndef VAEIS_VAE_HPP
#define VAEIS_VAE_HPP

#include <iosfwd>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include <vaeis/autodiff.hpp>
#include <vaeis/core.hpp>
#include <vaeis/dists.hpp>
#include <vaeis/nets.hpp>

/**
 * \file
 * \brief Variational autoencoder trained on importance-weighted samples.
 *
 * The model is a Gaussian encoder q(z|x), a Gaussian decoder g(x|z) and a VampPrior
 * p(z) = (1/K) sum_k q(z|u_k) whose pseudo-inputs u_k are the rows of a bias-free
 * linear layer (the VP-net). All three networks work on standardized inputs; the
 * affine map back to raw coordinates is stored with the model.
 *
 * Training on a weighted sample (x_n, w_n) maximizes the weighted ELBO
 *
 *     (1/N) sum_n w_n [ log g(x_n|z_n) - log q(z_n|x_n) + log p(z_n) ],
 *
 * with z_n = mu(x_n) + sigma(x_n) * eps_n a single reparameterized draw per datum.
 * With all weights equal to one this is the ordinary ELBO. Weights are rescaled to
 * mean one over the dataset, which is allowed because the normalizing constants of
 * both densities are unknown anyway.
 */

namespace vaeis::vae {

/// x_normalized = (x - shift) / scale.
struct NormalizationAffine {
  Vector shift;
  Vector scale;

  static NormalizationAffine identity(Eigen::Index dim);

  [[nodiscard]] Matrix to_normalized(const Matrix& raw) const;
  [[nodiscard]] Matrix to_raw(const Matrix& normalized) const;
  /// sum_i log scale_i; raw log-density = normalized log-density - log_jacobian().
  [[nodiscard]] double log_jacobian() const;
};

struct VaeModel {
  nets::MlpParams encoder;  ///< d -> hidden -> 2 d_z
  nets::MlpParams decoder;  ///< d_z -> hidden -> 2 d
  nets::MlpParams vpnet;    ///< K -> d, linear, no bias
  std::size_t dim = 0;
  std::size_t latent_dim = 0;
  std::size_t pseudo_inputs = 0;
  NormalizationAffine norm;

  [[nodiscard]] std::vector<ad::Parameter*> parameters();
};

/// Fresh model with Glorot-initialized networks and an identity normalization.
VaeModel make_model(std::size_t dim, std::size_t latent_dim, std::size_t pseudo_inputs,
                    std::span<const std::size_t> hidden, Rng& rng);

/// Sample paired with unnormalized log-weights log g~*(x) - log f~(x). Entries may be
/// -inf (zero weight) but at least one must be finite.
struct WeightedDataset {
  Matrix points;
  Vector log_weights;

  [[nodiscard]] Eigen::Index size() const { return points.rows(); }
  /// Weights rescaled to mean one; zero where the log-weight is -inf.
  [[nodiscard]] Vector normalized_weights() const;
  [[nodiscard]] double ess() const;
};

/// Standardization by the weighted mean and standard deviation. Scales below
/// `scale_floor` are raised to it.
NormalizationAffine fit_normalization(const WeightedDataset& data, double scale_floor = 1e-6);

/// Latent posterior q(.|x) for one raw point, in latent coordinates.
dists::DiagGaussian encode(const VaeModel& model, std::span<const double> x);
/// Decoder Gaussian g(.|z) in normalized coordinates.
dists::DiagGaussian decode(const VaeModel& model, std::span<const double> z);
/// Decoder Gaussian g(.|z) mapped back to raw coordinates.
dists::DiagGaussian decode_raw(const VaeModel& model, std::span<const double> z);

/// Batched decoder heads for a K x d_z latent matrix: (means, log-stds), normalized.
std::pair<Matrix, Matrix> decode_batch(const VaeModel& model, const Matrix& latents);

/// K x d pseudo-inputs in normalized coordinates.
Matrix pseudo_inputs(const VaeModel& model);

/// Exact log p(z) under the VampPrior for each row of `latents`.
Vector vampprior_logpdf(const VaeModel& model, const Matrix& latents);
/// Uniform component pick, then a draw from q(.|u_k).
Matrix vampprior_sample(const VaeModel& model, Eigen::Index n, Rng& rng);

/// Batch averages of the per-datum terms (unweighted), for monitoring.
struct MinibatchStats {
  double reconstruction = 0.0;  ///< mean log g(x|z)
  double kl = 0.0;              ///< mean log q(z|x) - log p(z)
};

/**
 * Negative weighted ELBO on a batch of normalized points.
 *
 * `weights` are the batch entries of the dataset-normalized weights. One standard
 * normal draw per datum is taken from `rng`. Throws NumericError naming the term
 * that went non-finite.
 */
ad::Var welbo_minibatch(ad::Tape& tape, const VaeModel& model, const Matrix& batch, const Vector& weights,
                        Rng& rng, MinibatchStats* stats = nullptr);

/// Negative plain ELBO; consumes the same draws from `rng` as welbo_minibatch.
ad::Var elbo_minibatch(ad::Tape& tape, const VaeModel& model, const Matrix& batch, Rng& rng,
                       MinibatchStats* stats = nullptr);

/**
 * K distinct indices drawn without replacement with probabilities proportional to
 * exp(log_weights), via exponential races. Throws if fewer than K weights are positive.
 */
std::vector<Eigen::Index> weighted_sample_without_replacement(const Vector& log_weights, std::size_t k, Rng& rng);

struct VpPretrainOptions {
  double learning_rate = 1e-2;
  int min_steps = 500;
  int max_steps = 5000;
  double tolerance = 1e-3;  ///< on max_k |VP(e_k) - x_s(k)|
};

struct VpPretrainResult {
  std::vector<Eigen::Index> selected;
  int steps = 0;
  double max_error = 0.0;
};

/// Picks K points of the (normalized) dataset and fits the VP-net to reproduce them.
VpPretrainResult pretrain_vpnet(VaeModel& model, const Matrix& normalized_points, const Vector& log_weights,
                                Rng& rng, const VpPretrainOptions& options = {});

struct AePretrainOptions {
  double learning_rate = 1e-2;
  int steps = 500;
  int batch_size = 256;
};

/// Weighted autoencoder loss on a batch: mean_n w_n [ mean_i (x_ni - D^mu(E^mu(x_n))_i)^2
/// + (1/d_z) sum_j (log sigma^2_nj)^2 ].
ad::Var autoencoder_loss(ad::Tape& tape, const VaeModel& model, const Matrix& batch, const Vector& weights);

/// Trains encoder and decoder means (and encoder scales through the penalty).
/// Returns the loss of the last step.
double pretrain_autoencoder(VaeModel& model, const Matrix& normalized_points, const Vector& weights, Rng& rng,
                            const AePretrainOptions& options = {});

struct TrainConfig {
  std::size_t latent_dim = 2;
  std::size_t pseudo_inputs = 75;
  std::vector<std::size_t> hidden{128, 128};
  int epochs = 30;
  int batch_size = 256;
  double learning_rate = 1e-3;
  bool pretrain = true;
  VpPretrainOptions vp_pretrain;
  AePretrainOptions ae_pretrain;
  /// Training aborts with DegenerateWeightsError below this effective sample size.
  double min_ess = 1.1;
  double scale_floor = 1e-6;
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double kl = 0.0;
  double reconstruction = 0.0;
};

struct TrainTrace {
  double ess = 0.0;
  VpPretrainResult vp;
  double ae_final_loss = 0.0;
  std::vector<EpochRecord> epochs;
  /// False when the last epoch's loss is not below the first one's.
  bool improved = true;
};

struct TrainResult {
  VaeModel model;
  TrainTrace trace;
};

/**
 * Full training: normalization, VP-net pre-training, autoencoder pre-training, then
 * weighted-ELBO epochs. With `warm_start`, its networks are reused, the
 * normalization is refit and pre-training is skipped.
 */
TrainResult train_vae(const WeightedDataset& data, const TrainConfig& config, Rng& rng,
                      const VaeModel* warm_start = nullptr);

nlohmann::json to_json(const VaeModel& model);
VaeModel model_from_json(const nlohmann::json& j);

/// CSV with header epoch,loss,kl,reconstruction.
void write_trace_csv(std::ostream& out, const TrainTrace& trace);

}  // namespace vaeis::vae

#endif
