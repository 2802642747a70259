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

#include <gmock/gmock.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <vaeis/proposal.hpp>
#include <vaeis/vae.hpp>

namespace {

using vaeis::Matrix;
using vaeis::Vector;
namespace ad = vaeis::ad;
namespace dists = vaeis::dists;
namespace vae = vaeis::vae;

constexpr double kInf = std::numeric_limits<double>::infinity();
const std::vector<std::size_t> kSmallHidden{16, 16};

vae::VaeModel small_model(std::size_t dim, std::size_t dz, std::size_t k, std::uint64_t seed) {
  vaeis::Rng rng(seed);
  return vae::make_model(dim, dz, k, kSmallHidden, rng);
}

// Encoder posteriors with a fixed tiny std, so prior components are easy to tell apart.
void sharpen_encoder(vae::VaeModel& m, double log_std) {
  auto& last = m.encoder.layers.back();
  const auto dz = static_cast<Eigen::Index>(m.latent_dim);
  last.weight.value.rightCols(dz).setZero();
  last.bias.value.rightCols(dz).setConstant(log_std);
}

// Samples from the equal-weight pair N(+offset 1, I) + N(-offset 1, I).
Matrix bimodal_sample(Eigen::Index n, Eigen::Index dim, double offset, vaeis::Rng& rng) {
  Matrix x = vaeis::standard_normal(n, dim, rng);
  std::bernoulli_distribution coin(0.5);
  for (Eigen::Index i = 0; i < n; ++i) {
    x.row(i).array() += coin(rng) ? offset : -offset;
  }
  return x;
}

TEST(Encode, ZeroEncoderGivesStandardNormal) {
  auto m = small_model(3, 2, 4, 1);
  for (auto* p : m.encoder.parameters()) {
    p->value.setZero();
  }
  const double x[] = {0.3, -1.0, 2.0};
  const auto q = vae::encode(m, x);
  EXPECT_TRUE(q.mean.isZero());
  EXPECT_TRUE(q.std.isApprox(Vector::Ones(2)));
}

TEST(Encode, DeterministicAndClamped) {
  auto m = small_model(4, 2, 4, 2);
  for (auto* p : m.encoder.parameters()) {
    p->value *= 40.0;
  }
  vaeis::Rng rng(3);
  const Matrix x = 10.0 * vaeis::standard_normal(200, 4, rng);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto a = vae::encode(m, vaeis::row_span(x, i));
    const auto b = vae::encode(m, vaeis::row_span(x, i));
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_GE(a.std.minCoeff(), std::exp(-10.0));
    EXPECT_LE(a.std.maxCoeff(), std::exp(10.0));
  }
}

TEST(Decode, ZeroDecoderGivesStandardNormalAndRawMapping) {
  auto m = small_model(3, 1, 4, 4);
  for (auto* p : m.decoder.parameters()) {
    p->value.setZero();
  }
  m.norm.shift = Vector::LinSpaced(3, 1.0, 3.0);
  m.norm.scale = Vector::Constant(3, 2.0);
  const double z[] = {0.7};
  const auto g = vae::decode(m, z);
  EXPECT_TRUE(g.mean.isZero());
  EXPECT_TRUE(g.std.isApprox(Vector::Ones(3)));
  const auto r = vae::decode_raw(m, z);
  EXPECT_TRUE(r.mean.isApprox(m.norm.shift));
  EXPECT_TRUE(r.std.isApprox(Vector::Constant(3, 2.0)));
}

TEST(Decode, DeterministicAndClamped) {
  auto m = small_model(3, 2, 4, 5);
  for (auto* p : m.decoder.parameters()) {
    p->value *= 40.0;
  }
  vaeis::Rng rng(6);
  const Matrix z = 10.0 * vaeis::standard_normal(100, 2, rng);
  const auto [mean, log_std] = vae::decode_batch(m, z);
  EXPECT_EQ(mean, vae::decode_batch(m, z).first);
  EXPECT_GE(log_std.minCoeff(), -10.0);
  EXPECT_LE(log_std.maxCoeff(), 10.0);
}

TEST(VampPrior, SinglePseudoInputIsThatPosterior) {
  const auto m = small_model(3, 2, 1, 7);
  const Matrix u = vae::pseudo_inputs(m);
  const auto q = vae::encode(m, vaeis::row_span(u, 0));
  vaeis::Rng rng(8);
  const Matrix z = vaeis::standard_normal(20, 2, rng);
  const Vector lp = vae::vampprior_logpdf(m, z);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    EXPECT_NEAR(lp[i], dists::diag_gaussian_logpdf(vaeis::row_span(z, i), q), 1e-12);
  }
}

TEST(VampPrior, PseudoInputOrderDoesNotMatter) {
  auto m = small_model(3, 2, 6, 9);
  vaeis::Rng rng(10);
  const Matrix z = vaeis::standard_normal(30, 2, rng);
  const Vector before = vae::vampprior_logpdf(m, z);
  auto& w = m.vpnet.layers[0].weight.value;
  const Matrix reversed = w.colwise().reverse();
  w = reversed;
  const Vector after = vae::vampprior_logpdf(m, z);
  EXPECT_LE((before - after).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(VampPrior, IntegratesToOne) {
  const auto m = small_model(3, 2, 5, 11);
  vaeis::Rng rng(12);
  const double s = 4.0;
  const Eigen::Index n = 200000;
  const Matrix z = s * vaeis::standard_normal(n, 2, rng);
  const Vector lp = vae::vampprior_logpdf(m, z);
  Vector ratio(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double log_wide = -vaeis::kLogTwoPi - 2.0 * std::log(s) - 0.5 * z.row(i).squaredNorm() / (s * s);
    ratio[i] = std::exp(lp[i] - log_wide);
  }
  const double mean = ratio.mean();
  const double se = std::sqrt((ratio.array() - mean).square().sum() / static_cast<double>(n - 1) / static_cast<double>(n));
  EXPECT_NEAR(mean, 1.0, 3.0 * se);
}

TEST(VampPrior, ComponentFrequenciesAreUniform) {
  auto m = small_model(3, 2, 4, 13);
  sharpen_encoder(m, -6.0);
  vaeis::Rng rng(14);
  const Eigen::Index n = 4000;
  const Matrix z = vae::vampprior_sample(m, n, rng);
  const Matrix u = vae::pseudo_inputs(m);
  Matrix mu(4, 2);
  for (Eigen::Index k = 0; k < 4; ++k) {
    mu.row(k) = vae::encode(m, vaeis::row_span(u, k)).mean.transpose();
  }
  std::vector<double> counts(4, 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    (mu.rowwise() - z.row(i)).rowwise().squaredNorm().minCoeff(&best);
    counts[static_cast<std::size_t>(best)] += 1.0;
  }
  double chi2 = 0.0;
  for (double c : counts) {
    chi2 += (c - n / 4.0) * (c - n / 4.0) / (n / 4.0);
  }
  EXPECT_LT(chi2, 11.345);  // 99% quantile, 3 degrees of freedom
}

TEST(VampPrior, SinglePseudoInputSamplesThatPosterior) {
  const auto m = small_model(3, 2, 1, 15);
  const Matrix u = vae::pseudo_inputs(m);
  const auto q = vae::encode(m, vaeis::row_span(u, 0));
  vaeis::Rng rng(16);
  const Eigen::Index n = 100000;
  const Matrix z = vae::vampprior_sample(m, n, rng);
  const Eigen::RowVectorXd mean = z.colwise().mean();
  const Eigen::RowVectorXd sd = ((z.rowwise() - mean).array().square().colwise().sum() / (n - 1.0)).sqrt();
  for (Eigen::Index j = 0; j < 2; ++j) {
    EXPECT_NEAR(mean[j], q.mean[j], 5.0 * q.std[j] / std::sqrt(static_cast<double>(n)));
    EXPECT_NEAR(sd[j] / q.std[j], 1.0, 0.02);
  }
}

TEST(VampPrior, SeedDeterminism) {
  const auto m = small_model(3, 2, 5, 17);
  vaeis::Rng a(18);
  vaeis::Rng b(18);
  EXPECT_EQ(vae::vampprior_sample(m, 50, a), vae::vampprior_sample(m, 50, b));
}

TEST(VampPrior, FullPseudoInputSetIsAggregatedPosterior) {
  auto m = small_model(3, 2, 8, 19);
  vaeis::Rng rng(20);
  const Matrix x = vaeis::standard_normal(8, 3, rng);
  m.vpnet.layers[0].weight.value = x;
  const Matrix z = vaeis::standard_normal(25, 2, rng);
  const Vector lp = vae::vampprior_logpdf(m, z);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    double mix = 0.0;
    for (Eigen::Index n = 0; n < 8; ++n) {
      mix += std::exp(dists::diag_gaussian_logpdf(vaeis::row_span(z, i), vae::encode(m, vaeis::row_span(x, n)))) / 8.0;
    }
    EXPECT_NEAR(lp[i], std::log(mix), 1e-12);
  }
}

TEST(Welbo, UnitWeightsEqualElboBitwise) {
  const auto m = small_model(4, 2, 5, 21);
  vaeis::Rng data_rng(22);
  const Matrix x = vaeis::standard_normal(32, 4, data_rng);
  vaeis::Rng ra(23);
  vaeis::Rng rb(23);
  ad::Tape ta;
  ad::Tape tb;
  const double w = vae::welbo_minibatch(ta, m, x, Vector::Ones(32), ra).scalar();
  const double e = vae::elbo_minibatch(tb, m, x, rb).scalar();
  EXPECT_EQ(w, e);
}

TEST(Welbo, ZeroWeightPointsOnlyChangeTheAverage) {
  const auto m = small_model(4, 2, 5, 24);
  vaeis::Rng data_rng(25);
  const Matrix x = vaeis::standard_normal(2, 4, data_rng);
  vaeis::Rng ra(26);
  vaeis::Rng rb(26);
  ad::Tape ta;
  ad::Tape tb;
  const double both = vae::welbo_minibatch(ta, m, x, (Vector(2) << 1.7, 0.0).finished(), ra).scalar();
  const double first = vae::welbo_minibatch(tb, m, x.topRows(1), Vector::Constant(1, 1.7), rb).scalar();
  EXPECT_NEAR(both, 0.5 * first, 1e-12 * std::abs(first));
}

TEST(Welbo, KlTermMatchesClosedForm) {
  const auto m = small_model(3, 2, 1, 27);
  const Matrix u = vae::pseudo_inputs(m);
  vaeis::Rng rng(28);
  const Matrix x = vaeis::standard_normal(1, 3, rng);
  const double expected = dists::kl_diag_gaussians(vae::encode(m, vaeis::row_span(x, 0)),
                                                   vae::encode(m, vaeis::row_span(u, 0)));
  const Matrix batch = x.replicate(1000, 1);
  std::vector<double> means;
  for (int b = 0; b < 100; ++b) {
    ad::Tape tape;
    vae::MinibatchStats stats;
    (void)vae::elbo_minibatch(tape, m, batch, rng, &stats);
    means.push_back(stats.kl);
  }
  const double mean = std::accumulate(means.begin(), means.end(), 0.0) / 100.0;
  double var = 0.0;
  for (double v : means) {
    var += (v - mean) * (v - mean) / 99.0;
  }
  EXPECT_NEAR(mean, expected, 3.0 * std::sqrt(var / 100.0));
}

TEST(Welbo, GradientMatchesFiniteDifferences) {
  auto m = small_model(2, 1, 2, 29);
  vaeis::Rng data_rng(30);
  const Matrix x = vaeis::standard_normal(5, 2, data_rng);
  const Vector w = (Vector(5) << 0.5, 1.5, 0.0, 2.0, 1.0).finished();
  double worst = 0.0;
  for (auto* p : m.parameters()) {
    ad::Gradients g;
    {
      ad::Tape tape;
      vaeis::Rng rng(31);
      g = tape.backward(vae::welbo_minibatch(tape, m, x, w, rng));
    }
    for (Eigen::Index k = 0; k < std::min<Eigen::Index>(p->value.size(), 6); ++k) {
      auto eval = [&] {
        ad::Tape tape;
        vaeis::Rng rng(31);
        return vae::welbo_minibatch(tape, m, x, w, rng).scalar();
      };
      double& v = p->value.data()[k];
      const double saved = v;
      v = saved + 1e-5;
      const double up = eval();
      v = saved - 1e-5;
      const double down = eval();
      v = saved;
      const double numeric = (up - down) / 2e-5;
      const double analytic = g.at(*p).data()[k];
      worst = std::max(worst, std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-4}));
    }
  }
  EXPECT_LE(worst, 1e-5);
}

TEST(Welbo, NonFiniteTermIsNamed) {
  const auto m = small_model(3, 2, 4, 32);
  vaeis::Rng rng(33);
  ad::Tape tape;
  const Matrix x = Matrix::Constant(2, 3, 1e300);
  try {
    (void)vae::welbo_minibatch(tape, m, x, Vector::Ones(2), rng);
    FAIL() << "expected NumericError";
  } catch (const vaeis::NumericError& e) {
    EXPECT_THAT(e.what(), ::testing::HasSubstr("welbo: non-finite"));
  }
}

TEST(Dataset, WeightsHaveMeanOneAndExactZeros) {
  vae::WeightedDataset ds{Matrix::Zero(4, 2), (Vector(4) << 0.0, -kInf, std::log(3.0), -kInf).finished()};
  const Vector w = ds.normalized_weights();
  EXPECT_DOUBLE_EQ(w.mean(), 1.0);
  EXPECT_EQ(w[1], 0.0);
  EXPECT_EQ(w[3], 0.0);
  EXPECT_DOUBLE_EQ(w[2] / w[0], 3.0);
  EXPECT_DOUBLE_EQ(ds.ess(), 16.0 / 10.0);
}

TEST(Dataset, NormalizationIsWeightedStandardization) {
  vaeis::Rng rng(34);
  const Matrix x = vaeis::standard_normal(300, 2, rng);
  Vector lw(300);
  for (Eigen::Index i = 0; i < 300; ++i) {
    lw[i] = x(i, 0);
  }
  const vae::WeightedDataset ds{x, lw};
  const auto norm = vae::fit_normalization(ds);
  const Vector w = ds.normalized_weights() / 300.0;
  const Matrix xn = norm.to_normalized(x);
  EXPECT_NEAR((xn.transpose() * w).norm(), 0.0, 1e-12);
  EXPECT_NEAR(xn.col(0).array().square().matrix().dot(w), 1.0, 1e-12);
  EXPECT_TRUE(norm.to_raw(xn).isApprox(x, 1e-13));
  const vae::WeightedDataset flat{Matrix::Constant(5, 2, 3.0), Vector::Zero(5)};
  EXPECT_EQ(vae::fit_normalization(flat, 1e-6).scale, Vector::Constant(2, 1e-6));
}

TEST(Selection, DominantPointIsPickedFirstByItsShare) {
  vaeis::Rng rng(35);
  const Vector lw = (Vector(6) << std::log(5.0), 0.0, 0.0, 0.0, 0.0, 0.0).finished();
  int first = 0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    const auto picked = vae::weighted_sample_without_replacement(lw, 2, rng);
    ASSERT_NE(picked[0], picked[1]);
    first += picked[0] == 0 ? 1 : 0;
  }
  EXPECT_NEAR(first / static_cast<double>(trials), 0.5, 4.0 * 0.005);
}

TEST(Selection, TooFewPositiveWeightsThrows) {
  vaeis::Rng rng(36);
  const Vector lw = (Vector(3) << 0.0, -kInf, 0.0).finished();
  EXPECT_THROW((void)vae::weighted_sample_without_replacement(lw, 3, rng), std::invalid_argument);
}

TEST(PretrainVp, InterpolatesSelectedPoints) {
  auto m = small_model(5, 2, 4, 37);
  vaeis::Rng rng(38);
  const Matrix x = vaeis::standard_normal(40, 5, rng);
  const auto res = vae::pretrain_vpnet(m, x, Vector::Zero(40), rng);
  EXPECT_LE(res.max_error, 1e-3);
  const Matrix u = vae::pseudo_inputs(m);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_LE((u.row(static_cast<Eigen::Index>(k)) - x.row(res.selected[k])).norm(), 1e-3);
  }
}

TEST(PretrainVp, PseudoInputsStayInsideBoundingBox) {
  auto m = small_model(3, 2, 20, 39);
  vaeis::Rng rng(40);
  const Matrix x = bimodal_sample(200, 3, 2.0, rng);
  (void)vae::pretrain_vpnet(m, x, vaeis::standard_normal(200, 1, rng).col(0), rng);
  const Matrix u = vae::pseudo_inputs(m);
  const Eigen::RowVectorXd lo = x.colwise().minCoeff();
  const Eigen::RowVectorXd hi = x.colwise().maxCoeff();
  for (Eigen::Index k = 0; k < u.rows(); ++k) {
    EXPECT_TRUE((u.row(k).array() >= lo.array() - 1e-3).all());
    EXPECT_TRUE((u.row(k).array() <= hi.array() + 1e-3).all());
  }
}

TEST(PretrainAe, PenaltyVanishesAtUnitStdAndUniformWeightsAreUnweighted) {
  auto m = small_model(3, 1, 4, 41);
  sharpen_encoder(m, 0.0);
  vaeis::Rng rng(42);
  const Matrix x = vaeis::standard_normal(16, 3, rng);
  ad::Tape tape;
  const double loss = vae::autoencoder_loss(tape, m, x, Vector::Ones(16)).scalar();
  const Matrix mu = vae::decode_batch(m, vaeis::nets::gaussian_head_eval(vaeis::nets::mlp_eval(m.encoder, x)).first).first;
  const double mse = (x - mu).array().square().rowwise().mean().mean();
  EXPECT_NEAR(loss, mse, 1e-14);
}

TEST(PretrainAe, ReconstructsRankOneData) {
  auto m = small_model(3, 1, 4, 43);
  vaeis::Rng rng(44);
  const Matrix t = vaeis::standard_normal(512, 1, rng);
  const Matrix x = t * (Matrix(1, 3) << 1.0, -0.5, 0.8).finished();
  const vae::WeightedDataset ds{x, Vector::Zero(512)};
  m.norm = vae::fit_normalization(ds);
  const Matrix xn = m.norm.to_normalized(x);
  vae::AePretrainOptions opts;
  opts.steps = 2000;
  (void)vae::pretrain_autoencoder(m, xn, Vector::Ones(512), rng, opts);
  const Matrix mu = vae::decode_batch(m, vaeis::nets::gaussian_head_eval(vaeis::nets::mlp_eval(m.encoder, xn)).first).first;
  EXPECT_LE((xn - mu).array().square().mean(), 0.01);
}

TEST(Train, DegenerateWeightsAreRejected) {
  vaeis::Rng rng(45);
  vae::TrainConfig cfg;
  cfg.min_ess = 2.0;
  Vector lw = Vector::Constant(10, -kInf);
  lw[3] = 0.0;
  const vae::WeightedDataset ds{vaeis::standard_normal(10, 3, rng), lw};
  EXPECT_THROW((void)vae::train_vae(ds, cfg, rng), vaeis::DegenerateWeightsError);
}

TEST(Train, InvalidShapesAreRejected) {
  vaeis::Rng rng(46);
  EXPECT_THROW((void)vae::make_model(2, 2, 4, kSmallHidden, rng), std::invalid_argument);
  EXPECT_THROW((void)vae::make_model(3, 1, 0, kSmallHidden, rng), std::invalid_argument);
}

TEST(Train, SameSeedSameModel) {
  vae::TrainConfig cfg;
  cfg.hidden = kSmallHidden;
  cfg.pseudo_inputs = 10;
  cfg.epochs = 2;
  cfg.vp_pretrain.min_steps = 20;
  cfg.ae_pretrain.steps = 20;
  vaeis::Rng data_rng(47);
  const vae::WeightedDataset ds{bimodal_sample(300, 3, 1.0, data_rng), vaeis::standard_normal(300, 1, data_rng).col(0)};
  vaeis::Rng a(48);
  vaeis::Rng b(48);
  const auto ma = vae::train_vae(ds, cfg, a).model;
  const auto mb = vae::train_vae(ds, cfg, b).model;
  EXPECT_EQ(vae::to_json(ma).dump(), vae::to_json(mb).dump());
}

// One classical-VAE training run on the d=2 bimodal target, shared by the tests below.
class BimodalTraining : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    vaeis::Rng rng(50);
    const Matrix x = bimodal_sample(4000, 2, 2.5, rng);
    vae::TrainConfig cfg;
    cfg.latent_dim = 1;
    cfg.hidden = {32, 32};
    cfg.epochs = 40;
    result_ = new vae::TrainResult(vae::train_vae({x, Vector::Zero(4000)}, cfg, rng));
  }
  static void TearDownTestSuite() {
    delete result_;
    result_ = nullptr;
  }
  static vae::TrainResult* result_;
};

vae::TrainResult* BimodalTraining::result_ = nullptr;

TEST_F(BimodalTraining, GeneratedClustersMatchModes) {
  vaeis::Rng rng(51);
  const auto prop = vae::build_proposal(result_->model, 1000, rng);
  const Matrix s = prop.sample(4000, rng);
  Eigen::RowVector2d pos = Eigen::RowVector2d::Zero();
  Eigen::RowVector2d neg = Eigen::RowVector2d::Zero();
  double np = 0.0;
  double nn = 0.0;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    if (s.row(i).sum() > 0.0) {
      pos += s.row(i);
      np += 1.0;
    } else {
      neg += s.row(i);
      nn += 1.0;
    }
  }
  ASSERT_GT(np, 0.0);
  ASSERT_GT(nn, 0.0);
  EXPECT_LE((pos / np - Eigen::RowVector2d(2.5, 2.5)).norm(), 0.5);
  EXPECT_LE((neg / nn - Eigen::RowVector2d(-2.5, -2.5)).norm(), 0.5);
}

TEST_F(BimodalTraining, PretrainedRunDoesNotCollapse) {
  EXPECT_GE(result_->trace.epochs.back().kl, 0.1);
  EXPECT_TRUE(result_->trace.improved);
}

TEST_F(BimodalTraining, ElboLowerBoundsLogDensity) {
  vaeis::Rng rng(52);
  const Matrix x = bimodal_sample(2000, 2, 2.5, rng);
  const auto& m = result_->model;
  ad::Tape tape;
  vae::MinibatchStats stats;
  const double elbo = -vae::elbo_minibatch(tape, m, m.norm.to_normalized(x), rng, &stats).scalar() -
                      m.norm.log_jacobian();
  const auto prop = vae::build_proposal(m, 10000, rng);
  const Vector lg = prop.logpdf(x);
  const double mean = lg.mean();
  const double se = std::sqrt((lg.array() - mean).square().sum() / 1999.0 / 2000.0);
  EXPECT_LE(elbo, mean + 3.0 * se);
  EXPECT_GE(stats.kl, 0.0);
}

TEST_F(BimodalTraining, CheckpointRoundTripIsExact) {
  const auto& m = result_->model;
  const auto r = vae::model_from_json(nlohmann::json::parse(vae::to_json(m).dump()));
  vaeis::Rng rng(53);
  const Matrix z = vaeis::standard_normal(10, 1, rng);
  EXPECT_EQ(vae::vampprior_logpdf(m, z), vae::vampprior_logpdf(r, z));
  EXPECT_EQ(vae::decode_batch(m, z).first, vae::decode_batch(r, z).first);
  EXPECT_EQ(m.norm.scale, r.norm.scale);
}

TEST_F(BimodalTraining, TraceCsvHasOneRowPerEpoch) {
  std::ostringstream out;
  vae::write_trace_csv(out, result_->trace);
  const std::string csv = out.str();
  EXPECT_EQ(csv.rfind("epoch,loss,kl,reconstruction\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 41);
}

}  // namespace
