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

#ifndef VAEIS_NETS_HPP
#define VAEIS_NETS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include <vaeis/autodiff.hpp>
#include <vaeis/core.hpp>

namespace vaeis::nets {

enum class Activation : std::uint8_t { kIdentity, kTanh };

struct DenseLayer {
  ad::Parameter weight;  ///< in x out
  ad::Parameter bias;    ///< 1 x out
  bool has_bias = true;
};

/// Fully connected network. `activations[i]` follows layer i for every hidden layer;
/// the last layer is always linear.
struct MlpParams {
  std::vector<DenseLayer> layers;
  std::vector<Activation> activations;

  [[nodiscard]] std::size_t input_dim() const;
  [[nodiscard]] std::size_t output_dim() const;
  [[nodiscard]] std::vector<std::size_t> dims() const;
  [[nodiscard]] std::vector<ad::Parameter*> parameters();
  [[nodiscard]] std::vector<const ad::Parameter*> parameters() const;
  [[nodiscard]] std::size_t parameter_count() const;
};

/// Glorot-uniform weights and zero biases for the layer sizes `dims`
/// (dims.front() inputs, dims.back() outputs).
MlpParams init_params(std::span<const std::size_t> dims, Rng& rng, std::string_view name,
                      Activation hidden = Activation::kTanh, bool bias = true);

/// Records the forward pass on `tape`; `x` is batch x input_dim.
ad::Var mlp_forward(ad::Tape& tape, const MlpParams& params, ad::Var x);

/// Plain forward pass without a tape.
Matrix mlp_eval(const MlpParams& params, const Matrix& x);

inline constexpr double kLogStdMin = -10.0;
inline constexpr double kLogStdMax = 10.0;

struct GaussianHeadOutput {
  ad::Var mean;
  ad::Var log_std;  ///< clamped to [kLogStdMin, kLogStdMax]
};

/// Splits a raw output of width 2k into mean and clamped log standard deviation.
GaussianHeadOutput gaussian_head(ad::Var raw);

/// Tape-free variant of gaussian_head: returns (mean, log_std).
std::pair<Matrix, Matrix> gaussian_head_eval(const Matrix& raw);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adaptive-moment optimizer with bias correction.
class Adam {
 public:
  Adam(std::vector<ad::Parameter*> params, AdamConfig config);

  /// Applies one update. Parameters missing from `grads` are treated as having zero
  /// gradient. Throws NumericError naming the parameter on a non-finite gradient.
  void step(const ad::Gradients& grads);

  [[nodiscard]] std::int64_t steps() const { return steps_; }
  [[nodiscard]] const AdamConfig& config() const { return config_; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }

 private:
  struct Slot {
    ad::Parameter* param;
    Matrix first;
    Matrix second;
  };
  std::vector<Slot> slots_;
  AdamConfig config_;
  std::int64_t steps_ = 0;
};

/// Checkpoint layout: {"dims": [...], "activations": ["tanh", ...], "bias": [...],
/// "layers": [{"weight": [row-major flat], "bias": [flat]}]}.
nlohmann::json to_json(const MlpParams& params);
MlpParams mlp_from_json(const nlohmann::json& j, std::string_view name);

}  // namespace vaeis::nets

#endif
