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

#include <vaeis/nets.hpp>

#include <cmath>
#include <stdexcept>

namespace vaeis::nets {

std::size_t MlpParams::input_dim() const {
  return layers.empty() ? 0 : static_cast<std::size_t>(layers.front().weight.value.rows());
}

std::size_t MlpParams::output_dim() const {
  return layers.empty() ? 0 : static_cast<std::size_t>(layers.back().weight.value.cols());
}

std::vector<std::size_t> MlpParams::dims() const {
  std::vector<std::size_t> out;
  if (layers.empty()) {
    return out;
  }
  out.push_back(input_dim());
  for (const auto& l : layers) {
    out.push_back(static_cast<std::size_t>(l.weight.value.cols()));
  }
  return out;
}

std::vector<ad::Parameter*> MlpParams::parameters() {
  std::vector<ad::Parameter*> out;
  for (auto& l : layers) {
    out.push_back(&l.weight);
    if (l.has_bias) {
      out.push_back(&l.bias);
    }
  }
  return out;
}

std::vector<const ad::Parameter*> MlpParams::parameters() const {
  std::vector<const ad::Parameter*> out;
  for (const auto& l : layers) {
    out.push_back(&l.weight);
    if (l.has_bias) {
      out.push_back(&l.bias);
    }
  }
  return out;
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) {
    n += static_cast<std::size_t>(p->value.size());
  }
  return n;
}

MlpParams init_params(std::span<const std::size_t> dims, Rng& rng, std::string_view name, Activation hidden,
                      bool bias) {
  if (dims.size() < 2) {
    throw std::invalid_argument("init_params: need at least one layer (two sizes)");
  }
  MlpParams out;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const auto fan_in = static_cast<Eigen::Index>(dims[i]);
    const auto fan_out = static_cast<Eigen::Index>(dims[i + 1]);
    if (fan_in == 0 || fan_out == 0) {
      throw std::invalid_argument("init_params: zero layer width");
    }
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> uniform(-bound, bound);
    DenseLayer layer;
    layer.has_bias = bias;
    layer.weight.name = std::string(name) + ".layer" + std::to_string(i) + ".weight";
    layer.weight.value.resize(fan_in, fan_out);
    for (Eigen::Index k = 0; k < layer.weight.value.size(); ++k) {
      layer.weight.value.data()[k] = uniform(rng);
    }
    layer.bias.name = std::string(name) + ".layer" + std::to_string(i) + ".bias";
    layer.bias.value = Matrix::Zero(1, fan_out);
    out.layers.push_back(std::move(layer));
    if (i + 2 < dims.size()) {
      out.activations.push_back(hidden);
    }
  }
  return out;
}

ad::Var mlp_forward(ad::Tape& tape, const MlpParams& params, ad::Var x) {
  if (params.layers.empty()) {
    throw std::invalid_argument("mlp_forward: empty network");
  }
  if (static_cast<std::size_t>(x.cols()) != params.input_dim()) {
    throw ShapeError("mlp: input width " + std::to_string(x.cols()) + " but network expects " +
                     std::to_string(params.input_dim()));
  }
  ad::Var h = x;
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const auto& layer = params.layers[i];
    h = ad::matmul(h, tape.param(layer.weight));
    if (layer.has_bias) {
      h = h + tape.param(layer.bias);
    }
    if (i < params.activations.size() && params.activations[i] == Activation::kTanh) {
      h = ad::tanh(h);
    }
  }
  return h;
}

Matrix mlp_eval(const MlpParams& params, const Matrix& x) {
  // Shares the tape kernels so that evaluation and training agree bit for bit.
  ad::Tape tape;
  return mlp_forward(tape, params, tape.constant(x)).value();
}

GaussianHeadOutput gaussian_head(ad::Var raw) {
  if (raw.cols() % 2 != 0) {
    throw ShapeError("gaussian_head: odd output width " + std::to_string(raw.cols()));
  }
  const Eigen::Index k = raw.cols() / 2;
  return {ad::slice_cols(raw, 0, k), ad::clamp(ad::slice_cols(raw, k, k), kLogStdMin, kLogStdMax)};
}

std::pair<Matrix, Matrix> gaussian_head_eval(const Matrix& raw) {
  if (raw.cols() % 2 != 0) {
    throw ShapeError("gaussian_head: odd output width " + std::to_string(raw.cols()));
  }
  const Eigen::Index k = raw.cols() / 2;
  return {raw.leftCols(k), raw.rightCols(k).cwiseMax(kLogStdMin).cwiseMin(kLogStdMax)};
}

Adam::Adam(std::vector<ad::Parameter*> params, AdamConfig config) : config_(config) {
  slots_.reserve(params.size());
  for (auto* p : params) {
    slots_.push_back({p, Matrix::Zero(p->value.rows(), p->value.cols()), Matrix::Zero(p->value.rows(), p->value.cols())});
  }
}

void Adam::step(const ad::Gradients& grads) {
  for (const auto& s : slots_) {
    const Matrix* g = grads.find(*s.param);
    if (g != nullptr && !g->allFinite()) {
      throw NumericError("adam: non-finite gradient for parameter '" + s.param->name + "'");
    }
  }
  ++steps_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (auto& s : slots_) {
    const Matrix* g = grads.find(*s.param);
    if (g == nullptr) {
      s.first *= b1;
      s.second *= b2;
    } else {
      if (g->rows() != s.param->value.rows() || g->cols() != s.param->value.cols()) {
        throw ShapeError("adam: gradient shape mismatch for '" + s.param->name + "'");
      }
      s.first = b1 * s.first + (1.0 - b1) * (*g);
      s.second = b2 * s.second + (1.0 - b2) * g->cwiseProduct(*g);
    }
    s.param->value.array() -= config_.learning_rate * (s.first.array() / correction1) /
                              ((s.second.array() / correction2).sqrt() + config_.epsilon);
  }
}

namespace {

const char* activation_name(Activation a) { return a == Activation::kTanh ? "tanh" : "identity"; }

Activation activation_from(const std::string& s) {
  if (s == "tanh") {
    return Activation::kTanh;
  }
  if (s == "identity") {
    return Activation::kIdentity;
  }
  throw std::invalid_argument("checkpoint: unknown activation '" + s + "'");
}

}  // namespace

nlohmann::json to_json(const MlpParams& params) {
  nlohmann::json j;
  j["dims"] = params.dims();
  auto& acts = j["activations"] = nlohmann::json::array();
  for (auto a : params.activations) {
    acts.push_back(activation_name(a));
  }
  auto& layers = j["layers"] = nlohmann::json::array();
  for (const auto& l : params.layers) {
    const auto& w = l.weight.value;
    layers.push_back({{"weight", std::vector<double>(w.data(), w.data() + w.size())},
                      {"bias", std::vector<double>(l.bias.value.data(), l.bias.value.data() + l.bias.value.size())},
                      {"has_bias", l.has_bias}});
  }
  return j;
}

MlpParams mlp_from_json(const nlohmann::json& j, std::string_view name) {
  const auto dims = j.at("dims").get<std::vector<std::size_t>>();
  const auto& layers = j.at("layers");
  if (dims.size() < 2 || layers.size() + 1 != dims.size()) {
    throw std::invalid_argument("checkpoint: inconsistent layer dims");
  }
  MlpParams out;
  for (const auto& a : j.at("activations")) {
    out.activations.push_back(activation_from(a.get<std::string>()));
  }
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const auto& lj = layers[i];
    const auto w = lj.at("weight").get<std::vector<double>>();
    const auto b = lj.at("bias").get<std::vector<double>>();
    const auto rows = static_cast<Eigen::Index>(dims[i]);
    const auto cols = static_cast<Eigen::Index>(dims[i + 1]);
    if (static_cast<Eigen::Index>(w.size()) != rows * cols || static_cast<Eigen::Index>(b.size()) != cols) {
      throw std::invalid_argument("checkpoint: layer " + std::to_string(i) + " has wrong parameter count");
    }
    DenseLayer layer;
    layer.has_bias = lj.value("has_bias", true);
    layer.weight.name = std::string(name) + ".layer" + std::to_string(i) + ".weight";
    layer.weight.value = Eigen::Map<const Matrix>(w.data(), rows, cols);
    layer.bias.name = std::string(name) + ".layer" + std::to_string(i) + ".bias";
    layer.bias.value = Eigen::Map<const Matrix>(b.data(), 1, cols);
    out.layers.push_back(std::move(layer));
  }
  return out;
}

}  // namespace vaeis::nets
