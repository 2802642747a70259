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

#ifndef VAEIS_AUTODIFF_HPP
#define VAEIS_AUTODIFF_HPP

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <vaeis/core.hpp>

/**
 * \file
 * \brief Reverse-mode automatic differentiation over dense rank-2 tensors.
 *
 * A Tape records primitives in evaluation order, which is a topological order of the
 * computation graph. Backward sweeps the tape in reverse and accumulates
 * vector-Jacobian products. Scalars are 1x1 tensors; vectors are 1xn or nx1.
 *
 * Binary elementwise primitives broadcast like numpy restricted to two axes: each
 * extent must either match or be 1 on one side.
 */

namespace vaeis::ad {

using Tensor = Matrix;

/// A trainable leaf. The tape never mutates it; gradients come back in Gradients.
struct Parameter {
  std::string name;
  Tensor value;
};

enum class Primitive : std::uint8_t {
  kConstant,
  kParameter,
  kMatMul,
  kTranspose,
  kAdd,
  kMul,
  kExp,
  kLog,
  kTanh,
  kSquare,
  kNegate,
  kAffine,
  kSum,
  kMean,
  kLogSumExp,
  kClamp,
  kSliceCols,
};

const char* primitive_name(Primitive p);

/// Reduction axis. kAll reduces to 1x1, kRows collapses rows (result 1xn),
/// kCols collapses columns (result mx1).
enum class Axis : std::uint8_t { kAll, kRows, kCols };

/// Non-tensor arguments of a primitive. `lo`/`hi` are the clamp bounds or the
/// affine (scale, shift); `offset`/`count` select columns for kSliceCols.
struct PrimitiveArgs {
  Axis axis = Axis::kAll;
  double lo = 0.0;
  double hi = 0.0;
  Eigen::Index offset = 0;
  Eigen::Index count = 0;
};

class Tape;

/// Handle to a node on a tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::int32_t id) : tape_(tape), id_(id) {}

  [[nodiscard]] const Tensor& value() const;
  [[nodiscard]] Eigen::Index rows() const { return value().rows(); }
  [[nodiscard]] Eigen::Index cols() const { return value().cols(); }
  [[nodiscard]] double scalar() const;
  [[nodiscard]] Tape* tape() const { return tape_; }
  [[nodiscard]] std::int32_t id() const { return id_; }

 private:
  Tape* tape_ = nullptr;
  std::int32_t id_ = -1;
};

/// Gradients of a scalar root with respect to every parameter registered on a tape.
class Gradients {
 public:
  /// Gradient of `p`, or nullptr when `p` was not on the tape.
  [[nodiscard]] const Tensor* find(const Parameter& p) const;
  [[nodiscard]] const Tensor& at(const Parameter& p) const;
  [[nodiscard]] std::size_t size() const { return grads_.size(); }

 private:
  friend class Tape;
  std::unordered_map<const Parameter*, Tensor> grads_;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var scalar(double value);
  /// Registers `p` as a trainable leaf. Registering the same parameter twice returns
  /// the same node.
  Var param(const Parameter& p);

  /// Records `prim` applied to `a` (and `b` for binary primitives).
  Var apply(Primitive prim, Var a, Var b = {}, const PrimitiveArgs& args = {});

  /// Sweeps backward from a 1x1 root.
  [[nodiscard]] Gradients backward(Var root);

  [[nodiscard]] const Tensor& value(std::int32_t id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  [[nodiscard]] std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Primitive prim = Primitive::kConstant;
    Tensor value;
    std::array<std::int32_t, 2> parents{-1, -1};
    const Parameter* param = nullptr;
    PrimitiveArgs args;
  };

  Var push(Node node);
  Node& node(Var v);
  void check_same_tape(Var a, Var b) const;

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::int32_t> param_ids_;
};

Var matmul(Var a, Var b);
Var transpose(Var a);
Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator-(Var a);
Var exp(Var a);
Var log(Var a);
Var tanh(Var a);
Var square(Var a);
/// scale * a + shift with constant coefficients.
Var affine(Var a, double scale, double shift);
Var operator*(double s, Var a);
Var operator+(Var a, double s);
Var sum(Var a, Axis axis = Axis::kAll);
Var mean(Var a, Axis axis = Axis::kAll);
Var log_sum_exp(Var a, Axis axis);
/// Clamp to [lo, hi]; the gradient is zero where the input lies outside (lo, hi).
Var clamp(Var a, double lo, double hi);
Var slice_cols(Var a, Eigen::Index begin, Eigen::Index count);

}  // namespace vaeis::ad

#endif
