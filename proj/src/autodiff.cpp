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

#include <vaeis/autodiff.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vaeis::ad {

namespace {

std::string shape_of(const Tensor& t) {
  std::ostringstream os;
  os << "(" << t.rows() << "x" << t.cols() << ")";
  return os.str();
}

[[noreturn]] void shape_error(Primitive p, const Tensor& a, const Tensor* b, const std::string& detail = {}) {
  std::ostringstream os;
  os << "autodiff: shape mismatch in " << primitive_name(p) << ": " << shape_of(a);
  if (b != nullptr) {
    os << " and " << shape_of(*b);
  }
  if (!detail.empty()) {
    os << " (" << detail << ")";
  }
  throw ShapeError(os.str());
}

bool broadcastable(Eigen::Index x, Eigen::Index y) { return x == y || x == 1 || y == 1; }

Tensor expand(const Tensor& t, Eigen::Index rows, Eigen::Index cols) {
  if (t.rows() == rows && t.cols() == cols) {
    return t;
  }
  return t.replicate(rows / t.rows(), cols / t.cols());
}

// Sums a broadcast gradient back down to the shape of the operand.
Tensor reduce_to(const Tensor& g, Eigen::Index rows, Eigen::Index cols) {
  Tensor out = g;
  if (out.rows() != rows) {
    out = out.colwise().sum().eval();
  }
  if (out.cols() != cols) {
    out = out.rowwise().sum().eval();
  }
  return out;
}

Tensor reduce_sum(const Tensor& t, Axis axis) {
  switch (axis) {
    case Axis::kAll:
      return Tensor::Constant(1, 1, t.sum());
    case Axis::kRows:
      return t.colwise().sum();
    case Axis::kCols:
      return t.rowwise().sum();
  }
  return {};
}

Eigen::Index reduced_count(const Tensor& t, Axis axis) {
  switch (axis) {
    case Axis::kAll:
      return t.size();
    case Axis::kRows:
      return t.rows();
    case Axis::kCols:
      return t.cols();
  }
  return 1;
}

Tensor reduce_log_sum_exp(const Tensor& t, Axis axis) {
  auto lse = [](const auto& block) {
    const double m = block.maxCoeff();
    if (!std::isfinite(m)) {
      return m;
    }
    return m + std::log(exp_or_zero(block.array() - m).sum());
  };
  switch (axis) {
    case Axis::kAll:
      return Tensor::Constant(1, 1, lse(t));
    case Axis::kRows: {
      Tensor out(1, t.cols());
      for (Eigen::Index j = 0; j < t.cols(); ++j) {
        out(0, j) = lse(t.col(j));
      }
      return out;
    }
    case Axis::kCols: {
      Tensor out(t.rows(), 1);
      for (Eigen::Index i = 0; i < t.rows(); ++i) {
        out(i, 0) = lse(t.row(i));
      }
      return out;
    }
  }
  return {};
}

bool is_binary(Primitive p) {
  return p == Primitive::kMatMul || p == Primitive::kAdd || p == Primitive::kMul;
}

}  // namespace

const char* primitive_name(Primitive p) {
  switch (p) {
    case Primitive::kConstant:
      return "constant";
    case Primitive::kParameter:
      return "parameter";
    case Primitive::kMatMul:
      return "matmul";
    case Primitive::kTranspose:
      return "transpose";
    case Primitive::kAdd:
      return "add";
    case Primitive::kMul:
      return "mul";
    case Primitive::kExp:
      return "exp";
    case Primitive::kLog:
      return "log";
    case Primitive::kTanh:
      return "tanh";
    case Primitive::kSquare:
      return "square";
    case Primitive::kNegate:
      return "negate";
    case Primitive::kAffine:
      return "affine";
    case Primitive::kSum:
      return "sum";
    case Primitive::kMean:
      return "mean";
    case Primitive::kLogSumExp:
      return "log_sum_exp";
    case Primitive::kClamp:
      return "clamp";
    case Primitive::kSliceCols:
      return "slice_cols";
  }
  return "unknown";
}

const Tensor& Var::value() const { return tape_->value(id_); }

double Var::scalar() const {
  const Tensor& v = value();
  if (v.size() != 1) {
    throw ShapeError("autodiff: scalar() on non-scalar node " + shape_of(v));
  }
  return v(0, 0);
}

const Tensor* Gradients::find(const Parameter& p) const {
  auto it = grads_.find(&p);
  return it == grads_.end() ? nullptr : &it->second;
}

const Tensor& Gradients::at(const Parameter& p) const {
  const Tensor* g = find(p);
  if (g == nullptr) {
    throw std::out_of_range("autodiff: parameter '" + p.name + "' is not on the tape");
  }
  return *g;
}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<std::int32_t>(nodes_.size() - 1)};
}

Tape::Node& Tape::node(Var v) { return nodes_[static_cast<std::size_t>(v.id())]; }

void Tape::check_same_tape(Var a, Var b) const {
  if (a.tape() != this || (b.id() >= 0 && b.tape() != this)) {
    throw std::invalid_argument("autodiff: operands belong to a different tape");
  }
}

Var Tape::constant(Tensor value) {
  if (!value.allFinite()) {
    throw NumericError("autodiff: non-finite constant");
  }
  Node n;
  n.prim = Primitive::kConstant;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::scalar(double value) { return constant(Tensor::Constant(1, 1, value)); }

Var Tape::param(const Parameter& p) {
  if (auto it = param_ids_.find(&p); it != param_ids_.end()) {
    return Var{this, it->second};
  }
  if (!p.value.allFinite()) {
    throw NumericError("autodiff: parameter '" + p.name + "' holds non-finite values");
  }
  Node n;
  n.prim = Primitive::kParameter;
  n.value = p.value;
  n.param = &p;
  Var v = push(std::move(n));
  param_ids_.emplace(&p, v.id());
  return v;
}

Var Tape::apply(Primitive prim, Var a, Var b, const PrimitiveArgs& args) {
  check_same_tape(a, b);
  const Tensor& x = node(a).value;
  const Tensor* y = b.id() >= 0 ? &node(b).value : nullptr;
  if (is_binary(prim) && y == nullptr) {
    throw std::invalid_argument(std::string("autodiff: ") + primitive_name(prim) + " needs two operands");
  }

  Node n;
  n.prim = prim;
  n.parents = {a.id(), is_binary(prim) ? b.id() : -1};
  n.args = args;

  switch (prim) {
    case Primitive::kMatMul:
      if (x.cols() != y->rows()) {
        shape_error(prim, x, y);
      }
      n.value = x * (*y);
      break;
    case Primitive::kTranspose:
      n.value = x.transpose();
      break;
    case Primitive::kAdd:
    case Primitive::kMul: {
      if (!broadcastable(x.rows(), y->rows()) || !broadcastable(x.cols(), y->cols())) {
        shape_error(prim, x, y);
      }
      const Eigen::Index r = std::max(x.rows(), y->rows());
      const Eigen::Index c = std::max(x.cols(), y->cols());
      if (prim == Primitive::kAdd) {
        n.value = expand(x, r, c) + expand(*y, r, c);
      } else {
        n.value = expand(x, r, c).cwiseProduct(expand(*y, r, c));
      }
      break;
    }
    case Primitive::kExp:
      n.value = x.array().exp().matrix();
      break;
    case Primitive::kLog:
      n.value = x.array().log().matrix();
      break;
    case Primitive::kTanh:
      n.value = x.array().tanh().matrix();
      break;
    case Primitive::kSquare:
      n.value = x.array().square().matrix();
      break;
    case Primitive::kNegate:
      n.value = -x;
      break;
    case Primitive::kAffine:
      n.value = (args.lo * x.array() + args.hi).matrix();
      break;
    case Primitive::kSum:
      n.value = reduce_sum(x, args.axis);
      break;
    case Primitive::kMean:
      n.value = reduce_sum(x, args.axis) / static_cast<double>(reduced_count(x, args.axis));
      break;
    case Primitive::kLogSumExp:
      n.value = reduce_log_sum_exp(x, args.axis);
      break;
    case Primitive::kClamp:
      if (!(args.lo <= args.hi)) {
        throw std::invalid_argument("autodiff: clamp with lo > hi");
      }
      n.value = x.cwiseMax(args.lo).cwiseMin(args.hi);
      break;
    case Primitive::kSliceCols:
      if (args.offset < 0 || args.count < 0 || args.offset + args.count > x.cols()) {
        shape_error(prim, x, nullptr,
                    "columns [" + std::to_string(args.offset) + ", " + std::to_string(args.offset + args.count) + ")");
      }
      n.value = x.middleCols(args.offset, args.count);
      break;
    case Primitive::kConstant:
    case Primitive::kParameter:
      throw std::invalid_argument("autodiff: leaves are created with constant() or param()");
  }

  if (!n.value.allFinite()) {
    throw NumericError(std::string("autodiff: ") + primitive_name(prim) + " produced a non-finite value");
  }
  return push(std::move(n));
}

Gradients Tape::backward(Var root) {
  if (root.tape() != this) {
    throw std::invalid_argument("autodiff: root belongs to a different tape");
  }
  if (node(root).value.size() != 1) {
    throw ShapeError("autodiff: backward needs a scalar root, got " + shape_of(node(root).value));
  }

  const auto count = static_cast<std::size_t>(root.id()) + 1;
  // A node needs a gradient only if some parameter lies beneath it.
  std::vector<char> live(count, 0);
  for (std::size_t i = 0; i < count; ++i) {
    const Node& n = nodes_[i];
    if (n.prim == Primitive::kParameter) {
      live[i] = 1;
      continue;
    }
    for (std::int32_t p : n.parents) {
      if (p >= 0 && live[static_cast<std::size_t>(p)] != 0) {
        live[i] = 1;
      }
    }
  }

  std::vector<Tensor> grads(count);
  auto accumulate = [&](std::int32_t id, Tensor g) {
    if (id < 0 || live[static_cast<std::size_t>(id)] == 0) {
      return;
    }
    Tensor& slot = grads[static_cast<std::size_t>(id)];
    if (slot.size() == 0) {
      slot = std::move(g);
    } else {
      slot += g;
    }
  };
  grads[count - 1] = Tensor::Ones(1, 1);

  for (std::size_t i = count; i-- > 0;) {
    const Node& n = nodes_[i];
    const Tensor& g = grads[i];
    if (live[i] == 0 || g.size() == 0 || n.prim == Primitive::kParameter) {
      continue;
    }
    const std::int32_t pa = n.parents[0];
    const std::int32_t pb = n.parents[1];
    const Tensor& x = pa >= 0 ? nodes_[static_cast<std::size_t>(pa)].value : n.value;
    switch (n.prim) {
      case Primitive::kMatMul: {
        const Tensor& y = nodes_[static_cast<std::size_t>(pb)].value;
        if (live[static_cast<std::size_t>(pa)] != 0) {
          accumulate(pa, g * y.transpose());
        }
        if (live[static_cast<std::size_t>(pb)] != 0) {
          accumulate(pb, x.transpose() * g);
        }
        break;
      }
      case Primitive::kTranspose:
        accumulate(pa, g.transpose());
        break;
      case Primitive::kAdd: {
        const Tensor& y = nodes_[static_cast<std::size_t>(pb)].value;
        accumulate(pa, reduce_to(g, x.rows(), x.cols()));
        accumulate(pb, reduce_to(g, y.rows(), y.cols()));
        break;
      }
      case Primitive::kMul: {
        const Tensor& y = nodes_[static_cast<std::size_t>(pb)].value;
        const Eigen::Index r = g.rows();
        const Eigen::Index c = g.cols();
        if (live[static_cast<std::size_t>(pa)] != 0) {
          accumulate(pa, reduce_to(g.cwiseProduct(expand(y, r, c)), x.rows(), x.cols()));
        }
        if (live[static_cast<std::size_t>(pb)] != 0) {
          accumulate(pb, reduce_to(g.cwiseProduct(expand(x, r, c)), y.rows(), y.cols()));
        }
        break;
      }
      case Primitive::kExp:
        accumulate(pa, g.cwiseProduct(n.value));
        break;
      case Primitive::kLog:
        accumulate(pa, g.cwiseQuotient(x));
        break;
      case Primitive::kTanh:
        accumulate(pa, (g.array() * (1.0 - n.value.array().square())).matrix());
        break;
      case Primitive::kSquare:
        accumulate(pa, (2.0 * g.array() * x.array()).matrix());
        break;
      case Primitive::kNegate:
        accumulate(pa, -g);
        break;
      case Primitive::kAffine:
        accumulate(pa, n.args.lo * g);
        break;
      case Primitive::kSum:
      case Primitive::kMean: {
        Tensor spread = expand(g, x.rows(), x.cols());
        if (n.prim == Primitive::kMean) {
          spread /= static_cast<double>(reduced_count(x, n.args.axis));
        }
        accumulate(pa, std::move(spread));
        break;
      }
      case Primitive::kLogSumExp: {
        const Tensor softmax =
            exp_or_zero(x.array() - expand(n.value, x.rows(), x.cols()).array()).matrix();
        accumulate(pa, softmax.cwiseProduct(expand(g, x.rows(), x.cols())));
        break;
      }
      case Primitive::kClamp: {
        const double lo = n.args.lo;
        const double hi = n.args.hi;
        Tensor pass = x.unaryExpr([lo, hi](double v) { return (v > lo && v < hi) ? 1.0 : 0.0; });
        accumulate(pa, g.cwiseProduct(pass));
        break;
      }
      case Primitive::kSliceCols: {
        Tensor full = Tensor::Zero(x.rows(), x.cols());
        full.middleCols(n.args.offset, n.args.count) = g;
        accumulate(pa, std::move(full));
        break;
      }
      case Primitive::kConstant:
      case Primitive::kParameter:
        break;
    }
  }

  Gradients out;
  for (const auto& [param, id] : param_ids_) {
    const auto idx = static_cast<std::size_t>(id);
    if (idx < count && grads[idx].size() != 0) {
      out.grads_.emplace(param, std::move(grads[idx]));
    } else {
      out.grads_.emplace(param, Tensor::Zero(param->value.rows(), param->value.cols()));
    }
  }
  return out;
}

Var matmul(Var a, Var b) { return a.tape()->apply(Primitive::kMatMul, a, b); }
Var transpose(Var a) { return a.tape()->apply(Primitive::kTranspose, a); }
Var operator+(Var a, Var b) { return a.tape()->apply(Primitive::kAdd, a, b); }
Var operator-(Var a, Var b) { return a + (-b); }
Var operator*(Var a, Var b) { return a.tape()->apply(Primitive::kMul, a, b); }
Var operator-(Var a) { return a.tape()->apply(Primitive::kNegate, a); }
Var exp(Var a) { return a.tape()->apply(Primitive::kExp, a); }
Var log(Var a) { return a.tape()->apply(Primitive::kLog, a); }
Var tanh(Var a) { return a.tape()->apply(Primitive::kTanh, a); }
Var square(Var a) { return a.tape()->apply(Primitive::kSquare, a); }

Var affine(Var a, double scale, double shift) {
  PrimitiveArgs args;
  args.lo = scale;
  args.hi = shift;
  return a.tape()->apply(Primitive::kAffine, a, {}, args);
}

Var operator*(double s, Var a) { return affine(a, s, 0.0); }
Var operator+(Var a, double s) { return affine(a, 1.0, s); }

Var sum(Var a, Axis axis) {
  PrimitiveArgs args;
  args.axis = axis;
  return a.tape()->apply(Primitive::kSum, a, {}, args);
}

Var mean(Var a, Axis axis) {
  PrimitiveArgs args;
  args.axis = axis;
  return a.tape()->apply(Primitive::kMean, a, {}, args);
}

Var log_sum_exp(Var a, Axis axis) {
  PrimitiveArgs args;
  args.axis = axis;
  return a.tape()->apply(Primitive::kLogSumExp, a, {}, args);
}

Var clamp(Var a, double lo, double hi) {
  PrimitiveArgs args;
  args.lo = lo;
  args.hi = hi;
  return a.tape()->apply(Primitive::kClamp, a, {}, args);
}

Var slice_cols(Var a, Eigen::Index begin, Eigen::Index count) {
  PrimitiveArgs args;
  args.offset = begin;
  args.count = count;
  return a.tape()->apply(Primitive::kSliceCols, a, {}, args);
}

}  // namespace vaeis::ad
