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

#include <cmath>

#include <vaeis/autodiff.hpp>
#include <vaeis/nets.hpp>

#include "gradcheck.hpp"

namespace {

using vaeis::Matrix;
using vaeis::ad::Axis;
using vaeis::ad::Parameter;
using vaeis::ad::Tape;
using vaeis::ad::Var;
using vaeis::testing::max_gradient_error;
namespace ad = vaeis::ad;

Parameter random_param(const char* name, Eigen::Index r, Eigen::Index c, vaeis::Rng& rng, double scale = 1.0) {
  return {name, scale * vaeis::standard_normal(r, c, rng)};
}

// Reduces any tensor to a scalar with fixed random weights so every entry matters.
Var weighted_total(Tape& tape, Var v, const Matrix& w) { return ad::sum(v * tape.constant(w)); }

TEST(Autodiff, SquareOfScalar) {
  Parameter x{"x", Matrix::Constant(1, 1, 3.0)};
  Tape tape;
  const Var y = ad::square(tape.param(x));
  EXPECT_DOUBLE_EQ(y.scalar(), 9.0);
  EXPECT_DOUBLE_EQ(tape.backward(y).at(x)(0, 0), 6.0);
}

TEST(Autodiff, LogSumExpOfEqualLogits) {
  Parameter x{"x", Matrix::Zero(1, 2)};
  Tape tape;
  const Var y = ad::log_sum_exp(tape.param(x), Axis::kCols);
  EXPECT_NEAR(y.scalar(), std::log(2.0), 1e-15);
  const auto g = tape.backward(y);
  EXPECT_DOUBLE_EQ(g.at(x)(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(g.at(x)(0, 1), 0.5);
}

TEST(Autodiff, ConstantRootGivesZeroGradients) {
  Parameter x{"x", Matrix::Ones(2, 2)};
  Tape tape;
  tape.param(x);
  const auto g = tape.backward(tape.scalar(4.0));
  EXPECT_TRUE(g.at(x).isZero());
}

TEST(Autodiff, SharedLeafAccumulates) {
  Parameter x{"x", Matrix::Constant(1, 1, 1.5)};
  Tape tape;
  const Var v = tape.param(x);
  EXPECT_DOUBLE_EQ(tape.backward(v + v).at(x)(0, 0), 2.0);
}

TEST(Autodiff, NonScalarRootThrows) {
  Parameter x{"x", Matrix::Ones(2, 1)};
  Tape tape;
  EXPECT_THROW((void)tape.backward(tape.param(x)), std::invalid_argument);
}

TEST(Autodiff, ShapeErrorNamesPrimitiveAndShapes) {
  Tape tape;
  const Var a = tape.constant(Matrix::Ones(2, 3));
  try {
    (void)ad::matmul(a, a);
    FAIL() << "expected ShapeError";
  } catch (const vaeis::ShapeError& e) {
    EXPECT_THAT(e.what(), ::testing::HasSubstr("matmul"));
    EXPECT_THAT(e.what(), ::testing::HasSubstr("2x3"));
  }
  EXPECT_THROW((void)(a + tape.constant(Matrix::Ones(3, 2))), vaeis::ShapeError);
}

TEST(Autodiff, NonFiniteValueIsAnError) {
  Tape tape;
  EXPECT_THROW((void)ad::log(tape.constant(Matrix::Constant(1, 1, -1.0))), vaeis::NumericError);
  EXPECT_THROW((void)ad::exp(tape.constant(Matrix::Constant(1, 1, 1000.0))), vaeis::NumericError);
}

TEST(Autodiff, ElementwisePrimitivesMatchFiniteDifferences) {
  vaeis::Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    Parameter a = random_param("a", 3, 4, rng);
    Parameter b = random_param("b", 3, 4, rng);
    Parameter pos{"pos", (vaeis::standard_normal(3, 4, rng).array().abs() + 0.5).matrix()};
    const Matrix w = vaeis::standard_normal(3, 4, rng);
    const std::vector<std::pair<const char*, std::function<Var(Tape&)>>> cases = {
        {"add", [&](Tape& t) { return t.param(a) + t.param(b); }},
        {"sub", [&](Tape& t) { return t.param(a) - t.param(b); }},
        {"mul", [&](Tape& t) { return t.param(a) * t.param(b); }},
        {"neg", [&](Tape& t) { return -t.param(a); }},
        {"exp", [&](Tape& t) { return ad::exp(t.param(a)); }},
        {"log", [&](Tape& t) { return ad::log(t.param(pos)); }},
        {"tanh", [&](Tape& t) { return ad::tanh(t.param(a)); }},
        {"square", [&](Tape& t) { return ad::square(t.param(a)); }},
        {"affine", [&](Tape& t) { return ad::affine(t.param(a), -1.7, 0.3); }},
        {"clamp", [&](Tape& t) { return ad::clamp(t.param(a), -0.8, 0.9); }},
    };
    for (const auto& [name, f] : cases) {
      const double err =
          max_gradient_error({&a, &b, &pos}, [&](Tape& t) { return weighted_total(t, f(t), w); });
      EXPECT_LE(err, 1e-5) << name;
    }
  }
}

TEST(Autodiff, StructuralPrimitivesMatchFiniteDifferences) {
  vaeis::Rng rng(12);
  Parameter a = random_param("a", 3, 4, rng);
  Parameter b = random_param("b", 4, 2, rng);
  Parameter row = random_param("row", 1, 4, rng);
  Parameter col = random_param("col", 3, 1, rng);
  auto check = [&](const char* name, const std::function<Var(Tape&)>& f) {
    Matrix w;
    {
      Tape t;
      const Var v = f(t);
      vaeis::Rng wr(99);
      w = vaeis::standard_normal(v.rows(), v.cols(), wr);
    }
    EXPECT_LE(max_gradient_error({&a, &b, &row, &col}, [&](Tape& t) { return weighted_total(t, f(t), w); }), 1e-5)
        << name;
  };
  check("matmul", [&](Tape& t) { return ad::matmul(t.param(a), t.param(b)); });
  check("transpose", [&](Tape& t) { return ad::transpose(t.param(a)); });
  check("broadcast-row", [&](Tape& t) { return t.param(a) + t.param(row); });
  check("broadcast-col", [&](Tape& t) { return t.param(a) * t.param(col); });
  check("outer", [&](Tape& t) { return t.param(col) - t.param(row); });
  check("sum-all", [&](Tape& t) { return ad::sum(t.param(a)); });
  check("sum-rows", [&](Tape& t) { return ad::sum(t.param(a), Axis::kRows); });
  check("sum-cols", [&](Tape& t) { return ad::sum(t.param(a), Axis::kCols); });
  check("mean-cols", [&](Tape& t) { return ad::mean(t.param(a), Axis::kCols); });
  check("lse-cols", [&](Tape& t) { return ad::log_sum_exp(t.param(a), Axis::kCols); });
  check("lse-rows", [&](Tape& t) { return ad::log_sum_exp(t.param(a), Axis::kRows); });
  check("lse-all", [&](Tape& t) { return ad::log_sum_exp(t.param(a), Axis::kAll); });
  check("slice", [&](Tape& t) { return ad::slice_cols(t.param(a), 1, 2); });
}

TEST(Autodiff, MlpMatchesFiniteDifferences) {
  vaeis::Rng rng(3);
  const std::size_t dims[] = {3, 5, 4, 1};
  auto params = vaeis::nets::init_params(dims, rng, "mlp");
  const Matrix x = vaeis::standard_normal(6, 3, rng);
  const double err = max_gradient_error(params.parameters(), [&](Tape& t) {
    return ad::sum(vaeis::nets::mlp_forward(t, params, t.constant(x)));
  });
  EXPECT_LE(err, 1e-5);
}

TEST(Autodiff, ClampGradientIsZeroWhenSaturated) {
  Parameter x{"x", Matrix(1, 3)};
  x.value << -12.0, 0.5, 11.0;
  Tape tape;
  const auto g = tape.backward(ad::sum(ad::clamp(tape.param(x), -10.0, 10.0)));
  EXPECT_DOUBLE_EQ(g.at(x)(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(g.at(x)(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(g.at(x)(0, 2), 0.0);
}

TEST(Autodiff, BackwardIsLinear) {
  vaeis::Rng rng(5);
  Parameter x = random_param("x", 2, 3, rng);
  auto f = [&](Tape& t) { return ad::sum(ad::tanh(t.param(x))); };
  auto g = [&](Tape& t) { return ad::sum(ad::square(t.param(x))); };
  auto grad = [&](const std::function<Var(Tape&)>& h) {
    Tape t;
    return Matrix(t.backward(h(t)).at(x));
  };
  const Matrix combined = grad([&](Tape& t) { return 2.0 * f(t) + (-3.0) * g(t); });
  EXPECT_TRUE(combined.isApprox(2.0 * grad(f) - 3.0 * grad(g), 1e-14));
}

TEST(Autodiff, IdenticalGraphsAreBitIdentical) {
  vaeis::Rng rng(8);
  const std::size_t dims[] = {4, 7, 2};
  auto params = vaeis::nets::init_params(dims, rng, "mlp");
  const Matrix x = vaeis::standard_normal(5, 4, rng);
  auto run = [&] {
    Tape t;
    const Var loss = ad::log_sum_exp(vaeis::nets::mlp_forward(t, params, t.constant(x)), Axis::kAll);
    const auto g = t.backward(loss);
    return std::pair{loss.scalar(), Matrix(g.at(params.layers[0].weight))};
  };
  const auto [l1, g1] = run();
  const auto [l2, g2] = run();
  EXPECT_EQ(l1, l2);
  EXPECT_TRUE((g1.array() == g2.array()).all());
}

TEST(Autodiff, UnreachableParameterGetsZeroGradient) {
  Parameter used{"used", Matrix::Ones(1, 1)};
  Parameter unused{"unused", Matrix::Ones(2, 2)};
  Tape tape;
  tape.param(unused);
  const auto g = tape.backward(ad::square(tape.param(used)));
  EXPECT_TRUE(g.at(unused).isZero());
}

}  // namespace
