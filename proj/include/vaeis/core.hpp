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

#ifndef VAEIS_CORE_HPP
#define VAEIS_CORE_HPP

#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

/**
 * \file
 * \brief Shared numeric types, random streams and error types.
 */

namespace vaeis {

/// Dense row-major matrix. Point sets are stored one point per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

using Rng = std::mt19937_64;

inline constexpr double kLogTwoPi = 1.8378770664093454836;  // log(2 pi)

/// SplitMix64 finalizer, used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Random stream number `stream` of the master seed `seed`.
/**
 * Streams are addressed by counter, so the stream a replication receives does not
 * depend on how many threads run the replications.
 */
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{splitmix64(seed), splitmix64(seed ^ splitmix64(stream + 1)), stream};
  return Rng{seq};
}

/// Draws a matrix of independent standard normal variates.
inline Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal{0.0, 1.0};
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out.data()[i] = normal(rng);
  }
  return out;
}

/// Log of sum of exponentials, safe for -inf entries.
double log_sum_exp(std::span<const double> values);

/**
 * Elementwise exp that returns exactly 0 where the result would be subnormal,
 * including exp(-inf). Eigen's vectorized exp clamps its argument and yields the
 * smallest normal number there, which leaks denormals into later arithmetic.
 */
template <typename Derived>
typename Derived::PlainObject exp_or_zero(const Eigen::ArrayBase<Derived>& a) {
  constexpr double kLogMinNormal = -708.39641853226408;
  const typename Derived::PlainObject x = a;
  return (x < kLogMinNormal).select(0.0, x.exp());
}

/// Row `i` of a row-major matrix as a span.
inline std::span<const double> row_span(const Matrix& m, Eigen::Index i) {
  return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

/// Shape mismatch in a primitive or an API call.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation produced NaN or infinity where a finite value is required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Importance weights too degenerate to continue (effective sample size too small).
class DegenerateWeightsError : public std::runtime_error {
 public:
  DegenerateWeightsError(const std::string& what, double ess) : std::runtime_error(what), ess_(ess) {}
  [[nodiscard]] double ess() const { return ess_; }

 private:
  double ess_;
};

}  // namespace vaeis

#endif
