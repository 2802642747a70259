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

#ifndef VAEIS_TESTS_GRADCHECK_HPP
#define VAEIS_TESTS_GRADCHECK_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <vaeis/autodiff.hpp>

namespace vaeis::testing {

/// Builds a scalar loss on a fresh tape.
using LossBuilder = std::function<ad::Var(ad::Tape&)>;

/// Relative error |a - n| / max(|a|, |n|, floor) between a reverse-mode gradient
/// and a central difference, maximized over every entry of every parameter.
inline double max_gradient_error(const std::vector<ad::Parameter*>& params, const LossBuilder& build,
                                 double h = 1e-5, double floor = 1e-4) {
  ad::Gradients grads;
  {
    ad::Tape tape;
    grads = tape.backward(build(tape));
  }
  auto eval = [&] {
    ad::Tape tape;
    return build(tape).scalar();
  };
  double worst = 0.0;
  for (auto* p : params) {
    const Matrix* g = grads.find(*p);
    for (Eigen::Index k = 0; k < p->value.size(); ++k) {
      double& x = p->value.data()[k];
      const double saved = x;
      x = saved + h;
      const double up = eval();
      x = saved - h;
      const double down = eval();
      x = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = g == nullptr ? 0.0 : g->data()[k];
      const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
      worst = std::max(worst, std::abs(analytic - numeric) / scale);
    }
  }
  return worst;
}

}  // namespace vaeis::testing

#endif
