// Copyright 2026 The SDA Authors.
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

// Central finite-difference check of tape gradients. The oracle only ever
// evaluates the forward pass.

#ifndef SDA_TESTS_GRAD_CHECK_HPP_
#define SDA_TESTS_GRAD_CHECK_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "sda/autodiff.hpp"

namespace sda::testing {

using LossFn = std::function<Var(Tape&, const ParameterSet&)>;

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst;  // "param[index]"
  std::size_t checked = 0;
};

// Compares analytic gradients with central differences of step `h` for
// every coordinate of the selected parameters (all when `only` is empty).
// Relative error uses max(|analytic|, |numeric|, floor) as denominator.
inline GradCheckResult CheckGradients(ParameterSet& params, const LossFn& loss,
                                      double h = 1e-5, double floor = 1e-6,
                                      const std::function<bool(const std::string&)>& only = {}) {
  Gradients grads(params);
  {
    Tape tape;
    Var l = loss(tape, params);
    tape.Backward(l, grads);
  }
  auto eval = [&]() {
    Tape tape;
    return loss(tape, params).item();
  };
  GradCheckResult res;
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (only && !only(params[p].name)) continue;
    auto values = params[p].value.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double orig = values[i];
      const double step = h * std::max(1.0, std::fabs(orig));
      values[i] = orig + step;
      const double up = eval();
      values[i] = orig - step;
      const double down = eval();
      values[i] = orig;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = grads[p][i];
      const double err = std::fabs(numeric - analytic) /
                         std::max({std::fabs(numeric), std::fabs(analytic), floor});
      ++res.checked;
      if (err > res.max_rel_err) {
        res.max_rel_err = err;
        res.worst = params[p].name + "[" + std::to_string(i) + "] analytic=" +
                    std::to_string(analytic) + " numeric=" + std::to_string(numeric);
      }
    }
  }
  return res;
}

}  // namespace sda::testing

#endif  // SDA_TESTS_GRAD_CHECK_HPP_
