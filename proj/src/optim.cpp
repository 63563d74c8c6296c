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

#include "sda/optim.hpp"

#include <cmath>

#include "sda/error.hpp"

namespace sda {

Adam::Adam(const ParameterSet& params, AdamConfig config) : config_(config) {
  for (const auto& p : params) {
    state_.first_moment.emplace_back(p.value.shape(), 0.0);
    state_.second_moment.emplace_back(p.value.shape(), 0.0);
  }
}

void Adam::Step(ParameterSet& params, const Gradients& grads) {
  if (grads.size() != params.size() ||
      state_.first_moment.size() != params.size()) {
    Fail(ErrorCode::kShapeMismatch,
         "adam: " + std::to_string(grads.size()) + " gradients for " +
             std::to_string(params.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].shape() != params[i].value.shape()) {
      Fail(ErrorCode::kShapeMismatch,
           "adam: gradient " + ShapeString(grads[i].shape()) +
               " for parameter '" + params[i].name + "' of shape " +
               ShapeString(params[i].value.shape()));
    }
  }
  ++state_.step;
  const double t = static_cast<double>(state_.step);
  const double c1 = 1.0 - std::pow(config_.beta1, t);
  const double c2 = 1.0 - std::pow(config_.beta2, t);
  const double b1 = config_.beta1, b2 = config_.beta2;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i].value.values();
    auto m = state_.first_moment[i].values();
    auto v = state_.second_moment[i].values();
    const auto g = grads[i].values();
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = b1 * m[j] + (1.0 - b1) * g[j];
      v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      w[j] -= config_.learning_rate * mhat / (std::sqrt(vhat) + config_.epsilon);
    }
  }
}

}  // namespace sda
