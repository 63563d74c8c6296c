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

#ifndef SDA_OPTIM_HPP_
#define SDA_OPTIM_HPP_

#include <cstdint>
#include <vector>

#include "sda/autodiff.hpp"

namespace sda {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::int64_t step = 0;
};

// Adam with bias correction. The step counter is incremented before the
// correction terms are computed, so the first update uses t = 1.
class Adam {
 public:
  Adam(const ParameterSet& params, AdamConfig config = {});

  void Step(ParameterSet& params, const Gradients& grads);

  const AdamConfig& config() const { return config_; }
  AdamConfig& config() { return config_; }
  const AdamState& state() const { return state_; }

 private:
  AdamConfig config_;
  AdamState state_;
};

}  // namespace sda

#endif  // SDA_OPTIM_HPP_
