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

// Test-time prediction from x alone.
//
// Continuous-gate models support four strategies:
//   prior-sample         one z ~ p(z|x), classify with it
//   prior-mean           z = E[z|x] under the prior
//   mc-average           average p(y|x,z_i) over m prior samples
//   importance-sampling  for every candidate y, estimate
//                        p(y|x) = E_q[p(y|x,z) p(z|x) / q(z|x,y,UNK)]
//                        with m draws from q(z|x,y,UNK)
// dsda always marginalizes the k channels exactly, and scnn/mcnn have no
// latent, so their predictions ignore the strategy (Prediction::note says
// so). The random stream of instance i is Rng::Derive(seed, i, ...), so
// results do not depend on evaluation order.

#ifndef SDA_INFERENCE_HPP_
#define SDA_INFERENCE_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sda/model.hpp"

namespace sda {

enum class Strategy { kPriorSample, kPriorMean, kMcAverage, kImportanceSampling };

const char* StrategyName(Strategy s);
Strategy ParseStrategy(std::string_view name);

struct InferConfig {
  Strategy strategy = Strategy::kPriorSample;
  std::size_t m = 100;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct Prediction {
  int label = 0;
  std::vector<double> probs;      // normalized label distribution
  std::vector<double> estimates;  // unnormalized p(y|x) estimates (IS), else probs
  std::string note;               // non-empty when the strategy was not applicable
};

// Value-only forward pieces shared by prediction and probes.
struct Encoded {
  std::vector<std::vector<double>> channels;  // h_1..h_k
  std::vector<double> prior_log_probs;        // dsda
  ContinuousParams prior;                     // csda
};

Encoded EncodeForInference(const Model& model, std::span<const int> ids);
// Label log-probabilities for a head input.
std::vector<double> HeadLogProbs(const Model& model, std::span<const double> h);
// sum_i z_i h_i, skipping zero weights.
std::vector<double> GateValues(const std::vector<std::vector<double>>& channels,
                               std::span<const double> z);
// Draws one gate from continuous parameters.
std::vector<double> SampleGate(const ContinuousParams& params, Rng& rng);

Prediction Predict(const Model& model, const Instance& inst, const InferConfig& config,
                   std::uint64_t instance_index);
std::vector<Prediction> PredictAll(const Model& model, std::span<const Instance> instances,
                                   const InferConfig& config);

}  // namespace sda

#endif  // SDA_INFERENCE_HPP_
