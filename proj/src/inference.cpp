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

#include "sda/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sda/error.hpp"

namespace sda {
namespace {

void LogSoftmaxInPlace(std::vector<double>& v) {
  const double mx = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  const double lse = mx + std::log(s);
  for (double& x : v) x -= lse;
}

int ArgMax(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::vector<double> Exp(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::exp(v[i]);
  return out;
}

Prediction FromProbs(std::vector<double> probs) {
  Prediction p;
  p.label = ArgMax(probs);
  p.estimates = probs;
  p.probs = std::move(probs);
  return p;
}

}  // namespace

const char* StrategyName(Strategy s) {
  switch (s) {
    case Strategy::kPriorSample: return "prior-sample";
    case Strategy::kPriorMean: return "prior-mean";
    case Strategy::kMcAverage: return "mc-average";
    case Strategy::kImportanceSampling: return "importance-sampling";
  }
  return "unknown";
}

Strategy ParseStrategy(std::string_view name) {
  for (auto s : {Strategy::kPriorSample, Strategy::kPriorMean, Strategy::kMcAverage,
                 Strategy::kImportanceSampling}) {
    if (name == StrategyName(s)) return s;
  }
  Fail(ErrorCode::kInvalidArgument,
       "unknown strategy '" + std::string(name) +
           "' (expected prior-sample, prior-mean, mc-average or importance-sampling)");
}

void InferConfig::Validate() const { Require(m >= 1, "sample count m must be >= 1"); }

Encoded EncodeForInference(const Model& model, std::span<const int> ids) {
  Tape tape;
  Encoded e;
  for (Var h : model.Channels(tape, ids)) e.channels.push_back(h.value().data());
  const ModelFamily f = model.config().family;
  if (f == ModelFamily::kDsda) {
    e.prior_log_probs = model.Prior(tape, ids).log_probs.value().data();
  } else if (IsContinuous(f)) {
    e.prior = model.Prior(tape, ids).Params();
  }
  return e;
}

std::vector<double> HeadLogProbs(const Model& model, std::span<const double> h) {
  const ParameterSet& p = model.params();
  const Tensor& w1 = p[p.Index("head/l1/w")].value;
  const Tensor& b1 = p[p.Index("head/l1/b")].value;
  const Tensor& w2 = p[p.Index("head/l2/w")].value;
  const Tensor& b2 = p[p.Index("head/l2/b")].value;
  Require(h.size() == w1.dim(0), "head input has wrong width");
  std::vector<double> hidden(b1.data());
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h[i] == 0.0) continue;
    for (std::size_t j = 0; j < hidden.size(); ++j) hidden[j] += h[i] * w1.at(i, j);
  }
  for (double& v : hidden) v = std::max(v, 0.0);
  std::vector<double> logits(b2.data());
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    if (hidden[i] == 0.0) continue;
    for (std::size_t j = 0; j < logits.size(); ++j) logits[j] += hidden[i] * w2.at(i, j);
  }
  LogSoftmaxInPlace(logits);
  return logits;
}

std::vector<double> GateValues(const std::vector<std::vector<double>>& channels,
                               std::span<const double> z) {
  Require(!channels.empty() && channels.size() == z.size(),
          "gate length must equal the channel count");
  std::vector<double> out(channels[0].size(), 0.0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] == 0.0) continue;
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += z[i] * channels[i][j];
  }
  return out;
}

std::vector<double> SampleGate(const ContinuousParams& params, Rng& rng) {
  return std::visit([&](const auto& p) { return Sample(p, rng).gate.z; }, params);
}

Prediction Predict(const Model& model, const Instance& inst, const InferConfig& config,
                   std::uint64_t instance_index) {
  config.Validate();
  const ModelFamily family = model.config().family;
  Encoded enc = EncodeForInference(model, inst.ids);

  if (family == ModelFamily::kScnn || family == ModelFamily::kMcnn) {
    std::vector<double> h;
    for (const auto& c : enc.channels) h.insert(h.end(), c.begin(), c.end());
    if (family == ModelFamily::kScnn) h = enc.channels[0];
    Prediction p = FromProbs(Exp(HeadLogProbs(model, h)));
    if (config.strategy != Strategy::kPriorSample) p.note = "no latent gate; strategy ignored";
    return p;
  }

  if (family == ModelFamily::kDsda) {
    const std::size_t k = enc.channels.size();
    std::vector<std::vector<double>> per(k);
    for (std::size_t i = 0; i < k; ++i) per[i] = HeadLogProbs(model, enc.channels[i]);
    std::vector<double> probs(model.num_labels());
    for (std::size_t y = 0; y < probs.size(); ++y) {
      std::vector<double> terms(k);
      for (std::size_t i = 0; i < k; ++i) terms[i] = enc.prior_log_probs[i] + per[i][y];
      const double mx = *std::max_element(terms.begin(), terms.end());
      double s = 0.0;
      for (double t : terms) s += std::exp(t - mx);
      probs[y] = std::exp(mx + std::log(s));
    }
    Prediction p = FromProbs(std::move(probs));
    p.note = "exact marginalization over k channels";
    return p;
  }

  Rng rng = Rng::Derive(config.seed, instance_index);
  switch (config.strategy) {
    case Strategy::kPriorSample: {
      const auto z = SampleGate(enc.prior, rng);
      return FromProbs(Exp(HeadLogProbs(model, GateValues(enc.channels, z))));
    }
    case Strategy::kPriorMean: {
      const auto z = Mean(enc.prior);
      return FromProbs(Exp(HeadLogProbs(model, GateValues(enc.channels, z))));
    }
    case Strategy::kMcAverage: {
      std::vector<double> avg(model.num_labels(), 0.0);
      for (std::size_t s = 0; s < config.m; ++s) {
        const auto z = SampleGate(enc.prior, rng);
        const auto lp = HeadLogProbs(model, GateValues(enc.channels, z));
        for (std::size_t y = 0; y < avg.size(); ++y) avg[y] += std::exp(lp[y]);
      }
      for (double& v : avg) v /= static_cast<double>(config.m);
      return FromProbs(std::move(avg));
    }
    case Strategy::kImportanceSampling: {
      const std::size_t n_labels = model.num_labels();
      std::vector<double> est(n_labels, 0.0);
      for (std::size_t y = 0; y < n_labels; ++y) {
        Tape tape;
        const ContinuousParams q =
            model.Posterior(tape, inst.ids, static_cast<int>(y), kUnkIndex).Params();
        Rng ry = Rng::Derive(config.seed, instance_index, y + 1);
        double sum = 0.0;
        for (std::size_t s = 0; s < config.m; ++s) {
          const auto z = SampleGate(q, ry);
          const double log_q = LogPdf(q, z);
          const double log_p = LogPdf(enc.prior, z);
          if (!std::isfinite(log_q) || log_p == -std::numeric_limits<double>::infinity()) {
            continue;
          }
          const double lpy = HeadLogProbs(model, GateValues(enc.channels, z))[y];
          sum += std::exp(lpy + log_p - log_q);
        }
        est[y] = sum / static_cast<double>(config.m);
      }
      double total = 0.0;
      for (double v : est) total += v;
      Prediction p;
      p.estimates = est;
      p.probs = est;
      if (total > 0.0 && std::isfinite(total)) {
        for (double& v : p.probs) v /= total;
      } else {
        std::fill(p.probs.begin(), p.probs.end(), 1.0 / static_cast<double>(n_labels));
        p.note = "importance weights degenerate; uniform fallback";
      }
      p.label = ArgMax(p.probs);
      return p;
    }
  }
  Fail(ErrorCode::kState, "unreachable strategy");
}

std::vector<Prediction> PredictAll(const Model& model, std::span<const Instance> instances,
                                   const InferConfig& config) {
  std::vector<Prediction> out;
  out.reserve(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    out.push_back(Predict(model, instances[i], config, i));
  }
  return out;
}

}  // namespace sda
