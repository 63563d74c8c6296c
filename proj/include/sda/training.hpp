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

// Mini-batch training with Adam, lambda schedules and early stopping.
//
// Epoch e visits the training set in the order of a shuffle seeded by
// Rng::Derive(seed, 0, e). Step s (1-based, global) draws the randomness of
// batch position j from Rng::Derive(seed, s, j + 1), so a step is a pure
// function of the parameters, the step number and the batch contents. The
// batch loss is the mean over instances that carry a training signal for the
// model family; a batch without any such instance leaves the parameters
// unchanged. Dev accuracy is measured `evals_per_epoch` times per epoch and
// training stops after `patience` evaluations without improvement. The
// returned model holds the best-dev parameters.
//
// Training log (JSON lines, append-only):
//   {"type":"step","step":s,"epoch":e,"loss":L,"nll":..,"kl":..,"dom":..,
//    "lambda":l,"used":n,"batch":[i,...]}
//   {"type":"eval","step":s,"epoch":e,"dev_acc":a,"best":true|false}
// loss is the mean weighted objective, nll/kl/dom the means of its
// unweighted parts, used the number of contributing instances and batch the
// corpus indices in visiting order.

#ifndef SDA_TRAINING_HPP_
#define SDA_TRAINING_HPP_

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "sda/data.hpp"
#include "sda/inference.hpp"
#include "sda/model.hpp"

namespace sda {

enum class LambdaSchedule { kFixed, kLinearAnneal };

const char* ScheduleName(LambdaSchedule s);
LambdaSchedule ParseSchedule(std::string_view name);

struct TrainConfig {
  double lambda = 0.1;
  LambdaSchedule schedule = LambdaSchedule::kFixed;
  std::size_t anneal_steps = 0;  // 0 anneals over the first epoch
  double learning_rate = 1e-4;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 20;
  std::size_t patience = 5;
  std::size_t evals_per_epoch = 2;
  std::uint64_t seed = 1;
  InferConfig dev_infer;

  void Validate() const;
};

// KL weight at 1-based step `step`.
double LambdaAt(const TrainConfig& config, std::size_t step, std::size_t steps_per_epoch);

struct StepRecord {
  std::size_t step = 0;
  std::size_t epoch = 0;
  double loss = 0.0, nll = 0.0, kl = 0.0, dom = 0.0, lambda = 0.0;
  std::size_t used = 0;
  std::vector<std::size_t> batch;
};

struct EvalRecord {
  std::size_t step = 0;
  std::size_t epoch = 0;
  double dev_acc = 0.0;
  bool best = false;
};

struct TrainLog {
  std::vector<StepRecord> steps;
  std::vector<EvalRecord> evals;

  static std::string StepLine(const StepRecord& r);
  static std::string EvalLine(const EvalRecord& r);
  static TrainLog Parse(const std::string& jsonl);
};

struct TrainResult {
  Model best;
  ParameterSet final_params;
  TrainLog log;
  double best_dev_acc = 0.0;
  std::size_t best_step = 0;
  bool early_stopped = false;
};

// `log_stream`, when given, receives each log line as it is produced.
TrainResult Train(const Model& init, const Corpus& train, const Corpus& dev,
                  const TrainConfig& config, std::ostream* log_stream = nullptr);

// Re-executes the steps recorded in `log` from `init` and returns the
// parameters after the last one.
ParameterSet Replay(const Model& init, const Corpus& train, const TrainConfig& config,
                    const TrainLog& log);

struct DomainAccuracy {
  std::string domain;  // "UNK" for documents without a domain
  std::size_t n = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
};

struct EvalResult {
  double accuracy = 0.0;
  std::size_t n = 0;
  std::size_t correct = 0;
  std::vector<DomainAccuracy> per_domain;  // sorted by name
  std::vector<Prediction> predictions;
};

// Micro accuracy over labeled documents, overall and per domain name.
EvalResult Evaluate(const Model& model, const Corpus& corpus, const InferConfig& config);

}  // namespace sda

#endif  // SDA_TRAINING_HPP_
