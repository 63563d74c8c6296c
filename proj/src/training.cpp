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

#include "sda/training.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "sda/error.hpp"
#include "sda/optim.hpp"

namespace sda {
namespace {

using json = nlohmann::json;

StepRecord RunStep(Model& model, Adam& adam, Gradients& grads,
                   const std::vector<Instance>& insts, std::span<const std::size_t> batch,
                   std::size_t step, std::size_t epoch, double lambda, std::uint64_t seed) {
  StepRecord rec;
  rec.step = step;
  rec.epoch = epoch;
  rec.lambda = lambda;
  rec.batch.assign(batch.begin(), batch.end());
  grads.Zero();
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const Instance& inst = insts[batch[j]];
    Rng rng = Rng::Derive(seed, step, j + 1);
    Tape tape;
    LossParts parts;
    std::optional<Var> loss;
    try {
      loss = model.Loss(tape, inst, lambda, rng, /*train=*/true, &parts);
    } catch (const Error& e) {
      Fail(e.code(), "step " + std::to_string(step) + " epoch " + std::to_string(epoch) +
                         " instance '" + inst.id + "': " + e.what());
    }
    if (!loss) continue;
    tape.Backward(*loss, grads);
    rec.loss += loss->item();
    rec.nll += parts.nll;
    rec.kl += parts.kl;
    rec.dom += parts.dom;
    ++rec.used;
  }
  if (rec.used == 0) return rec;
  const double inv = 1.0 / static_cast<double>(rec.used);
  rec.loss *= inv;
  rec.nll *= inv;
  rec.kl *= inv;
  rec.dom *= inv;
  if (!std::isfinite(rec.loss)) {
    Fail(ErrorCode::kNumeric, "non-finite training loss at step " + std::to_string(step));
  }
  grads.Scale(inv);
  adam.Step(model.params(), grads);
  return rec;
}

std::vector<std::size_t> EpochOrder(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng::Derive(seed, 0, epoch);
  rng.Shuffle(std::span<std::size_t>(order));
  return order;
}

}  // namespace

const char* ScheduleName(LambdaSchedule s) {
  return s == LambdaSchedule::kFixed ? "fixed" : "linear-anneal";
}

LambdaSchedule ParseSchedule(std::string_view name) {
  if (name == "fixed") return LambdaSchedule::kFixed;
  if (name == "linear-anneal") return LambdaSchedule::kLinearAnneal;
  Fail(ErrorCode::kInvalidArgument,
       "unknown lambda schedule '" + std::string(name) + "' (expected fixed or linear-anneal)");
}

void TrainConfig::Validate() const {
  Require(lambda >= 0.0 && std::isfinite(lambda), "lambda must be finite and >= 0");
  Require(learning_rate > 0.0 && std::isfinite(learning_rate), "learning rate must be > 0");
  Require(batch_size >= 1, "batch size must be >= 1");
  Require(max_epochs >= 1, "max epochs must be >= 1");
  Require(patience >= 1, "patience must be >= 1");
  Require(evals_per_epoch >= 1, "evals per epoch must be >= 1");
  dev_infer.Validate();
}

double LambdaAt(const TrainConfig& config, std::size_t step, std::size_t steps_per_epoch) {
  if (config.schedule == LambdaSchedule::kFixed) return config.lambda;
  const std::size_t span = config.anneal_steps != 0 ? config.anneal_steps : steps_per_epoch;
  if (span == 0 || step >= span) return config.lambda;
  return config.lambda * static_cast<double>(step) / static_cast<double>(span);
}

std::string TrainLog::StepLine(const StepRecord& r) {
  json j;
  j["type"] = "step";
  j["step"] = r.step;
  j["epoch"] = r.epoch;
  j["loss"] = r.loss;
  j["nll"] = r.nll;
  j["kl"] = r.kl;
  j["dom"] = r.dom;
  j["lambda"] = r.lambda;
  j["used"] = r.used;
  j["batch"] = r.batch;
  return j.dump();
}

std::string TrainLog::EvalLine(const EvalRecord& r) {
  json j;
  j["type"] = "eval";
  j["step"] = r.step;
  j["epoch"] = r.epoch;
  j["dev_acc"] = r.dev_acc;
  j["best"] = r.best;
  return j.dump();
}

TrainLog TrainLog::Parse(const std::string& jsonl) {
  TrainLog log;
  std::istringstream in(jsonl);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string type = j.at("type");
      if (type == "step") {
        StepRecord r;
        r.step = j.at("step");
        r.epoch = j.at("epoch");
        r.loss = j.at("loss");
        r.nll = j.at("nll");
        r.kl = j.at("kl");
        r.dom = j.at("dom");
        r.lambda = j.at("lambda");
        r.used = j.at("used");
        r.batch = j.at("batch").get<std::vector<std::size_t>>();
        log.steps.push_back(std::move(r));
      } else if (type == "eval") {
        EvalRecord r;
        r.step = j.at("step");
        r.epoch = j.at("epoch");
        r.dev_acc = j.at("dev_acc");
        r.best = j.at("best");
        log.evals.push_back(r);
      } else {
        Fail(ErrorCode::kParse, "line " + std::to_string(number) + ": unknown record type");
      }
    } catch (const json::exception& e) {
      Fail(ErrorCode::kParse, "training log line " + std::to_string(number) + ": " + e.what());
    }
  }
  return log;
}

TrainResult Train(const Model& init, const Corpus& train, const Corpus& dev,
                  const TrainConfig& config, std::ostream* log_stream) {
  config.Validate();
  Require(train.size() > 0, "training set is empty");
  Require(dev.size() > 0, "dev set is empty");
  for (const auto& d : dev.docs) {
    if (!d.label) Fail(ErrorCode::kInvalidArgument, "dev document '" + d.id + "' has no label");
  }
  const std::vector<Instance> insts = init.Prepare(train);

  TrainResult result;
  result.best = init;
  Model model = init;
  Adam adam(model.params(), AdamConfig{config.learning_rate});
  Gradients grads(model.params());

  const std::size_t n = insts.size();
  const std::size_t steps_per_epoch = (n + config.batch_size - 1) / config.batch_size;
  std::vector<std::size_t> eval_points;
  for (std::size_t j = 1; j <= config.evals_per_epoch; ++j) {
    eval_points.push_back(std::max<std::size_t>(
        1, (j * steps_per_epoch + config.evals_per_epoch - 1) / config.evals_per_epoch));
  }
  eval_points.erase(std::unique(eval_points.begin(), eval_points.end()), eval_points.end());

  double best = -1.0;
  std::size_t since_best = 0;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.max_epochs && !result.early_stopped; ++epoch) {
    const auto order = EpochOrder(n, config.seed, epoch);
    std::size_t next_eval = 0;
    for (std::size_t b = 0; b < steps_per_epoch; ++b) {
      const std::size_t lo = b * config.batch_size;
      const std::size_t hi = std::min(n, lo + config.batch_size);
      ++step;
      StepRecord rec =
          RunStep(model, adam, grads, insts, std::span(order).subspan(lo, hi - lo), step,
                  epoch, LambdaAt(config, step, steps_per_epoch), config.seed);
      if (log_stream) *log_stream << TrainLog::StepLine(rec) << '\n';
      result.log.steps.push_back(std::move(rec));

      if (next_eval < eval_points.size() && b + 1 == eval_points[next_eval]) {
        ++next_eval;
        EvalRecord ev;
        ev.step = step;
        ev.epoch = epoch;
        ev.dev_acc = Evaluate(model, dev, config.dev_infer).accuracy;
        if (std::isnan(ev.dev_acc)) {
          Fail(ErrorCode::kNumeric, "dev accuracy is NaN at step " + std::to_string(step));
        }
        if (ev.dev_acc > best) {
          best = ev.dev_acc;
          since_best = 0;
          ev.best = true;
          result.best.params() = model.params();
          result.best_step = step;
        } else {
          ++since_best;
        }
        if (log_stream) *log_stream << TrainLog::EvalLine(ev) << '\n';
        result.log.evals.push_back(ev);
        if (since_best >= config.patience) {
          result.early_stopped = true;
          break;
        }
      }
    }
  }
  result.best_dev_acc = best;
  result.final_params = model.params();
  return result;
}

ParameterSet Replay(const Model& init, const Corpus& train, const TrainConfig& config,
                    const TrainLog& log) {
  config.Validate();
  const std::vector<Instance> insts = init.Prepare(train);
  Model model = init;
  Adam adam(model.params(), AdamConfig{config.learning_rate});
  Gradients grads(model.params());
  for (const auto& rec : log.steps) {
    for (std::size_t i : rec.batch) {
      Require(i < insts.size(), "replay batch index out of range");
    }
    RunStep(model, adam, grads, insts, rec.batch, rec.step, rec.epoch, rec.lambda, config.seed);
  }
  return model.params();
}

EvalResult Evaluate(const Model& model, const Corpus& corpus, const InferConfig& config) {
  const std::vector<Instance> insts = model.Prepare(corpus);
  EvalResult r;
  r.predictions = PredictAll(model, insts, config);
  std::map<std::string, DomainAccuracy> per;
  for (std::size_t i = 0; i < insts.size(); ++i) {
    if (insts[i].label == kUnkIndex) continue;
    const bool ok = r.predictions[i].label == insts[i].label;
    ++r.n;
    r.correct += ok;
    const auto& dom = corpus.docs[i].domain;
    DomainAccuracy& d = per[dom ? *dom : "UNK"];
    ++d.n;
    d.correct += ok;
  }
  r.accuracy = r.n ? static_cast<double>(r.correct) / static_cast<double>(r.n)
                   : std::nan("");
  for (auto& [name, d] : per) {
    d.domain = name;
    d.accuracy = static_cast<double>(d.correct) / static_cast<double>(d.n);
    r.per_domain.push_back(d);
  }
  return r;
}

}  // namespace sda
