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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "sda/error.hpp"
#include "sda/inference.hpp"
#include "toy_model.hpp"

using namespace sda;
using namespace sda::testing;

namespace {

InferConfig Config(Strategy s, std::size_t m, std::uint64_t seed) {
  InferConfig c;
  c.strategy = s;
  c.m = m;
  c.seed = seed;
  return c;
}

double Variance(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - mean) * (x - mean);
  return v / static_cast<double>(xs.size() - 1);
}

}  // namespace

TEST_CASE("mc-average returns a probability distribution") {
  for (auto family : {ModelFamily::kCsdaBeta, ModelFamily::kCsdaDirichlet}) {
    Model m = ToyModel(family, 3);
    for (std::uint64_t i = 0; i < 5; ++i) {
      Instance inst = ToyInstance();
      inst.ids[0] = static_cast<int>(2 + i);
      const Prediction p = Predict(m, inst, Config(Strategy::kMcAverage, 50, 7), i);
      double total = 0.0;
      for (double v : p.probs) {
        CHECK(v >= 0.0);
        total += v;
      }
      CHECK(std::fabs(total - 1.0) <= 1e-10);
    }
  }
}

TEST_CASE("prior-mean on Beta(2, 2) gates with one half") {
  Model m = ToyModel(ModelFamily::kCsdaBeta, 2);
  for (const char* n : {"prior/alpha/w", "prior/beta/w"}) Zero(m.params(), n);
  for (const char* n : {"prior/alpha/b", "prior/beta/b"}) {
    m.params()[m.params().Index(n)].value.Fill(1.0);  // elu(1) + 1 = 2
  }
  const Instance inst = ToyInstance();
  const Encoded enc = EncodeForInference(m, inst.ids);
  const auto& prior = std::get<BetaParams>(enc.prior);
  CHECK(prior.alpha == std::vector<double>{2.0, 2.0});
  CHECK(Mean(enc.prior) == std::vector<double>{0.5, 0.5});
  const std::vector<double> half = {0.5, 0.5};
  const auto want = HeadLogProbs(m, GateValues(enc.channels, half));
  const Prediction p = Predict(m, inst, Config(Strategy::kPriorMean, 1, 3), 0);
  CHECK(p.probs[0] == doctest::Approx(std::exp(want[0])).epsilon(1e-14));
  CHECK(p.probs[1] == doctest::Approx(std::exp(want[1])).epsilon(1e-14));
}

TEST_CASE("estimators agree with quadrature on a k = 1 Beta model") {
  Model m = ToyModel(ModelFamily::kCsdaBeta, 1, 21);
  const Instance inst = ToyInstance();
  const double p1 = QuadratureLikelihood(m, inst, 1);
  const double p0 = QuadratureLikelihood(m, inst, 0);
  CHECK(p0 + p1 == doctest::Approx(1.0).epsilon(1e-10));
  const Prediction is = Predict(m, inst, Config(Strategy::kImportanceSampling, 100000, 5), 0);
  INFO("p1=", p1, " is=", is.estimates[1], " p0=", p0, " is0=", is.estimates[0]);
  CHECK(RelErr(is.estimates[1], p1) <= 0.01);
  CHECK(RelErr(is.estimates[0], p0) <= 0.01);
  const Prediction mc = Predict(m, inst, Config(Strategy::kMcAverage, 20000, 5), 0);
  CHECK(RelErr(mc.probs[1], p1) <= 0.02);
}

TEST_CASE("mc-average variance across seeds decreases with m") {
  Model m = ToyModel(ModelFamily::kCsdaBeta, 1, 21);
  const Instance inst = ToyInstance();
  std::vector<double> variances;
  for (std::size_t samples : {1, 10, 100}) {
    std::vector<double> xs;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      xs.push_back(Predict(m, inst, Config(Strategy::kMcAverage, samples, seed), 0).probs[1]);
    }
    variances.push_back(Variance(xs));
  }
  INFO(variances[0], " ", variances[1], " ", variances[2]);
  CHECK(variances[0] > variances[1]);
  CHECK(variances[1] > variances[2]);
}

TEST_CASE("importance sampling with q = p matches mc-average") {
  Model m = ToyModel(ModelFamily::kCsdaDirichlet, 2, 8);
  TiePosteriorToPrior(m);
  const Instance inst = ToyInstance();
  const Prediction is = Predict(m, inst, Config(Strategy::kImportanceSampling, 4000, 2), 0);
  const Prediction mc = Predict(m, inst, Config(Strategy::kMcAverage, 4000, 9), 0);
  for (std::size_t y = 0; y < 2; ++y) CHECK(std::fabs(is.estimates[y] - mc.probs[y]) <= 0.01);
}

TEST_CASE("predictions are deterministic and independent of batch order") {
  Model m = ToyModel(ModelFamily::kCsdaDirichlet, 3, 4);
  std::vector<Instance> insts;
  for (int i = 0; i < 6; ++i) {
    Instance inst = ToyInstance();
    inst.ids[1] = 2 + i;
    insts.push_back(inst);
  }
  for (auto s : {Strategy::kPriorSample, Strategy::kMcAverage, Strategy::kImportanceSampling}) {
    const InferConfig c = Config(s, 5, 11);
    const auto a = PredictAll(m, insts, c);
    const auto b = PredictAll(m, insts, c);
    for (std::size_t i = 0; i < insts.size(); ++i) {
      CHECK(a[i].probs == b[i].probs);
      CHECK(Predict(m, insts[i], c, i).probs == a[i].probs);
    }
  }
  // Different seeds draw different gates.
  CHECK(Predict(m, insts[0], Config(Strategy::kPriorSample, 1, 1), 0).probs !=
        Predict(m, insts[0], Config(Strategy::kPriorSample, 1, 2), 0).probs);
}

TEST_CASE("strategies without a latent gate are noted") {
  Model scnn = ToyModel(ModelFamily::kScnn, 1);
  CHECK(Predict(scnn, ToyInstance(), InferConfig{}, 0).note.empty());
  CHECK_FALSE(Predict(scnn, ToyInstance(), Config(Strategy::kMcAverage, 3, 1), 0).note.empty());
  Model mcnn = ToyModel(ModelFamily::kMcnn, 2);
  Tape t;
  const auto lp = mcnn.Classify(t, mcnn.Ungated(mcnn.Channels(t, ToyInstance().ids))).value().data();
  CHECK(Predict(mcnn, ToyInstance(), InferConfig{}, 0).probs[1] ==
        doctest::Approx(std::exp(lp[1])).epsilon(1e-13));
  Model dsda = ToyModel(ModelFamily::kDsda, 2);
  CHECK_FALSE(Predict(dsda, ToyInstance(), Config(Strategy::kPriorMean, 1, 1), 0).note.empty());
}

TEST_CASE("strategy names and configuration") {
  for (auto s : {Strategy::kPriorSample, Strategy::kPriorMean, Strategy::kMcAverage,
                 Strategy::kImportanceSampling}) {
    CHECK(ParseStrategy(StrategyName(s)) == s);
  }
  CHECK_THROWS_AS(ParseStrategy("argmax"), Error);
  CHECK_THROWS_AS(Config(Strategy::kMcAverage, 0, 1).Validate(), Error);
}
