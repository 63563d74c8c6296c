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

// Linear probes on latent gates and representation export.
//
// A probe is multinomial logistic regression on z (plus bias) with L2
// strength 1e-3 on the weights, fit by full-batch gradient descent until the
// gradient norm drops below 1e-6, trained on a seeded 70% split and scored on
// the remaining 30%.
//
// Export file: tab-separated, header row
//   id <TAB> label <TAB> domain <TAB> v0 <TAB> v1 ...
// with "UNK" for missing labels or domains and values printed with 17
// significant digits.

#ifndef SDA_PROBES_HPP_
#define SDA_PROBES_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "sda/data.hpp"
#include "sda/model.hpp"

namespace sda {

struct ProbeRecord {
  std::vector<double> z;
  int label = kUnkIndex;
  int domain = kUnkIndex;
};

// One z ~ q(z|x,y,d) per document with both label and domain observed.
std::vector<ProbeRecord> CollectProbeRecords(const Model& model, const Corpus& corpus,
                                             std::uint64_t seed);

enum class ProbeTarget { kLabel, kDomain };

inline constexpr double kProbeL2 = 1e-3;
inline constexpr double kProbeGradTol = 1e-6;

struct LogisticFit {
  std::vector<double> weights;  // (dim + 1) x classes, bias row last
  std::size_t iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
};

// Fits on (x, y) with y in [0, classes).
LogisticFit FitLogistic(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                        std::size_t classes, std::size_t max_iter = 200000);
int PredictLogistic(const LogisticFit& fit, const std::vector<double>& x, std::size_t classes);

// Accuracy of one probe run on a seeded 70/30 split. Throws if the target
// has fewer than two classes.
double ProbeAccuracy(const std::vector<ProbeRecord>& records, ProbeTarget target,
                     std::uint64_t split_seed);

struct ProbeSummary {
  std::vector<double> runs;
  double mean = 0.0;
  double stderr_ = 0.0;   // standard error across runs
  double chance = 0.0;    // 1 / number of classes
  std::size_t test_size = 0;
};

// Three runs, each with a fresh z sample and split.
ProbeSummary RunProbe(const Model& model, const Corpus& corpus, ProbeTarget target,
                      std::uint64_t seed, std::size_t runs = 3);

enum class ExportKind { kHidden, kGate };

struct ExportRow {
  std::string id;
  std::string label;
  std::string domain;
  std::vector<double> values;
};

// Gated hidden h (or the gate z) per document. Gates come from
// q(z|x,y,d) with UNK for missing fields; ungated models export h only.
std::vector<ExportRow> ExportRepresentations(const Model& model, const Corpus& corpus,
                                             ExportKind kind, std::uint64_t seed);
std::string FormatExport(const std::vector<ExportRow>& rows);

}  // namespace sda

#endif  // SDA_PROBES_HPP_
