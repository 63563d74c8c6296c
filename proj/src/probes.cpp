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

#include "sda/probes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "sda/error.hpp"
#include "sda/inference.hpp"

namespace sda {
namespace {

// Softmax probabilities of row x under weights w ((dim+1) x classes).
void Probs(const std::vector<double>& w, const std::vector<double>& x, std::size_t classes,
           std::vector<double>& p) {
  const std::size_t dim = x.size();
  p.assign(classes, 0.0);
  for (std::size_t c = 0; c < classes; ++c) {
    double s = w[dim * classes + c];
    for (std::size_t i = 0; i < dim; ++i) s += x[i] * w[i * classes + c];
    p[c] = s;
  }
  const double mx = *std::max_element(p.begin(), p.end());
  double total = 0.0;
  for (double& v : p) {
    v = std::exp(v - mx);
    total += v;
  }
  for (double& v : p) v /= total;
}

int Target(const ProbeRecord& r, ProbeTarget t) {
  return t == ProbeTarget::kLabel ? r.label : r.domain;
}

}  // namespace

std::vector<ProbeRecord> CollectProbeRecords(const Model& model, const Corpus& corpus,
                                             std::uint64_t seed) {
  Require(IsContinuous(model.config().family),
          "probe records need a continuous-gate model");
  const auto insts = model.Prepare(corpus);
  std::vector<ProbeRecord> out;
  for (std::size_t i = 0; i < insts.size(); ++i) {
    const Instance& inst = insts[i];
    if (inst.label == kUnkIndex || inst.domain == kUnkIndex) continue;
    Tape tape;
    const auto q = model.Posterior(tape, inst.ids, inst.label, inst.domain).Params();
    Rng rng = Rng::Derive(seed, i);
    out.push_back({SampleGate(q, rng), inst.label, inst.domain});
  }
  return out;
}

LogisticFit FitLogistic(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                        std::size_t classes, std::size_t max_iter) {
  Require(!x.empty() && x.size() == y.size(), "logistic fit needs matching non-empty data");
  Require(classes >= 2, "logistic fit needs at least two classes");
  const std::size_t n = x.size(), dim = x[0].size();
  // Lipschitz bound of the mean loss gradient: 0.5 * max ||[x;1]||^2 + l2.
  double max_sq = 0.0;
  for (const auto& row : x) {
    Require(row.size() == dim, "logistic rows must share a width");
    double s = 1.0;
    for (double v : row) s += v * v;
    max_sq = std::max(max_sq, s);
  }
  const double step = 1.0 / (0.5 * max_sq + kProbeL2);
  LogisticFit fit;
  fit.weights.assign((dim + 1) * classes, 0.0);
  std::vector<double> grad(fit.weights.size()), p;
  for (fit.iterations = 0; fit.iterations < max_iter; ++fit.iterations) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      Probs(fit.weights, x[r], classes, p);
      p[static_cast<std::size_t>(y[r])] -= 1.0;
      for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t i = 0; i < dim; ++i) grad[i * classes + c] += x[r][i] * p[c];
        grad[dim * classes + c] += p[c];
      }
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < grad.size(); ++i) {
      grad[i] /= static_cast<double>(n);
      if (i < dim * classes) grad[i] += kProbeL2 * fit.weights[i];
      norm += grad[i] * grad[i];
    }
    fit.grad_norm = std::sqrt(norm);
    if (fit.grad_norm < kProbeGradTol) {
      fit.converged = true;
      break;
    }
    for (std::size_t i = 0; i < grad.size(); ++i) fit.weights[i] -= step * grad[i];
  }
  return fit;
}

int PredictLogistic(const LogisticFit& fit, const std::vector<double>& x, std::size_t classes) {
  std::vector<double> p;
  Probs(fit.weights, x, classes, p);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

double ProbeAccuracy(const std::vector<ProbeRecord>& records, ProbeTarget target,
                     std::uint64_t split_seed) {
  std::set<int> classes_seen;
  int max_class = -1;
  for (const auto& r : records) {
    const int t = Target(r, target);
    Require(t >= 0, "probe records must carry the target");
    classes_seen.insert(t);
    max_class = std::max(max_class, t);
  }
  if (classes_seen.size() < 2) {
    Fail(ErrorCode::kInvalidArgument, "probe target has fewer than two classes");
  }
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(split_seed);
  rng.Shuffle(std::span<std::size_t>(order));
  const std::size_t n_train =
      static_cast<std::size_t>(std::llround(0.7 * static_cast<double>(records.size())));
  Require(n_train >= 1 && n_train < records.size(), "too few probe records for a 70/30 split");
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (std::size_t i = 0; i < n_train; ++i) {
    x.push_back(records[order[i]].z);
    y.push_back(Target(records[order[i]], target));
  }
  const std::size_t classes = static_cast<std::size_t>(max_class) + 1;
  const LogisticFit fit = FitLogistic(x, y, classes);
  std::size_t correct = 0;
  for (std::size_t i = n_train; i < records.size(); ++i) {
    const auto& r = records[order[i]];
    correct += PredictLogistic(fit, r.z, classes) == Target(r, target);
  }
  return static_cast<double>(correct) / static_cast<double>(records.size() - n_train);
}

ProbeSummary RunProbe(const Model& model, const Corpus& corpus, ProbeTarget target,
                      std::uint64_t seed, std::size_t runs) {
  Require(runs >= 1, "probe needs at least one run");
  ProbeSummary s;
  std::set<int> classes;
  for (std::size_t r = 0; r < runs; ++r) {
    const auto records = CollectProbeRecords(model, corpus, Rng::Derive(seed, r, 1).NextU64());
    if (r == 0) {
      for (const auto& rec : records) classes.insert(Target(rec, target));
      s.test_size = records.size() - static_cast<std::size_t>(
                                         std::llround(0.7 * static_cast<double>(records.size())));
    }
    s.runs.push_back(ProbeAccuracy(records, target, Rng::Derive(seed, r, 2).NextU64()));
  }
  s.mean = std::accumulate(s.runs.begin(), s.runs.end(), 0.0) / static_cast<double>(runs);
  if (runs > 1) {
    double ss = 0.0;
    for (double v : s.runs) ss += (v - s.mean) * (v - s.mean);
    s.stderr_ = std::sqrt(ss / static_cast<double>(runs - 1) / static_cast<double>(runs));
  }
  s.chance = classes.empty() ? 0.0 : 1.0 / static_cast<double>(classes.size());
  return s;
}

std::vector<ExportRow> ExportRepresentations(const Model& model, const Corpus& corpus,
                                             ExportKind kind, std::uint64_t seed) {
  const bool gated = IsContinuous(model.config().family);
  if (kind == ExportKind::kGate) Require(gated, "gate export needs a continuous-gate model");
  const auto insts = model.Prepare(corpus);
  std::vector<ExportRow> rows;
  rows.reserve(insts.size());
  for (std::size_t i = 0; i < insts.size(); ++i) {
    const Instance& inst = insts[i];
    const Document& doc = corpus.docs[i];
    ExportRow row{doc.id, doc.label.value_or("UNK"), doc.domain.value_or("UNK"), {}};
    Tape tape;
    auto hs = model.Channels(tape, inst.ids);
    if (!gated) {
      row.values = model.Ungated(hs).value().data();
    } else {
      const auto q = model.Posterior(tape, inst.ids, inst.label, inst.domain).Params();
      Rng rng = Rng::Derive(seed, i);
      const auto z = SampleGate(q, rng);
      if (kind == ExportKind::kGate) {
        row.values = z;
      } else {
        std::vector<std::vector<double>> channels;
        for (Var h : hs) channels.push_back(h.value().data());
        row.values = GateValues(channels, z);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string FormatExport(const std::vector<ExportRow>& rows) {
  std::string out = "id\tlabel\tdomain";
  const std::size_t width = rows.empty() ? 0 : rows[0].values.size();
  for (std::size_t i = 0; i < width; ++i) out += "\tv" + std::to_string(i);
  out += '\n';
  char buf[32];
  for (const auto& r : rows) {
    out += r.id + '\t' + r.label + '\t' + r.domain;
    for (double v : r.values) {
      std::snprintf(buf, sizeof(buf), "\t%.17g", v);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace sda
