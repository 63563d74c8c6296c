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


// Run configuration and command execution shared by the C API and the CLI.
//
// Config files are flat `key = value` text: one pair per line, `#` starts a
// comment, blank lines are ignored, keys may appear once. Keys:
//
//   model              scnn | mcnn | dsda | csda-beta | csda-dirichlet
//                      (default csda-dirichlet)
//   k                  channels; 1 for scnn, 6 otherwise when unset
//   lambda             KL weight (>= 0)
//   lambda_schedule    fixed | linear-anneal
//   anneal_steps       steps of the linear ramp; 0 means one epoch
//   lambda_grid        comma-separated sweep values
//   regime             supervised | semi-supervised | unsupervised
//                      supervised trains on domain-labeled documents only,
//                      semi-supervised uses the training file as given,
//                      unsupervised removes every training domain
//   mode               word | byte
//   train_path, dev_path, eval_path   JSONL corpora
//   model_dir          trained model for eval, probe and export
//   sweep_dir          sweep output for probe
//   output_dir         artifact directory
//   min_count, max_vocab              word vocabulary limits
//   embed_dim, filters, windows, dropout, hidden, label_embed,
//   domain_embed, w_dom               model shape
//   learning_rate, batch_size, max_epochs, patience, evals_per_epoch, seed
//   infer_strategy     prior-sample | prior-mean | mc-average | importance-sampling
//   infer_m, infer_seed
//   probe_runs         probe repetitions
//   export_kind        hidden | gate
//   synth_*            synthetic corpus: domains, groups, held_out,
//                      per_domain, doc_length, cues, filler_vocab,
//                      group_vocab, cue_vocab, overlap, shared_cue_rate,
//                      positive_rate, noise, unlabeled_domain_rate, seed,
//                      dev_ratio, test_ratio
//
// Every command writes <output_dir>/manifest.json last:
//   {"format":"sda-run","version":1,"command":..,"code_version":..,
//    "config":{resolved key: value},"seeds":{..},"artifacts":[..],
//    "results":{..}}
// Artifacts are listed relative to the output directory.

#ifndef SDA_RUN_HPP_
#define SDA_RUN_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sda/data.hpp"
#include "sda/inference.hpp"
#include "sda/model.hpp"
#include "sda/probes.hpp"
#include "sda/training.hpp"

namespace sda {

enum class DomainRegime { kSupervised, kSemiSupervised, kUnsupervised };

const char* RegimeName(DomainRegime r);
DomainRegime ParseRegime(std::string_view name);

inline const std::vector<double> kDefaultLambdaGrid = {1e-3, 3e-3, 1e-2, 3e-2, 1e-1,
                                                       3e-1, 1.0,  3.0,  10.0};

struct RunConfig {
  RunConfig() { model.family = ModelFamily::kCsdaDirichlet; }

  ModelConfig model;
  std::optional<std::size_t> k;  // unset resolves by family
  TrainConfig train;
  InferConfig infer;
  DomainRegime regime = DomainRegime::kSemiSupervised;
  std::vector<double> lambda_grid = kDefaultLambdaGrid;
  std::string train_path, dev_path, eval_path, model_dir, sweep_dir;
  std::string output_dir = ".";
  std::size_t min_count = 1;
  std::size_t max_vocab = 0;
  std::size_t probe_runs = 3;
  ExportKind export_kind = ExportKind::kHidden;
  SynthSpec synth;
  double synth_dev_ratio = 4.0;
  double synth_test_ratio = 6.0;

  // Sets one key from its text value. Throws kInvalidArgument naming the key.
  void Set(std::string_view key, std::string_view value);
  // Resolved configuration as a flat JSON object of key -> value.
  std::string ToJson() const;
  // Family-dependent defaults applied to `model`.
  std::size_t ResolvedK() const;
  // Field-level checks that do not touch the filesystem.
  void Validate() const;
};

// Parses config text. Errors carry the line number and key.
RunConfig ParseRunConfig(std::string_view text);
RunConfig LoadRunConfig(const std::string& path);
// Inverse of RunConfig::ToJson.
RunConfig RunConfigFromJson(std::string_view json_text);
std::vector<std::string> RunConfigKeys();

struct RunOutcome {
  std::string command;
  std::string results_json = "{}";
  std::vector<std::string> artifacts;  // relative to output_dir
  std::string report;                  // human-readable summary
  std::string manifest_path;
};

// Commands: train, eval, sweep-lambda, probe, export, gen-synth.
std::vector<std::string> RunCommands();
RunOutcome Run(std::string_view command, const RunConfig& config);
// Re-executes the command recorded in a run manifest, optionally into a
// different output directory.
RunOutcome Rerun(const std::string& manifest_path, const std::string& output_dir = "");

// Mean and sample standard deviation of every numeric result across run
// manifests of one command. Writes summary.txt and summary.tsv.
RunOutcome Summarize(const std::vector<std::string>& manifest_paths,
                     const std::string& output_dir);

}  // namespace sda

#endif  // SDA_RUN_HPP_
