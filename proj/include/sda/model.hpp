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

// Multi-channel classifiers gated by a latent domain variable.
//
// Families:
//   scnn            one channel, no gate
//   mcnn            k channels, outputs concatenated, no gate
//   dsda            k channels, categorical gate marginalized exactly;
//                   optional supervision -log p(z = d | x) weighted by w_dom
//   csda-beta       k channels, factorized Beta gate
//   csda-dirichlet  k channels, Dirichlet gate
//
// Every channel, the prior network and the inference network own separate
// encoders. The classifier head is a one-hidden-layer ReLU MLP followed by
// log-softmax. Continuous priors map the prior encoding f(x) through
// elu(.) + 1 (Beta alpha and beta, separate projections) or through
// exp(.) for the Dirichlet scale alpha0 and sigmoid(.) for its base measure.
// The inference network sees [f(x); label embedding; domain embedding],
// where the last row of each embedding table is the UNK sentinel, and uses
// the same positivity transforms.
//
// Parameter names: channel<i>/..., head/{l1,l2}/{w,b}, prior/... and
// posterior/... (encoders under prior/enc and posterior/enc).

#ifndef SDA_MODEL_HPP_
#define SDA_MODEL_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sda/autodiff.hpp"
#include "sda/data.hpp"
#include "sda/distributions.hpp"
#include "sda/random.hpp"
#include "sda/text.hpp"

namespace sda {

enum class ModelFamily { kScnn, kMcnn, kDsda, kCsdaBeta, kCsdaDirichlet };

const char* FamilyName(ModelFamily family);
ModelFamily ParseFamily(std::string_view name);
bool IsContinuous(ModelFamily family);

inline constexpr int kUnkIndex = -1;

struct ModelConfig {
  ModelFamily family = ModelFamily::kScnn;
  std::size_t k = 1;
  TokenMode mode = TokenMode::kWord;
  EncoderConfig encoder;
  std::size_t hidden = 300;
  std::size_t label_embed = 4;
  std::size_t domain_embed = 16;
  double w_dom = 1.0;

  void Validate() const;
};

// A tokenized document with label and domain mapped to model indices
// (kUnkIndex for UNK or, for domains, values outside the inventory).
struct Instance {
  std::string id;
  std::vector<int> ids;
  int label = kUnkIndex;
  int domain = kUnkIndex;
  bool empty_input = false;
};

// Gate distribution parameters as tape variables. Beta uses alpha and beta,
// Dirichlet uses concentration (alpha0 * alpha_hat), categorical uses
// log_probs.
struct GateVars {
  ModelFamily family = ModelFamily::kCsdaBeta;
  Var alpha, beta;
  Var concentration;
  Var alpha0, alpha_hat;
  Var log_probs;

  ContinuousParams Params() const;
};

struct LossParts {
  double nll = 0.0;   // -log p(y | x, ...) term
  double kl = 0.0;    // unweighted KL(q || p)
  double dom = 0.0;   // unweighted -log p(z = d | x)
};

class Model {
 public:
  Model() = default;

  static Model Create(const ModelConfig& config, Vocab vocab,
                      std::vector<std::string> labels,
                      std::vector<std::string> domains, std::uint64_t seed);

  // Directory layout: model.ckpt (checkpoint with JSON manifest) and
  // vocab.txt.
  void Save(const std::string& dir) const;
  static Model Load(const std::string& dir);
  std::string ManifestJson() const;

  // Tokenizes and maps labels and domains. Labels outside the inventory are
  // rejected; domains outside it become UNK.
  Instance Prepare(const Document& doc) const;
  std::vector<Instance> Prepare(const Corpus& corpus) const;

  // Channel encodings h_1..h_k; dropout applies when `dropout_rng` is set.
  std::vector<Var> Channels(Tape& tape, std::span<const int> ids,
                            Rng* dropout_rng = nullptr) const;
  // Gated representation sum_i z_i h_i (z length k).
  Var Gate(std::span<const Var> channels, Var z) const;
  // Head input for ungated families: h_1 (scnn) or [h_1; ...; h_k] (mcnn).
  Var Ungated(std::span<const Var> channels) const;
  // Label log-probabilities from a head input.
  Var Classify(Tape& tape, Var h) const;

  // Prior p(z | x): categorical log-probabilities (dsda) or continuous
  // parameters (csda).
  GateVars Prior(Tape& tape, std::span<const int> ids) const;
  // Inference network q(z | x, y, d); y and d may be kUnkIndex.
  GateVars Posterior(Tape& tape, std::span<const int> ids, int label,
                     int domain) const;

  // Per-instance training loss. Returns nullopt when the instance carries no
  // usable signal for this family (e.g. y = UNK for csda). `noise`, when
  // given, fixes the csda sampling uniforms; otherwise they come from `rng`.
  // Dropout uses `rng` when `train` is set.
  std::optional<Var> Loss(Tape& tape, const Instance& inst, double lambda,
                          Rng& rng, bool train, LossParts* parts = nullptr,
                          std::span<const double> noise = {}) const;

  const ModelConfig& config() const { return config_; }
  const ParameterSet& params() const { return params_; }
  ParameterSet& params() { return params_; }
  const Vocab& vocab() const { return vocab_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<std::string>& domains() const { return domains_; }
  std::size_t num_labels() const { return labels_.size(); }
  // Channel count actually instantiated (1 for scnn).
  std::size_t channels() const { return channels_.size(); }
  std::size_t hidden_dim() const;

  // Free-form JSON object stored in the checkpoint manifest.
  const std::string& metadata() const { return metadata_; }
  void set_metadata(std::string json) { metadata_ = std::move(json); }

 private:
  void Bind();
  GateVars Project(Tape& tape, Var features, const std::string& prefix) const;

  ModelConfig config_;
  ParameterSet params_;
  Vocab vocab_;
  std::vector<std::string> labels_;
  std::vector<std::string> domains_;
  std::vector<Encoder> channels_;
  Encoder prior_enc_, posterior_enc_;
  std::string metadata_ = "{}";
};

}  // namespace sda

#endif  // SDA_MODEL_HPP_
