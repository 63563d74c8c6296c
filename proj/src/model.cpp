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

#include "sda/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "json.hpp"
#include "sda/checkpoint.hpp"
#include "sda/error.hpp"

namespace sda {
namespace {

using json = nlohmann::json;

constexpr int kManifestVersion = 1;

void AddNormal(ParameterSet& params, const std::string& name, Shape shape,
               double scale, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = scale * rng.Normal();
  params.Add(name, std::move(t));
}

void AddLinear(ParameterSet& params, const std::string& name, std::size_t in,
               std::size_t out, double gain, Rng& rng) {
  AddNormal(params, name + "/w", {in, out}, gain / std::sqrt(static_cast<double>(in)), rng);
  params.Add(name + "/b", Tensor({out}, 0.0));
}

Var Linear(Tape& tape, const ParameterSet& params, Var x, const std::string& name) {
  return ad::Affine(x, tape.Param(params, name + "/w"), tape.Param(params, name + "/b"));
}

int IndexOf(const std::vector<std::string>& inventory, const std::string& value) {
  auto it = std::lower_bound(inventory.begin(), inventory.end(), value);
  if (it == inventory.end() || *it != value) return kUnkIndex;
  return static_cast<int>(it - inventory.begin());
}

std::string HexHash(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

const char* FamilyName(ModelFamily family) {
  switch (family) {
    case ModelFamily::kScnn: return "scnn";
    case ModelFamily::kMcnn: return "mcnn";
    case ModelFamily::kDsda: return "dsda";
    case ModelFamily::kCsdaBeta: return "csda-beta";
    case ModelFamily::kCsdaDirichlet: return "csda-dirichlet";
  }
  return "unknown";
}

ModelFamily ParseFamily(std::string_view name) {
  for (auto f : {ModelFamily::kScnn, ModelFamily::kMcnn, ModelFamily::kDsda,
                 ModelFamily::kCsdaBeta, ModelFamily::kCsdaDirichlet}) {
    if (name == FamilyName(f)) return f;
  }
  Fail(ErrorCode::kInvalidArgument,
       "unknown model '" + std::string(name) +
           "' (expected scnn, mcnn, dsda, csda-beta or csda-dirichlet)");
}

bool IsContinuous(ModelFamily family) {
  return family == ModelFamily::kCsdaBeta || family == ModelFamily::kCsdaDirichlet;
}

void ModelConfig::Validate() const {
  Require(k >= 1, "k must be >= 1");
  Require(family != ModelFamily::kScnn || k == 1, "scnn requires k = 1");
  encoder.Validate();
  Require(hidden >= 1, "hidden must be >= 1");
  Require(label_embed >= 1 && domain_embed >= 1, "embedding sizes must be >= 1");
  Require(w_dom >= 0.0 && std::isfinite(w_dom), "w_dom must be finite and >= 0");
}

ContinuousParams GateVars::Params() const {
  if (family == ModelFamily::kCsdaBeta) {
    return BetaParams{alpha.value().data(), beta.value().data()};
  }
  Require(family == ModelFamily::kCsdaDirichlet, "gate has no continuous parameters");
  return DirichletParams{alpha0.item(), alpha_hat.value().data()};
}

Model Model::Create(const ModelConfig& config, Vocab vocab,
                    std::vector<std::string> labels, std::vector<std::string> domains,
                    std::uint64_t seed) {
  config.Validate();
  Require(labels.size() >= 2, "a classifier needs at least two labels");
  Require(std::is_sorted(labels.begin(), labels.end()) &&
              std::is_sorted(domains.begin(), domains.end()),
          "label and domain inventories must be sorted");
  Model m;
  m.config_ = config;
  m.vocab_ = std::move(vocab);
  m.labels_ = std::move(labels);
  m.domains_ = std::move(domains);
  Rng rng(seed);
  ParameterSet& p = m.params_;
  const std::size_t v = m.vocab_.size();
  const std::size_t d = config.encoder.output_dim();
  const std::size_t n_channels = config.family == ModelFamily::kScnn ? 1 : config.k;
  for (std::size_t i = 0; i < n_channels; ++i) {
    Encoder::Create(p, "channel" + std::to_string(i), v, config.encoder, rng);
  }
  const std::size_t head_in = config.family == ModelFamily::kMcnn ? d * config.k : d;
  AddLinear(p, "head/l1", head_in, config.hidden, std::sqrt(2.0), rng);
  AddLinear(p, "head/l2", config.hidden, m.labels_.size(), 1.0, rng);

  auto add_projection = [&](const std::string& prefix, std::size_t in) {
    switch (config.family) {
      case ModelFamily::kDsda:
        AddLinear(p, prefix + "/logits", in, config.k, 1.0, rng);
        break;
      case ModelFamily::kCsdaBeta:
        AddLinear(p, prefix + "/alpha", in, config.k, 1.0, rng);
        AddLinear(p, prefix + "/beta", in, config.k, 1.0, rng);
        break;
      case ModelFamily::kCsdaDirichlet:
        AddLinear(p, prefix + "/alpha0", in, 1, 1.0, rng);
        AddLinear(p, prefix + "/alpha_hat", in, config.k, 1.0, rng);
        break;
      default:
        break;
    }
  };
  if (config.family == ModelFamily::kDsda || IsContinuous(config.family)) {
    Encoder::Create(p, "prior/enc", v, config.encoder, rng);
    add_projection("prior", d);
  }
  if (IsContinuous(config.family)) {
    Encoder::Create(p, "posterior/enc", v, config.encoder, rng);
    AddNormal(p, "posterior/label_embed", {m.labels_.size() + 1, config.label_embed}, 0.1, rng);
    AddNormal(p, "posterior/domain_embed", {m.domains_.size() + 1, config.domain_embed}, 0.1,
              rng);
    add_projection("posterior", d + config.label_embed + config.domain_embed);
  }
  m.Bind();
  return m;
}

void Model::Bind() {
  channels_.clear();
  const std::size_t n_channels = config_.family == ModelFamily::kScnn ? 1 : config_.k;
  for (std::size_t i = 0; i < n_channels; ++i) {
    channels_.push_back(Encoder::Bind(params_, "channel" + std::to_string(i), config_.encoder));
  }
  if (config_.family == ModelFamily::kDsda || IsContinuous(config_.family)) {
    prior_enc_ = Encoder::Bind(params_, "prior/enc", config_.encoder);
  }
  if (IsContinuous(config_.family)) {
    posterior_enc_ = Encoder::Bind(params_, "posterior/enc", config_.encoder);
  }
}

std::size_t Model::hidden_dim() const { return config_.encoder.output_dim(); }

std::string Model::ManifestJson() const {
  json j;
  j["format"] = "sda-model";
  j["version"] = kManifestVersion;
  j["family"] = FamilyName(config_.family);
  j["k"] = config_.k;
  j["mode"] = TokenModeName(config_.mode);
  j["embed_dim"] = config_.encoder.embed_dim;
  j["filters"] = config_.encoder.filters;
  j["windows"] = config_.encoder.windows;
  j["dropout"] = config_.encoder.dropout;
  j["hidden"] = config_.hidden;
  j["label_embed"] = config_.label_embed;
  j["domain_embed"] = config_.domain_embed;
  j["w_dom"] = config_.w_dom;
  j["labels"] = labels_;
  j["domains"] = domains_;
  j["vocab_size"] = vocab_.size();
  j["vocab_hash"] = HexHash(vocab_.Hash());
  j["metadata"] = json::parse(metadata_);
  return j.dump();
}

void Model::Save(const std::string& dir) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) Fail(ErrorCode::kIo, "cannot create directory '" + dir + "': " + ec.message());
  vocab_.Save(dir + "/vocab.txt");
  SaveCheckpoint(dir + "/model.ckpt", params_, ManifestJson());
}

Model Model::Load(const std::string& dir) {
  Checkpoint ckpt = LoadCheckpoint(dir + "/model.ckpt");
  Model m;
  m.vocab_ = Vocab::Load(dir + "/vocab.txt");
  try {
    const json j = json::parse(ckpt.manifest);
    if (j.at("format") != "sda-model" || j.at("version") != kManifestVersion) {
      Fail(ErrorCode::kParse, "unsupported model manifest in '" + dir + "'");
    }
    ModelConfig& c = m.config_;
    c.family = ParseFamily(j.at("family").get<std::string>());
    c.k = j.at("k").get<std::size_t>();
    c.mode = ParseTokenMode(j.at("mode").get<std::string>());
    c.encoder.embed_dim = j.at("embed_dim").get<std::size_t>();
    c.encoder.filters = j.at("filters").get<std::size_t>();
    c.encoder.windows = j.at("windows").get<std::vector<std::size_t>>();
    c.encoder.dropout = j.at("dropout").get<double>();
    c.hidden = j.at("hidden").get<std::size_t>();
    c.label_embed = j.at("label_embed").get<std::size_t>();
    c.domain_embed = j.at("domain_embed").get<std::size_t>();
    c.w_dom = j.at("w_dom").get<double>();
    c.Validate();
    m.labels_ = j.at("labels").get<std::vector<std::string>>();
    m.domains_ = j.at("domains").get<std::vector<std::string>>();
    if (j.at("vocab_hash").get<std::string>() != HexHash(m.vocab_.Hash())) {
      Fail(ErrorCode::kState, "vocabulary in '" + dir + "' does not match the checkpoint");
    }
    m.metadata_ = j.at("metadata").dump();
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, "bad model manifest in '" + dir + "': " + e.what());
  }
  m.params_ = std::move(ckpt.params);
  m.Bind();
  return m;
}

Instance Model::Prepare(const Document& doc) const {
  Instance inst;
  inst.id = doc.id;
  TokenSeq seq = Tokenize(doc.text, config_.mode, vocab_);
  inst.ids = std::move(seq.ids);
  inst.empty_input = seq.empty_input;
  if (doc.label) {
    inst.label = IndexOf(labels_, *doc.label);
    if (inst.label == kUnkIndex) {
      Fail(ErrorCode::kInvalidArgument,
           "label '" + *doc.label + "' of document '" + doc.id + "' is not in the model inventory");
    }
  }
  if (doc.domain) inst.domain = IndexOf(domains_, *doc.domain);
  return inst;
}

std::vector<Instance> Model::Prepare(const Corpus& corpus) const {
  Require(corpus.mode == config_.mode, std::string("corpus mode '") +
                                           TokenModeName(corpus.mode) +
                                           "' does not match model mode '" +
                                           TokenModeName(config_.mode) + "'");
  std::vector<Instance> out;
  out.reserve(corpus.size());
  for (const auto& d : corpus.docs) out.push_back(Prepare(d));
  return out;
}

std::vector<Var> Model::Channels(Tape& tape, std::span<const int> ids,
                                 Rng* dropout_rng) const {
  std::vector<Var> hs;
  hs.reserve(channels_.size());
  for (const auto& enc : channels_) hs.push_back(enc.Encode(tape, params_, ids, dropout_rng));
  return hs;
}

Var Model::Gate(std::span<const Var> channels, Var z) const {
  return ad::WeightedSum(channels, z);
}

Var Model::Ungated(std::span<const Var> channels) const {
  Require(!channels.empty(), "no channel outputs");
  if (config_.family == ModelFamily::kMcnn && channels.size() > 1) return ad::Concat(channels);
  return channels[0];
}

Var Model::Classify(Tape& tape, Var h) const {
  Var hidden = ad::Relu(Linear(tape, params_, h, "head/l1"));
  return ad::LogSoftmax(Linear(tape, params_, hidden, "head/l2"));
}

GateVars Model::Project(Tape& tape, Var features, const std::string& prefix) const {
  GateVars g;
  g.family = config_.family;
  switch (config_.family) {
    case ModelFamily::kDsda:
      g.log_probs = ad::LogSoftmax(Linear(tape, params_, features, prefix + "/logits"));
      break;
    case ModelFamily::kCsdaBeta:
      g.alpha = ad::AddConst(ad::Elu(Linear(tape, params_, features, prefix + "/alpha")), 1.0);
      g.beta = ad::AddConst(ad::Elu(Linear(tape, params_, features, prefix + "/beta")), 1.0);
      break;
    case ModelFamily::kCsdaDirichlet:
      g.alpha0 = ad::Exp(Linear(tape, params_, features, prefix + "/alpha0"));
      g.alpha_hat = ad::Sigmoid(Linear(tape, params_, features, prefix + "/alpha_hat"));
      g.concentration = ad::ScalarMul(g.alpha0, g.alpha_hat);
      break;
    default:
      Fail(ErrorCode::kState, std::string(FamilyName(config_.family)) + " has no gate network");
  }
  return g;
}

GateVars Model::Prior(Tape& tape, std::span<const int> ids) const {
  Require(config_.family == ModelFamily::kDsda || IsContinuous(config_.family),
          std::string(FamilyName(config_.family)) + " has no prior network");
  return Project(tape, prior_enc_.Encode(tape, params_, ids), "prior");
}

GateVars Model::Posterior(Tape& tape, std::span<const int> ids, int label, int domain) const {
  Require(IsContinuous(config_.family),
          std::string(FamilyName(config_.family)) + " has no inference network");
  const int n_labels = static_cast<int>(labels_.size());
  const int n_domains = static_cast<int>(domains_.size());
  if (label < kUnkIndex || label >= n_labels) {
    Fail(ErrorCode::kInvalidArgument, "label index " + std::to_string(label) + " out of range");
  }
  if (domain < kUnkIndex || domain >= n_domains) {
    Fail(ErrorCode::kInvalidArgument, "domain index " + std::to_string(domain) + " out of range");
  }
  const int label_row[] = {label == kUnkIndex ? n_labels : label};
  const int domain_row[] = {domain == kUnkIndex ? n_domains : domain};
  Var f = posterior_enc_.Encode(tape, params_, ids);
  Var ly = ad::Embedding(tape.Param(params_, "posterior/label_embed"), label_row);
  Var ld = ad::Embedding(tape.Param(params_, "posterior/domain_embed"), domain_row);
  const Var parts[] = {f, ad::Reshape(ly, {config_.label_embed}),
                       ad::Reshape(ld, {config_.domain_embed})};
  return Project(tape, ad::Concat(parts), "posterior");
}

std::optional<Var> Model::Loss(Tape& tape, const Instance& inst, double lambda, Rng& rng,
                               bool train, LossParts* parts,
                               std::span<const double> noise) const {
  Require(lambda >= 0.0 && std::isfinite(lambda), "lambda must be finite and >= 0");
  LossParts local;
  LossParts& out = parts != nullptr ? *parts : local;
  out = {};
  const bool has_y = inst.label != kUnkIndex;
  const bool has_d = inst.domain != kUnkIndex;
  Rng* dropout = train ? &rng : nullptr;
  switch (config_.family) {
    case ModelFamily::kScnn:
    case ModelFamily::kMcnn: {
      if (!has_y) return std::nullopt;
      auto hs = Channels(tape, inst.ids, dropout);
      Var loss = ad::Scale(ad::Pick(Classify(tape, Ungated(hs)), inst.label), -1.0);
      out.nll = loss.item();
      return loss;
    }
    case ModelFamily::kDsda: {
      const bool use_dom = has_d && config_.w_dom > 0.0;
      if (has_d && inst.domain >= static_cast<int>(config_.k)) {
        Fail(ErrorCode::kInvalidArgument,
             "domain index " + std::to_string(inst.domain) + " >= k = " +
                 std::to_string(config_.k) + " for supervised dsda");
      }
      if (!has_y && !use_dom) return std::nullopt;
      GateVars prior = Prior(tape, inst.ids);
      std::optional<Var> loss;
      if (has_y) {
        auto hs = Channels(tape, inst.ids, dropout);
        std::vector<Var> per_channel;
        per_channel.reserve(hs.size());
        for (Var h : hs) per_channel.push_back(ad::Pick(Classify(tape, h), inst.label));
        Var joint = ad::Add(prior.log_probs, ad::Concat(per_channel));
        loss = ad::Scale(ad::LogSumExp(joint), -1.0);
        out.nll = loss->item();
      }
      if (use_dom) {
        Var dom = ad::Scale(ad::Pick(prior.log_probs, inst.domain), -1.0);
        out.dom = dom.item();
        Var weighted = ad::Scale(dom, config_.w_dom);
        loss = loss ? ad::Add(*loss, weighted) : weighted;
      }
      return loss;
    }
    case ModelFamily::kCsdaBeta:
    case ModelFamily::kCsdaDirichlet: {
      if (!has_y) return std::nullopt;
      std::vector<double> u;
      if (noise.empty()) {
        u = DrawNoise(config_.k, rng);
        noise = u;
      }
      Require(noise.size() == config_.k, "noise length must equal k");
      GateVars prior = Prior(tape, inst.ids);
      GateVars post = Posterior(tape, inst.ids, inst.label, inst.domain);
      Var z, kl;
      if (config_.family == ModelFamily::kCsdaBeta) {
        z = ad::BetaSample(post.alpha, post.beta, noise);
        kl = ad::KlBeta(post.alpha, post.beta, prior.alpha, prior.beta);
      } else {
        z = ad::DirichletSample(post.concentration, noise);
        kl = ad::KlDirichlet(post.concentration, prior.concentration);
      }
      auto hs = Channels(tape, inst.ids, dropout);
      Var nll = ad::Scale(ad::Pick(Classify(tape, Gate(hs, z)), inst.label), -1.0);
      out.nll = nll.item();
      out.kl = kl.item();
      return lambda == 0.0 ? nll : ad::Add(nll, ad::Scale(kl, lambda));
    }
  }
  return std::nullopt;
}

}  // namespace sda
