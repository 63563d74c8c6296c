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

// Corpora in the line-record format, regime tags, splits and the synthetic
// multi-domain generator.
//
// Line-record format (UTF-8, one JSON object per line, blank lines ignored):
//
//   {"id": "b-17", "text": "great book", "label": "pos", "domain": "books"}
//   {"text": "works fine", "label": "pos"}
//
//   text    string, required
//   label   string, optional; absent or null means UNK
//   domain  string, optional; absent or null means UNK
//   id      string, optional
//
// Any other key, a repeated key, or a non-string value is an error reported
// with its 1-based line number. The same format serves word and byte mode;
// in byte mode the UTF-8 bytes of `text` are the input sequence.

#ifndef SDA_DATA_HPP_
#define SDA_DATA_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sda/text.hpp"

namespace sda {

struct Document {
  std::string id;
  std::string text;
  std::optional<std::string> label;   // nullopt is UNK
  std::optional<std::string> domain;  // nullopt is UNK

  bool operator==(const Document&) const = default;
};

// Which sub-corpus an instance belongs to: F has label and domain, Y has the
// label only.
struct RegimeTag {
  bool has_label = false;
  bool has_domain = false;
  bool operator==(const RegimeTag&) const = default;
};

RegimeTag Regime(const Document& doc);

struct Corpus {
  std::vector<Document> docs;
  std::vector<std::string> labels;   // sorted, observed values only
  std::vector<std::string> domains;  // sorted, observed values only
  TokenMode mode = TokenMode::kWord;

  std::size_t size() const { return docs.size(); }
  bool operator==(const Corpus&) const = default;
};

// Recomputes sorted inventories from the documents.
Corpus MakeCorpus(std::vector<Document> docs, TokenMode mode);

Corpus LoadCorpus(const std::string& path, TokenMode mode);
Corpus ParseCorpus(const std::string& contents, TokenMode mode);
void SaveCorpus(const Corpus& corpus, const std::string& path);
std::string SerializeCorpus(const Corpus& corpus);

// Seeded shuffle, then the first dev/(dev+test) share goes to dev (rounded to
// nearest). Throws if either side would be empty.
std::pair<Corpus, Corpus> SplitDevTest(const Corpus& corpus, double dev_ratio,
                                       double test_ratio, std::uint64_t seed);

// Partitions documents into (others, held out) by domain name. Documents
// with UNK domain stay in the first part.
std::pair<Corpus, Corpus> SplitHeldOut(const Corpus& corpus,
                                       const std::vector<std::string>& held_out);

// Drops the domain of a seeded random `fraction` of documents.
Corpus DropDomains(const Corpus& corpus, double fraction, std::uint64_t seed);

// Synthetic multi-domain sentiment-like corpus.
//
// Domains are arranged in `groups` groups (domain d is in group d % groups).
// A document of domain d has `doc_length` tokens: `cues` sentiment cues and
// filler. Filler comes from the group vocabulary with probability `overlap`
// and from the domain's private vocabulary otherwise. Each cue is drawn from
// the group-shared cue pair with probability `shared_cue_rate`, else from
// the domain's private cue pair. Shared cues swap polarity between
// consecutive groups, so the same word signals opposite classes in
// different groups and transfer to an unseen domain needs its group. With
// probability `noise` the label is flipped after generation.
struct SynthSpec {
  std::size_t domains = 6;
  std::size_t groups = 2;
  std::vector<std::size_t> held_out = {4, 5};
  std::size_t per_domain = 200;
  std::size_t doc_length = 24;
  std::size_t cues = 3;
  std::size_t filler_vocab = 40;  // private filler words per domain
  std::size_t group_vocab = 40;   // filler words per group
  std::size_t cue_vocab = 4;      // cue words per polarity, per pool
  double overlap = 0.5;
  double shared_cue_rate = 0.5;
  double positive_rate = 0.5;
  double noise = 0.0;
  // Share of training-domain documents whose domain is dropped (Y regime).
  double unlabeled_domain_rate = 0.0;
  std::uint64_t seed = 1;

  void Validate() const;
};

std::string SynthDomainName(std::size_t d);

Corpus GenerateSynthetic(const SynthSpec& spec);

}  // namespace sda

#endif  // SDA_DATA_HPP_
