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

#include "sda/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sda/error.hpp"
#include "sda/random.hpp"

namespace sda {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void LineError(std::size_t line, const std::string& msg) {
  Fail(ErrorCode::kParse, "line " + std::to_string(line) + ": " + msg);
}

Document ParseRecord(const std::string& text, std::size_t line) {
  std::vector<std::set<std::string>> keys;
  json::parser_callback_t cb = [&](int, json::parse_event_t event, json& parsed) {
    switch (event) {
      case json::parse_event_t::object_start:
        keys.emplace_back();
        break;
      case json::parse_event_t::object_end:
        keys.pop_back();
        break;
      case json::parse_event_t::key: {
        const std::string key = parsed.get<std::string>();
        if (!keys.back().insert(key).second) {
          LineError(line, "duplicate key '" + key + "'");
        }
        break;
      }
      default:
        break;
    }
    return true;
  };
  json j;
  try {
    j = json::parse(text, cb);
  } catch (const json::exception& e) {
    LineError(line, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) LineError(line, "record must be a JSON object");
  Document doc;
  bool has_text = false;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const json& v = it.value();
    auto as_string = [&]() -> std::string {
      if (!v.is_string()) LineError(line, "field '" + key + "' must be a string");
      return v.get<std::string>();
    };
    if (key == "text") {
      doc.text = as_string();
      has_text = true;
    } else if (key == "label") {
      if (!v.is_null()) doc.label = as_string();
    } else if (key == "domain") {
      if (!v.is_null()) doc.domain = as_string();
    } else if (key == "id") {
      doc.id = as_string();
    } else {
      LineError(line, "unknown field '" + key + "'");
    }
  }
  if (!has_text) LineError(line, "missing required field 'text'");
  return doc;
}

std::vector<std::string> Inventory(const std::vector<Document>& docs,
                                   const std::optional<std::string> Document::*field) {
  std::set<std::string> seen;
  for (const auto& d : docs) {
    if ((d.*field).has_value()) seen.insert(*(d.*field));
  }
  return {seen.begin(), seen.end()};
}

std::string Word(const char* prefix, std::size_t a, std::size_t b) {
  return std::string(prefix) + std::to_string(a) + "_" + std::to_string(b);
}

}  // namespace

RegimeTag Regime(const Document& doc) {
  return {doc.label.has_value(), doc.domain.has_value()};
}

Corpus MakeCorpus(std::vector<Document> docs, TokenMode mode) {
  Corpus c;
  c.labels = Inventory(docs, &Document::label);
  c.domains = Inventory(docs, &Document::domain);
  c.docs = std::move(docs);
  c.mode = mode;
  return c;
}

Corpus ParseCorpus(const std::string& contents, TokenMode mode) {
  std::vector<Document> docs;
  std::istringstream in(contents);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    docs.push_back(ParseRecord(line, number));
  }
  if (docs.empty()) Fail(ErrorCode::kParse, "corpus is empty");
  return MakeCorpus(std::move(docs), mode);
}

Corpus LoadCorpus(const std::string& path, TokenMode mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open corpus '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return ParseCorpus(buf.str(), mode);
  } catch (const Error& e) {
    Fail(e.code(), path + ": " + e.what());
  }
}

std::string SerializeCorpus(const Corpus& corpus) {
  std::string out;
  for (const auto& d : corpus.docs) {
    ordered_json j;
    if (!d.id.empty()) j["id"] = d.id;
    j["text"] = d.text;
    if (d.label) j["label"] = *d.label;
    if (d.domain) j["domain"] = *d.domain;
    try {
      out += j.dump();
    } catch (const nlohmann::json::exception& e) {
      Fail(ErrorCode::kInvalidArgument,
           "document '" + d.id + "' cannot be serialized: " + e.what());
    }
    out += '\n';
  }
  return out;
}

void SaveCorpus(const Corpus& corpus, const std::string& path) {
  const std::string data = SerializeCorpus(corpus);
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write corpus '" + path + "'");
  out << data;
  if (!out) Fail(ErrorCode::kIo, "write failed for '" + path + "'");
}

std::pair<Corpus, Corpus> SplitDevTest(const Corpus& corpus, double dev_ratio,
                                       double test_ratio, std::uint64_t seed) {
  Require(dev_ratio > 0.0 && test_ratio > 0.0 && std::isfinite(dev_ratio + test_ratio),
          "dev/test ratios must be positive");
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.Shuffle(std::span<std::size_t>(order));
  const auto n_dev = static_cast<std::size_t>(
      std::llround(static_cast<double>(corpus.size()) * dev_ratio / (dev_ratio + test_ratio)));
  if (n_dev == 0 || n_dev >= corpus.size()) {
    Fail(ErrorCode::kInvalidArgument,
         "dev/test split of " + std::to_string(corpus.size()) +
             " documents leaves one side empty");
  }
  std::vector<Document> dev, test;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_dev ? dev : test).push_back(corpus.docs[order[i]]);
  }
  return {MakeCorpus(std::move(dev), corpus.mode), MakeCorpus(std::move(test), corpus.mode)};
}

std::pair<Corpus, Corpus> SplitHeldOut(const Corpus& corpus,
                                       const std::vector<std::string>& held_out) {
  std::set<std::string> names(held_out.begin(), held_out.end());
  std::vector<Document> keep, out;
  for (const auto& d : corpus.docs) {
    (d.domain && names.count(*d.domain) ? out : keep).push_back(d);
  }
  return {MakeCorpus(std::move(keep), corpus.mode), MakeCorpus(std::move(out), corpus.mode)};
}

Corpus DropDomains(const Corpus& corpus, double fraction, std::uint64_t seed) {
  Require(fraction >= 0.0 && fraction <= 1.0, "drop fraction must lie in [0, 1]");
  Rng rng(seed);
  std::vector<Document> docs = corpus.docs;
  for (auto& d : docs) {
    if (rng.Uniform() < fraction) d.domain.reset();
  }
  return MakeCorpus(std::move(docs), corpus.mode);
}

void SynthSpec::Validate() const {
  Require(domains >= 1, "synthetic spec needs at least one domain");
  Require(groups >= 1 && groups <= domains, "synthetic groups must lie in [1, domains]");
  for (std::size_t h : held_out) {
    Require(h < domains, "held-out domain id " + std::to_string(h) + " out of range");
  }
  Require(per_domain >= 1, "per_domain must be >= 1");
  Require(doc_length >= cues && doc_length >= 1, "doc_length must be >= cues and >= 1");
  Require(filler_vocab >= 1 && group_vocab >= 1 && cue_vocab >= 1,
          "synthetic vocabularies must be non-empty");
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  Require(unit(overlap), "overlap must lie in [0, 1]");
  Require(unit(shared_cue_rate), "shared_cue_rate must lie in [0, 1]");
  Require(unit(positive_rate), "positive_rate must lie in [0, 1]");
  Require(unit(noise), "noise must lie in [0, 1]");
  Require(unit(unlabeled_domain_rate), "unlabeled_domain_rate must lie in [0, 1]");
}

std::string SynthDomainName(std::size_t d) { return "d" + std::to_string(d); }

Corpus GenerateSynthetic(const SynthSpec& spec) {
  spec.Validate();
  const std::set<std::size_t> held(spec.held_out.begin(), spec.held_out.end());
  Rng rng(spec.seed);
  std::vector<Document> docs;
  docs.reserve(spec.domains * spec.per_domain);
  for (std::size_t d = 0; d < spec.domains; ++d) {
    const std::size_t group = d % spec.groups;
    for (std::size_t i = 0; i < spec.per_domain; ++i) {
      const bool positive = rng.Uniform() < spec.positive_rate;
      std::vector<std::string> tokens(spec.doc_length);
      for (auto& t : tokens) {
        t = rng.Uniform() < spec.overlap ? Word("g", group, rng.Below(spec.group_vocab))
                                         : Word("f", d, rng.Below(spec.filler_vocab));
      }
      std::vector<std::size_t> slots(spec.doc_length);
      std::iota(slots.begin(), slots.end(), 0);
      rng.Shuffle(std::span<std::size_t>(slots));
      for (std::size_t c = 0; c < spec.cues; ++c) {
        const std::size_t pick = rng.Below(spec.cue_vocab);
        std::string cue;
        if (rng.Uniform() < spec.shared_cue_rate) {
          // Pool A is positive in even groups and negative in odd ones.
          const bool pool_a = positive == (group % 2 == 0);
          cue = std::string(pool_a ? "sa" : "sb") + "_" + std::to_string(pick);
        } else {
          cue = Word(positive ? "p" : "n", d, pick);
        }
        tokens[slots[c]] = std::move(cue);
      }
      bool label = positive;
      if (rng.Uniform() < spec.noise) label = !label;
      Document doc;
      doc.id = SynthDomainName(d) + "-" + std::to_string(i);
      for (std::size_t t = 0; t < tokens.size(); ++t) {
        if (t) doc.text += ' ';
        doc.text += tokens[t];
      }
      doc.label = label ? "pos" : "neg";
      doc.domain = SynthDomainName(d);
      if (!held.count(d) && rng.Uniform() < spec.unlabeled_domain_rate) doc.domain.reset();
      docs.push_back(std::move(doc));
    }
  }
  return MakeCorpus(std::move(docs), TokenMode::kWord);
}

}  // namespace sda
