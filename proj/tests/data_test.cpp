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

#include <filesystem>
#include <map>
#include <set>

#include "sda/data.hpp"
#include "sda/error.hpp"

using namespace sda;

namespace {

std::string ErrorOf(const std::string& contents) {
  try {
    ParseCorpus(contents, TokenMode::kWord);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("records map to regimes") {
  const std::string src =
      "{\"text\": \"a b\", \"label\": \"pos\", \"domain\": \"books\"}\n"
      "{\"text\": \"c\", \"label\": \"neg\"}\n"
      "\n"
      "{\"id\": \"x\", \"text\": \"d\", \"label\": null, \"domain\": \"dvd\"}\n";
  Corpus c = ParseCorpus(src, TokenMode::kWord);
  REQUIRE(c.size() == 3);
  CHECK(Regime(c.docs[0]) == RegimeTag{true, true});
  CHECK(Regime(c.docs[1]) == RegimeTag{true, false});
  CHECK(Regime(c.docs[2]) == RegimeTag{false, true});
  CHECK(c.docs[2].id == "x");
  CHECK(c.labels == std::vector<std::string>{"neg", "pos"});
  CHECK(c.domains == std::vector<std::string>{"books", "dvd"});
}

TEST_CASE("malformed records are rejected with their line") {
  CHECK(ErrorOf("{\"text\": \"a\"}\n{\"text\": \"a\", \"text\": \"b\"}\n").find("line 2") !=
        std::string::npos);
  CHECK(ErrorOf("{\"text\": \"a\", \"label\": \"x\", \"label\": \"y\"}").find("duplicate key") !=
        std::string::npos);
  CHECK(ErrorOf("{\"label\": \"x\"}").find("missing required field") != std::string::npos);
  CHECK(ErrorOf("{\"text\": 3}").find("must be a string") != std::string::npos);
  CHECK(ErrorOf("{\"text\": \"a\", \"rating\": \"5\"}").find("unknown field") != std::string::npos);
  CHECK(ErrorOf("{\"text\": \"a\"}\n[1, 2]\n").find("line 2") != std::string::npos);
  CHECK(ErrorOf("{\"text\": \"a\"\n").find("line 1") != std::string::npos);
  CHECK(ErrorOf("\n\n").find("empty") != std::string::npos);
  CHECK_THROWS_AS(LoadCorpus("/nonexistent/corpus.jsonl", TokenMode::kWord), Error);
}

TEST_CASE("load, save, load round trip") {
  SynthSpec spec;
  spec.per_domain = 20;
  spec.unlabeled_domain_rate = 0.3;
  Corpus c = GenerateSynthetic(spec);
  c.docs[0].text = "quote \" backslash \\ tab \t unicode \xC3\xA9";
  c.docs[1].id.clear();
  c = MakeCorpus(c.docs, c.mode);
  const auto path = std::filesystem::temp_directory_path() / "sda_corpus_test.jsonl";
  SaveCorpus(c, path.string());
  Corpus back = LoadCorpus(path.string(), TokenMode::kWord);
  CHECK(back == c);
  CHECK(SerializeCorpus(back) == SerializeCorpus(c));
  std::filesystem::remove(path);
}

TEST_CASE("dev/test split") {
  SynthSpec spec;
  spec.domains = 1;
  spec.groups = 1;
  spec.held_out = {};
  spec.per_domain = 1000;
  Corpus c = GenerateSynthetic(spec);
  auto [dev, test] = SplitDevTest(c, 4, 6, 42);
  CHECK(dev.size() == 400);
  CHECK(test.size() == 600);
  std::set<std::string> ids;
  for (const auto& d : dev.docs) ids.insert(d.id);
  for (const auto& d : test.docs) CHECK(ids.insert(d.id).second);
  CHECK(ids.size() == 1000);
  auto [dev2, test2] = SplitDevTest(c, 4, 6, 42);
  CHECK(dev2 == dev);
  CHECK(test2 == test);
  Corpus one = MakeCorpus({c.docs[0]}, TokenMode::kWord);
  CHECK_THROWS_AS(SplitDevTest(one, 4, 6, 1), Error);
  CHECK_THROWS_AS(SplitDevTest(c, 0, 6, 1), Error);
}

TEST_CASE("held-out and domain dropping") {
  SynthSpec spec;
  spec.per_domain = 10;
  Corpus c = GenerateSynthetic(spec);
  auto [rest, held] = SplitHeldOut(c, {"d4", "d5"});
  CHECK(rest.size() == 40);
  CHECK(held.domains == std::vector<std::string>{"d4", "d5"});
  Corpus dropped = DropDomains(rest, 1.0, 3);
  for (const auto& d : dropped.docs) CHECK_FALSE(d.domain.has_value());
  CHECK(dropped.domains.empty());
  CHECK(DropDomains(rest, 0.0, 3) == rest);
}

TEST_CASE("synthetic generator: sizes, determinism, balance") {
  SynthSpec spec;
  spec.per_domain = 200;
  Corpus a = GenerateSynthetic(spec);
  CHECK(a.size() == 1200);
  CHECK(SerializeCorpus(a) == SerializeCorpus(GenerateSynthetic(spec)));
  spec.seed = 2;
  CHECK(SerializeCorpus(a) != SerializeCorpus(GenerateSynthetic(spec)));

  SynthSpec big;
  big.domains = 5;
  big.groups = 1;
  big.held_out = {};
  big.per_domain = 2000;
  big.positive_rate = 0.3;
  std::size_t pos = 0;
  const Corpus b = GenerateSynthetic(big);
  for (const auto& d : b.docs) pos += *d.label == "pos";
  CHECK(std::fabs(static_cast<double>(pos) / b.size() - 0.3) <= 0.02);

  SynthSpec semi;
  semi.per_domain = 500;
  semi.unlabeled_domain_rate = 0.5;
  std::map<std::string, std::size_t> missing;
  for (const auto& d : GenerateSynthetic(semi).docs) {
    if (!d.domain) ++missing["train"];
  }
  CHECK(std::fabs(missing["train"] / 2000.0 - 0.5) <= 0.05);
  for (const auto& d : SplitHeldOut(GenerateSynthetic(semi), {"d4", "d5"}).second.docs) {
    CHECK(d.domain.has_value());
  }
  SynthSpec bad;
  bad.held_out = {9};
  CHECK_THROWS_AS(GenerateSynthetic(bad), Error);
  bad = SynthSpec{};
  bad.overlap = 1.5;
  CHECK_THROWS_AS(GenerateSynthetic(bad), Error);
}

TEST_CASE("separable synthetic data: frequency oracle is perfect in-domain") {
  SynthSpec spec;
  spec.overlap = 0.0;
  spec.noise = 0.0;
  spec.per_domain = 300;
  const Corpus c = GenerateSynthetic(spec);
  // Per-domain token counts by label on even documents; odd documents are
  // classified by their summed smoothed log-count ratios.
  using Counts = std::map<std::string, std::map<std::string, double>>;
  std::map<std::string, Counts> per_domain;
  for (std::size_t i = 0; i < c.size(); i += 2) {
    for (const auto& w : SplitWords(c.docs[i].text)) {
      per_domain[*c.docs[i].domain][w][*c.docs[i].label] += 1.0;
    }
  }
  std::size_t correct = 0, total = 0;
  for (std::size_t i = 1; i < c.size(); i += 2) {
    const Document& d = c.docs[i];
    Counts& counts = per_domain[*d.domain];
    double score = 0.0;
    for (const auto& w : SplitWords(d.text)) {
      auto it = counts.find(w);
      if (it == counts.end()) continue;
      score += std::log((it->second["pos"] + 0.1) / (it->second["neg"] + 0.1));
    }
    correct += (score > 0) == (*d.label == "pos");
    ++total;
  }
  CHECK(correct == total);
}
