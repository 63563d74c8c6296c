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

#include "sda/text.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "sda/error.hpp"

namespace sda {
namespace {

bool IsSpace(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool ValidUtf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t extra;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong forms, surrogates and out-of-range code points.
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) ||
        (extra == 3 && cp < 0x10000) || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += extra + 1;
  }
  return true;
}

std::string ByteToken(int b) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "<0x%02X>", b);
  return buf;
}

}  // namespace

const char* TokenModeName(TokenMode mode) {
  return mode == TokenMode::kWord ? "word" : "byte";
}

TokenMode ParseTokenMode(std::string_view name) {
  if (name == "word") return TokenMode::kWord;
  if (name == "byte") return TokenMode::kByte;
  Fail(ErrorCode::kInvalidArgument,
       "unknown token mode '" + std::string(name) + "' (expected word or byte)");
}

Vocab::Vocab() {
  Append("<pad>");
  Append("<oov>");
}

void Vocab::Append(std::string token) {
  const int id = static_cast<int>(tokens_.size());
  if (!ids_.emplace(token, id).second) {
    Fail(ErrorCode::kParse, "duplicate vocabulary token '" + token + "'");
  }
  tokens_.push_back(std::move(token));
}

Vocab Vocab::Build(std::span<const std::string> texts, std::size_t min_count,
                   std::size_t max_size) {
  std::map<std::string, std::size_t> counts;
  for (const auto& text : texts) {
    auto words = SplitWords(text);
    if (words.size() > kMaxWordTokens) words.resize(kMaxWordTokens);
    for (auto& w : words) ++counts[std::move(w)];
  }
  std::vector<std::pair<std::string, std::size_t>> sorted(counts.begin(), counts.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocab vocab;
  for (auto& [token, count] : sorted) {
    if (count < min_count) break;
    if (max_size != 0 && vocab.size() >= max_size) break;
    if (token == "<pad>" || token == "<oov>") continue;
    vocab.Append(token);
  }
  return vocab;
}

Vocab Vocab::Bytes() {
  Vocab vocab;
  for (int b = 0; b < 256; ++b) vocab.Append(ByteToken(b));
  return vocab;
}

Vocab Vocab::Parse(const std::string& contents) {
  std::vector<std::string> lines;
  std::istringstream in(contents);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  if (lines.size() < 2 || lines[0] != "<pad>" || lines[1] != "<oov>") {
    Fail(ErrorCode::kParse, "vocabulary must start with <pad> and <oov> lines");
  }
  Vocab vocab;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    if (lines[i].empty()) {
      Fail(ErrorCode::kParse, "empty vocabulary token at line " + std::to_string(i + 1));
    }
    vocab.Append(lines[i]);
  }
  return vocab;
}

Vocab Vocab::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open vocabulary file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return Parse(buf.str());
}

std::string Vocab::Serialize() const {
  std::string out;
  for (const auto& t : tokens_) {
    out += t;
    out += '\n';
  }
  return out;
}

void Vocab::Save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write vocabulary file '" + path + "'");
  out << Serialize();
  if (!out) Fail(ErrorCode::kIo, "write failed for '" + path + "'");
}

int Vocab::Id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kOovId : it->second;
}

const std::string& Vocab::Token(int id) const {
  Require(id >= 0 && static_cast<std::size_t>(id) < tokens_.size(),
          "vocabulary id out of range");
  return tokens_[id];
}

std::uint64_t Vocab::Hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& t : tokens_) {
    for (unsigned char c : t) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= '\n';
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::string> SplitWords(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (IsSpace(c)) {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch;
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

TokenSeq Tokenize(std::string_view text, TokenMode mode, const Vocab& vocab) {
  TokenSeq seq;
  seq.mode = mode;
  if (mode == TokenMode::kWord) {
    if (!ValidUtf8(text)) {
      Fail(ErrorCode::kInvalidArgument, "word-mode input is not valid UTF-8");
    }
    const auto words = SplitWords(text);
    const std::size_t n = std::min(words.size(), kMaxWordTokens);
    seq.ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) seq.ids.push_back(vocab.Id(words[i]));
  } else {
    const std::size_t n = std::min(text.size(), kByteSeqLength);
    if (n > 0) {
      seq.ids.assign(kByteSeqLength, kPadId);
      for (std::size_t i = 0; i < n; ++i) {
        seq.ids[i] = static_cast<unsigned char>(text[i]) + 2;
      }
    }
  }
  if (seq.ids.empty()) {
    seq.ids = {kPadId};
    seq.empty_input = true;
  }
  return seq;
}

void EncoderConfig::Validate() const {
  Require(embed_dim >= 1, "encoder embed_dim must be >= 1");
  Require(filters >= 1, "encoder filters must be >= 1");
  Require(!windows.empty(), "encoder needs at least one window size");
  for (std::size_t w : windows) Require(w >= 1, "encoder window sizes must be >= 1");
  Require(dropout >= 0.0 && dropout < 1.0, "encoder dropout must lie in [0, 1)");
}

Encoder Encoder::Create(ParameterSet& params, const std::string& prefix,
                        std::size_t vocab_size, const EncoderConfig& config,
                        Rng& init) {
  config.Validate();
  Require(vocab_size >= 2, "encoder vocabulary must include PAD and OOV");
  Tensor embed({vocab_size, config.embed_dim});
  for (double& v : embed.values()) v = init.Uniform(-0.05, 0.05);
  params.Add(prefix + "/embed", std::move(embed));
  for (std::size_t w : config.windows) {
    const std::size_t fan_in = w * config.embed_dim;
    const double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
    Tensor kernel({fan_in, config.filters});
    for (double& v : kernel.values()) v = scale * init.Normal();
    const std::string name = prefix + "/conv" + std::to_string(w);
    params.Add(name + "/w", std::move(kernel));
    params.Add(name + "/b", Tensor({config.filters}, 0.0));
  }
  return Bind(params, prefix, config);
}

Encoder Encoder::Bind(const ParameterSet& params, const std::string& prefix,
                      const EncoderConfig& config) {
  config.Validate();
  Encoder enc;
  enc.config_ = config;
  enc.embed_ = params.Index(prefix + "/embed");
  const Tensor& table = params[enc.embed_].value;
  if (table.rank() != 2 || table.dim(1) != config.embed_dim) {
    Fail(ErrorCode::kShapeMismatch, prefix + "/embed has shape " +
                                        ShapeString(table.shape()) +
                                        ", expected [V, " +
                                        std::to_string(config.embed_dim) + "]");
  }
  for (std::size_t w : config.windows) {
    const std::string name = prefix + "/conv" + std::to_string(w);
    enc.conv_w_.push_back(params.Index(name + "/w"));
    enc.conv_b_.push_back(params.Index(name + "/b"));
    const Tensor& k = params[enc.conv_w_.back()].value;
    if (k.shape() != Shape{w * config.embed_dim, config.filters}) {
      Fail(ErrorCode::kShapeMismatch, name + "/w has shape " + ShapeString(k.shape()));
    }
  }
  return enc;
}

Var Encoder::Encode(Tape& tape, const ParameterSet& params, std::span<const int> ids,
                    Rng* dropout_rng) const {
  Require(!ids.empty(), "encode: empty token sequence");
  std::size_t len = ids.size();
  while (len > 0 && ids[len - 1] == kPadId) --len;
  const std::size_t max_window =
      *std::max_element(config_.windows.begin(), config_.windows.end());
  std::vector<int> seq;
  if (len < max_window) seq.assign(max_window - len, kPadId);
  seq.insert(seq.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(len));

  Var x = ad::Embedding(tape.Param(params, embed_), seq);
  std::vector<Var> pooled;
  pooled.reserve(config_.windows.size());
  for (std::size_t i = 0; i < config_.windows.size(); ++i) {
    Var c = ad::Conv1d(x, tape.Param(params, conv_w_[i]), tape.Param(params, conv_b_[i]),
                       config_.windows[i]);
    pooled.push_back(ad::MaxPoolTime(ad::Relu(c)));
  }
  Var h = pooled.size() == 1 ? pooled[0] : ad::Concat(pooled);
  if (dropout_rng != nullptr && config_.dropout > 0.0) {
    h = ad::Dropout(h, config_.dropout, *dropout_rng);
  }
  return h;
}

}  // namespace sda
