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

// Tokenization and the convolutional text encoder.
//
// Word mode lower-cases ASCII letters, splits on whitespace and keeps at most
// 256 tokens. Byte mode maps byte b to id b + 2 and truncates or right-pads
// with PAD to exactly 1000 ids. Ids 0 and 1 are PAD and OOV in both modes.
//
// Vocabulary file format: UTF-8 text, one token per line, line number (from
// zero) is the id. Line 0 is "<pad>" and line 1 is "<oov>". Byte
// vocabularies are written as "<0xHH>" tokens for completeness but are
// never needed at load time.

#ifndef SDA_TEXT_HPP_
#define SDA_TEXT_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sda/autodiff.hpp"
#include "sda/random.hpp"

namespace sda {

enum class TokenMode { kWord, kByte };

const char* TokenModeName(TokenMode mode);
TokenMode ParseTokenMode(std::string_view name);

inline constexpr int kPadId = 0;
inline constexpr int kOovId = 1;
inline constexpr std::size_t kMaxWordTokens = 256;
inline constexpr std::size_t kByteSeqLength = 1000;

class Vocab {
 public:
  // PAD and OOV only.
  Vocab();

  // Word vocabulary ordered by descending frequency, ties broken
  // lexicographically. Tokens seen fewer than `min_count` times are dropped;
  // `max_size` (including the two specials) of 0 means unbounded.
  static Vocab Build(std::span<const std::string> texts, std::size_t min_count = 1,
                     std::size_t max_size = 0);
  static Vocab Bytes();
  static Vocab Load(const std::string& path);
  static Vocab Parse(const std::string& contents);

  void Save(const std::string& path) const;
  std::string Serialize() const;

  int Id(std::string_view token) const;  // OOV when absent
  const std::string& Token(int id) const;
  std::size_t size() const { return tokens_.size(); }
  // FNV-1a over the serialized vocabulary.
  std::uint64_t Hash() const;

 private:
  void Append(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

struct TokenSeq {
  std::vector<int> ids;
  TokenMode mode = TokenMode::kWord;
  bool empty_input = false;  // input had no tokens; ids is {PAD}
};

// ASCII lower-casing and whitespace splitting, before truncation.
std::vector<std::string> SplitWords(std::string_view text);

// Word mode rejects invalid UTF-8 with kInvalidArgument.
TokenSeq Tokenize(std::string_view text, TokenMode mode, const Vocab& vocab);

struct EncoderConfig {
  std::size_t embed_dim = 300;
  std::size_t filters = 128;
  std::vector<std::size_t> windows = {3, 4, 5};
  double dropout = 0.5;

  std::size_t output_dim() const { return filters * windows.size(); }
  void Validate() const;
};

// Convolutional encoder whose parameters live in a shared ParameterSet under
// a name prefix: <prefix>/embed, <prefix>/conv<w>/w and <prefix>/conv<w>/b.
class Encoder {
 public:
  Encoder() = default;

  // Adds freshly initialized parameters: embeddings uniform(-0.05, 0.05),
  // convolution weights normal with He scaling, zero biases.
  static Encoder Create(ParameterSet& params, const std::string& prefix,
                        std::size_t vocab_size, const EncoderConfig& config,
                        Rng& init);
  // Binds to parameters that already exist, e.g. after loading a checkpoint.
  static Encoder Bind(const ParameterSet& params, const std::string& prefix,
                      const EncoderConfig& config);

  // embed -> per window: conv1d (valid) -> relu -> max-pool over time ->
  // concatenate. Trailing PAD ids are stripped, then the sequence is
  // left-padded with PAD up to the largest window. Dropout is applied to the
  // concatenated output when `dropout_rng` is non-null.
  Var Encode(Tape& tape, const ParameterSet& params, std::span<const int> ids,
             Rng* dropout_rng = nullptr) const;

  const EncoderConfig& config() const { return config_; }
  std::size_t output_dim() const { return config_.output_dim(); }

 private:
  EncoderConfig config_;
  std::size_t embed_ = 0;
  std::vector<std::size_t> conv_w_;
  std::vector<std::size_t> conv_b_;
};

}  // namespace sda

#endif  // SDA_TEXT_HPP_
