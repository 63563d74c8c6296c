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

#include "sda/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sda/error.hpp"

namespace sda {
namespace {

constexpr char kMagic[8] = {'S', 'D', 'A', 'C', 'K', 'P', 'T', '\0'};

template <typename T>
void PutLe(std::string& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) {
      std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    }
  }
  out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T Get() {
    Need(sizeof(T));
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
      for (std::size_t i = 0; i < sizeof(T) / 2; ++i) {
        std::swap(raw[i], raw[sizeof(T) - 1 - i]);
      }
    }
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, raw, sizeof(T));
    return v;
  }

  std::string GetBytes(std::size_t n) {
    Need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void Need(std::size_t n) {
    if (bytes_.size() - pos_ < n) {
      Fail(ErrorCode::kParse, "checkpoint truncated at byte " + std::to_string(pos_));
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string SerializeCheckpoint(const ParameterSet& params,
                                const std::string& manifest) {
  std::string out(kMagic, sizeof(kMagic));
  PutLe<std::uint32_t>(out, kCheckpointVersion);
  PutLe<std::uint32_t>(out, static_cast<std::uint32_t>(manifest.size()));
  out += manifest;
  PutLe<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    PutLe<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out += p.name;
    PutLe<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.rank()));
    for (std::size_t d : p.value.shape()) PutLe<std::uint64_t>(out, d);
    for (double v : p.value.values()) PutLe<double>(out, v);
  }
  return out;
}

Checkpoint ParseCheckpoint(const std::string& bytes) {
  Reader r(bytes);
  if (r.GetBytes(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
    Fail(ErrorCode::kParse, "not a checkpoint file (bad magic)");
  }
  const auto version = r.Get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    Fail(ErrorCode::kParse, "unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.manifest = r.GetBytes(r.Get<std::uint32_t>());
  const auto count = r.Get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.GetBytes(r.Get<std::uint32_t>());
    const auto rank = r.Get<std::uint32_t>();
    Shape shape;
    std::size_t n = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      shape.push_back(static_cast<std::size_t>(r.Get<std::uint64_t>()));
      n *= shape.back();
    }
    std::vector<double> values(n);
    for (double& v : values) v = r.Get<double>();
    ckpt.params.Add(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  if (!r.done()) Fail(ErrorCode::kParse, "trailing bytes after checkpoint");
  return ckpt;
}

void SaveCheckpoint(const std::string& path, const ParameterSet& params,
                    const std::string& manifest) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  const std::string bytes = SerializeCheckpoint(params, manifest);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) Fail(ErrorCode::kIo, "write failed for '" + path + "'");
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open checkpoint '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseCheckpoint(ss.str());
}

}  // namespace sda
