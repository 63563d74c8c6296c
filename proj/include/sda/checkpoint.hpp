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

// Parameter checkpoint container, version 1. All integers little-endian.
//
//   bytes 0..7   magic "SDACKPT\0"
//   u32          format version (1)
//   u32          manifest length M, then M bytes of UTF-8 JSON
//   u32          parameter count N, then N records of
//                  u32 name length L, L bytes of name,
//                  u32 rank R, R x u64 dimensions,
//                  prod(dims) x f64 IEEE-754 values.
//
// The manifest is opaque to this layer; the model layer stores the model
// family, channel count, KL weight and vocabulary hash there.

#ifndef SDA_CHECKPOINT_HPP_
#define SDA_CHECKPOINT_HPP_

#include <cstdint>
#include <string>

#include "sda/autodiff.hpp"

namespace sda {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::string manifest;
  ParameterSet params;
};

void SaveCheckpoint(const std::string& path, const ParameterSet& params,
                    const std::string& manifest);
Checkpoint LoadCheckpoint(const std::string& path);

std::string SerializeCheckpoint(const ParameterSet& params,
                                const std::string& manifest);
Checkpoint ParseCheckpoint(const std::string& bytes);

}  // namespace sda

#endif  // SDA_CHECKPOINT_HPP_
