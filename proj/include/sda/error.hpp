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

#ifndef SDA_ERROR_HPP_
#define SDA_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace sda {

// Error categories. The numeric values are mirrored by sda_status in the C
// API, so do not reorder.
enum class ErrorCode {
  kInvalidArgument = 1,
  kShapeMismatch = 2,
  kNumeric = 3,
  kConvergence = 4,
  kParse = 5,
  kIo = 6,
  kState = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void Require(bool cond, const std::string& what) {
  if (!cond) Fail(ErrorCode::kInvalidArgument, what);
}

}  // namespace sda

#endif  // SDA_ERROR_HPP_
