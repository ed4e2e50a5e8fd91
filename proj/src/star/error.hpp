// Copyright 2026 The STAR Authors.
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

#pragma once

#include <stdexcept>
#include <string>

namespace star {

// Numeric values are mirrored by StarStatus in the public C header.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kFileNotFound = 2,
  kUnsupportedFormat = 3,
  kDecodeError = 4,
  kOutOfBounds = 5,
  kIoError = 6,
  kDimMismatch = 7,
  kInvalidStep = 8,
  kDegenerateKernel = 9,
  kKernelTooLarge = 10,
  kEmptyMask = 11,
  kSchemaError = 12,
  kInvalidName = 13,
  kExtentTooSmall = 14,
  kOutOfCanvas = 15,
  kConflict = 16,
  kNotFound = 17,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, std::string(error_code_name(code)) + ": " + message);
}

}  // namespace star
