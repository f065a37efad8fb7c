// Copyright 2026 The stainkit Authors. All Rights Reserved.
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

#include "stainkit/error.hpp"

namespace stainkit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "invalid-argument";
    case ErrorCode::kDimensionMismatch:
      return "dimension-mismatch";
    case ErrorCode::kFileNotFound:
      return "file-not-found";
    case ErrorCode::kUnsupportedFormat:
      return "unsupported-format";
    case ErrorCode::kBadChannelCount:
      return "non-rgb-channel-count";
    case ErrorCode::kUnwritablePath:
      return "unwritable-path";
    case ErrorCode::kParseError:
      return "parse-error";
    case ErrorCode::kZeroNorm:
      return "zero-norm";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

}  // namespace stainkit
