// Copyright 2026 The FedSCA Simulator Authors.
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

#include "fedsca/errors.hpp"

namespace fedsca {

const char* to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kInvalidArgument:
      return "invalid-argument";
    case ErrorCategory::kProtocol:
      return "protocol";
    case ErrorCategory::kDecode:
      return "decode";
    case ErrorCategory::kInvalidState:
      return "invalid-state";
    case ErrorCategory::kNumeric:
      return "numeric";
    case ErrorCategory::kConfig:
      return "config";
    case ErrorCategory::kIo:
      return "io";
  }
  return "unknown";
}

int exit_code(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kConfig:
    case ErrorCategory::kInvalidArgument:
      return 2;
    case ErrorCategory::kNumeric:
      return 3;
    case ErrorCategory::kIo:
      return 4;
    case ErrorCategory::kDecode:
    case ErrorCategory::kProtocol:
      return 5;
    case ErrorCategory::kInvalidState:
      return 6;
  }
  return 1;
}

}  // namespace fedsca
