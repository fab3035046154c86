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

#ifndef FEDSCA_ERRORS_HPP_
#define FEDSCA_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace fedsca {

enum class ErrorCategory {
  kInvalidArgument,
  kProtocol,
  kDecode,
  kInvalidState,
  kNumeric,
  kConfig,
  kIo,
};

const char* to_string(ErrorCategory category);

// Process exit code used by the CLI for each category. 0 is success, 1 is
// reserved for unexpected failures.
int exit_code(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

#define FEDSCA_DEFINE_ERROR(Name, Category)                 \
  class Name : public Error {                               \
   public:                                                  \
    explicit Name(const std::string& message)               \
        : Error(ErrorCategory::Category, message) {}        \
  };

FEDSCA_DEFINE_ERROR(InvalidArgument, kInvalidArgument)
FEDSCA_DEFINE_ERROR(ProtocolError, kProtocol)
FEDSCA_DEFINE_ERROR(DecodeError, kDecode)
FEDSCA_DEFINE_ERROR(InvalidState, kInvalidState)
FEDSCA_DEFINE_ERROR(NumericError, kNumeric)
FEDSCA_DEFINE_ERROR(ConfigError, kConfig)
FEDSCA_DEFINE_ERROR(IoError, kIo)

#undef FEDSCA_DEFINE_ERROR

}  // namespace fedsca

#endif  // FEDSCA_ERRORS_HPP_
