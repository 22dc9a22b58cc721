// Copyright 2026 The EdgeQ Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EDGEQ_ERRORS_H_
#define EDGEQ_ERRORS_H_

#include <stdexcept>
#include <string>

namespace edgeq {

enum class ErrorCode {
  kInvalidConfig,
  kAllDropped,
  kIllegalAction,
  kDegenerateGeometry,
  kNonFiniteGradient,
  kBudgetOutOfRange,
  kSchemaMismatch,
};

const char* ErrorCodeName(ErrorCode code);

// Every recoverable failure in the library is reported as an Error carrying
// one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace edgeq

#endif  // EDGEQ_ERRORS_H_
