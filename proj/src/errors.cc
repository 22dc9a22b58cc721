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

#include "edgeq/errors.h"

namespace edgeq {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidConfig:
      return "InvalidConfig";
    case ErrorCode::kAllDropped:
      return "AllDropped";
    case ErrorCode::kIllegalAction:
      return "IllegalAction";
    case ErrorCode::kDegenerateGeometry:
      return "DegenerateGeometry";
    case ErrorCode::kNonFiniteGradient:
      return "NonFiniteGradient";
    case ErrorCode::kBudgetOutOfRange:
      return "BudgetOutOfRange";
    case ErrorCode::kSchemaMismatch:
      return "SchemaMismatch";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code) {}

}  // namespace edgeq
