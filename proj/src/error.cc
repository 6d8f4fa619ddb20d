// Copyright 2026 The LIP-EM Authors.
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

#include "lipem/error.h"

namespace lipem {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidConfiguration:
      return "invalid_configuration";
    case ErrorCode::kInsufficientData:
      return "insufficient_data";
    case ErrorCode::kSingularFit:
      return "singular_fit";
    case ErrorCode::kInvalidChoice:
      return "invalid_choice";
    case ErrorCode::kOptimizationFailure:
      return "optimization_failure";
    case ErrorCode::kNonFiniteLikelihood:
      return "non_finite_likelihood";
    case ErrorCode::kDegenerateNull:
      return "degenerate_null";
    case ErrorCode::kFactorization:
      return "factorization_failure";
    case ErrorCode::kTransport:
      return "transport";
    case ErrorCode::kMalformedJudgeResponse:
      return "malformed_judge_response";
    case ErrorCode::kDataNotFound:
      return "data_not_found";
    case ErrorCode::kParse:
      return "parse";
    case ErrorCode::kIo:
      return "io";
  }
  return "unknown";
}

}  // namespace lipem
