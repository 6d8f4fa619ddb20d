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

#ifndef LIPEM_ERROR_H_
#define LIPEM_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "Eigen/Core"

namespace lipem {

enum class ErrorCode {
  kInvalidConfiguration,
  kInsufficientData,
  kSingularFit,
  kInvalidChoice,
  kOptimizationFailure,
  kNonFiniteLikelihood,
  kDegenerateNull,
  kFactorization,
  kTransport,
  kMalformedJudgeResponse,
  kDataNotFound,
  kParse,
  kIo,
};

// Stable lowercase identifier used in machine-parseable CLI errors.
std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Raised by the worth fit when the iteration cap is hit; keeps the iterate
// reached so callers can inspect or warm-start from it.
class OptimizationError : public Error {
 public:
  OptimizationError(const std::string& message, Eigen::VectorXd last_iterate)
      : Error(ErrorCode::kOptimizationFailure, message),
        last_iterate_(std::move(last_iterate)) {}

  const Eigen::VectorXd& last_iterate() const { return last_iterate_; }

 private:
  Eigen::VectorXd last_iterate_;
};

}  // namespace lipem

#endif  // LIPEM_ERROR_H_
