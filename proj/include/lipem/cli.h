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

#ifndef LIPEM_CLI_H_
#define LIPEM_CLI_H_

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lipem/bench.h"
#include "lipem/cmapss.h"
#include "lipem/em.h"
#include "lipem/error.h"
#include "lipem/judge.h"
#include "lipem/lip.h"

namespace lipem {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitConfig = 3;

// A configuration value that failed validation; key is a dotted path.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& message)
      : Error(ErrorCode::kInvalidConfiguration, message),
        key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct ModelConfig {
  std::string kind = "gaussian";  // "gaussian" or "spline"
  double sigma = 1.0;
  int num_knots = 5;
  double knot_lo = 0.0;
  double knot_hi = 300.0;
  double ridge = 1e-8;
  double noise_variance = 0.0;  // 0: pooled residual variance of the sources
};

struct ElicitConfig {
  int queries = 200;
  std::vector<int> sizes = {3, 4, 5};
  size_t byte_budget = 2048;
};

// Everything a config file may set. Unknown keys are rejected.
struct RunConfig {
  std::uint64_t seed = kDefaultSeed;
  std::string out = ".";
  int jobs = 1;
  EmConfig em;
  LipFitOptions lip;
  ModelConfig model;
  GaussianExperimentConfig gaussian;
  OracleMseConfig oracle_mse;
  DichotomyConfig dichotomy;
  ConsistencyConfig consistency;
  CmapssConfig cmapss;
  TransportConfig judge;
  ElicitConfig elicit;
};

// Throws ConfigError naming the first offending key.
RunConfig ParseRunConfig(const nlohmann::json& document);
RunConfig LoadRunConfig(const std::string& path);

// One machine-parseable line: "error: code=<name> [key=<key>] message=<...>".
std::string FormatErrorLine(const Error& error);

int Dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err);
int Dispatch(int argc, char** argv);

}  // namespace lipem

#endif  // LIPEM_CLI_H_
