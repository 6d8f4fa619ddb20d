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

#include "lipem/lip.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lipem/error.h"
#include "lipem/optimize.h"

namespace lipem {
namespace {

// Softmax over {0} U subgroup; probs[0] is the null option.
void OptionProbabilities(const Vector& alpha, std::span<const int> subgroup,
                         std::vector<double>* probs) {
  probs->resize(subgroup.size() + 1);
  double max_worth = alpha(0);
  for (int j : subgroup) max_worth = std::max(max_worth, alpha(j));
  double total = (*probs)[0] = std::exp(alpha(0) - max_worth);
  for (size_t i = 0; i < subgroup.size(); ++i) {
    (*probs)[i + 1] = std::exp(alpha(subgroup[i]) - max_worth);
    total += (*probs)[i + 1];
  }
  for (double& p : *probs) p /= total;
}

// Position of `choice` among the options ({0} U subgroup), or -1.
int OptionIndex(std::span<const int> subgroup, int choice) {
  if (choice == 0) return 0;
  for (size_t i = 0; i < subgroup.size(); ++i) {
    if (subgroup[i] == choice) return static_cast<int>(i) + 1;
  }
  return -1;
}

}  // namespace

void ValidateRecord(const ChoiceRecord& record, int num_sources) {
  if (record.subgroup.empty()) {
    throw Error(ErrorCode::kInvalidChoice, "subgroup is empty");
  }
  std::vector<int> sorted = record.subgroup;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorCode::kInvalidChoice, "subgroup has repeated sources");
  }
  if (sorted.front() < 1 || sorted.back() > num_sources) {
    throw Error(ErrorCode::kInvalidChoice,
                "subgroup index outside [1, " + std::to_string(num_sources) +
                    "]");
  }
  if (OptionIndex(record.subgroup, record.choice) < 0) {
    throw Error(ErrorCode::kInvalidChoice,
                "choice " + std::to_string(record.choice) +
                    " is neither 0 nor in the subgroup");
  }
}

Lip Lip::Uniform(int num_sources, double p0) {
  if (num_sources < 0 || !(p0 > 0.0 && p0 < 1.0)) {
    throw Error(ErrorCode::kInvalidConfiguration,
                "uniform prior needs K >= 0 and p0 in (0, 1)");
  }
  return Lip{Vector::Constant(num_sources, p0), LipProvenance::kUniform};
}

Lip Lip::FromWorths(const WorthVector& worths, LipProvenance provenance) {
  Lip lip;
  lip.provenance = provenance;
  lip.pi.resize(worths.num_sources());
  for (int k = 1; k <= worths.num_sources(); ++k) {
    lip.pi(k - 1) = Sigmoid(worths.alpha(k));
  }
  return lip;
}

double ChoiceProbability(const WorthVector& worths,
                         std::span<const int> subgroup, int choice) {
  if (subgroup.empty()) {
    throw Error(ErrorCode::kInvalidChoice, "subgroup is empty");
  }
  const int index = OptionIndex(subgroup, choice);
  if (index < 0) {
    throw Error(ErrorCode::kInvalidChoice,
                "choice " + std::to_string(choice) +
                    " is neither 0 nor in the subgroup");
  }
  for (int j : subgroup) {
    if (j < 1 || j > worths.num_sources()) {
      throw Error(ErrorCode::kInvalidChoice, "subgroup index out of range");
    }
  }
  std::vector<double> probs;
  OptionProbabilities(worths.alpha, subgroup, &probs);
  return probs[index];
}

ObjectiveValue NllObjective(const WorthVector& worths,
                            const ElicitationSet& records, double p0,
                            double eps) {
  if (!(p0 > 0.0 && p0 < 1.0) || !(eps >= 0.0)) {
    throw Error(ErrorCode::kInvalidConfiguration,
                "objective needs p0 in (0, 1) and eps >= 0");
  }
  const int num_sources = worths.num_sources();
  const Vector& alpha = worths.alpha;
  ObjectiveValue out;
  out.gradient = Vector::Zero(alpha.size());
  std::vector<double> probs;
  for (const ChoiceRecord& record : records) {
    ValidateRecord(record, num_sources);
    OptionProbabilities(alpha, record.subgroup, &probs);
    const int chosen = OptionIndex(record.subgroup, record.choice);
    out.value -= std::log(probs[chosen]);
    out.gradient(0) += probs[0];
    for (size_t i = 0; i < record.subgroup.size(); ++i) {
      out.gradient(record.subgroup[i]) += probs[i + 1];
    }
    out.gradient(record.choice) -= 1.0;
  }
  const double anchor = Logit(p0);
  for (int k = 1; k <= num_sources; ++k) {
    const double offset = alpha(k) - anchor;
    out.value += eps * offset * offset;
    out.gradient(k) += 2.0 * eps * offset;
  }
  return out;
}

LipFit FitLip(const ElicitationSet& records, int num_sources,
              const LipFitOptions& options) {
  if (num_sources < 1) {
    throw Error(ErrorCode::kInvalidConfiguration, "need at least one source");
  }
  if (!(options.eps > 0.0)) {
    throw Error(ErrorCode::kInvalidConfiguration,
                "eps must be positive for a unique optimum");
  }
  for (const ChoiceRecord& record : records) {
    ValidateRecord(record, num_sources);
  }
  Vector start = Vector::Constant(num_sources + 1, Logit(options.p0));
  start(0) = 0.0;

  const Objective objective = [&](const Vector& alpha, Vector* gradient) {
    ObjectiveValue v =
        NllObjective(WorthVector{alpha}, records, options.p0, options.eps);
    *gradient = std::move(v.gradient);
    return v.value;
  };
  MinimizeOptions minimize;
  minimize.gradient_tol = options.tol;
  minimize.max_iters = options.max_iters;
  MinimizeResult result = MinimizeLbfgs(objective, std::move(start), minimize);
  if (!result.converged) {
    throw OptimizationError(
        "worth fit stopped after " + std::to_string(result.iterations) +
            " iterations with gradient norm " +
            std::to_string(result.gradient.lpNorm<Eigen::Infinity>()),
        result.x);
  }
  LipFit fit;
  fit.worths = WorthVector{std::move(result.x)};
  fit.lip = Lip::FromWorths(fit.worths, LipProvenance::kFitted);
  fit.iterations = result.iterations;
  fit.gradient_norm = result.gradient.lpNorm<Eigen::Infinity>();
  fit.objective_trace = std::move(result.trace);
  return fit;
}

std::vector<std::vector<int>> SampleSubgroups(int num_sources,
                                              std::span<const int> sizes,
                                              int count, std::mt19937_64& rng) {
  if (sizes.empty()) {
    throw Error(ErrorCode::kInvalidConfiguration, "no subgroup sizes given");
  }
  for (int size : sizes) {
    if (size < 1 || size > num_sources) {
      throw Error(ErrorCode::kInvalidConfiguration,
                  "subgroup size " + std::to_string(size) +
                      " outside [1, K=" + std::to_string(num_sources) + "]");
    }
  }
  if (count < 0) {
    throw Error(ErrorCode::kInvalidConfiguration, "negative query count");
  }
  std::vector<int> pool(num_sources);
  std::vector<std::vector<int>> subgroups;
  subgroups.reserve(count);
  std::uniform_int_distribution<size_t> pick_size(0, sizes.size() - 1);
  for (int m = 0; m < count; ++m) {
    const int size = sizes[pick_size(rng)];
    std::iota(pool.begin(), pool.end(), 1);
    for (int i = 0; i < size; ++i) {
      std::uniform_int_distribution<int> pick(i, num_sources - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    std::vector<int> subgroup(pool.begin(), pool.begin() + size);
    std::sort(subgroup.begin(), subgroup.end());
    subgroups.push_back(std::move(subgroup));
  }
  return subgroups;
}

int SimulatedJudgeChoice(const WorthVector& true_worths,
                         std::span<const int> subgroup, std::mt19937_64& rng) {
  if (subgroup.empty()) {
    throw Error(ErrorCode::kInvalidChoice, "subgroup is empty");
  }
  std::vector<double> probs;
  OptionProbabilities(true_worths.alpha, subgroup, &probs);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cumulative = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    cumulative += probs[i];
    if (u < cumulative) return i == 0 ? 0 : subgroup[i - 1];
  }
  // u landed in the rounding gap above the cumulative sum.
  for (size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return i == 0 ? 0 : subgroup[i - 1];
  }
  return 0;
}

ElicitationSet SimulateRecords(const WorthVector& true_worths,
                               const std::vector<std::vector<int>>& subgroups,
                               std::mt19937_64& rng) {
  ElicitationSet records;
  records.reserve(subgroups.size());
  for (const std::vector<int>& subgroup : subgroups) {
    records.push_back({subgroup, SimulatedJudgeChoice(true_worths, subgroup, rng)});
  }
  return records;
}

ElicitationSet DropSourceAndReindex(const ElicitationSet& records, int source) {
  ElicitationSet out;
  const auto shift = [source](int j) { return j > source ? j - 1 : j; };
  for (const ChoiceRecord& record : records) {
    if (std::find(record.subgroup.begin(), record.subgroup.end(), source) !=
        record.subgroup.end()) {
      continue;
    }
    ChoiceRecord compact;
    compact.subgroup.reserve(record.subgroup.size());
    for (int j : record.subgroup) compact.subgroup.push_back(shift(j));
    compact.choice = shift(record.choice);
    out.push_back(std::move(compact));
  }
  return out;
}

}  // namespace lipem
