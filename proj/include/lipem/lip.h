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

// Language-induced prior over source relevance.
//
// A judge is shown subgroups of sources and picks at most one of them (or the
// null option 0). The picks are modelled as a conditional logit with an
// outside option:
//
//   P(choice | S) = exp(alpha_choice) / (exp(alpha_0) + sum_{j in S} exp(alpha_j))
//
// and the worths are fitted by minimizing the negative log-likelihood plus
// eps * sum_k (alpha_k - logit(p0))^2. The null worth alpha_0 is not
// penalized. The prior is pi_k = sigmoid(alpha_k).

#ifndef LIPEM_LIP_H_
#define LIPEM_LIP_H_

#include <random>
#include <span>
#include <vector>

#include "lipem/numeric.h"

namespace lipem {

// One judge response. Sources are 1-based; choice 0 is the null option.
struct ChoiceRecord {
  std::vector<int> subgroup;
  int choice = 0;

  friend bool operator==(const ChoiceRecord&, const ChoiceRecord&) = default;
};

using ElicitationSet = std::vector<ChoiceRecord>;

// Throws kInvalidChoice unless the subgroup is a nonempty set of indices in
// [1, num_sources] and the choice is 0 or a member of it.
void ValidateRecord(const ChoiceRecord& record, int num_sources);

// alpha_0 (null) followed by alpha_1..alpha_K.
struct WorthVector {
  Vector alpha;

  int num_sources() const { return static_cast<int>(alpha.size()) - 1; }
  double null_worth() const { return alpha(0); }
};

enum class LipProvenance { kFitted, kUniform, kFile };

struct Lip {
  Vector pi;  // pi(k - 1) is the prior relevance of source k
  LipProvenance provenance = LipProvenance::kUniform;

  int num_sources() const { return static_cast<int>(pi.size()); }

  static Lip Uniform(int num_sources, double p0);
  static Lip FromWorths(const WorthVector& worths,
                        LipProvenance provenance = LipProvenance::kFitted);
};

// Throws kInvalidChoice if `choice` is not 0 or a member of `subgroup`.
double ChoiceProbability(const WorthVector& worths,
                         std::span<const int> subgroup, int choice);

struct ObjectiveValue {
  double value = 0.0;
  Vector gradient;  // length K + 1
};

ObjectiveValue NllObjective(const WorthVector& worths,
                            const ElicitationSet& records, double p0,
                            double eps);

struct LipFitOptions {
  double p0 = 0.01;
  double eps = 0.1;
  double tol = 1e-8;
  int max_iters = 2000;
};

struct LipFit {
  WorthVector worths;
  Lip lip;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::vector<double> objective_trace;
};

// Minimizes NllObjective with L-BFGS starting from alpha_0 = 0 and
// alpha_k = logit(p0). Throws OptimizationError after max_iters.
LipFit FitLip(const ElicitationSet& records, int num_sources,
              const LipFitOptions& options = {});

// Draws `count` subgroups: a size uniformly from `sizes`, then that many
// distinct sources uniformly without replacement. Subgroups are returned
// sorted ascending.
std::vector<std::vector<int>> SampleSubgroups(int num_sources,
                                              std::span<const int> sizes,
                                              int count, std::mt19937_64& rng);

// Samples a choice from the conditional logit under `true_worths`.
int SimulatedJudgeChoice(const WorthVector& true_worths,
                         std::span<const int> subgroup, std::mt19937_64& rng);

// Answers every subgroup with SimulatedJudgeChoice, in order.
ElicitationSet SimulateRecords(const WorthVector& true_worths,
                               const std::vector<std::vector<int>>& subgroups,
                               std::mt19937_64& rng);

// Drops records whose subgroup contains `source` and shifts every index
// above it down by one, preserving the ascending order of the rest.
ElicitationSet DropSourceAndReindex(const ElicitationSet& records, int source);

}  // namespace lipem

#endif  // LIPEM_LIP_H_
