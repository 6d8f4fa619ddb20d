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

#ifndef LIPEM_BENCH_H_
#define LIPEM_BENCH_H_

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "lipem/dataset.h"
#include "lipem/em.h"
#include "lipem/likelihood.h"
#include "lipem/numeric.h"
#include "lipem/report.h"
#include "lipem/rng.h"

namespace lipem {

// Irrelevant-source generator: theta_k = theta0 + offset + spread * sigma * z,
// where the offset has norm uniform on [min_radius, max_radius] (times sigma)
// and a uniformly random direction unless `direction` is set (axis_aligned
// picks e_1). A nonzero first_axis_sign reflects the offset so its first
// coordinate has that sign.
struct NullGenerator {
  double min_radius = 3.0;
  double max_radius = 6.0;
  double spread = 1.0;
  std::optional<Vector> direction;
  bool axis_aligned = false;
  double first_axis_sign = 0.0;
};

struct HierarchicalSpec {
  int num_sources = 3;
  std::vector<int> relevant = {1};  // 1-based source indices
  Vector theta0 = Vector::Zero(1);
  double tau = 0.0;
  NullGenerator null_gen;
  double sigma = 1.0;
  int n0 = 4;
  int n = 200;
  std::uint64_t seed = kDefaultSeed;

  int dim() const { return static_cast<int>(theta0.size()); }
  bool is_relevant(int k) const;
};

void ValidateHierarchicalSpec(const HierarchicalSpec& spec);

struct HierarchicalSample {
  Dataset target;
  std::vector<Dataset> sources;
  std::vector<Vector> theta;  // theta[0] is the target, theta[k] source k
};

HierarchicalSample GenerateHierarchical(const HierarchicalSpec& spec);

// Draws the source parameters only (theta[0] = theta0).
std::vector<Vector> DrawSourceParameters(const HierarchicalSpec& spec,
                                         std::mt19937_64& rng);

Vector TargetOnlyEstimate(const LikelihoodModel& model, const Dataset& target);
Vector PooledEstimate(const LikelihoodModel& model, const Dataset& target,
                      std::span<const Dataset> sources);
// Size-weighted average of the target MLE and the MLEs of `relevant`.
Vector OracleEstimate(const LikelihoodModel& model, const Dataset& target,
                      std::span<const Dataset> sources,
                      const std::vector<int>& relevant);

struct BaselineEstimates {
  Vector target_only;
  Vector pooled;
  Vector uniform_em;
  std::optional<Vector> lip_em;
  int null_fallbacks = 0;
};

// RunEm, retried with the pooled null when the mixture null degenerates.
EmResult RunEmWithNullFallback(const LikelihoodModel& model,
                               const Dataset& target,
                               std::span<const Dataset> sources,
                               const Vector& pi, const EmConfig& config,
                               bool* fell_back);

// Uniform-EM uses pi_k = p0; LIP-EM runs only when lip_pi is given.
BaselineEstimates RunBaselines(const LikelihoodModel& model,
                               const Dataset& target,
                               std::span<const Dataset> sources,
                               const EmConfig& config, double p0,
                               const Vector* lip_pi);

// ---------------------------------------------------------------------------

// Irrelevant sources sit on the low side of the first axis at 3-6 sigma.
HierarchicalSpec GaussianExperimentSpec();

struct GaussianExperimentConfig {
  std::vector<int> dims = {1, 2};
  HierarchicalSpec spec = GaussianExperimentSpec();  // theta0 resized per dim
  int replications = 100;
  double pi_relevant = 0.9;
  double pi_other = 0.01;
  double p0 = 0.01;
  EmConfig em;
  int jobs = 1;
  int plot_points = 201;
};

ReportSet GaussianExperiment(const GaussianExperimentConfig& config);

struct OracleMseConfig {
  int dim = 1;
  double sigma = 1.0;
  int n0 = 4;
  int n = 200;
  int num_relevant = 3;
  std::vector<double> taus = {0.0, 0.1};
  int replications = 100000;
  // Fixed-weight identity: random weights over num_relevant relevant plus
  // num_irrelevant null-generated sources, parameters held fixed.
  int fixed_weight_cases = 5;
  int num_irrelevant = 2;
  NullGenerator null_gen;
  std::uint64_t seed = kDefaultSeed;
  int jobs = 1;
};

double OracleMseClosedForm(int dim, double sigma, int n0, int n,
                           int num_relevant, double tau);
// Conditional MSE of the fixed-weight blend given the source parameters.
double FixedWeightMse(const Vector& theta0,
                      const std::vector<Vector>& source_theta,
                      const Vector& weights, double sigma, int n0, int n);

ReportSet OracleMseCheck(const OracleMseConfig& config);

struct DichotomyConfig {
  int dim = 1;
  int num_relevant = 1;
  int num_irrelevant = 1;
  double shift = 5.0;  // irrelevant offset in units of sigma along e_1
  double sigma = 1.0;
  int n0 = 4;
  std::vector<int> n_sweep = {10, 100, 1000, 10000};
  std::vector<double> priors = {0.1, 0.9};
  int replications = 100;
  double relevant_floor = 0.99;
  double irrelevant_ceiling = 0.01;
  NullSpec null_spec{NullKind::kParametricPooled, {}};
  std::uint64_t seed = kDefaultSeed;
  int jobs = 1;
};

ReportSet DichotomyCheck(const DichotomyConfig& config);

struct ConsistencyConfig {
  int dim = 1;
  double shift = 5.0;
  double sigma = 1.0;
  int n = 200;
  std::vector<int> n0_sweep = {100, 1000, 10000, 100000};
  double adversarial_pi = 0.9;
  double relevant_pi = 0.01;
  int replications = 50;
  // The variant is overridden per run.
  EmConfig em = [] {
    EmConfig c;
    c.null_spec.kind = NullKind::kParametricPooled;
    return c;
  }();
  std::uint64_t seed = kDefaultSeed;
  int jobs = 1;
};

ReportSet ConsistencyCheck(const ConsistencyConfig& config);

}  // namespace lipem

#endif  // LIPEM_BENCH_H_
