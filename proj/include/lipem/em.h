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

// Prior-aided EM over latent source relevance.
//
// Each source k is either relevant (its parameter lies near the target's,
// spread tau) or drawn from a null component. The E-step blends the prior
// log-odds with a tempered log-likelihood ratio; the M-step blends the
// per-domain MLEs with the resulting weights. Per-domain MLEs and Hessians
// are computed once and frozen.

#ifndef LIPEM_EM_H_
#define LIPEM_EM_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lipem/dataset.h"
#include "lipem/likelihood.h"
#include "lipem/numeric.h"

namespace lipem {

enum class MStepVariant { kExactHessianReuse, kSmallTauSurrogate };
enum class TemperingMode { kTraceExact, kFisherRatio };
enum class NullKind { kEmpiricalBayesMixture, kParametricPooled, kFixed };

std::string_view MStepVariantName(MStepVariant variant);
std::string_view TemperingModeName(TemperingMode mode);
std::string_view NullKindName(NullKind kind);

struct NullSpec {
  NullKind kind = NullKind::kEmpiricalBayesMixture;
  // kFixed only: log p(D_k | c_k = 0) for k = 1..K at index k - 1.
  Vector fixed_log_density;
};

struct EmConfig {
  double tau = 0.0;
  double nu = 0.05;
  MStepVariant variant = MStepVariant::kSmallTauSurrogate;
  NullSpec null_spec;
  int max_iters = 1000;
  double tol = 1e-3;
  int patience = 5;
  TemperingMode tempering_mode = TemperingMode::kFisherRatio;
  // Start from the target MLE instead of the zero vector. The first E-step
  // ignores theta either way because beta is zero at t = 0.
  bool init_at_target_mle = false;
  // Upper bound on every beta_k.
  std::optional<double> beta_cap;
};

// Throws kInvalidConfiguration on tau < 0, nu <= 0, non-positive counts.
void ValidateEmConfig(const EmConfig& config);

struct DomainStats {
  Vector mle;
  Matrix hessian;  // PSD-repaired, evaluated at mle
  int size = 0;
};

// Per-domain MLEs and Hessians plus the iteration-independent null terms.
// Index 0 is the target. Holds a reference to `model`, which must outlive it.
class SufficientStats {
 public:
  static SufficientStats Compute(const LikelihoodModel& model,
                                 const Dataset& target,
                                 std::span<const Dataset> sources,
                                 const NullSpec& null_spec);

  const LikelihoodModel& model() const { return *model_; }
  int num_sources() const { return static_cast<int>(domains_.size()) - 1; }
  int dim() const { return model_->dim(); }

  const DomainStats& target() const { return domains_[0]; }
  // Source k is 1-based.
  const DomainStats& source(int k) const { return domains_[k]; }
  const Dataset& data(int k) const { return data_[k]; }

  // log L(mle_j; D_k) for sources j, k; only for the mixture null.
  double CrossLogLik(int j, int k) const { return cross_loglik_(j - 1, k - 1); }
  bool has_cross_loglik() const { return cross_loglik_.size() > 0; }

  // log L(theta_pool; D_k); only for the pooled null.
  double PooledLogLik(int k) const { return pooled_loglik_(k - 1); }
  const Vector& pooled_mle() const { return pooled_mle_; }

 private:
  const LikelihoodModel* model_ = nullptr;
  std::vector<Dataset> data_;
  std::vector<DomainStats> domains_;
  Matrix cross_loglik_;
  Vector pooled_mle_;
  Vector pooled_loglik_;
};

struct EmSnapshot {
  int t = 0;
  Vector beta;
  Vector weights;
  Vector theta;  // M-step output of this iteration
};

struct EmState {
  Vector theta;
  Vector weights;
  int t = 0;
  Vector beta;
  std::vector<EmSnapshot> history;
};

struct ConvergenceReport {
  bool converged = false;
  int iterations = 0;
  double last_weight_change = 0.0;  // infinity norm
  double last_theta_change = 0.0;   // Euclidean norm, not used for stopping
  bool tempering_fell_back = false;
  // Original 1-based indices of the sources kept after dropping empty ones.
  std::vector<int> source_indices;
};

struct EmResult {
  EmState state;
  ConvergenceReport report;
};

// Laplace-approximated log p(D | relevant, theta):
//   loglik + (tau^2/2) g^T (I + tau^2 H)^{-1} g - 0.5 logdet(I + tau^2 H)
// with g and H at theta. `hessian` overrides the Hessian (frozen-Hessian
// reuse). Returns loglik exactly when tau == 0.
double RelevantMarginalLogLik(const LikelihoodModel& model,
                              const Dataset& data, const Vector& theta,
                              double tau, const Matrix* hessian = nullptr);

// log p(D_k | c_k = 0) under `null_spec`. The mixture null uses
// log[(1/(K-1)) sum_{j != k} (1 - w_j) L(mle_j; D_k)] with the previous
// iteration's weights.
double NullLogLik(const NullSpec& null_spec, int k,
                  const SufficientStats& stats, const Vector& weights_prev);

// beta_k = (1 - exp(-nu t)) / eps_k. Trace mode uses eps_k^2 =
// Tr(H0^{-1} H_k) and falls back to d N_k / N0 when H0 is singular;
// `fell_back` reports the fallback.
Vector TemperingSchedule(int t, const SufficientStats& stats,
                         TemperingMode mode, double nu,
                         bool* fell_back = nullptr);

// Weights for iteration state.t from state.theta, state.beta and the
// previous weights in state.weights.
Vector EStep(const EmState& state, const SufficientStats& stats,
             const Vector& pi, const EmConfig& config);

// Solves (H0 + sum_k w_k A_k) theta = H0 mle_0 + sum_k w_k A_k mle_k with
// A_k = (I + tau^2 H_k)^{-1} H_k; the same fixed point as
// (I + sum Lambda_k)^{-1}(mle_0 + sum Lambda_k mle_k), Lambda_k =
// w_k H0^{-1} A_k, without inverting H0.
Vector MStepExact(const SufficientStats& stats, const Vector& weights,
                  double tau);

// (N0 mle_0 + sum_k w_k N_k mle_k) / (N0 + sum_k w_k N_k).
Vector MStepSurrogate(const SufficientStats& stats, const Vector& weights);

// Runs the full loop: weights at t = 0 equal pi; stops once the weight change
// stays within tol for `patience` consecutive iterations or after max_iters.
// Sources with no data are dropped (and pi trimmed to match).
EmResult RunEm(const LikelihoodModel& model, const Dataset& target,
               std::span<const Dataset> sources, const Vector& pi,
               const EmConfig& config);

// Same loop on precomputed statistics.
EmResult RunEm(const SufficientStats& stats, const Vector& pi,
               const EmConfig& config);

}  // namespace lipem

#endif  // LIPEM_EM_H_
