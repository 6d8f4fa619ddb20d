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

#include "lipem/em.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "Eigen/Cholesky"
#include "Eigen/QR"
#include "lipem/error.h"
#include "lipem/log.h"

namespace lipem {
namespace {

void RequireFinite(double value, int k, const char* what) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::kNonFiniteLikelihood,
                std::string(what) + " is not finite for source " +
                    std::to_string(k));
  }
}

Matrix ShrunkPrecision(const Matrix& hessian, double tau) {
  if (tau == 0.0) return hessian;
  const Eigen::Index d = hessian.rows();
  const Matrix shifted = Matrix::Identity(d, d) + tau * tau * hessian;
  Matrix a = shifted.llt().solve(hessian);
  return 0.5 * (a + a.transpose());
}

}  // namespace

std::string_view MStepVariantName(MStepVariant variant) {
  return variant == MStepVariant::kExactHessianReuse ? "exact_hessian_reuse"
                                                     : "small_tau_surrogate";
}

std::string_view TemperingModeName(TemperingMode mode) {
  return mode == TemperingMode::kTraceExact ? "trace_exact" : "fisher_ratio";
}

std::string_view NullKindName(NullKind kind) {
  switch (kind) {
    case NullKind::kEmpiricalBayesMixture:
      return "empirical_bayes_mixture";
    case NullKind::kParametricPooled:
      return "parametric_pooled";
    case NullKind::kFixed:
      return "fixed";
  }
  return "unknown";
}

void ValidateEmConfig(const EmConfig& config) {
  const auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidConfiguration, what);
  };
  if (!(config.tau >= 0.0)) fail("tau must be >= 0");
  if (!(config.nu > 0.0)) fail("nu must be > 0");
  if (config.max_iters < 1) fail("max_iters must be positive");
  if (!(config.tol > 0.0)) fail("tol must be positive");
  if (config.patience < 1) fail("patience must be positive");
  if (config.beta_cap && !(*config.beta_cap >= 0.0)) {
    fail("beta_cap must be >= 0");
  }
}

SufficientStats SufficientStats::Compute(const LikelihoodModel& model,
                                         const Dataset& target,
                                         std::span<const Dataset> sources,
                                         const NullSpec& null_spec) {
  if (target.empty()) {
    throw Error(ErrorCode::kInsufficientData, "target dataset is empty");
  }
  if (sources.empty()) {
    throw Error(ErrorCode::kInsufficientData, "no source datasets");
  }
  SufficientStats stats;
  stats.model_ = &model;
  stats.data_.reserve(sources.size() + 1);
  stats.data_.push_back(target);
  stats.data_.insert(stats.data_.end(), sources.begin(), sources.end());
  for (const Dataset& data : stats.data_) {
    if (data.empty()) {
      throw Error(ErrorCode::kInsufficientData, "source dataset is empty");
    }
    DomainStats domain;
    domain.mle = model.Mle(data);
    domain.hessian = RepairPsd(model.Hessian(domain.mle, data));
    domain.size = data.size();
    stats.domains_.push_back(std::move(domain));
  }

  const int num_sources = stats.num_sources();
  switch (null_spec.kind) {
    case NullKind::kEmpiricalBayesMixture:
      stats.cross_loglik_.resize(num_sources, num_sources);
      for (int j = 1; j <= num_sources; ++j) {
        for (int k = 1; k <= num_sources; ++k) {
          stats.cross_loglik_(j - 1, k - 1) =
              j == k ? 0.0
                     : model.LogLik(stats.domains_[j].mle, stats.data_[k]);
        }
      }
      break;
    case NullKind::kParametricPooled: {
      stats.pooled_mle_ = model.Mle(Dataset::Concat(sources));
      stats.pooled_loglik_.resize(num_sources);
      for (int k = 1; k <= num_sources; ++k) {
        stats.pooled_loglik_(k - 1) =
            model.LogLik(stats.pooled_mle_, stats.data_[k]);
      }
      break;
    }
    case NullKind::kFixed:
      if (null_spec.fixed_log_density.size() != num_sources) {
        throw Error(ErrorCode::kInvalidConfiguration,
                    "fixed null table needs one value per source");
      }
      break;
  }
  return stats;
}

double RelevantMarginalLogLik(const LikelihoodModel& model,
                              const Dataset& data, const Vector& theta,
                              double tau, const Matrix* hessian) {
  if (!(tau >= 0.0)) {
    throw Error(ErrorCode::kInvalidConfiguration, "tau must be >= 0");
  }
  const double loglik = model.LogLik(theta, data);
  if (!std::isfinite(loglik)) {
    throw Error(ErrorCode::kNonFiniteLikelihood, "log-likelihood not finite");
  }
  if (tau == 0.0) return loglik;

  const Matrix h = hessian ? *hessian : RepairPsd(model.Hessian(theta, data));
  const Vector g = model.Gradient(theta, data);
  const Eigen::Index d = h.rows();
  const double tau2 = tau * tau;
  Eigen::LLT<Matrix> shifted(Matrix::Identity(d, d) + tau2 * h);
  if (shifted.info() != Eigen::Success) {
    throw Error(ErrorCode::kFactorization, "I + tau^2 H is not SPD");
  }
  const double log_det =
      2.0 * shifted.matrixLLT().diagonal().array().log().sum();
  const double quad = g.dot(shifted.solve(g));
  return loglik + 0.5 * tau2 * quad - 0.5 * log_det;
}

double NullLogLik(const NullSpec& null_spec, int k,
                  const SufficientStats& stats, const Vector& weights_prev) {
  const int num_sources = stats.num_sources();
  if (k < 1 || k > num_sources) {
    throw Error(ErrorCode::kInvalidConfiguration, "source index out of range");
  }
  switch (null_spec.kind) {
    case NullKind::kEmpiricalBayesMixture: {
      if (num_sources < 2) {
        throw Error(ErrorCode::kInvalidConfiguration,
                    "empirical-Bayes null needs at least two sources");
      }
      if (!stats.has_cross_loglik()) {
        throw Error(ErrorCode::kInvalidConfiguration,
                    "statistics were not prepared for the mixture null");
      }
      std::vector<double> terms;
      terms.reserve(num_sources - 1);
      bool any_mass = false;
      for (int j = 1; j <= num_sources; ++j) {
        if (j == k) continue;
        const double keep = 1.0 - weights_prev(j - 1);
        any_mass = any_mass || keep > 0.0;
        terms.push_back(std::log(ClampProbability(keep)) +
                        stats.CrossLogLik(j, k));
      }
      if (!any_mass) {
        throw Error(ErrorCode::kDegenerateNull,
                    "every other source has weight 1; use the "
                    "parametric_pooled null instead");
      }
      return LogSumExp(terms) - std::log(static_cast<double>(num_sources - 1));
    }
    case NullKind::kParametricPooled:
      if (stats.pooled_mle().size() == 0) {
        throw Error(ErrorCode::kInvalidConfiguration,
                    "statistics were not prepared for the pooled null");
      }
      return stats.PooledLogLik(k);
    case NullKind::kFixed:
      if (null_spec.fixed_log_density.size() != num_sources) {
        throw Error(ErrorCode::kInvalidConfiguration,
                    "fixed null table needs one value per source");
      }
      return null_spec.fixed_log_density(k - 1);
  }
  return 0.0;
}

Vector TemperingSchedule(int t, const SufficientStats& stats,
                         TemperingMode mode, double nu, bool* fell_back) {
  if (t < 0) {
    throw Error(ErrorCode::kInvalidConfiguration, "iteration must be >= 0");
  }
  const int num_sources = stats.num_sources();
  const double ramp = -std::expm1(-nu * t);
  const double n0 = stats.target().size;
  const int d = stats.dim();

  bool use_trace = mode == TemperingMode::kTraceExact;
  Eigen::LLT<Matrix> h0;
  if (use_trace) {
    const Matrix& target_hessian = stats.target().hessian;
    if (IsNumericallySingular(target_hessian)) {
      use_trace = false;
    } else {
      h0.compute(target_hessian);
      use_trace = h0.info() == Eigen::Success;
    }
  }
  if (fell_back) *fell_back = mode == TemperingMode::kTraceExact && !use_trace;

  Vector beta(num_sources);
  for (int k = 1; k <= num_sources; ++k) {
    double scale_sq = d * stats.source(k).size / n0;
    if (use_trace) {
      const double trace = h0.solve(stats.source(k).hessian).trace();
      if (trace > 0.0 && std::isfinite(trace)) scale_sq = trace;
    }
    beta(k - 1) = ramp / std::sqrt(scale_sq);
  }
  return beta;
}

Vector EStep(const EmState& state, const SufficientStats& stats,
             const Vector& pi, const EmConfig& config) {
  const int num_sources = stats.num_sources();
  // The surrogate variant uses the zero-spread likelihood ratio.
  const double tau =
      config.variant == MStepVariant::kExactHessianReuse ? config.tau : 0.0;
  Vector weights(num_sources);
  for (int k = 1; k <= num_sources; ++k) {
    const double beta = state.beta(k - 1);
    if (beta == 0.0) {
      weights(k - 1) = pi(k - 1);
      continue;
    }
    const double relevant =
        RelevantMarginalLogLik(stats.model(), stats.data(k), state.theta, tau,
                               &stats.source(k).hessian);
    const double null = NullLogLik(config.null_spec, k, stats, state.weights);
    const double log_ratio = relevant - null;
    RequireFinite(log_ratio, k, "log-likelihood ratio");
    weights(k - 1) =
        Sigmoid(beta * log_ratio + Logit(ClampProbability(pi(k - 1))));
  }
  return weights;
}

Vector MStepExact(const SufficientStats& stats, const Vector& weights,
                  double tau) {
  const DomainStats& target = stats.target();
  if (weights.isZero(0.0)) return target.mle;
  Matrix lhs = target.hessian;
  Vector rhs = target.hessian * target.mle;
  for (int k = 1; k <= stats.num_sources(); ++k) {
    const double w = weights(k - 1);
    if (w == 0.0) continue;
    const DomainStats& source = stats.source(k);
    const Matrix a = ShrunkPrecision(source.hessian, tau);
    lhs += w * a;
    rhs += w * (a * source.mle);
  }
  Eigen::LDLT<Matrix> ldlt(lhs);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    Vector theta = ldlt.solve(rhs);
    if (theta.allFinite() && (lhs * theta).isApprox(rhs, 1e-8)) return theta;
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(lhs);
  if (qr.rank() < lhs.rows()) {
    throw Error(ErrorCode::kFactorization,
                "M-step system is singular (rank " + std::to_string(qr.rank()) +
                    ")");
  }
  return qr.solve(rhs);
}

Vector MStepSurrogate(const SufficientStats& stats, const Vector& weights) {
  const DomainStats& target = stats.target();
  if (target.size < 1) {
    throw Error(ErrorCode::kInsufficientData, "target dataset is empty");
  }
  double total = target.size;
  Vector sum = target.size * target.mle;
  for (int k = 1; k <= stats.num_sources(); ++k) {
    const double mass = weights(k - 1) * stats.source(k).size;
    total += mass;
    sum += mass * stats.source(k).mle;
  }
  return sum / total;
}

EmResult RunEm(const SufficientStats& stats, const Vector& pi,
               const EmConfig& config) {
  ValidateEmConfig(config);
  const int num_sources = stats.num_sources();
  if (pi.size() != num_sources) {
    throw Error(ErrorCode::kInvalidConfiguration,
                "prior has " + std::to_string(pi.size()) +
                    " entries for " + std::to_string(num_sources) +
                    " sources");
  }
  for (Eigen::Index k = 0; k < pi.size(); ++k) {
    if (!(pi(k) > 0.0 && pi(k) < 1.0)) {
      throw Error(ErrorCode::kInvalidConfiguration,
                  "prior entries must lie in (0, 1)");
    }
  }

  EmResult result;
  EmState& state = result.state;
  state.theta = config.init_at_target_mle ? stats.target().mle
                                          : Vector::Zero(stats.dim());
  state.weights = pi;
  state.t = 0;

  int streak = 0;
  for (int t = 0; t < config.max_iters; ++t) {
    bool fell_back = false;
    Vector beta = TemperingSchedule(t, stats, config.tempering_mode, config.nu,
                                    &fell_back);
    if (fell_back && !result.report.tempering_fell_back) {
      LogWarning("target Hessian is singular; tempering uses d N_k / N_0");
      result.report.tempering_fell_back = true;
    }
    if (config.beta_cap) beta = beta.cwiseMin(*config.beta_cap);
    state.t = t;
    state.beta = std::move(beta);

    Vector weights = EStep(state, stats, pi, config);
    const double change =
        (weights - state.weights).lpNorm<Eigen::Infinity>();
    if (t > 0) streak = change <= config.tol ? streak + 1 : 0;
    state.weights = std::move(weights);

    Vector theta = config.variant == MStepVariant::kExactHessianReuse
                       ? MStepExact(stats, state.weights, config.tau)
                       : MStepSurrogate(stats, state.weights);
    result.report.last_theta_change = (theta - state.theta).norm();
    result.report.last_weight_change = change;
    state.theta = std::move(theta);
    state.history.push_back({t, state.beta, state.weights, state.theta});
    result.report.iterations = t + 1;
    if (streak >= config.patience) {
      result.report.converged = true;
      break;
    }
  }
  result.report.source_indices.resize(num_sources);
  for (int k = 0; k < num_sources; ++k) result.report.source_indices[k] = k + 1;
  return result;
}

EmResult RunEm(const LikelihoodModel& model, const Dataset& target,
               std::span<const Dataset> sources, const Vector& pi,
               const EmConfig& config) {
  ValidateEmConfig(config);
  if (target.empty()) {
    throw Error(ErrorCode::kInsufficientData, "target dataset is empty");
  }
  if (static_cast<Eigen::Index>(sources.size()) != pi.size()) {
    throw Error(ErrorCode::kInvalidConfiguration,
                "prior length does not match the number of sources");
  }
  std::vector<Dataset> kept;
  std::vector<int> kept_indices;
  std::vector<double> kept_pi;
  for (size_t k = 0; k < sources.size(); ++k) {
    if (sources[k].empty()) {
      LogWarning("dropping source " + std::to_string(k + 1) +
                 " with no observations");
      continue;
    }
    kept.push_back(sources[k]);
    kept_indices.push_back(static_cast<int>(k) + 1);
    kept_pi.push_back(pi(static_cast<Eigen::Index>(k)));
  }
  if (kept.empty()) {
    throw Error(ErrorCode::kInsufficientData, "every source dataset is empty");
  }
  NullSpec null_spec = config.null_spec;
  if (null_spec.kind == NullKind::kFixed &&
      kept.size() != sources.size()) {
    Vector table(static_cast<Eigen::Index>(kept.size()));
    for (size_t i = 0; i < kept.size(); ++i) {
      table(i) = config.null_spec.fixed_log_density(kept_indices[i] - 1);
    }
    null_spec.fixed_log_density = std::move(table);
  }
  const SufficientStats stats =
      SufficientStats::Compute(model, target, kept, null_spec);
  EmConfig effective = config;
  effective.null_spec = std::move(null_spec);
  EmResult result = RunEm(
      stats, Eigen::Map<const Vector>(kept_pi.data(), kept_pi.size()),
      effective);
  result.report.source_indices = std::move(kept_indices);
  return result;
}

}  // namespace lipem
