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

// Parametric likelihood backbones consumed by the EM engine.
//
// Every model exposes the log-likelihood of a dataset, its gradient, the
// negative Hessian and the maximum-likelihood estimate. Both concrete models
// have quadratic log-likelihoods, so their Hessians do not depend on theta.

#ifndef LIPEM_LIKELIHOOD_H_
#define LIPEM_LIKELIHOOD_H_

#include <memory>
#include <span>
#include <vector>

#include "Eigen/Cholesky"
#include "lipem/dataset.h"
#include "lipem/numeric.h"

namespace lipem {

using ObservationRef = Eigen::Ref<const Eigen::RowVectorXd>;

class LikelihoodModel {
 public:
  virtual ~LikelihoodModel() = default;

  // Parameter dimension d.
  virtual int dim() const = 0;
  // Width of one observation row.
  virtual int observation_dim() const = 0;

  virtual double PerSampleLogLik(const Vector& theta,
                                 const ObservationRef& observation) const = 0;

  // Sum of PerSampleLogLik over the rows of `data`.
  virtual double LogLik(const Vector& theta, const Dataset& data) const;

  virtual Vector Gradient(const Vector& theta, const Dataset& data) const = 0;

  // Negative second derivative of LogLik. Throws kInsufficientData on empty
  // data.
  virtual Matrix Hessian(const Vector& theta, const Dataset& data) const = 0;

  // Throws kInsufficientData on empty data.
  virtual Vector Mle(const Dataset& data) const = 0;
};

// x ~ Normal(theta, covariance) with known covariance.
class GaussianMeanModel : public LikelihoodModel {
 public:
  explicit GaussianMeanModel(Matrix covariance);
  static GaussianMeanModel Isotropic(int dim, double sigma);

  int dim() const override { return static_cast<int>(covariance_.rows()); }
  int observation_dim() const override { return dim(); }
  const Matrix& covariance() const { return covariance_; }
  const Matrix& precision() const { return precision_; }

  double PerSampleLogLik(const Vector& theta,
                         const ObservationRef& observation) const override;
  double LogLik(const Vector& theta, const Dataset& data) const override;
  Vector Gradient(const Vector& theta, const Dataset& data) const override;
  Matrix Hessian(const Vector& theta, const Dataset& data) const override;
  Vector Mle(const Dataset& data) const override;

  // Log density of Normal(mean, cov) at x; cov must be SPD.
  static double LogDensity(const Vector& x, const Vector& mean,
                           const Matrix& cov);

 private:
  Matrix covariance_;
  Matrix precision_;
  Eigen::LLT<Matrix> chol_;
  double log_norm_ = 0.0;  // -0.5 * (d log 2pi + log det covariance)
};

// Natural cubic spline basis in truncated-power form. Column 0 is the
// constant, column 1 is x and the remaining knots.size() - 2 columns are
// N_j(x) = d_j(x) - d_{M-1}(x) with
// d_j(x) = [(x - k_j)_+^3 - (x - k_M)_+^3] / (k_M - k_j). Every nonlinear
// column vanishes below the first knot and is linear beyond the last one.
//
// Throws kInvalidConfiguration for fewer than 3 or non-increasing knots.
Matrix SplineDesign(std::span<const double> inputs,
                    std::span<const double> knots);

// M knots evenly spaced on [lo, hi].
std::vector<double> UniformKnots(int count, double lo, double hi);

// y = b(x)^T theta + Normal(0, noise_variance) over a natural cubic spline
// basis b. Observations are (input, response) rows.
class SplineGlmModel : public LikelihoodModel {
 public:
  SplineGlmModel(std::vector<double> knots, double noise_variance,
                 double ridge = 0.0);

  int dim() const override { return static_cast<int>(knots_.size()); }
  int observation_dim() const override { return 2; }
  const std::vector<double>& knots() const { return knots_; }
  double noise_variance() const { return noise_variance_; }
  double ridge() const { return ridge_; }

  SplineGlmModel WithNoiseVariance(double noise_variance) const;
  SplineGlmModel WithRidge(double ridge) const;

  Matrix Design(const Dataset& data) const;
  Vector Predict(const Vector& theta, std::span<const double> inputs) const;

  double PerSampleLogLik(const Vector& theta,
                         const ObservationRef& observation) const override;
  double LogLik(const Vector& theta, const Dataset& data) const override;
  Vector Gradient(const Vector& theta, const Dataset& data) const override;
  Matrix Hessian(const Vector& theta, const Dataset& data) const override;

  // Ridge-regularized least squares with an un-penalized intercept. With
  // ridge == 0 a rank-deficient design throws kSingularFit.
  Vector Mle(const Dataset& data) const override;

  // Mean squared residual of the model's own Mle on `data`.
  double ResidualVariance(const Dataset& data) const;

 private:
  std::vector<double> knots_;
  double noise_variance_;
  double ridge_;
};

// Size-weighted average of per-dataset residual variances (sum of squared
// residuals over total count), floored at `floor`.
double PooledResidualVariance(const SplineGlmModel& model,
                              std::span<const Dataset> datasets,
                              double floor = 1e-8);

}  // namespace lipem

#endif  // LIPEM_LIKELIHOOD_H_
