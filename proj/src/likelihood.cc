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

#include "lipem/likelihood.h"

#include <cmath>
#include <algorithm>
#include <string>
#include <utility>

#include "Eigen/QR"
#include "lipem/error.h"

namespace lipem {
namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2 pi)

void RequireNonEmpty(const Dataset& data) {
  if (data.empty()) {
    throw Error(ErrorCode::kInsufficientData, "dataset is empty");
  }
}

double Cube(double v) { return v * v * v; }

double TruncatedCube(double v) { return v > 0.0 ? Cube(v) : 0.0; }

}  // namespace

double LikelihoodModel::LogLik(const Vector& theta, const Dataset& data) const {
  double total = 0.0;
  for (int i = 0; i < data.size(); ++i) {
    total += PerSampleLogLik(theta, data.row(i));
  }
  return total;
}

// ---------------------------------------------------------------------------
// GaussianMeanModel

GaussianMeanModel::GaussianMeanModel(Matrix covariance)
    : covariance_(std::move(covariance)) {
  if (covariance_.rows() == 0 || covariance_.rows() != covariance_.cols()) {
    throw Error(ErrorCode::kInvalidConfiguration,
                "covariance must be a non-empty square matrix");
  }
  if (!covariance_.isApprox(covariance_.transpose(), 1e-12)) {
    throw Error(ErrorCode::kInvalidConfiguration,
                "covariance must be symmetric");
  }
  chol_.compute(covariance_);
  if (chol_.info() != Eigen::Success) {
    throw Error(ErrorCode::kInvalidConfiguration,
                "covariance must be positive definite");
  }
  precision_ = chol_.solve(Matrix::Identity(dim(), dim()));
  precision_ = 0.5 * (precision_ + precision_.transpose());
  const double log_det =
      2.0 * chol_.matrixLLT().diagonal().array().log().sum();
  log_norm_ = -0.5 * (dim() * kLog2Pi + log_det);
}

GaussianMeanModel GaussianMeanModel::Isotropic(int dim, double sigma) {
  if (dim <= 0 || !(sigma > 0.0)) {
    throw Error(ErrorCode::kInvalidConfiguration,
                "isotropic model needs dim > 0 and sigma > 0");
  }
  return GaussianMeanModel(Matrix::Identity(dim, dim) * sigma * sigma);
}

double GaussianMeanModel::PerSampleLogLik(
    const Vector& theta, const ObservationRef& observation) const {
  const Vector diff = observation.transpose() - theta;
  return log_norm_ - 0.5 * diff.dot(precision_ * diff);
}

double GaussianMeanModel::LogLik(const Vector& theta,
                                 const Dataset& data) const {
  double total = 0.0;
  Vector diff(dim());
  for (int i = 0; i < data.size(); ++i) {
    diff = data.row(i).transpose() - theta;
    total += log_norm_ - 0.5 * diff.dot(precision_ * diff);
  }
  return total;
}

Vector GaussianMeanModel::Gradient(const Vector& theta,
                                   const Dataset& data) const {
  Vector residual_sum = Vector::Zero(dim());
  for (int i = 0; i < data.size(); ++i) {
    residual_sum += data.row(i).transpose() - theta;
  }
  return precision_ * residual_sum;
}

Matrix GaussianMeanModel::Hessian(const Vector& /*theta*/,
                                  const Dataset& data) const {
  RequireNonEmpty(data);
  return static_cast<double>(data.size()) * precision_;
}

Vector GaussianMeanModel::Mle(const Dataset& data) const {
  RequireNonEmpty(data);
  return data.rows().colwise().mean().transpose();
}

double GaussianMeanModel::LogDensity(const Vector& x, const Vector& mean,
                                     const Matrix& cov) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kInvalidConfiguration,
                "covariance must be positive definite");
  }
  const Vector z = llt.matrixL().solve(x - mean);
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * (x.size() * kLog2Pi + log_det + z.squaredNorm());
}

// ---------------------------------------------------------------------------
// Natural cubic spline basis

Matrix SplineDesign(std::span<const double> inputs,
                    std::span<const double> knots) {
  if (knots.size() < 3) {
    throw Error(ErrorCode::kInvalidConfiguration,
                "natural cubic spline needs at least 3 knots");
  }
  for (size_t j = 1; j < knots.size(); ++j) {
    if (!(knots[j] > knots[j - 1])) {
      throw Error(ErrorCode::kInvalidConfiguration,
                  "knots must be strictly increasing");
    }
  }
  const size_t m = knots.size();
  const double last = knots[m - 1];
  const double second_last = knots[m - 2];
  Matrix design(static_cast<Eigen::Index>(inputs.size()),
                static_cast<Eigen::Index>(m));
  for (size_t i = 0; i < inputs.size(); ++i) {
    const double x = inputs[i];
    const double tail = TruncatedCube(x - last);
    const double d_ref = (TruncatedCube(x - second_last) - tail) /
                         (last - second_last);
    design(i, 0) = 1.0;
    design(i, 1) = x;
    for (size_t j = 0; j + 2 < m; ++j) {
      const double d_j = (TruncatedCube(x - knots[j]) - tail) /
                         (last - knots[j]);
      design(i, j + 2) = d_j - d_ref;
    }
  }
  return design;
}

std::vector<double> UniformKnots(int count, double lo, double hi) {
  if (count < 2 || !(hi > lo)) {
    throw Error(ErrorCode::kInvalidConfiguration,
                "uniform knots need count >= 2 and hi > lo");
  }
  std::vector<double> knots(count);
  for (int j = 0; j < count; ++j) {
    knots[j] = lo + (hi - lo) * j / (count - 1);
  }
  return knots;
}

// ---------------------------------------------------------------------------
// SplineGlmModel

SplineGlmModel::SplineGlmModel(std::vector<double> knots,
                               double noise_variance, double ridge)
    : knots_(std::move(knots)),
      noise_variance_(noise_variance),
      ridge_(ridge) {
  // Validates the knot vector.
  SplineDesign(std::span<const double>(), knots_);
  if (!(noise_variance_ > 0.0) || !std::isfinite(noise_variance_)) {
    throw Error(ErrorCode::kInvalidConfiguration,
                "noise variance must be positive");
  }
  if (!(ridge_ >= 0.0)) {
    throw Error(ErrorCode::kInvalidConfiguration, "ridge must be >= 0");
  }
}

SplineGlmModel SplineGlmModel::WithNoiseVariance(double noise_variance) const {
  return SplineGlmModel(knots_, noise_variance, ridge_);
}

SplineGlmModel SplineGlmModel::WithRidge(double ridge) const {
  return SplineGlmModel(knots_, noise_variance_, ridge);
}

Matrix SplineGlmModel::Design(const Dataset& data) const {
  std::vector<double> inputs(data.size());
  for (int i = 0; i < data.size(); ++i) inputs[i] = data.rows()(i, 0);
  return SplineDesign(inputs, knots_);
}

Vector SplineGlmModel::Predict(const Vector& theta,
                               std::span<const double> inputs) const {
  return SplineDesign(inputs, knots_) * theta;
}

double SplineGlmModel::PerSampleLogLik(
    const Vector& theta, const ObservationRef& observation) const {
  const double x = observation(0);
  const Matrix row = SplineDesign(std::span<const double>(&x, 1), knots_);
  const double residual = observation(1) - row.row(0).dot(theta);
  return -0.5 * (kLog2Pi + std::log(noise_variance_)) -
         0.5 * residual * residual / noise_variance_;
}

double SplineGlmModel::LogLik(const Vector& theta, const Dataset& data) const {
  if (data.empty()) return 0.0;
  const Vector residual = data.rows().col(1) - Design(data) * theta;
  const double norm = -0.5 * (kLog2Pi + std::log(noise_variance_));
  double total = 0.0;
  for (Eigen::Index i = 0; i < residual.size(); ++i) {
    total += norm - 0.5 * residual(i) * residual(i) / noise_variance_;
  }
  return total;
}

Vector SplineGlmModel::Gradient(const Vector& theta,
                                const Dataset& data) const {
  if (data.empty()) return Vector::Zero(dim());
  const Matrix design = Design(data);
  const Vector residual = data.rows().col(1) - design * theta;
  return design.transpose() * residual / noise_variance_;
}

Matrix SplineGlmModel::Hessian(const Vector& /*theta*/,
                               const Dataset& data) const {
  RequireNonEmpty(data);
  const Matrix design = Design(data);
  Matrix h = design.transpose() * design / noise_variance_;
  return 0.5 * (h + h.transpose());
}

Vector SplineGlmModel::Mle(const Dataset& data) const {
  RequireNonEmpty(data);
  const Matrix design = Design(data);
  const Vector response = data.rows().col(1);
  const int p = dim();
  if (ridge_ == 0.0) {
    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    if (qr.rank() < p) {
      throw Error(ErrorCode::kSingularFit,
                  "design matrix is rank deficient (rank " +
                      std::to_string(qr.rank()) + " < " + std::to_string(p) +
                      "); use a positive ridge");
    }
    return qr.solve(response);
  }
  // Augmented least squares [X; sqrt(ridge) P] keeps the conditioning of X
  // instead of squaring it through the normal equations.
  const Eigen::Index n = design.rows();
  Matrix augmented = Matrix::Zero(n + p - 1, p);
  augmented.topRows(n) = design;
  const double root = std::sqrt(ridge_);
  for (int j = 1; j < p; ++j) augmented(n + j - 1, j) = root;
  Vector rhs = Vector::Zero(n + p - 1);
  rhs.head(n) = response;
  Eigen::ColPivHouseholderQR<Matrix> qr(augmented);
  if (qr.rank() < p) {
    throw Error(ErrorCode::kSingularFit, "regularized design is singular");
  }
  return qr.solve(rhs);
}

double SplineGlmModel::ResidualVariance(const Dataset& data) const {
  const Vector theta = Mle(data);
  const Vector residual = data.rows().col(1) - Design(data) * theta;
  return residual.squaredNorm() / data.size();
}

double PooledResidualVariance(const SplineGlmModel& model,
                              std::span<const Dataset> datasets,
                              double floor) {
  double rss = 0.0;
  long long count = 0;
  for (const Dataset& data : datasets) {
    if (data.empty()) continue;
    rss += model.ResidualVariance(data) * data.size();
    count += data.size();
  }
  if (count == 0) {
    throw Error(ErrorCode::kInsufficientData,
                "no observations to estimate the noise variance");
  }
  return std::max(rss / static_cast<double>(count), floor);
}

}  // namespace lipem
