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
#include <vector>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include "lipem/error.h"
#include "test_util.h"

namespace lipem {
namespace {

using testing::RelativeError;

// Synthetic stand-in for one degrading engine: slow drift plus curvature.
Dataset EngineLike(int cycles, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 5.0);
  std::vector<double> x, y;
  for (int c = 1; c <= cycles; ++c) {
    x.push_back(c);
    y.push_back(9050.0 + 0.05 * c + 4e-4 * c * c + noise(rng));
  }
  return Dataset::FromPairs(x, y);
}

TEST(SplineDesign, NonlinearColumnsVanishBelowFirstKnot) {
  const std::vector<double> knots = UniformKnots(5, 0.0, 300.0);
  const std::vector<double> x = {knots.front() - 1.0};
  const Matrix b = SplineDesign(x, knots);
  for (int j = 2; j < b.cols(); ++j) EXPECT_EQ(b(0, j), 0.0);
  EXPECT_EQ(b(0, 0), 1.0);
  EXPECT_EQ(b(0, 1), x[0]);
}

TEST(SplineDesign, FiveUniformKnotsGiveFiveColumns) {
  const std::vector<double> knots = UniformKnots(5, 0.0, 300.0);
  ASSERT_EQ(knots.size(), 5u);
  EXPECT_DOUBLE_EQ(knots[0], 0.0);
  EXPECT_DOUBLE_EQ(knots[2], 150.0);
  EXPECT_DOUBLE_EQ(knots[4], 300.0);
  const std::vector<double> x = {10.0, 20.0, 250.0};
  EXPECT_EQ(SplineDesign(x, knots).cols(), 5);
}

TEST(SplineDesign, LinearBeyondLastKnot) {
  const std::vector<double> knots = UniformKnots(5, 0.0, 300.0);
  const double top = knots.back();
  const std::vector<double> x = {top + 1.0, top + 2.0, top + 3.0};
  const Matrix b = SplineDesign(x, knots);
  for (int j = 0; j < b.cols(); ++j) {
    EXPECT_LE(std::abs(b(2, j) - 2.0 * b(1, j) + b(0, j)), 1e-9) << "column " << j;
  }
}

TEST(SplineDesign, RejectsBadKnots) {
  const std::vector<double> x = {1.0};
  EXPECT_THROW(SplineDesign(x, std::vector<double>{0.0, 1.0}), Error);
  EXPECT_THROW(SplineDesign(x, std::vector<double>{0.0, 2.0, 1.0}), Error);
}

TEST(GaussianMeanModel, MleIsSampleMean) {
  const GaussianMeanModel model = GaussianMeanModel::Isotropic(1, 1.0);
  const std::vector<double> v = {1.0, 3.0};
  EXPECT_DOUBLE_EQ(model.Mle(Dataset::FromScalars(v))(0), 2.0);
}

TEST(GaussianMeanModel, HessianIsCountOverVariance) {
  const GaussianMeanModel one = GaussianMeanModel::Isotropic(1, 1.0);
  const std::vector<double> v = {0.1, -2.0, 3.0, 4.0, 5.0};
  Vector theta(1);
  theta << 7.0;
  EXPECT_DOUBLE_EQ(one.Hessian(theta, Dataset::FromScalars(v))(0, 0), 5.0);

  const GaussianMeanModel two = GaussianMeanModel::Isotropic(2, 1.0);
  Matrix rows(3, 2);
  rows << 1, 2, 3, 4, 5, 6;
  const Matrix h = two.Hessian(Vector::Zero(2), Dataset(rows));
  EXPECT_TRUE(h.isApprox(3.0 * Matrix::Identity(2, 2)));
}

TEST(GaussianMeanModel, LogLikMatchesDensity) {
  Matrix cov(2, 2);
  cov << 2.0, 0.3, 0.3, 1.0;
  const GaussianMeanModel model(cov);
  Matrix rows(2, 2);
  rows << 0.5, -1.0, 2.0, 0.25;
  Vector theta(2);
  theta << 0.1, 0.2;
  const double want =
      GaussianMeanModel::LogDensity(rows.row(0).transpose(), theta, cov) +
      GaussianMeanModel::LogDensity(rows.row(1).transpose(), theta, cov);
  EXPECT_NEAR(model.LogLik(theta, Dataset(rows)), want, 1e-12);
  // Direct evaluation of the bivariate normal density at row 0.
  const Vector r = rows.row(0).transpose() - theta;
  const double det = 2.0 * 1.0 - 0.09;
  const double quad = (1.0 * r(0) * r(0) - 0.6 * r(0) * r(1) + 2.0 * r(1) * r(1)) / det;
  EXPECT_NEAR(model.PerSampleLogLik(theta, rows.row(0)),
              -std::log(2.0 * M_PI) - 0.5 * std::log(det) - 0.5 * quad, 1e-12);
}

TEST(GaussianMeanModel, EmptyDataThrowsInsufficientData) {
  const GaussianMeanModel model = GaussianMeanModel::Isotropic(1, 1.0);
  try {
    model.Mle(Dataset(Matrix(0, 1)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientData);
  }
}

TEST(SplineGlmModel, ExactLineIsInterpolated) {
  const SplineGlmModel model(UniformKnots(5, 0.0, 300.0), 1.0, 0.0);
  std::vector<double> x, y;
  for (int i = 0; i <= 30; ++i) {
    x.push_back(5.0 + 9.5 * i);
    y.push_back(3.0 - 0.25 * x.back());
  }
  const Vector theta = model.Mle(Dataset::FromPairs(x, y));
  EXPECT_NEAR(theta(0), 3.0, 1e-8);
  EXPECT_NEAR(theta(1), -0.25, 1e-10);
  for (int j = 2; j < theta.size(); ++j) EXPECT_NEAR(theta(j), 0.0, 1e-12);
}

TEST(SplineGlmModel, RidgeMatchesExplicitNormalEquations) {
  const std::vector<double> knots = UniformKnots(5, 0.0, 300.0);
  const SplineGlmModel model(knots, 1.0, 1e4);
  const Dataset data = EngineLike(170, 7);
  const Matrix x = model.Design(data);
  Matrix penalty = Matrix::Identity(x.cols(), x.cols());
  penalty(0, 0) = 0.0;
  const Matrix normal = x.transpose() * x + 1e4 * penalty;
  const Vector want = normal.inverse() * (x.transpose() * data.rows().col(1));
  const Vector got = model.Mle(data);
  EXPECT_LE((got - want).norm() / want.norm(), 1e-8);
}

TEST(SplineGlmModel, RankDeficientWithoutRidgeThrows) {
  const SplineGlmModel model(UniformKnots(5, 0.0, 300.0), 1.0, 0.0);
  const std::vector<double> x = {1.0, 2.0, 3.0}, y = {1.0, 2.0, 3.0};
  try {
    model.Mle(Dataset::FromPairs(x, y));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingularFit);
  }
}

TEST(SplineGlmModel, GradientAndHessianMatchFiniteDifferences) {
  const SplineGlmModel model(UniformKnots(5, 0.0, 300.0), 25.0, 1e-8);
  const Dataset data = EngineLike(150, 3);
  const Vector mle = model.Mle(data);
  const int p = model.dim();
  const double h = 1e-5;
  const Matrix hess = model.Hessian(mle, data);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      Vector pp = mle, pm = mle, mp = mle, mm = mle;
      pp(i) += h; pp(j) += h;
      pm(i) += h; pm(j) -= h;
      mp(i) -= h; mp(j) += h;
      mm(i) -= h; mm(j) -= h;
      const double fd = -(model.LogLik(pp, data) - model.LogLik(pm, data) -
                          model.LogLik(mp, data) + model.LogLik(mm, data)) /
                        (4.0 * h * h);
      EXPECT_LE(RelativeError(hess(i, j), fd), 1e-4) << i << "," << j;
    }
  }
  std::mt19937_64 rng(5);
  const Vector theta = mle + testing::RandomVector(p, rng, 1e-3);
  const Vector grad = model.Gradient(theta, data);
  for (int i = 0; i < p; ++i) {
    Vector up = theta, down = theta;
    up(i) += h;
    down(i) -= h;
    const double fd = (model.LogLik(up, data) - model.LogLik(down, data)) / (2 * h);
    EXPECT_NEAR(grad(i), fd, 1e-4 * std::max(1.0, std::abs(fd))) << i;
  }
}

TEST(SplineGlmModel, PerSampleSumsToLogLik) {
  const SplineGlmModel model(UniformKnots(5, 0.0, 300.0), 4.0, 1e-8);
  const Dataset data = EngineLike(40, 11);
  const Vector theta = model.Mle(data);
  double total = 0.0;
  for (int i = 0; i < data.size(); ++i) total += model.PerSampleLogLik(theta, data.row(i));
  EXPECT_NEAR(model.LogLik(theta, data), total, 1e-9 * std::abs(total));
}

TEST(PooledResidualVariance, IsTotalRssOverTotalCount) {
  const SplineGlmModel model(UniformKnots(5, 0.0, 300.0), 1.0, 1e-8);
  const std::vector<Dataset> parts = {EngineLike(120, 1), EngineLike(200, 2)};
  double rss = 0.0;
  int count = 0;
  for (const Dataset& d : parts) {
    const Vector r = d.rows().col(1) - model.Design(d) * model.Mle(d);
    rss += r.squaredNorm();
    count += d.size();
  }
  EXPECT_NEAR(PooledResidualVariance(model, parts), rss / count, 1e-9 * rss / count);
}

}  // namespace
}  // namespace lipem
