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

#include <atomic>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "lipem/dataset.h"
#include "lipem/error.h"
#include "lipem/numeric.h"
#include "lipem/optimize.h"
#include "lipem/rng.h"

namespace lipem {
namespace {

TEST(Numeric, SigmoidIsSaturationSafe) {
  EXPECT_EQ(Sigmoid(0.0), 0.5);
  EXPECT_EQ(Sigmoid(1e6), 1.0);
  EXPECT_EQ(Sigmoid(-1e6), 0.0);
  EXPECT_NEAR(Sigmoid(-40.0) / std::exp(-40.0), 1.0, 1e-12);
  EXPECT_NEAR(Logit(Sigmoid(3.25)), 3.25, 1e-12);
}

TEST(Numeric, LogSumExpShifts) {
  const std::vector<double> big = {1000.0, 1000.0};
  EXPECT_NEAR(LogSumExp(big), 1000.0 + std::log(2.0), 1e-12);
  EXPECT_EQ(LogSumExp(std::vector<double>{}), -INFINITY);
  const std::vector<double> mixed = {-INFINITY, 0.0};
  EXPECT_EQ(LogSumExp(mixed), 0.0);
}

TEST(Numeric, ClampProbability) {
  EXPECT_EQ(ClampProbability(0.0), kProbabilityFloor);
  EXPECT_EQ(ClampProbability(1.0), 1.0 - kProbabilityFloor);
  EXPECT_EQ(ClampProbability(0.3), 0.3);
}

TEST(Numeric, RepairPsdClampsNegativeEigenvalues) {
  Matrix m(2, 2);
  m << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3 and -1
  const Matrix r = RepairPsd(m);
  Eigen::SelfAdjointEigenSolver<Matrix> es(r);
  EXPECT_NEAR(es.eigenvalues()(0), 0.0, 1e-12);
  EXPECT_NEAR(es.eigenvalues()(1), 3.0, 1e-12);
  EXPECT_TRUE(IsNumericallySingular(r));
  EXPECT_FALSE(IsNumericallySingular(Matrix::Identity(2, 2)));
}

TEST(Lbfgs, MinimizesRosenbrock) {
  const Objective f = [](const Vector& x, Vector* g) {
    const double a = 1.0 - x(0), b = x(1) - x(0) * x(0);
    (*g)(0) = -2.0 * a - 400.0 * x(0) * b;
    (*g)(1) = 200.0 * b;
    return a * a + 100.0 * b * b;
  };
  Vector x0(2);
  x0 << -1.2, 1.0;
  const MinimizeResult r = MinimizeLbfgs(f, x0);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x(0), 1.0, 1e-6);
  EXPECT_NEAR(r.x(1), 1.0, 1e-6);
  for (size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i], r.trace[i - 1]);
}

TEST(Lbfgs, SolvesIllConditionedQuadratic) {
  Vector scale(5);
  scale << 1, 10, 100, 1000, 1e4;
  const Objective f = [&](const Vector& x, Vector* g) {
    *g = scale.cwiseProduct(x - Vector::Ones(5));
    return 0.5 * (x - Vector::Ones(5)).dot(*g);
  };
  const MinimizeResult r = MinimizeLbfgs(f, Vector::Zero(5));
  EXPECT_TRUE(r.converged);
  EXPECT_LE((r.x - Vector::Ones(5)).lpNorm<Eigen::Infinity>(), 1e-8);
}

TEST(Rng, DeriveSeedIsCounterBased) {
  EXPECT_EQ(DeriveSeed(42, 1, 7), DeriveSeed(42, 1, 7));
  std::set<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 4; ++s) {
    for (std::uint64_t i = 0; i < 250; ++i) seeds.insert(DeriveSeed(42, s, i));
  }
  EXPECT_EQ(seeds.size(), 1000u);
  EXPECT_NE(DeriveSeed(42, 0, 0), DeriveSeed(43, 0, 0));
}

TEST(Rng, ParallelForCoversEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(1000);
  ParallelFor(1000, 8, [&](int i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(Rng, ParallelForRethrows) {
  EXPECT_THROW(ParallelFor(10, 4,
                           [](int i) {
                             if (i == 3) throw Error(ErrorCode::kIo, "boom");
                           }),
               Error);
}

TEST(Dataset, HeadTailConcat) {
  const std::vector<double> v = {1, 2, 3, 4, 5};
  const Dataset d = Dataset::FromScalars(v);
  EXPECT_EQ(d.Head(2).size(), 2);
  EXPECT_EQ(d.Head(99).size(), 5);
  EXPECT_EQ(d.Tail(3).size(), 2);
  EXPECT_EQ(d.Tail(3).rows()(0, 0), 4.0);
  const std::vector<Dataset> parts = {d.Head(2), d.Tail(2)};
  const Dataset joined = Dataset::Concat(parts);
  EXPECT_EQ(joined.size(), 5);
  EXPECT_EQ(joined.rows()(4, 0), 5.0);
  const std::vector<double> x = {1, 2}, y = {3, 4};
  const Dataset pairs = Dataset::FromPairs(x, y);
  EXPECT_EQ(pairs.observation_dim(), 2);
  EXPECT_EQ(pairs.rows()(1, 1), 4.0);
}

}  // namespace
}  // namespace lipem
