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

#include "lipem/bench.h"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "lipem/error.h"
#include "lipem/likelihood.h"
#include "lipem/report.h"

namespace lipem {
namespace {

TEST(GenerateHierarchical, ZeroTauPinsRelevantSources) {
  HierarchicalSpec spec;
  spec.num_sources = 4;
  spec.relevant = {1, 3};
  spec.theta0 = Vector::Constant(2, 0.7);
  const HierarchicalSample s = GenerateHierarchical(spec);
  EXPECT_EQ(s.theta[1], spec.theta0);
  EXPECT_EQ(s.theta[3], spec.theta0);
  EXPECT_NE(s.theta[2], spec.theta0);
  EXPECT_EQ(s.target.size(), spec.n0);
  ASSERT_EQ(s.sources.size(), 4u);
  for (const Dataset& d : s.sources) EXPECT_EQ(d.size(), spec.n);
}

TEST(GenerateHierarchical, DeterministicForSeed) {
  HierarchicalSpec spec;
  spec.tau = 0.4;
  const HierarchicalSample a = GenerateHierarchical(spec);
  const HierarchicalSample b = GenerateHierarchical(spec);
  EXPECT_EQ(a.target.rows(), b.target.rows());
  for (size_t k = 0; k < a.sources.size(); ++k) {
    EXPECT_EQ(a.sources[k].rows(), b.sources[k].rows());
  }
  spec.seed += 1;
  EXPECT_NE(GenerateHierarchical(spec).target.rows(), a.target.rows());
}

TEST(GenerateHierarchical, SampleMeansTrackParameters) {
  HierarchicalSpec spec;
  spec.n = 100000;
  spec.theta0 = Vector::Zero(2);
  spec.sigma = 2.0;
  const HierarchicalSample s = GenerateHierarchical(spec);
  for (int k = 1; k <= spec.num_sources; ++k) {
    const Vector mean = s.sources[k - 1].rows().colwise().mean().transpose();
    EXPECT_LE((mean - s.theta[k]).lpNorm<Eigen::Infinity>(),
              4.0 * spec.sigma / std::sqrt(spec.n));
  }
}

TEST(NullGenerator, ShellRadiusAndSide) {
  HierarchicalSpec spec = GaussianExperimentSpec();
  spec.num_sources = 50;
  spec.theta0 = Vector::Zero(3);
  std::mt19937_64 rng(9);
  const std::vector<Vector> theta = DrawSourceParameters(spec, rng);
  for (int k = 2; k <= spec.num_sources; ++k) {
    const double r = theta[k].norm();
    EXPECT_GE(r, 3.0);
    EXPECT_LE(r, 6.0);
    EXPECT_LT(theta[k](0), 0.0);
    EXPECT_EQ(theta[k](1), 0.0);
  }
}

TEST(Baselines, PooledIsMleOnConcatenation) {
  HierarchicalSpec spec;
  const HierarchicalSample s = GenerateHierarchical(spec);
  const GaussianMeanModel model = GaussianMeanModel::Isotropic(1, 1.0);
  std::vector<Dataset> all = {s.target};
  all.insert(all.end(), s.sources.begin(), s.sources.end());
  EXPECT_EQ(PooledEstimate(model, s.target, s.sources),
            model.Mle(Dataset::Concat(all)));
  EXPECT_EQ(TargetOnlyEstimate(model, s.target), model.Mle(s.target));
}

TEST(Baselines, HomogeneousPoolingMatchesTargetOnlyInExpectation) {
  HierarchicalSpec spec;
  spec.relevant = {1, 2, 3};
  spec.n = 50;
  const GaussianMeanModel model = GaussianMeanModel::Isotropic(1, 1.0);
  double diff = 0.0, diff_sq = 0.0;
  const int reps = 100;
  for (int r = 0; r < reps; ++r) {
    spec.seed = 500 + r;
    const HierarchicalSample s = GenerateHierarchical(spec);
    const double v = PooledEstimate(model, s.target, s.sources)(0) -
                     TargetOnlyEstimate(model, s.target)(0);
    diff += v;
    diff_sq += v * v;
  }
  const double mean = diff / reps;
  const double se = std::sqrt((diff_sq / reps - mean * mean) / (reps - 1));
  EXPECT_LE(std::abs(mean), 3.0 * se);
}

TEST(Baselines, PooledBiasFollowsConvexCombination) {
  HierarchicalSpec spec;
  spec.num_sources = 1;
  spec.relevant = {};
  spec.null_gen.spread = 0.0;
  spec.null_gen.min_radius = spec.null_gen.max_radius = 5.0;
  spec.null_gen.direction = Vector::Ones(1);
  spec.n0 = 20;
  spec.n = 180;
  const GaussianMeanModel model = GaussianMeanModel::Isotropic(1, 1.0);
  double total = 0.0;
  const int reps = 100;
  for (int r = 0; r < reps; ++r) {
    spec.seed = 900 + r;
    const HierarchicalSample s = GenerateHierarchical(spec);
    total += PooledEstimate(model, s.target, s.sources)(0);
  }
  const double want = 180.0 * 5.0 / 200.0;
  EXPECT_LE(std::abs(total / reps - want), 0.1 * want);
}

TEST(Baselines, UniformEqualsLipAtUniformPrior) {
  HierarchicalSpec spec;
  const HierarchicalSample s = GenerateHierarchical(spec);
  const GaussianMeanModel model = GaussianMeanModel::Isotropic(1, 1.0);
  const Vector pi = Vector::Constant(3, 0.01);
  EmConfig config;
  config.null_spec.kind = NullKind::kParametricPooled;
  const BaselineEstimates b = RunBaselines(model, s.target, s.sources, config, 0.01, &pi);
  ASSERT_TRUE(b.lip_em.has_value());
  EXPECT_EQ(b.uniform_em, *b.lip_em);
}

TEST(Baselines, OracleIsSizeWeighted) {
  HierarchicalSpec spec;
  spec.relevant = {1, 2};
  spec.n0 = 10;
  const HierarchicalSample s = GenerateHierarchical(spec);
  const GaussianMeanModel model = GaussianMeanModel::Isotropic(1, 1.0);
  const double want = (10 * model.Mle(s.target)(0) + 200 * model.Mle(s.sources[0])(0) +
                       200 * model.Mle(s.sources[1])(0)) / 410.0;
  EXPECT_NEAR(OracleEstimate(model, s.target, s.sources, spec.relevant)(0), want, 1e-12);
}

TEST(OracleMse, ClosedFormPlugIn) {
  EXPECT_NEAR(OracleMseClosedForm(1, 1.0, 4, 200, 3, 0.0), 1.0 / 604.0, 1e-15);
  EXPECT_NEAR(OracleMseClosedForm(1, 1.0, 4, 200, 3, 0.1) - 1.0 / 604.0,
              0.01 * 120000.0 / 364816.0, 1e-15);
  EXPECT_NEAR(OracleMseClosedForm(1, 1.0, 4, 200, 3, 0.1), 4.9450e-3, 1e-7);
}

TEST(OracleMse, FixedWeightReducesToOracle) {
  // Unit weights on parameters equal to theta0 give the tau = 0 oracle.
  const Vector theta0 = Vector::Zero(2);
  const std::vector<Vector> src(3, theta0);
  EXPECT_NEAR(FixedWeightMse(theta0, src, Vector::Ones(3), 1.0, 4, 200),
              OracleMseClosedForm(2, 1.0, 4, 200, 3, 0.0), 1e-15);
  // Zero weights give the target-only variance.
  EXPECT_NEAR(FixedWeightMse(theta0, src, Vector::Zero(3), 1.5, 4, 200),
              2 * 2.25 / 4.0, 1e-15);
}

TEST(OracleMse, CheckRejectsTooFewReplications) {
  OracleMseConfig c;
  c.replications = 10;
  EXPECT_THROW(OracleMseCheck(c), Error);
}

TEST(GaussianExperiment, SmallRunOrdersMethods) {
  GaussianExperimentConfig c;
  c.replications = 20;
  c.jobs = 4;
  const ReportSet set = GaussianExperiment(c);
  for (const std::string setting : {"d=1", "d=2"}) {
    const BenchReport* lip = FindReport(set.reports, "LIP-EM", setting);
    const BenchReport* pooled = FindReport(set.reports, "Pooled", setting);
    const BenchReport* target = FindReport(set.reports, "Target-Only", setting);
    ASSERT_TRUE(lip && pooled && target);
    EXPECT_EQ(lip->replications(), 20);
    EXPECT_LT(lip->mean(), pooled->mean());
    EXPECT_LT(lip->mean(), target->mean());
  }
  EXPECT_FALSE(set.plots.empty());
}

TEST(DichotomyCheck, SmallRunCommits) {
  DichotomyConfig c;
  c.replications = 10;
  c.n_sweep = {10, 1000};
  const ReportSet set = DichotomyCheck(c);
  for (const auto& p : set.details["priors"]) EXPECT_EQ(p["terminal_committed"], 10);
}

}  // namespace
}  // namespace lipem
