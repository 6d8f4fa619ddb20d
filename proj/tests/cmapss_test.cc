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

#include "lipem/cmapss.h"

#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "lipem/error.h"
#include "lipem/io.h"
#include "lipem/report.h"
#include "test_util.h"

namespace lipem {
namespace {

using testing::FixturePath;

// Engines whose sensor 9 drifts up faster the shorter they live.
CmapssEngines SyntheticFleet(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> life(130, 330);
  std::normal_distribution<double> noise(0.0, 4.0);
  CmapssEngines engines;
  for (int e = 1; e <= count; ++e) {
    const int length = life(rng);
    Matrix rows(length, 2);
    for (int c = 1; c <= length; ++c) {
      const double wear = std::exp(4.0 * c / length) - 1.0;
      rows(c - 1, 0) = c;
      rows(c - 1, 1) = 9050.0 + 2.5 * wear + noise(rng);
    }
    engines.emplace(e, Dataset(rows));
  }
  return engines;
}

CmapssConfig SmallConfig() {
  CmapssConfig c;
  c.engines = {2, 5, 7};
  c.cutoffs = {0.9, 0.5};
  c.jobs = 2;
  return c;
}

TEST(Ingest, ThreeRowFixture) {
  const CmapssEngines e = IngestCmapss(FixturePath("fd001_three_rows.txt"));
  ASSERT_EQ(e.size(), 1u);
  const Dataset& d = e.at(1);
  ASSERT_EQ(d.size(), 3);
  EXPECT_EQ(d.rows()(0, 0), 1.0);
  EXPECT_EQ(d.rows()(0, 1), 9046.19);
  EXPECT_EQ(d.rows()(2, 1), 9052.94);
}

TEST(Ingest, ShortRowNamesLine) {
  try {
    IngestCmapss(FixturePath("fd001_short_row.txt"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Ingest, MissingDataExplainsDownload) {
  try {
    IngestCmapss("/nonexistent/cmapss");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDataNotFound);
    EXPECT_NE(std::string(e.what()).find("train_FD001.txt"), std::string::npos);
  }
}

TEST(Ingest, DirectoryLookup) {
  testing::TempDir dir;
  WriteTextFile(dir.path() / "train_FD001.txt",
                ReadTextFile(FixturePath("fd001_three_rows.txt")));
  EXPECT_EQ(IngestCmapss(dir.path()).size(), 1u);
}

TEST(ObservedCycles, FloorOfObservedFraction) {
  EXPECT_EQ(ObservedCycles(192, 0.9), 19);
  EXPECT_EQ(ObservedCycles(200, 0.9), 20);
  EXPECT_EQ(ObservedCycles(200, 0.0), 200);
  EXPECT_THROW(ObservedCycles(200, 1.0), Error);
}

TEST(PriorExcludingTarget, SkipsTargetPosition) {
  const CmapssEngines e = SyntheticFleet(4, 1);
  Lip lip;
  lip.pi = Vector(4);
  lip.pi << 0.1, 0.2, 0.3, 0.4;
  const Vector pi = PriorExcludingTarget(lip, e, 3);
  ASSERT_EQ(pi.size(), 3);
  EXPECT_EQ(pi(0), 0.1);
  EXPECT_EQ(pi(1), 0.2);
  EXPECT_EQ(pi(2), 0.4);
  lip.pi = Vector::Constant(3, 0.5);
  EXPECT_THROW(PriorExcludingTarget(lip, e, 3), Error);
}

TEST(CmapssExperiment, ReportsEveryMethodAndCutoff) {
  const CmapssEngines fleet = SyntheticFleet(20, 2);
  const ReportSet set = CmapssExperiment(SmallConfig(), fleet);
  EXPECT_EQ(set.reports.size(), 6u);
  for (const char* m : {"Target-Only", "Pooled", "Uniform-EM"}) {
    for (const char* s : {"cutoff=0.9", "cutoff=0.5"}) {
      const BenchReport* r = FindReport(set.reports, m, s);
      ASSERT_NE(r, nullptr) << m << " " << s;
      EXPECT_EQ(r->replications(), 3);
      for (double v : r->values) EXPECT_TRUE(std::isfinite(v) && v > 0);
    }
  }
}

TEST(CmapssExperiment, FullTrajectoryCutoffIsSkipped) {
  CmapssConfig c = SmallConfig();
  c.cutoffs = {0.0, 0.5};
  const ReportSet set = CmapssExperiment(c, SyntheticFleet(10, 3));
  EXPECT_EQ(FindReport(set.reports, "Pooled", "cutoff=0"), nullptr);
  EXPECT_NE(FindReport(set.reports, "Pooled", "cutoff=0.5"), nullptr);
}

TEST(CmapssExperiment, LipFileAddsMethodAndUniformLipMatchesUniformEm) {
  const CmapssEngines fleet = SyntheticFleet(12, 4);
  testing::TempDir dir;
  const auto path = dir.path() / "lip.txt";
  Lip uniform = Lip::Uniform(12, 0.01);
  WriteTextFile(path, FormatPi(uniform));
  CmapssConfig c = SmallConfig();
  c.lip_source = path.string();
  const ReportSet set = CmapssExperiment(c, fleet);
  const BenchReport* lip = FindReport(set.reports, "LIP-EM", "cutoff=0.9");
  const BenchReport* uni = FindReport(set.reports, "Uniform-EM", "cutoff=0.9");
  ASSERT_TRUE(lip && uni);
  EXPECT_EQ(lip->values, uni->values);
}

TEST(CmapssExperiment, RecordsFileIsFitPerTarget) {
  const CmapssEngines fleet = SyntheticFleet(12, 5);
  testing::TempDir dir;
  const auto path = dir.path() / "records.txt";
  WriteRecordsFile(path, {{{1, 2, 3}, 1}, {{4, 5, 6}, 0}, {{1, 7}, 1}});
  CmapssConfig c = SmallConfig();
  c.lip_source = path.string();
  const ReportSet set = CmapssExperiment(c, fleet);
  EXPECT_NE(FindReport(set.reports, "LIP-EM", "cutoff=0.5"), nullptr);
}

TEST(CmapssExperiment, Deterministic) {
  const CmapssEngines fleet = SyntheticFleet(15, 6);
  CmapssConfig a = SmallConfig(), b = SmallConfig();
  b.jobs = 1;
  EXPECT_EQ(FormatReportJson(CmapssExperiment(a, fleet)),
            FormatReportJson(CmapssExperiment(b, fleet)));
}

TEST(CmapssExperiment, UnknownEngineIsConfigError) {
  CmapssConfig c = SmallConfig();
  c.engines = {99};
  try {
    CmapssExperiment(c, SyntheticFleet(5, 7));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidConfiguration);
  }
}

}  // namespace
}  // namespace lipem
