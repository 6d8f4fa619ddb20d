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

#include "lipem/report.h"

#include <algorithm>
#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "lipem/io.h"
#include "test_util.h"

namespace lipem {
namespace {

int CountLines(const std::string& s) {
  return static_cast<int>(std::count(s.begin(), s.end(), '\n'));
}

TEST(BenchReport, MeanAndStandardError) {
  const BenchReport r{"m", "MSE", "d=1", {1.0, 2.0, 3.0, 4.0}};
  EXPECT_DOUBLE_EQ(r.mean(), 2.5);
  // Sample sd sqrt(5/3) over sqrt(4).
  EXPECT_NEAR(r.standard_error(), std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
  EXPECT_EQ((BenchReport{"m", "MSE", "", {7.0}}).standard_error(), 0.0);
}

TEST(ReportCsv, EmptySetIsHeaderOnly) {
  EXPECT_EQ(FormatReportCsv({}), "method,setting,mean,stderr,replications\n");
  EXPECT_EQ(FormatPlotCsv({}), "method,setting,x,y\n");
}

TEST(ReportCsv, FiveMethodsNineCutoffs) {
  std::vector<BenchReport> reports;
  for (const char* m : {"LIP-C", "LIP-G", "Uniform-EM", "Pooled", "Target-Only"}) {
    for (int c = 9; c >= 1; --c) {
      reports.push_back({m, "RMSE", "cutoff=" + FormatLabel(c / 10.0), {1.0, 2.0}});
    }
  }
  const std::string csv = FormatReportCsv(reports);
  EXPECT_EQ(CountLines(csv), 46);
  EXPECT_NE(csv.find("\nPooled,cutoff=0.3,1.5,"), std::string::npos);
}

TEST(ReportJson, NonFiniteIsNull) {
  ReportSet set;
  set.name = "x";
  set.reports.push_back({"m", "MSE", "s", {1.0, NAN}});
  const auto j = nlohmann::json::parse(FormatReportJson(set));
  EXPECT_TRUE(j["reports"][0]["values"][1].is_null());
}

TEST(WriteReportSet, ByteIdenticalAcrossRuns) {
  ReportSet set;
  set.name = "demo";
  set.config = {{"seed", 42}};
  set.reports.push_back({"A", "MSE", "d=1", {0.1, 0.2, 1.0 / 3.0}});
  set.plots.push_back({"A", "d=1", {{0.0, 1.0}, {0.5, 2.0}}});
  set.details["note"] = "ok";
  testing::TempDir a, b;
  const auto pa = WriteReportSet(set, a.path() / "nested");
  const auto pb = WriteReportSet(set, b.path());
  ASSERT_EQ(pa.size(), 3u);
  ASSERT_EQ(pb.size(), 3u);
  for (size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(pa[i].filename(), pb[i].filename());
    EXPECT_EQ(ReadTextFile(pa[i]), ReadTextFile(pb[i]));
  }
  set.plots.clear();
  EXPECT_EQ(WriteReportSet(set, b.path() / "noplot").size(), 2u);
}

TEST(FindReport, LooksUpByMethodAndSetting) {
  const std::vector<BenchReport> r = {{"A", "MSE", "d=1", {}}, {"A", "MSE", "d=2", {}}};
  EXPECT_EQ(FindReport(r, "A", "d=2"), &r[1]);
  EXPECT_EQ(FindReport(r, "B", "d=2"), nullptr);
}

}  // namespace
}  // namespace lipem
