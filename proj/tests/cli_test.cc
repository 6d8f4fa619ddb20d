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

#include "lipem/cli.h"

#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "lipem/io.h"
#include "test_util.h"

namespace lipem {
namespace {

using testing::FixturePath;
using testing::TempDir;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun Cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = Dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

TEST(Cli, UnknownSubcommandIsUsageError) {
  const CliRun r = Cli({"frobnicate"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("error: code=usage"), std::string::npos);
  EXPECT_EQ(Cli({}).code, kExitUsage);
}

TEST(Cli, HelpExitsZero) {
  const CliRun r = Cli({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("bench"), std::string::npos);
}

TEST(Cli, UnknownConfigKeyNamesKey) {
  TempDir dir;
  const auto config = dir.path() / "c.json";
  WriteTextFile(config, R"({"seed": 1, "gaussian": {"replications": 3, "bogus": 1}})");
  const CliRun r = Cli({"--config", config.string(), "bench", "gaussian"});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("code=invalid_configuration"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("key=gaussian.bogus"), std::string::npos) << r.err;
}

TEST(Cli, BadConfigValueNamesKey) {
  TempDir dir;
  const auto config = dir.path() / "c.json";
  WriteTextFile(config, R"({"em": {"tau": "wide"}})");
  const CliRun r = Cli({"--config", config.string(), "bench", "gaussian"});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("key=em.tau"), std::string::npos) << r.err;
}

TEST(Cli, ConfigParserRejectsUnknownTopLevel) {
  try {
    ParseRunConfig(nlohmann::json::parse(R"({"sed": 4})"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "sed");
  }
  const RunConfig c = ParseRunConfig(nlohmann::json::parse(
      R"({"seed": 7, "em": {"tau": 0.5, "variant": "exact_hessian_reuse"}})"));
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.em.tau, 0.5);
  EXPECT_EQ(c.em.variant, MStepVariant::kExactHessianReuse);
}

TEST(Cli, FitLipOnEmptyRecordsGivesUniformPrior) {
  TempDir dir;
  const auto out = dir.path() / "lip.txt";
  const CliRun r = Cli({"fit-lip", "--records", FixturePath("empty_records.txt").string(),
                     "--num-sources", "4", "--output", out.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const PriorFile prior = ReadPriorFile(out);
  ASSERT_EQ(prior.lip.num_sources(), 4);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(prior.lip.pi(k), 0.01, 1e-8);
}

TEST(Cli, FitLipNeedsKForEmptyRecords) {
  TempDir dir;
  const CliRun r = Cli({"--out", dir.path().string(), "fit-lip", "--records",
                     FixturePath("empty_records.txt").string()});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("key=num-sources"), std::string::npos) << r.err;
}

TEST(Cli, SimulateThenFitRecoversOrdering) {
  TempDir dir;
  const auto worths = dir.path() / "true.txt";
  WriteTextFile(worths, "K=3\nalpha_0=0\nalpha_1=2\nalpha_2=-1\nalpha_3=0.5\n");
  const auto records = dir.path() / "records.txt";
  ASSERT_EQ(Cli({"simulate-oracle", "--worths", worths.string(), "--queries", "500",
                 "--sizes", "1", "2", "3", "--output", records.string()})
                .code,
            kExitOk);
  EXPECT_EQ(ReadRecordsFile(records).size(), 500u);
  const auto lip = dir.path() / "lip.txt";
  const CliRun fit = Cli({"fit-lip", "--records", records.string(), "--output", lip.string()});
  ASSERT_EQ(fit.code, kExitOk) << fit.err;
  const PriorFile p = ReadPriorFile(lip);
  EXPECT_GT(p.lip.pi(0), p.lip.pi(2));
  EXPECT_GT(p.lip.pi(2), p.lip.pi(1));
}

TEST(Cli, RunEmWritesReport) {
  TempDir dir;
  WriteTextFile(dir.path() / "t.txt", "0.1\n-0.3\n0.2\n0.0\n");
  std::string near, far;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  for (int i = 0; i < 200; ++i) {
    near += FormatDouble(z(rng)) + "\n";
    far += FormatDouble(5.0 + z(rng)) + "\n";
  }
  WriteTextFile(dir.path() / "s1.txt", near);
  WriteTextFile(dir.path() / "s2.txt", far);
  const CliRun r = Cli({"--out", dir.path().string(), "run-em", "--target",
                     (dir.path() / "t.txt").string(), "--source",
                     (dir.path() / "s1.txt").string(), "--source",
                     (dir.path() / "s2.txt").string(), "--null", "parametric_pooled"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("converged=true"), std::string::npos) << r.out;
  const std::string report = ReadTextFile(dir.path() / "em_report.tsv");
  EXPECT_NE(report.find("# null=parametric_pooled"), std::string::npos);
}

TEST(Cli, OracleMseReportsClosedForm) {
  TempDir dir;
  const CliRun r = Cli({"--out", dir.path().string(), "--jobs", "4", "bench", "oracle-mse",
                     "--tau", "0"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(ReadTextFile(dir.path() / "oracle_mse.json"));
  const auto& entry = j["details"]["oracle"][0];
  EXPECT_NEAR(entry["closed_form"].get<double>(), 1.6556e-3, 1e-7);
  EXPECT_LE(std::abs(entry["z"].get<double>()), 3.0);
}

TEST(Cli, MissingCmapssDataIsReported) {
  TempDir dir;
  const CliRun r = Cli({"--out", dir.path().string(), "bench", "cmapss", "--data",
                     (dir.path() / "nope").string()});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_NE(r.err.find("code=data_not_found"), std::string::npos) << r.err;
}

TEST(Cli, BenchIsByteIdenticalAcrossRuns) {
  TempDir a, b;
  for (const auto* dir : {&a, &b}) {
    ASSERT_EQ(Cli({"--out", dir->path().string(), "--seed", "9", "--jobs", "3", "bench",
                   "gaussian", "--replications", "5"})
                  .code,
              kExitOk);
  }
  for (const char* f : {"gaussian.csv", "gaussian.json", "gaussian_plot.csv"}) {
    EXPECT_EQ(ReadTextFile(a.path() / f), ReadTextFile(b.path() / f)) << f;
  }
}

TEST(Cli, JobsMustBePositive) {
  EXPECT_EQ(Cli({"--jobs", "0", "bench", "gaussian"}).code, kExitConfig);
}

TEST(FormatErrorLine, SingleLine) {
  const std::string line = FormatErrorLine(ConfigError("em.nu", "bad\nvalue"));
  EXPECT_EQ(line, "error: code=invalid_configuration key=em.nu message=bad value");
}

}  // namespace
}  // namespace lipem
