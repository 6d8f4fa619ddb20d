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

#ifndef LIPEM_REPORT_H_
#define LIPEM_REPORT_H_

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace lipem {

struct BenchReport {
  std::string method;
  std::string metric;   // "MSE" or "RMSE"
  std::string setting;  // e.g. "d=1", "cutoff=0.9", "N0=1000"
  std::vector<double> values;  // one per replication, in replication order

  int replications() const { return static_cast<int>(values.size()); }
  double mean() const;
  // Sample standard deviation over sqrt(replications); 0 for one value.
  double standard_error() const;
};

struct PlotPoint {
  double x = 0.0;
  double y = 0.0;
};

struct PlotSeries {
  std::string method;
  std::string setting;
  std::vector<PlotPoint> points;
};

struct ReportSet {
  std::string name;  // file stem
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::vector<BenchReport> reports;
  std::vector<PlotSeries> plots;
  // Extra structured results for the JSON sidecar (tables, checks, z-scores).
  nlohmann::ordered_json details = nlohmann::ordered_json::object();
};

// Header "method,setting,mean,stderr,replications", then one row per report.
std::string FormatReportCsv(const std::vector<BenchReport>& reports);
std::string FormatReportJson(const ReportSet& set);
// Header "method,setting,x,y".
std::string FormatPlotCsv(const std::vector<PlotSeries>& plots);

// Writes <name>.csv and <name>.json, plus <name>_plot.csv when there are plot
// series. Creates out_dir if needed. Returns the written paths.
std::vector<std::filesystem::path> WriteReportSet(
    const ReportSet& set, const std::filesystem::path& out_dir);

// Short "%g" rendering for setting labels such as "cutoff=0.9".
std::string FormatLabel(double value);

const BenchReport* FindReport(const std::vector<BenchReport>& reports,
                              const std::string& method,
                              const std::string& setting);

}  // namespace lipem

#endif  // LIPEM_REPORT_H_
