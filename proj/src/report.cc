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

#include <cmath>
#include <cstdio>

#include "lipem/error.h"
#include "lipem/io.h"

namespace lipem {
namespace {

// Quotes a CSV field when it contains a delimiter or quote.
std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

nlohmann::ordered_json Number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

double BenchReport::mean() const {
  if (values.empty()) return std::nan("");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double BenchReport::standard_error() const {
  const size_t n = values.size();
  if (n < 2) return 0.0;
  const double m = mean();
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(n - 1)) /
         std::sqrt(static_cast<double>(n));
}

std::string FormatReportCsv(const std::vector<BenchReport>& reports) {
  std::string out = "method,setting,mean,stderr,replications\n";
  for (const BenchReport& r : reports) {
    out += CsvField(r.method) + "," + CsvField(r.setting) + "," +
           FormatDouble(r.mean()) + "," + FormatDouble(r.standard_error()) +
           "," + std::to_string(r.replications()) + "\n";
  }
  return out;
}

std::string FormatReportJson(const ReportSet& set) {
  nlohmann::ordered_json j;
  j["name"] = set.name;
  j["config"] = set.config;
  j["reports"] = nlohmann::ordered_json::array();
  for (const BenchReport& r : set.reports) {
    nlohmann::ordered_json values = nlohmann::ordered_json::array();
    for (double v : r.values) values.push_back(Number(v));
    j["reports"].push_back({{"method", r.method},
                            {"metric", r.metric},
                            {"setting", r.setting},
                            {"mean", Number(r.mean())},
                            {"stderr", Number(r.standard_error())},
                            {"replications", r.replications()},
                            {"values", std::move(values)}});
  }
  if (!set.details.empty()) j["details"] = set.details;
  return j.dump(2) + "\n";
}

std::string FormatPlotCsv(const std::vector<PlotSeries>& plots) {
  std::string out = "method,setting,x,y\n";
  for (const PlotSeries& series : plots) {
    for (const PlotPoint& p : series.points) {
      out += CsvField(series.method) + "," + CsvField(series.setting) + "," +
             FormatDouble(p.x) + "," + FormatDouble(p.y) + "\n";
    }
  }
  return out;
}

std::vector<std::filesystem::path> WriteReportSet(
    const ReportSet& set, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIo,
                "cannot create " + out_dir.string() + ": " + ec.message());
  }
  std::vector<std::filesystem::path> paths;
  paths.push_back(out_dir / (set.name + ".csv"));
  WriteTextFile(paths.back(), FormatReportCsv(set.reports));
  paths.push_back(out_dir / (set.name + ".json"));
  WriteTextFile(paths.back(), FormatReportJson(set));
  if (!set.plots.empty()) {
    paths.push_back(out_dir / (set.name + "_plot.csv"));
    WriteTextFile(paths.back(), FormatPlotCsv(set.plots));
  }
  return paths;
}

std::string FormatLabel(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", value);
  return buf;
}

const BenchReport* FindReport(const std::vector<BenchReport>& reports,
                              const std::string& method,
                              const std::string& setting) {
  for (const BenchReport& r : reports) {
    if (r.method == method && r.setting == setting) return &r;
  }
  return nullptr;
}

}  // namespace lipem
