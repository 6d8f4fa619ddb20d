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

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "lipem/bench.h"
#include "lipem/error.h"
#include "lipem/io.h"
#include "lipem/likelihood.h"
#include "lipem/log.h"
#include "lipem/rng.h"

namespace lipem {
namespace {

using nlohmann::ordered_json;

constexpr const char* kDownloadHint =
    "download the NASA C-MAPSS turbofan data (CMAPSSData.zip from the NASA "
    "Prognostics Center of Excellence data repository) and point --data at "
    "train_FD001.txt or the directory containing it";

double Rmse(const SplineGlmModel& model, const Vector& theta,
            const Dataset& holdout) {
  const Vector residual =
      holdout.rows().col(1) - model.Design(holdout) * theta;
  return std::sqrt(residual.squaredNorm() / residual.size());
}

// Prior source: nothing (uniform), a fixed prior, or records to refit.
struct PriorSource {
  std::optional<Lip> lip;
  std::optional<ElicitationSet> records;
};

PriorSource LoadPriorSource(const std::string& source) {
  PriorSource out;
  if (source == "uniform") return out;
  const std::string text = ReadTextFile(source);
  std::istringstream lines(text);
  std::string first;
  while (std::getline(lines, first)) {
    if (first.find_first_not_of(" \t\r") != std::string::npos) break;
  }
  const size_t start = first.find_first_not_of(" \t");
  if (start != std::string::npos && first.compare(start, 2, "K=") == 0) {
    out.lip = ParsePrior(text).lip;
  } else {
    out.records = ParseRecords(text);
  }
  return out;
}

int EnginePosition(const CmapssEngines& engines, int id) {
  int position = 1;
  for (const auto& [engine, data] : engines) {
    if (engine == id) return position;
    ++position;
  }
  return -1;
}

}  // namespace

CmapssEngines ParseCmapss(std::string_view text) {
  std::map<int, std::vector<std::pair<double, double>>> rows;
  size_t line_no = 0;
  size_t start = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string line(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    std::vector<double> values;
    std::string token;
    while (fields >> token) {
      char* parse_end = nullptr;
      const double v = std::strtod(token.c_str(), &parse_end);
      if (parse_end == token.c_str() || *parse_end != '\0') {
        throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) +
                                           ": not a number: " + token);
      }
      values.push_back(v);
    }
    if (values.size() != kCmapssColumns) {
      throw Error(ErrorCode::kParse,
                  "line " + std::to_string(line_no) + ": expected " +
                      std::to_string(kCmapssColumns) + " columns, got " +
                      std::to_string(values.size()));
    }
    const double unit = values[0];
    if (unit != std::floor(unit) || unit < 1) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) +
                                         ": bad unit id");
    }
    rows[static_cast<int>(unit)].emplace_back(values[1],
                                              values[kCmapssSensor9Column]);
  }
  CmapssEngines engines;
  for (auto& [unit, pairs] : rows) {
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    Matrix m(static_cast<Eigen::Index>(pairs.size()), 2);
    for (size_t i = 0; i < pairs.size(); ++i) {
      m(i, 0) = pairs[i].first;
      m(i, 1) = pairs[i].second;
    }
    engines.emplace(unit, Dataset(std::move(m)));
  }
  return engines;
}

std::filesystem::path ResolveCmapssFile(const std::filesystem::path& path) {
  std::error_code ec;
  if (std::filesystem::is_directory(path, ec)) {
    for (const char* name : {"train_FD001.txt", "CMAPSSData/train_FD001.txt"}) {
      if (std::filesystem::is_regular_file(path / name, ec)) return path / name;
    }
  } else if (std::filesystem::is_regular_file(path, ec)) {
    return path;
  }
  throw Error(ErrorCode::kDataNotFound,
              "C-MAPSS FD001 file not found at '" + path.string() + "'; " +
                  kDownloadHint);
}

CmapssEngines IngestCmapss(const std::filesystem::path& path) {
  CmapssEngines engines = ParseCmapss(ReadTextFile(ResolveCmapssFile(path)));
  if (engines.size() != 100) {
    LogWarning("C-MAPSS file has " + std::to_string(engines.size()) +
               " engines; FD001 has 100");
  }
  return engines;
}

int ObservedCycles(int trajectory_length, double cutoff) {
  if (!(cutoff >= 0.0 && cutoff < 1.0)) {
    throw Error(ErrorCode::kInvalidConfiguration,
                "cutoff must lie in [0, 1)");
  }
  return static_cast<int>(std::floor((1.0 - cutoff) * trajectory_length + 1e-9));
}

Vector PriorExcludingTarget(const Lip& lip, const CmapssEngines& engines,
                            int target) {
  if (lip.num_sources() != static_cast<int>(engines.size())) {
    throw Error(ErrorCode::kInvalidConfiguration,
                "LIP file has K=" + std::to_string(lip.num_sources()) +
                    " but the data has " + std::to_string(engines.size()) +
                    " engines");
  }
  Vector pi(static_cast<Eigen::Index>(engines.size()) - 1);
  Eigen::Index out = 0, position = 0;
  for (const auto& [engine, data] : engines) {
    if (engine != target) pi(out++) = lip.pi(position);
    ++position;
  }
  return pi;
}

ReportSet CmapssExperiment(const CmapssConfig& config) {
  return CmapssExperiment(config, IngestCmapss(config.data_path));
}

ReportSet CmapssExperiment(const CmapssConfig& config,
                           const CmapssEngines& engines) {
  ValidateEmConfig(config.em);
  if (engines.size() < 3) {
    throw Error(ErrorCode::kInsufficientData,
                "C-MAPSS run needs at least three engines");
  }
  for (int engine : config.engines) {
    if (!engines.contains(engine)) {
      throw Error(ErrorCode::kInvalidConfiguration,
                  "engine " + std::to_string(engine) + " is not in the data");
    }
  }
  for (double c : config.cutoffs) ObservedCycles(1, c);
  const PriorSource prior_source = LoadPriorSource(config.lip_source);
  const bool run_lip = prior_source.lip || prior_source.records;
  LipFitOptions fit_options = config.lip_fit;
  fit_options.p0 = config.p0;

  const std::vector<double> knots =
      UniformKnots(config.num_knots, config.knot_lo, config.knot_hi);
  const SplineGlmModel baseline_model(knots, 1.0, config.baseline_ridge);
  const SplineGlmModel em_base(knots, 1.0, config.em_ridge);

  std::vector<std::string> methods = {"Target-Only", "Pooled", "Uniform-EM"};
  if (run_lip) methods.push_back("LIP-EM");
  const int num_methods = static_cast<int>(methods.size());
  const int num_targets = static_cast<int>(config.engines.size());
  const int num_cutoffs = static_cast<int>(config.cutoffs.size());

  struct Cell {
    bool skipped = false;
    std::vector<double> rmse;
    std::vector<Vector> theta;
    std::vector<int> em_iterations;
    int null_fallbacks = 0;
  };
  std::vector<std::vector<Cell>> cells(num_targets,
                                       std::vector<Cell>(num_cutoffs));
  std::vector<double> noise(num_targets);

  ParallelFor(num_targets, config.jobs, [&](int ti) {
    const int target_id = config.engines[ti];
    const Dataset& full = engines.at(target_id);
    std::vector<Dataset> sources;
    for (const auto& [engine, data] : engines) {
      if (engine != target_id) sources.push_back(data);
    }
    noise[ti] = PooledResidualVariance(em_base, sources);
    const SplineGlmModel em_model = em_base.WithNoiseVariance(noise[ti]);

    std::optional<Vector> lip_pi;
    if (prior_source.lip) {
      lip_pi = PriorExcludingTarget(*prior_source.lip, engines, target_id);
    } else if (prior_source.records) {
      const ElicitationSet reduced = DropSourceAndReindex(
          *prior_source.records, EnginePosition(engines, target_id));
      lip_pi = FitLip(reduced, static_cast<int>(sources.size()), fit_options)
                   .lip.pi;
    }

    for (int ci = 0; ci < num_cutoffs; ++ci) {
      Cell& cell = cells[ti][ci];
      const int observed = ObservedCycles(full.size(), config.cutoffs[ci]);
      if (observed < 1 || observed >= full.size()) {
        LogWarning("engine " + std::to_string(target_id) + " cutoff " +
                   FormatLabel(config.cutoffs[ci]) +
                   ": empty training or holdout set, skipped");
        cell.skipped = true;
        continue;
      }
      const Dataset train = full.Head(observed);
      const Dataset holdout = full.Tail(observed);
      cell.theta.push_back(TargetOnlyEstimate(baseline_model, train));
      cell.theta.push_back(PooledEstimate(baseline_model, train, sources));
      const Vector uniform =
          Vector::Constant(static_cast<Eigen::Index>(sources.size()), config.p0);
      bool fell_back = false;
      EmResult em = RunEmWithNullFallback(em_model, train, sources, uniform,
                                          config.em, &fell_back);
      cell.null_fallbacks += fell_back;
      cell.theta.push_back(em.state.theta);
      cell.em_iterations.push_back(em.report.iterations);
      if (lip_pi) {
        em = RunEmWithNullFallback(em_model, train, sources, *lip_pi,
                                   config.em, &fell_back);
        cell.null_fallbacks += fell_back;
        cell.theta.push_back(em.state.theta);
        cell.em_iterations.push_back(em.report.iterations);
      }
      for (const Vector& theta : cell.theta) {
        cell.rmse.push_back(Rmse(em_model, theta, holdout));
      }
    }
  });

  ReportSet set;
  set.name = "cmapss";
  ordered_json em_json = {{"tau", config.em.tau},
                          {"nu", config.em.nu},
                          {"variant", MStepVariantName(config.em.variant)},
                          {"null", NullKindName(config.em.null_spec.kind)},
                          {"max_iters", config.em.max_iters},
                          {"tol", config.em.tol},
                          {"patience", config.em.patience},
                          {"tempering",
                           TemperingModeName(config.em.tempering_mode)}};
  set.config = {{"lip_source", config.lip_source},
                {"cutoffs", config.cutoffs},
                {"engines", config.engines},
                {"num_knots", config.num_knots},
                {"knot_lo", config.knot_lo},
                {"knot_hi", config.knot_hi},
                {"baseline_ridge", config.baseline_ridge},
                {"em_ridge", config.em_ridge},
                {"p0", config.p0},
                {"lip_eps", config.lip_fit.eps},
                {"em", em_json}};
  for (int m = 0; m < num_methods; ++m) {
    for (int ci = 0; ci < num_cutoffs; ++ci) {
      BenchReport report{methods[m], "RMSE",
                         "cutoff=" + FormatLabel(config.cutoffs[ci]), {}};
      for (int ti = 0; ti < num_targets; ++ti) {
        if (!cells[ti][ci].skipped) report.values.push_back(cells[ti][ci].rmse[m]);
      }
      if (!report.values.empty()) set.reports.push_back(std::move(report));
    }
  }

  ordered_json per_engine = ordered_json::array();
  for (int ti = 0; ti < num_targets; ++ti) {
    ordered_json engine = {{"engine", config.engines[ti]},
                           {"noise_variance", noise[ti]},
                           {"cutoffs", ordered_json::array()}};
    for (int ci = 0; ci < num_cutoffs; ++ci) {
      const Cell& cell = cells[ti][ci];
      ordered_json entry = {{"cutoff", config.cutoffs[ci]},
                            {"skipped", cell.skipped}};
      if (!cell.skipped) {
        for (int m = 0; m < num_methods; ++m) entry[methods[m]] = cell.rmse[m];
        entry["em_iterations"] = cell.em_iterations;
        entry["null_fallbacks"] = cell.null_fallbacks;
      }
      engine["cutoffs"].push_back(std::move(entry));
    }
    per_engine.push_back(std::move(engine));
  }
  set.details["per_engine"] = std::move(per_engine);

  // Prediction curves for the last listed engine.
  if (num_targets > 0) {
    const int ti = num_targets - 1;
    const Dataset& full = engines.at(config.engines[ti]);
    std::vector<double> cycles(full.size());
    for (int i = 0; i < full.size(); ++i) cycles[i] = full.rows()(i, 0);
    const std::string engine_label =
        "engine=" + std::to_string(config.engines[ti]);
    PlotSeries observed{"Observed", engine_label, {}};
    for (int i = 0; i < full.size(); ++i) {
      observed.points.push_back({cycles[i], full.rows()(i, 1)});
    }
    set.plots.push_back(std::move(observed));
    for (int ci = 0; ci < num_cutoffs; ++ci) {
      const Cell& cell = cells[ti][ci];
      if (cell.skipped) continue;
      const std::string label =
          engine_label + ";cutoff=" + FormatLabel(config.cutoffs[ci]);
      for (int m = 0; m < num_methods; ++m) {
        const Vector prediction = em_base.Predict(cell.theta[m], cycles);
        PlotSeries series{methods[m], label, {}};
        for (size_t i = 0; i < cycles.size(); ++i) {
          series.points.push_back({cycles[i], prediction(i)});
        }
        set.plots.push_back(std::move(series));
      }
    }
  }
  return set;
}

}  // namespace lipem
