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

#ifndef LIPEM_CMAPSS_H_
#define LIPEM_CMAPSS_H_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lipem/dataset.h"
#include "lipem/em.h"
#include "lipem/lip.h"
#include "lipem/report.h"

namespace lipem {

inline constexpr int kCmapssColumns = 26;
inline constexpr int kCmapssSensor9Column = 13;  // 0-based

// Engine id -> (cycle, sensor 9) rows ordered by cycle.
using CmapssEngines = std::map<int, Dataset>;

CmapssEngines ParseCmapss(std::string_view text);
// Accepts the training file itself or a directory holding train_FD001.txt.
CmapssEngines IngestCmapss(const std::filesystem::path& path);
std::filesystem::path ResolveCmapssFile(const std::filesystem::path& path);

struct CmapssConfig {
  std::filesystem::path data_path;
  // "uniform", a LIP file, or an elicitation-record file to fit per target.
  std::string lip_source = "uniform";
  std::vector<double> cutoffs = {0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1};
  std::vector<int> engines = {4, 9, 18, 26, 27, 48, 51, 53, 55, 80};
  int num_knots = 5;
  double knot_lo = 0.0;
  double knot_hi = 300.0;
  double baseline_ridge = 1e4;
  double em_ridge = 1e-8;
  double p0 = 0.01;
  LipFitOptions lip_fit;
  EmConfig em = [] {
    EmConfig c;
    c.tau = 1e-3;
    c.nu = 0.05;
    c.variant = MStepVariant::kExactHessianReuse;
    c.null_spec.kind = NullKind::kEmpiricalBayesMixture;
    c.max_iters = 1000;
    return c;
  }();
  int jobs = 1;
};

// Number of observed target cycles for a given RUL cutoff.
int ObservedCycles(int trajectory_length, double cutoff);

// Prior over the sources of `target` (all engines but the target, ascending
// id). `lip` is indexed by engine position in `engines`.
Vector PriorExcludingTarget(const Lip& lip, const CmapssEngines& engines,
                            int target);

ReportSet CmapssExperiment(const CmapssConfig& config);
ReportSet CmapssExperiment(const CmapssConfig& config,
                           const CmapssEngines& engines);

}  // namespace lipem

#endif  // LIPEM_CMAPSS_H_
