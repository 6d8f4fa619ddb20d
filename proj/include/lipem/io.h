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

// Text file formats: elicitation records, priors, numeric datasets and EM
// run reports.
//
// Records file, one per line:   subgroup=1,4,7;choice=4
// Prior file:                   K=<int>, then alpha_0..alpha_K, or pi_1..pi_K

#ifndef LIPEM_IO_H_
#define LIPEM_IO_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "lipem/dataset.h"
#include "lipem/em.h"
#include "lipem/lip.h"

namespace lipem {

std::string FormatDouble(double value);

std::string FormatRecords(const ElicitationSet& records);
// Throws kParse naming the 1-based line. Blank lines are skipped.
ElicitationSet ParseRecords(std::string_view text);
ElicitationSet ReadRecordsFile(const std::filesystem::path& path);
void WriteRecordsFile(const std::filesystem::path& path,
                      const ElicitationSet& records);

struct PriorFile {
  Lip lip;
  // Present when the file stores worths rather than probabilities.
  std::optional<WorthVector> worths;
};

std::string FormatWorths(const WorthVector& worths);
std::string FormatPi(const Lip& lip);
PriorFile ParsePrior(std::string_view text);
PriorFile ReadPriorFile(const std::filesystem::path& path);
void WriteWorthsFile(const std::filesystem::path& path,
                     const WorthVector& worths);

// Whitespace- or comma-separated numeric rows; '#' starts a comment.
Dataset ParseDataset(std::string_view text);
Dataset ReadDatasetFile(const std::filesystem::path& path);

// Columnar EM trace: '#'-prefixed config echo and status, a header row, then
// one tab-separated row per iteration (t, theta, weights, beta).
std::string FormatEmReport(const EmConfig& config, const EmResult& result);
void WriteEmReport(const std::filesystem::path& path, const EmConfig& config,
                   const EmResult& result);

std::string ReadTextFile(const std::filesystem::path& path);
// Overwrites `path`; throws kIo when it cannot be written.
void WriteTextFile(const std::filesystem::path& path, std::string_view text);

}  // namespace lipem

#endif  // LIPEM_IO_H_
