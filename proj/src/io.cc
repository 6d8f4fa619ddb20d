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

#include "lipem/io.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

#include "lipem/error.h"

namespace lipem {
namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> Lines(std::string_view text) {
  std::vector<std::string_view> lines;
  size_t start = 0;
  while (start <= text.size()) {
    const size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

[[noreturn]] void ParseFail(size_t line, const std::string& what) {
  throw Error(ErrorCode::kParse,
              "line " + std::to_string(line) + ": " + what);
}

bool ParseInt(std::string_view s, int* out) {
  s = Trim(s);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

bool ParseDouble(std::string_view s, double* out) {
  s = Trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

// Splits "key=value"; false if there is no '='.
bool SplitKeyValue(std::string_view s, std::string_view* key,
                   std::string_view* value) {
  const size_t eq = s.find('=');
  if (eq == std::string_view::npos) return false;
  *key = Trim(s.substr(0, eq));
  *value = Trim(s.substr(eq + 1));
  return true;
}

}  // namespace

std::string FormatDouble(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kDataNotFound,
                "cannot open " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteTextFile(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot write " + path.string());
  }
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Records

std::string FormatRecords(const ElicitationSet& records) {
  std::string out;
  for (const ChoiceRecord& record : records) {
    out += "subgroup=";
    for (size_t i = 0; i < record.subgroup.size(); ++i) {
      if (i > 0) out += ',';
      out += std::to_string(record.subgroup[i]);
    }
    out += ";choice=" + std::to_string(record.choice) + "\n";
  }
  return out;
}

ElicitationSet ParseRecords(std::string_view text) {
  ElicitationSet records;
  const std::vector<std::string_view> lines = Lines(text);
  for (size_t i = 0; i < lines.size(); ++i) {
    const size_t line_no = i + 1;
    const std::string_view line = Trim(lines[i]);
    if (line.empty()) continue;
    const size_t semi = line.find(';');
    if (semi == std::string_view::npos) ParseFail(line_no, "missing ';'");
    std::string_view key, value;
    if (!SplitKeyValue(line.substr(0, semi), &key, &value) ||
        key != "subgroup") {
      ParseFail(line_no, "expected subgroup=<indices>");
    }
    ChoiceRecord record;
    size_t start = 0;
    while (start <= value.size()) {
      size_t comma = value.find(',', start);
      if (comma == std::string_view::npos) comma = value.size();
      int index = 0;
      if (!ParseInt(value.substr(start, comma - start), &index)) {
        ParseFail(line_no, "bad subgroup index");
      }
      record.subgroup.push_back(index);
      start = comma + 1;
    }
    std::string_view choice_value;
    if (!SplitKeyValue(line.substr(semi + 1), &key, &choice_value) ||
        key != "choice" || !ParseInt(choice_value, &record.choice)) {
      ParseFail(line_no, "expected choice=<index>");
    }
    try {
      ValidateRecord(record, std::numeric_limits<int>::max());
    } catch (const Error& e) {
      ParseFail(line_no, e.what());
    }
    records.push_back(std::move(record));
  }
  return records;
}

ElicitationSet ReadRecordsFile(const std::filesystem::path& path) {
  return ParseRecords(ReadTextFile(path));
}

void WriteRecordsFile(const std::filesystem::path& path,
                      const ElicitationSet& records) {
  WriteTextFile(path, FormatRecords(records));
}

// ---------------------------------------------------------------------------
// Priors

std::string FormatWorths(const WorthVector& worths) {
  std::string out = "K=" + std::to_string(worths.num_sources()) + "\n";
  for (Eigen::Index k = 0; k < worths.alpha.size(); ++k) {
    out += "alpha_" + std::to_string(k) + "=" + FormatDouble(worths.alpha(k)) +
           "\n";
  }
  return out;
}

std::string FormatPi(const Lip& lip) {
  std::string out = "K=" + std::to_string(lip.num_sources()) + "\n";
  for (Eigen::Index k = 0; k < lip.pi.size(); ++k) {
    out += "pi_" + std::to_string(k + 1) + "=" + FormatDouble(lip.pi(k)) + "\n";
  }
  return out;
}

PriorFile ParsePrior(std::string_view text) {
  const std::vector<std::string_view> lines = Lines(text);
  int num_sources = -1;
  std::vector<std::optional<double>> alpha, pi;
  for (size_t i = 0; i < lines.size(); ++i) {
    const size_t line_no = i + 1;
    const std::string_view line = Trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    std::string_view key, value;
    if (!SplitKeyValue(line, &key, &value)) ParseFail(line_no, "expected key=value");
    if (num_sources < 0) {
      if (key != "K" || !ParseInt(value, &num_sources) || num_sources < 1) {
        ParseFail(line_no, "first entry must be K=<positive int>");
      }
      alpha.assign(num_sources + 1, std::nullopt);
      pi.assign(num_sources + 1, std::nullopt);
      continue;
    }
    const bool is_alpha = key.starts_with("alpha_");
    const bool is_pi = key.starts_with("pi_");
    if (!is_alpha && !is_pi) ParseFail(line_no, "unknown key");
    int index = 0;
    double v = 0.0;
    if (!ParseInt(key.substr(is_alpha ? 6 : 3), &index) ||
        !ParseDouble(value, &v) || !std::isfinite(v)) {
      ParseFail(line_no, "bad entry");
    }
    if (index < (is_alpha ? 0 : 1) || index > num_sources) {
      ParseFail(line_no, "index out of range");
    }
    if (is_pi && !(v > 0.0 && v < 1.0)) {
      ParseFail(line_no, "pi must lie in (0, 1)");
    }
    auto& slot = is_alpha ? alpha[index] : pi[index];
    if (slot) ParseFail(line_no, "duplicate entry");
    slot = v;
  }
  if (num_sources < 0) {
    throw Error(ErrorCode::kParse, "prior file has no K=<int> header");
  }
  const auto count = [](const std::vector<std::optional<double>>& v) {
    int n = 0;
    for (const auto& e : v) n += e.has_value();
    return n;
  };
  PriorFile file;
  if (count(alpha) > 0) {
    if (count(pi) > 0 || count(alpha) != num_sources + 1) {
      throw Error(ErrorCode::kParse,
                  "prior file needs alpha_0..alpha_K and no pi entries");
    }
    WorthVector worths{Vector(num_sources + 1)};
    for (int k = 0; k <= num_sources; ++k) worths.alpha(k) = *alpha[k];
    file.lip = Lip::FromWorths(worths, LipProvenance::kFile);
    file.worths = std::move(worths);
    return file;
  }
  if (count(pi) != num_sources) {
    throw Error(ErrorCode::kParse, "prior file needs pi_1..pi_K");
  }
  file.lip.provenance = LipProvenance::kFile;
  file.lip.pi.resize(num_sources);
  for (int k = 1; k <= num_sources; ++k) file.lip.pi(k - 1) = *pi[k];
  return file;
}

PriorFile ReadPriorFile(const std::filesystem::path& path) {
  return ParsePrior(ReadTextFile(path));
}

void WriteWorthsFile(const std::filesystem::path& path,
                     const WorthVector& worths) {
  WriteTextFile(path, FormatWorths(worths));
}

// ---------------------------------------------------------------------------
// Numeric datasets

Dataset ParseDataset(std::string_view text) {
  std::vector<std::vector<double>> rows;
  const std::vector<std::string_view> lines = Lines(text);
  for (size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (const size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    std::vector<double> row;
    size_t pos = 0;
    while (pos < line.size()) {
      const size_t start = line.find_first_not_of(" \t\r,", pos);
      if (start == std::string_view::npos) break;
      size_t end = line.find_first_of(" \t\r,", start);
      if (end == std::string_view::npos) end = line.size();
      double v = 0.0;
      if (!ParseDouble(line.substr(start, end - start), &v)) {
        ParseFail(i + 1, "not a number");
      }
      row.push_back(v);
      pos = end;
    }
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size()) {
      ParseFail(i + 1, "expected " + std::to_string(rows.front().size()) +
                           " columns, got " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return Dataset(std::move(m));
}

Dataset ReadDatasetFile(const std::filesystem::path& path) {
  return ParseDataset(ReadTextFile(path));
}

// ---------------------------------------------------------------------------
// EM report

std::string FormatEmReport(const EmConfig& config, const EmResult& result) {
  const EmState& state = result.state;
  const ConvergenceReport& report = result.report;
  std::string out;
  out += "# tau=" + FormatDouble(config.tau) + "\n";
  out += "# nu=" + FormatDouble(config.nu) + "\n";
  out += "# variant=" + std::string(MStepVariantName(config.variant)) + "\n";
  out += "# null=" + std::string(NullKindName(config.null_spec.kind)) + "\n";
  out += "# tempering=" + std::string(TemperingModeName(config.tempering_mode)) +
         "\n";
  out += "# max_iters=" + std::to_string(config.max_iters) + "\n";
  out += "# tol=" + FormatDouble(config.tol) + "\n";
  out += "# patience=" + std::to_string(config.patience) + "\n";
  out += "# converged=" + std::string(report.converged ? "true" : "false") +
         "\n";
  out += "# iterations=" + std::to_string(report.iterations) + "\n";
  out += "# tempering_fell_back=" +
         std::string(report.tempering_fell_back ? "true" : "false") + "\n";
  out += "# sources=";
  for (size_t i = 0; i < report.source_indices.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(report.source_indices[i]);
  }
  out += "\n";

  const Eigen::Index d = state.theta.size();
  const Eigen::Index k = state.weights.size();
  out += "t";
  for (Eigen::Index i = 0; i < d; ++i) out += "\ttheta_" + std::to_string(i);
  for (Eigen::Index i = 0; i < k; ++i) {
    out += "\tw_" + std::to_string(report.source_indices.empty()
                                       ? i + 1
                                       : report.source_indices[i]);
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    out += "\tbeta_" + std::to_string(report.source_indices.empty()
                                          ? i + 1
                                          : report.source_indices[i]);
  }
  out += "\n";
  for (const EmSnapshot& snap : state.history) {
    out += std::to_string(snap.t);
    for (Eigen::Index i = 0; i < snap.theta.size(); ++i) {
      out += "\t" + FormatDouble(snap.theta(i));
    }
    for (Eigen::Index i = 0; i < snap.weights.size(); ++i) {
      out += "\t" + FormatDouble(snap.weights(i));
    }
    for (Eigen::Index i = 0; i < snap.beta.size(); ++i) {
      out += "\t" + FormatDouble(snap.beta(i));
    }
    out += "\n";
  }
  return out;
}

void WriteEmReport(const std::filesystem::path& path, const EmConfig& config,
                   const EmResult& result) {
  WriteTextFile(path, FormatEmReport(config, result));
}

}  // namespace lipem
