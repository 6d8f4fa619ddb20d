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

#include "lipem/judge.h"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "lipem/error.h"
#include "lipem/log.h"
#include "lipem/rng.h"

namespace lipem {
namespace {

using nlohmann::json;

std::optional<std::string> Env(const char* name) {
  const char* value = std::getenv(name);
  if (value == nullptr || *value == '\0') return std::nullopt;
  return std::string(value);
}

bool Contains(const std::vector<int>& v, int x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

[[noreturn]] void Malformed(const std::string& what) {
  throw Error(ErrorCode::kMalformedJudgeResponse, what);
}

}  // namespace

int SimulatedJudge::Choose(const JudgeQuery& query) {
  std::mt19937_64 rng(DeriveSeed(seed_, 0, static_cast<std::uint64_t>(query.index)));
  return SimulatedJudgeChoice(worths_, query.subgroup, rng);
}

TransportConfig TransportConfig::FromEnvironment(TransportConfig base) {
  if (auto v = Env("LIPEM_API_URL")) base.base_url = *v;
  if (auto v = Env("LIPEM_MODEL")) base.model = *v;
  if (auto v = Env("LIPEM_API_KEY")) base.api_key = *v;
  try {
    if (auto v = Env("LIPEM_TEMPERATURE")) base.temperature = std::stod(*v);
    if (auto v = Env("LIPEM_MAX_RETRIES")) base.max_retries = std::stoi(*v);
    if (auto v = Env("LIPEM_FIRE_INTERVAL")) {
      base.fire_interval_seconds = std::stod(*v);
    }
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidConfiguration,
                "bad numeric value in LIPEM_* environment");
  }
  return base;
}

TransportResponse HttpTransport::Post(const std::string& body) {
  httplib::Client client(config_.base_url);
  const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
  client.set_connection_timeout(
      std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(
      std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }
  auto result = client.Post(config_.path, headers, body, "application/json");
  if (!result) return {0, httplib::to_string(result.error())};
  return {result->status, result->body};
}

TransportResponse StubTransport::Post(const std::string& body) {
  std::lock_guard<std::mutex> lock(mu_);
  requests_.push_back(body);
  if (script_.empty()) return {0, "empty script"};
  const size_t i = std::min(requests_.size() - 1, script_.size() - 1);
  return script_[i];
}

int StubTransport::calls() const {
  std::lock_guard<std::mutex> lock(mu_);
  return static_cast<int>(requests_.size());
}

std::vector<std::string> StubTransport::requests() const {
  std::lock_guard<std::mutex> lock(mu_);
  return requests_;
}

// ---------------------------------------------------------------------------

ReplayLog::ReplayLog(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      Entry entry;
      entry.key = j.at("key").get<std::string>();
      entry.request = j.at("request").get<std::string>();
      entry.response = j.at("response").get<std::string>();
      if (!j.at("choice").is_null()) entry.choice = j.at("choice").get<int>();
      entries_[entry.key] = std::move(entry);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParse, path_.string() + " line " +
                                         std::to_string(line_no) + ": " +
                                         e.what());
    }
  }
}

std::optional<ReplayLog::Entry> ReplayLog::Lookup(const std::string& key) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ReplayLog::Append(const Entry& entry) {
  json j = {{"key", entry.key},
            {"request", entry.request},
            {"response", entry.response}};
  j["choice"] = entry.choice ? json(*entry.choice) : json(nullptr);
  std::lock_guard<std::mutex> lock(mu_);
  std::ofstream out(path_, std::ios::app);
  if (!out) throw Error(ErrorCode::kIo, "cannot append to " + path_.string());
  out << j.dump() << "\n";
  entries_[entry.key] = entry;
}

size_t ReplayLog::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.size();
}

// ---------------------------------------------------------------------------

std::string Sha256Hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(),
                 nullptr) != 1) {
    throw Error(ErrorCode::kIo, "sha256 failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < length; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string QueryKey(const JudgeQuery& query) {
  std::vector<int> sorted = query.subgroup;
  std::sort(sorted.begin(), sorted.end());
  std::string material = query.context;
  material += '\0';
  for (int k : sorted) material += std::to_string(k) + ",";
  return Sha256Hex(material);
}

std::string BuildPrompt(const JudgeQuery& query) {
  std::string prompt = "Target domain:\n" + query.context + "\n\n";
  prompt += "Candidate source domains:\n";
  for (int k : query.subgroup) {
    auto it = query.summaries.find(k);
    if (it == query.summaries.end()) {
      throw Error(ErrorCode::kInvalidConfiguration,
                  "no summary for source " + std::to_string(k));
    }
    prompt += "[" + std::to_string(k) + "]\n" + it->second + "\n";
  }
  prompt +=
      "[0] None of the above is similar enough to the target.\n\n"
      "Pick the single source whose data would best help estimate the "
      "target's parameters, or 0 if none would. Reply with JSON only: "
      "{\"choice\": <index>}";
  return prompt;
}

std::string BuildRequestBody(const TransportConfig& config,
                             const JudgeQuery& query) {
  const json body = {
      {"model", config.model},
      {"temperature", config.temperature},
      {"messages",
       json::array({{{"role", "system"},
                     {"content",
                      "You rank data sources by relevance to a target "
                      "domain. Answer with a JSON object."}},
                    {{"role", "user"}, {"content", BuildPrompt(query)}}})}};
  return body.dump();
}

int ParseJudgeResponse(const std::string& body,
                       const std::vector<int>& subgroup) {
  std::string content;
  try {
    const json j = json::parse(body);
    if (j.is_object() && j.contains("choices")) {
      content = j.at("choices").at(0).at("message").at("content").get<std::string>();
    } else {
      content = body;
    }
  } catch (const json::exception&) {
    content = body;
  }
  const size_t open = content.find('{');
  const size_t close = content.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    Malformed("no JSON object in judge response");
  }
  int choice = 0;
  try {
    const json parsed = json::parse(content.substr(open, close - open + 1));
    const json& value = parsed.at("choice");
    if (!value.is_number_integer()) Malformed("choice is not an integer");
    choice = value.get<int>();
  } catch (const json::exception& e) {
    Malformed(std::string("unparseable judge response: ") + e.what());
  }
  if (choice != 0 && !Contains(subgroup, choice)) {
    Malformed("choice " + std::to_string(choice) + " not in subgroup");
  }
  return choice;
}

// ---------------------------------------------------------------------------

LlmJudge::LlmJudge(Transport* transport, TransportConfig config,
                   ReplayLog* log)
    : transport_(transport), config_(std::move(config)), log_(log) {}

JudgeTelemetry LlmJudge::telemetry() const {
  std::lock_guard<std::mutex> lock(mu_);
  return telemetry_;
}

int LlmJudge::Choose(const JudgeQuery& query) {
  const std::string key = QueryKey(query);
  if (log_ != nullptr) {
    if (auto entry = log_->Lookup(key)) {
      std::lock_guard<std::mutex> lock(mu_);
      ++telemetry_.cache_hits;
      if (!entry->choice) {
        ++telemetry_.malformed;
        Malformed("replayed malformed response");
      }
      return *entry->choice;
    }
  }
  if (transport_ == nullptr) {
    throw Error(ErrorCode::kTransport, "no transport and no replay entry");
  }
  const std::string request = BuildRequestBody(config_, query);
  TransportResponse response;
  for (int attempt = 0;; ++attempt) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      ++telemetry_.requests;
    }
    response = transport_->Post(request);
    const bool retryable = response.status == 429 || response.status == 0 ||
                           response.status >= 500;
    if (!retryable || attempt >= config_.max_retries) break;
    {
      std::lock_guard<std::mutex> lock(mu_);
      ++telemetry_.retries;
    }
    if (config_.fire_interval_seconds > 0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(
          config_.fire_interval_seconds * (attempt + 1)));
    }
  }
  if (response.status != 200) {
    std::lock_guard<std::mutex> lock(mu_);
    ++telemetry_.transport_failures;
    throw Error(ErrorCode::kTransport,
                "judge request failed with status " +
                    std::to_string(response.status) + ": " +
                    response.body.substr(0, 200));
  }
  ReplayLog::Entry entry{key, request, response.body, std::nullopt};
  try {
    entry.choice = ParseJudgeResponse(response.body, query.subgroup);
  } catch (const Error&) {
    if (log_ != nullptr) log_->Append(entry);
    std::lock_guard<std::mutex> lock(mu_);
    ++telemetry_.malformed;
    throw;
  }
  if (log_ != nullptr) log_->Append(entry);
  return *entry.choice;
}

ElicitResult Elicit(Judge& judge, const std::string& context,
                    const std::vector<std::vector<int>>& subgroups,
                    const std::map<int, std::string>& summaries, int jobs) {
  const int n = static_cast<int>(subgroups.size());
  std::vector<std::optional<int>> choices(n);
  ParallelFor(n, jobs, [&](int i) {
    JudgeQuery query;
    query.index = i;
    query.context = context;
    query.subgroup = subgroups[i];
    for (int k : subgroups[i]) {
      auto it = summaries.find(k);
      if (it != summaries.end()) query.summaries.emplace(k, it->second);
    }
    try {
      choices[i] = judge.Choose(query);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kMalformedJudgeResponse) throw;
      LogWarning("query " + std::to_string(i) + " skipped: " + e.what());
    }
  });
  ElicitResult result;
  for (int i = 0; i < n; ++i) {
    if (choices[i]) {
      result.records.push_back({subgroups[i], *choices[i]});
    } else {
      result.skipped.push_back(i);
    }
  }
  return result;
}

std::string SummarizeDataset(const Dataset& data, size_t byte_budget) {
  std::ostringstream out;
  out.precision(6);
  const Matrix& rows = data.rows();
  out << "rows=" << rows.rows() << " cols=" << rows.cols() << "\n";
  if (rows.rows() > 0) {
    const auto print_row = [&](const char* label, Eigen::Index i) {
      out << label;
      for (Eigen::Index j = 0; j < rows.cols(); ++j) out << " " << rows(i, j);
      out << "\n";
    };
    print_row("first:", 0);
    print_row("last:", rows.rows() - 1);
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      const auto col = rows.col(j);
      const double mean = col.mean();
      const double var =
          rows.rows() > 1
              ? (col.array() - mean).square().sum() / (rows.rows() - 1)
              : 0.0;
      out << "col" << j << ": mean=" << mean << " std=" << std::sqrt(var)
          << " min=" << col.minCoeff() << " max=" << col.maxCoeff() << "\n";
    }
  }
  std::string text = out.str();
  if (text.size() > byte_budget) text.resize(byte_budget);
  return text;
}

}  // namespace lipem
