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

#ifndef LIPEM_JUDGE_H_
#define LIPEM_JUDGE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "lipem/dataset.h"
#include "lipem/lip.h"

namespace lipem {

struct JudgeQuery {
  int index = 0;  // position in the query sequence
  std::string context;
  std::vector<int> subgroup;
  // summaries.at(k) describes source k for every k in subgroup.
  std::map<int, std::string> summaries;
};

class Judge {
 public:
  virtual ~Judge() = default;
  // Returns a choice in subgroup U {0}.
  virtual int Choose(const JudgeQuery& query) = 0;
};

// Draws from the conditional logit under fixed worths. The draw for a query
// depends only on (seed, query.index), so concurrent use is reproducible.
class SimulatedJudge : public Judge {
 public:
  SimulatedJudge(WorthVector worths, std::uint64_t seed)
      : worths_(std::move(worths)), seed_(seed) {}
  int Choose(const JudgeQuery& query) override;

 private:
  WorthVector worths_;
  std::uint64_t seed_;
};

struct TransportConfig {
  std::string base_url = "https://api.openai.com";
  std::string path = "/v1/chat/completions";
  std::string model = "gpt-4o";
  double temperature = 0.0;
  int max_retries = 5;
  double fire_interval_seconds = 1.0;
  double timeout_seconds = 60.0;
  std::string api_key;

  // Applies LIPEM_API_URL, LIPEM_MODEL, LIPEM_TEMPERATURE, LIPEM_MAX_RETRIES,
  // LIPEM_FIRE_INTERVAL and LIPEM_API_KEY on top of `base`.
  static TransportConfig FromEnvironment(TransportConfig base);
};

struct TransportResponse {
  int status = 0;  // 0 when the request never reached the server
  std::string body;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual TransportResponse Post(const std::string& body) = 0;
};

class HttpTransport : public Transport {
 public:
  explicit HttpTransport(TransportConfig config) : config_(std::move(config)) {}
  TransportResponse Post(const std::string& body) override;

 private:
  TransportConfig config_;
};

// Replays a fixed script of responses; the last one repeats once exhausted.
class StubTransport : public Transport {
 public:
  explicit StubTransport(std::vector<TransportResponse> script)
      : script_(std::move(script)) {}
  TransportResponse Post(const std::string& body) override;

  int calls() const;
  std::vector<std::string> requests() const;

 private:
  mutable std::mutex mu_;
  std::vector<TransportResponse> script_;
  std::vector<std::string> requests_;
};

struct JudgeTelemetry {
  int requests = 0;
  int retries = 0;
  int malformed = 0;
  int cache_hits = 0;
  int transport_failures = 0;
};

// Append-only JSONL log of judge exchanges keyed by a SHA-256 of the query.
class ReplayLog {
 public:
  struct Entry {
    std::string key;
    std::string request;
    std::string response;
    std::optional<int> choice;  // empty for a malformed response
  };

  // Loads existing entries; a missing file starts an empty log.
  explicit ReplayLog(std::filesystem::path path);

  std::optional<Entry> Lookup(const std::string& key) const;
  void Append(const Entry& entry);
  size_t size() const;

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::map<std::string, Entry> entries_;
};

std::string Sha256Hex(std::string_view data);
std::string QueryKey(const JudgeQuery& query);
std::string BuildPrompt(const JudgeQuery& query);
std::string BuildRequestBody(const TransportConfig& config,
                             const JudgeQuery& query);
// Extracts and validates {"choice": <int>} from a chat-completion body.
int ParseJudgeResponse(const std::string& body,
                       const std::vector<int>& subgroup);

class LlmJudge : public Judge {
 public:
  // `log` may be null. The transport must outlive the judge.
  LlmJudge(Transport* transport, TransportConfig config, ReplayLog* log);

  int Choose(const JudgeQuery& query) override;
  JudgeTelemetry telemetry() const;

 private:
  Transport* transport_;
  TransportConfig config_;
  ReplayLog* log_;
  mutable std::mutex mu_;
  JudgeTelemetry telemetry_;
};

struct ElicitResult {
  ElicitationSet records;  // ordered by query index
  std::vector<int> skipped;  // indices of malformed responses
};

// Malformed responses are skipped; transport errors propagate.
ElicitResult Elicit(Judge& judge, const std::string& context,
                    const std::vector<std::vector<int>>& subgroups,
                    const std::map<int, std::string>& summaries, int jobs);

// First and last rows plus per-column mean/std/min/max, cut to byte_budget.
std::string SummarizeDataset(const Dataset& data, size_t byte_budget = 2048);

}  // namespace lipem

#endif  // LIPEM_JUDGE_H_
