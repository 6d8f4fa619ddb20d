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

#include "lipem/log.h"

#include <atomic>
#include <iostream>
#include <mutex>

namespace lipem {
namespace {

std::atomic<bool> warnings_enabled{true};
std::mutex log_mutex;

}  // namespace

void LogWarning(std::string_view message) {
  if (!warnings_enabled.load()) return;
  std::lock_guard<std::mutex> lock(log_mutex);
  std::cerr << "warning: " << message << '\n';
}

void SetWarningsEnabled(bool enabled) { warnings_enabled.store(enabled); }

}  // namespace lipem
