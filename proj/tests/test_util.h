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

#ifndef LIPEM_TESTS_TEST_UTIL_H_
#define LIPEM_TESTS_TEST_UTIL_H_

#include <filesystem>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "lipem/numeric.h"

namespace lipem::testing {

inline std::filesystem::path FixturePath(const std::string& name) {
  return std::filesystem::path(LIPEM_FIXTURE_DIR) / name;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("lipem_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline Vector RandomVector(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> z;
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = scale * z(rng);
  return v;
}

inline double RelativeError(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

}  // namespace lipem::testing

#endif  // LIPEM_TESTS_TEST_UTIL_H_
