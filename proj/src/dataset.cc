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

#include "lipem/dataset.h"

#include <algorithm>
#include <string>

#include "lipem/error.h"

namespace lipem {

Dataset Dataset::FromScalars(std::span<const double> values) {
  Matrix rows(static_cast<Eigen::Index>(values.size()), 1);
  for (size_t i = 0; i < values.size(); ++i) rows(i, 0) = values[i];
  return Dataset(std::move(rows));
}

Dataset Dataset::FromPairs(std::span<const double> inputs,
                           std::span<const double> responses) {
  if (inputs.size() != responses.size()) {
    throw Error(ErrorCode::kInvalidConfiguration,
                "input and response lengths differ");
  }
  Matrix rows(static_cast<Eigen::Index>(inputs.size()), 2);
  for (size_t i = 0; i < inputs.size(); ++i) {
    rows(i, 0) = inputs[i];
    rows(i, 1) = responses[i];
  }
  return Dataset(std::move(rows));
}

Dataset Dataset::Concat(std::span<const Dataset> parts) {
  Eigen::Index total = 0;
  Eigen::Index cols = -1;
  for (const Dataset& part : parts) {
    if (part.empty()) continue;
    if (cols >= 0 && part.rows_.cols() != cols) {
      throw Error(ErrorCode::kInvalidConfiguration,
                  "cannot concatenate datasets of different widths");
    }
    cols = part.rows_.cols();
    total += part.rows_.rows();
  }
  if (cols < 0) {
    cols = parts.empty() ? 0 : parts.front().rows_.cols();
  }
  Matrix rows(total, cols);
  Eigen::Index offset = 0;
  for (const Dataset& part : parts) {
    if (part.empty()) continue;
    rows.middleRows(offset, part.rows_.rows()) = part.rows_;
    offset += part.rows_.rows();
  }
  return Dataset(std::move(rows));
}

Dataset Dataset::Head(int n) const {
  const int count = std::clamp(n, 0, size());
  return Dataset(rows_.topRows(count));
}

Dataset Dataset::Tail(int start) const {
  const int begin = std::clamp(start, 0, size());
  return Dataset(rows_.bottomRows(size() - begin));
}

}  // namespace lipem
