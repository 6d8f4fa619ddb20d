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

#ifndef LIPEM_DATASET_H_
#define LIPEM_DATASET_H_

#include <span>
#include <vector>

#include "lipem/numeric.h"

namespace lipem {

// An ordered set of observations stored one per row. Gaussian-mean data has
// one column per coordinate; regression data stores (input, response) pairs.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(Matrix rows) : rows_(std::move(rows)) {}

  static Dataset FromScalars(std::span<const double> values);
  static Dataset FromPairs(std::span<const double> inputs,
                           std::span<const double> responses);
  static Dataset Concat(std::span<const Dataset> parts);

  int size() const { return static_cast<int>(rows_.rows()); }
  int observation_dim() const { return static_cast<int>(rows_.cols()); }
  bool empty() const { return rows_.rows() == 0; }

  const Matrix& rows() const { return rows_; }
  auto row(int i) const { return rows_.row(i); }

  // First n observations (n clamped to size()).
  Dataset Head(int n) const;
  // Observations from index `start` to the end.
  Dataset Tail(int start) const;

 private:
  Matrix rows_;
};

}  // namespace lipem

#endif  // LIPEM_DATASET_H_
