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

// Seed derivation and a bounded worker pool for replicated experiments.

#ifndef LIPEM_RNG_H_
#define LIPEM_RNG_H_

#include <cstdint>
#include <functional>

namespace lipem {

inline constexpr std::uint64_t kDefaultSeed = 42;

// Counter-based split: the seed for (stream, index) depends only on its
// arguments, so replications can run in any order.
std::uint64_t DeriveSeed(std::uint64_t master, std::uint64_t stream,
                         std::uint64_t index);

// Calls fn(i) for i in [0, count) on up to `jobs` threads; rethrows the
// first exception after all workers finish.
void ParallelFor(int count, int jobs, const std::function<void(int)>& fn);

}  // namespace lipem

#endif  // LIPEM_RNG_H_
