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

// Limited-memory BFGS for smooth unconstrained minimization.
//
// The line search enforces the strong Wolfe conditions. Once the objective
// changes fall to rounding level it switches to the approximate Wolfe test of
// Hager and Zhang, which only relies on directional derivatives, so tight
// gradient tolerances stay reachable.

#ifndef LIPEM_OPTIMIZE_H_
#define LIPEM_OPTIMIZE_H_

#include <functional>
#include <vector>

#include "lipem/numeric.h"

namespace lipem {

// Returns f(x); writes the gradient into *gradient.
using Objective = std::function<double(const Vector& x, Vector* gradient)>;

struct MinimizeOptions {
  double gradient_tol = 1e-8;  // on the infinity norm
  int max_iters = 1000;
  int memory = 10;
  int max_line_search_evals = 60;
};

struct MinimizeResult {
  Vector x;
  double value = 0.0;
  Vector gradient;
  int iterations = 0;
  bool converged = false;
  // Objective value at the start and after every accepted step.
  std::vector<double> trace;
};

MinimizeResult MinimizeLbfgs(const Objective& objective, Vector x0,
                             const MinimizeOptions& options = {});

}  // namespace lipem

#endif  // LIPEM_OPTIMIZE_H_
