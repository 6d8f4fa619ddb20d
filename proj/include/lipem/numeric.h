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

// Small numerical helpers shared across modules.

#ifndef LIPEM_NUMERIC_H_
#define LIPEM_NUMERIC_H_

#include <span>

#include "Eigen/Core"

namespace lipem {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kProbabilityFloor = 1e-12;

// Logistic function; never overflows for large |x|.
double Sigmoid(double x);

// log(p / (1 - p)). Requires 0 < p < 1.
double Logit(double p);

// Clamps p into [kProbabilityFloor, 1 - kProbabilityFloor].
double ClampProbability(double p);

// log(sum(exp(values))) with max-shift; -inf for an empty span.
double LogSumExp(std::span<const double> values);

// Symmetrizes and clamps negative eigenvalues at zero.
Matrix RepairPsd(const Matrix& m);

// True when the symmetric PSD matrix has min eigenvalue below rel_tol * max.
bool IsNumericallySingular(const Matrix& m, double rel_tol = 1e-12);

}  // namespace lipem

#endif  // LIPEM_NUMERIC_H_
