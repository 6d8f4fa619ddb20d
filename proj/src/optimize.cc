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

#include "lipem/optimize.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <utility>

namespace lipem {
namespace {

constexpr double kArmijo = 1e-4;
constexpr double kCurvature = 0.9;
constexpr double kApproxWolfeDelta = 0.1;

struct Trial {
  double alpha = 0.0;
  double value = 0.0;
  double slope = 0.0;
  Vector x;
  Vector gradient;
};

class WolfeLineSearch {
 public:
  WolfeLineSearch(const Objective& objective, const Vector& x, double value,
                  const Vector& gradient, const Vector& direction,
                  int max_evals)
      : objective_(objective),
        direction_(direction),
        max_evals_(max_evals),
        origin_{0.0, value, gradient.dot(direction), x, gradient},
        value_slack_(1e-12 * (1.0 + std::abs(value))) {}

  std::optional<Trial> Run(double alpha) {
    Trial prev = origin_;
    while (evals_ < max_evals_) {
      Trial t = Evaluate(alpha);
      if (Acceptable(t)) return t;
      if (!std::isfinite(t.value) || !Armijo(t) ||
          (prev.alpha > 0.0 && t.value >= prev.value)) {
        return Zoom(std::move(prev), std::move(t));
      }
      if (t.slope >= 0.0) return Zoom(std::move(t), std::move(prev));
      prev = std::move(t);
      alpha *= 2.0;
    }
    return std::nullopt;
  }

 private:
  Trial Evaluate(double alpha) {
    ++evals_;
    Trial t;
    t.alpha = alpha;
    t.x = origin_.x + alpha * direction_;
    t.gradient.resize(t.x.size());
    t.value = objective_(t.x, &t.gradient);
    t.slope = t.gradient.dot(direction_);
    return t;
  }

  bool Armijo(const Trial& t) const {
    return t.value <= origin_.value + kArmijo * t.alpha * origin_.slope;
  }

  bool Acceptable(const Trial& t) const {
    if (!std::isfinite(t.value) || !std::isfinite(t.slope)) return false;
    if (Armijo(t) && std::abs(t.slope) <= -kCurvature * origin_.slope) {
      return true;
    }
    // Approximate Wolfe: decrease is below rounding, rely on slopes.
    return t.value <= origin_.value + value_slack_ &&
           t.slope >= kCurvature * origin_.slope &&
           t.slope <= (2.0 * kApproxWolfeDelta - 1.0) * origin_.slope;
  }

  static double Interpolate(const Trial& lo, const Trial& hi) {
    const double span = hi.alpha - lo.alpha;
    const double bisect = lo.alpha + 0.5 * span;
    if (!std::isfinite(hi.value)) return bisect;
    const double d1 =
        lo.slope + hi.slope - 3.0 * (lo.value - hi.value) / (lo.alpha - hi.alpha);
    const double disc = d1 * d1 - lo.slope * hi.slope;
    if (disc < 0.0) return bisect;
    const double d2 = std::copysign(std::sqrt(disc), span);
    const double denom = hi.slope - lo.slope + 2.0 * d2;
    if (denom == 0.0) return bisect;
    const double alpha = hi.alpha - span * (hi.slope + d2 - d1) / denom;
    const double a = std::min(lo.alpha, hi.alpha);
    const double b = std::max(lo.alpha, hi.alpha);
    const double margin = 0.1 * (b - a);
    if (!std::isfinite(alpha) || alpha < a + margin || alpha > b - margin) {
      return bisect;
    }
    return alpha;
  }

  // `lo` satisfies the sufficient-decrease test and has the lowest value seen.
  std::optional<Trial> Zoom(Trial lo, Trial hi) {
    while (evals_ < max_evals_) {
      if (std::abs(hi.alpha - lo.alpha) <=
          1e-16 * std::max(1.0, std::abs(lo.alpha))) {
        break;
      }
      Trial t = Evaluate(Interpolate(lo, hi));
      if (Acceptable(t)) return t;
      if (!std::isfinite(t.value) || !Armijo(t) || t.value >= lo.value) {
        hi = std::move(t);
      } else {
        if (t.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = std::move(t);
      }
    }
    if (lo.alpha > 0.0 && lo.value < origin_.value) return lo;
    return std::nullopt;
  }

  const Objective& objective_;
  const Vector& direction_;
  int max_evals_;
  Trial origin_;
  double value_slack_;
  int evals_ = 0;
};

struct CorrectionPair {
  Vector s;
  Vector y;
  double rho;
};

Vector TwoLoopDirection(const std::deque<CorrectionPair>& memory,
                        const Vector& gradient) {
  Vector q = gradient;
  std::vector<double> alphas(memory.size());
  for (size_t i = memory.size(); i-- > 0;) {
    alphas[i] = memory[i].rho * memory[i].s.dot(q);
    q -= alphas[i] * memory[i].y;
  }
  if (!memory.empty()) {
    const CorrectionPair& last = memory.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (size_t i = 0; i < memory.size(); ++i) {
    const double beta = memory[i].rho * memory[i].y.dot(q);
    q += (alphas[i] - beta) * memory[i].s;
  }
  return -q;
}

}  // namespace

MinimizeResult MinimizeLbfgs(const Objective& objective, Vector x0,
                             const MinimizeOptions& options) {
  MinimizeResult result;
  result.x = std::move(x0);
  result.gradient.resize(result.x.size());
  result.value = objective(result.x, &result.gradient);
  result.trace.push_back(result.value);

  std::deque<CorrectionPair> memory;
  while (true) {
    if (result.x.size() == 0 ||
        result.gradient.lpNorm<Eigen::Infinity>() <= options.gradient_tol) {
      result.converged = true;
      break;
    }
    if (result.iterations >= options.max_iters) break;

    Vector direction = TwoLoopDirection(memory, result.gradient);
    if (!(direction.dot(result.gradient) < 0.0)) {
      memory.clear();
      direction = -result.gradient;
    }
    const double alpha0 =
        memory.empty()
            ? std::min(1.0, 1.0 / result.gradient.lpNorm<Eigen::Infinity>())
            : 1.0;
    WolfeLineSearch search(objective, result.x, result.value, result.gradient,
                           direction, options.max_line_search_evals);
    std::optional<Trial> step = search.Run(alpha0);
    if (!step) {
      if (memory.empty()) break;
      // Stale curvature pairs; restart from steepest descent.
      memory.clear();
      continue;
    }
    Vector s = step->x - result.x;
    Vector y = step->gradient - result.gradient;
    const double sy = s.dot(y);
    if (sy > 1e-16 * s.norm() * y.norm()) {
      memory.push_back({std::move(s), std::move(y), 1.0 / sy});
      if (static_cast<int>(memory.size()) > options.memory) memory.pop_front();
    }
    result.x = std::move(step->x);
    result.gradient = std::move(step->gradient);
    result.value = step->value;
    result.trace.push_back(result.value);
    ++result.iterations;
  }
  return result;
}

}  // namespace lipem
