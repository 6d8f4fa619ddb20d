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

#include "lipem/bench.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "lipem/error.h"
#include "lipem/io.h"

namespace lipem {
namespace {

using nlohmann::ordered_json;

Vector StandardNormal(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vector z(d);
  for (int i = 0; i < d; ++i) z(i) = normal(rng);
  return z;
}

Dataset DrawGaussian(const Vector& mean, double sigma, int count,
                     std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  const int d = static_cast<int>(mean.size());
  Matrix rows(count, d);
  for (int i = 0; i < count; ++i) {
    for (int j = 0; j < d; ++j) rows(i, j) = mean(j) + sigma * normal(rng);
  }
  return Dataset(std::move(rows));
}

// Mean of `count` draws from Normal(mean, sigma^2 I).
Vector DrawSampleMean(const Vector& mean, double sigma, int count,
                      std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  const int d = static_cast<int>(mean.size());
  Vector sum = Vector::Zero(d);
  for (int i = 0; i < count; ++i) {
    for (int j = 0; j < d; ++j) sum(j) += normal(rng);
  }
  return mean + sigma * sum / count;
}

double Median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string Setting(const std::string& key, double value) {
  return key + "=" + FormatLabel(value);
}

ordered_json ToJson(const Vector& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

ordered_json EmConfigJson(const EmConfig& c) {
  ordered_json j = {{"tau", c.tau},
                    {"nu", c.nu},
                    {"variant", MStepVariantName(c.variant)},
                    {"null", NullKindName(c.null_spec.kind)},
                    {"max_iters", c.max_iters},
                    {"tol", c.tol},
                    {"patience", c.patience},
                    {"tempering", TemperingModeName(c.tempering_mode)},
                    {"init_at_target_mle", c.init_at_target_mle}};
  j["beta_cap"] = c.beta_cap ? ordered_json(*c.beta_cap) : ordered_json();
  return j;
}

ordered_json NullGenJson(const NullGenerator& g) {
  ordered_json j = {{"min_radius", g.min_radius},
                    {"max_radius", g.max_radius},
                    {"spread", g.spread},
                    {"axis_aligned", g.axis_aligned},
                    {"first_axis_sign", g.first_axis_sign}};
  j["direction"] = g.direction ? ToJson(*g.direction) : ordered_json();
  return j;
}

}  // namespace

bool HierarchicalSpec::is_relevant(int k) const {
  return std::find(relevant.begin(), relevant.end(), k) != relevant.end();
}

void ValidateHierarchicalSpec(const HierarchicalSpec& spec) {
  const auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidConfiguration, what);
  };
  if (spec.num_sources < 1) fail("num_sources must be >= 1");
  if (spec.theta0.size() < 1) fail("theta0 must be nonempty");
  for (int k : spec.relevant) {
    if (k < 1 || k > spec.num_sources) fail("relevant index out of range");
  }
  if (!(spec.tau >= 0.0)) fail("tau must be >= 0");
  if (!(spec.sigma > 0.0)) fail("sigma must be > 0");
  if (spec.n0 < 1 || spec.n < 1) fail("sample sizes must be >= 1");
  const NullGenerator& g = spec.null_gen;
  if (!(g.min_radius > 0.0) || !(g.max_radius >= g.min_radius)) {
    fail("null radii must satisfy 0 < min_radius <= max_radius");
  }
  if (!(g.spread >= 0.0)) fail("null spread must be >= 0");
  if (g.direction &&
      (g.direction->size() != spec.theta0.size() || g.direction->norm() == 0)) {
    fail("null direction must be a nonzero d-vector");
  }
}

std::vector<Vector> DrawSourceParameters(const HierarchicalSpec& spec,
                                         std::mt19937_64& rng) {
  const int d = spec.dim();
  std::vector<Vector> theta;
  theta.push_back(spec.theta0);
  std::uniform_real_distribution<double> unit;
  for (int k = 1; k <= spec.num_sources; ++k) {
    if (spec.is_relevant(k)) {
      theta.push_back(spec.theta0 + spec.tau * StandardNormal(d, rng));
      continue;
    }
    const NullGenerator& g = spec.null_gen;
    Vector direction = g.direction      ? *g.direction
                       : g.axis_aligned ? Vector::Unit(d, 0)
                                        : StandardNormal(d, rng);
    direction.normalize();
    if (g.first_axis_sign != 0.0) {
      direction(0) = std::copysign(std::abs(direction(0)), g.first_axis_sign);
    }
    const double radius =
        spec.sigma * (g.min_radius + (g.max_radius - g.min_radius) * unit(rng));
    theta.push_back(spec.theta0 + radius * direction +
                    g.spread * spec.sigma * StandardNormal(d, rng));
  }
  return theta;
}

HierarchicalSample GenerateHierarchical(const HierarchicalSpec& spec) {
  ValidateHierarchicalSpec(spec);
  std::mt19937_64 rng(spec.seed);
  HierarchicalSample sample;
  sample.theta = DrawSourceParameters(spec, rng);
  sample.target = DrawGaussian(spec.theta0, spec.sigma, spec.n0, rng);
  for (int k = 1; k <= spec.num_sources; ++k) {
    sample.sources.push_back(
        DrawGaussian(sample.theta[k], spec.sigma, spec.n, rng));
  }
  return sample;
}

Vector TargetOnlyEstimate(const LikelihoodModel& model, const Dataset& target) {
  return model.Mle(target);
}

Vector PooledEstimate(const LikelihoodModel& model, const Dataset& target,
                      std::span<const Dataset> sources) {
  std::vector<Dataset> all;
  all.reserve(sources.size() + 1);
  all.push_back(target);
  all.insert(all.end(), sources.begin(), sources.end());
  return model.Mle(Dataset::Concat(all));
}

Vector OracleEstimate(const LikelihoodModel& model, const Dataset& target,
                      std::span<const Dataset> sources,
                      const std::vector<int>& relevant) {
  double total = target.size();
  Vector sum = total * model.Mle(target);
  for (int k : relevant) {
    const Dataset& data = sources[k - 1];
    if (data.empty()) continue;
    sum += data.size() * model.Mle(data);
    total += data.size();
  }
  return sum / total;
}

EmResult RunEmWithNullFallback(const LikelihoodModel& model,
                               const Dataset& target,
                               std::span<const Dataset> sources,
                               const Vector& pi, const EmConfig& config,
                               bool* fell_back) {
  *fell_back = false;
  try {
    return RunEm(model, target, sources, pi, config);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateNull) throw;
  }
  EmConfig pooled = config;
  pooled.null_spec = NullSpec{};
  pooled.null_spec.kind = NullKind::kParametricPooled;
  *fell_back = true;
  return RunEm(model, target, sources, pi, pooled);
}

BaselineEstimates RunBaselines(const LikelihoodModel& model,
                               const Dataset& target,
                               std::span<const Dataset> sources,
                               const EmConfig& config, double p0,
                               const Vector* lip_pi) {
  BaselineEstimates out;
  out.target_only = TargetOnlyEstimate(model, target);
  out.pooled = PooledEstimate(model, target, sources);
  const Vector uniform =
      Vector::Constant(static_cast<Eigen::Index>(sources.size()), p0);
  bool fell_back = false;
  out.uniform_em =
      RunEmWithNullFallback(model, target, sources, uniform, config, &fell_back)
          .state.theta;
  out.null_fallbacks += fell_back;
  if (lip_pi != nullptr) {
    out.lip_em = RunEmWithNullFallback(model, target, sources, *lip_pi, config,
                                       &fell_back)
                     .state.theta;
    out.null_fallbacks += fell_back;
  }
  return out;
}

// ---------------------------------------------------------------------------

HierarchicalSpec GaussianExperimentSpec() {
  HierarchicalSpec spec;
  spec.null_gen.spread = 0.0;
  spec.null_gen.axis_aligned = true;
  spec.null_gen.first_axis_sign = -1.0;
  return spec;
}

ReportSet GaussianExperiment(const GaussianExperimentConfig& config) {
  if (config.replications < 1) {
    throw Error(ErrorCode::kInvalidConfiguration, "replications must be >= 1");
  }
  ValidateEmConfig(config.em);
  ReportSet set;
  set.name = "gaussian";
  set.config = {{"dims", config.dims},
                {"num_sources", config.spec.num_sources},
                {"relevant", config.spec.relevant},
                {"tau", config.spec.tau},
                {"sigma", config.spec.sigma},
                {"n0", config.spec.n0},
                {"n", config.spec.n},
                {"null_gen", NullGenJson(config.spec.null_gen)},
                {"seed", config.spec.seed},
                {"replications", config.replications},
                {"pi_relevant", config.pi_relevant},
                {"pi_other", config.pi_other},
                {"p0", config.p0},
                {"em", EmConfigJson(config.em)}};
  const char* kMethods[] = {"Oracle", "Target-Only", "Pooled", "Uniform-EM",
                            "LIP-EM"};
  constexpr int kNumMethods = 5;

  for (int d : config.dims) {
    HierarchicalSpec base = config.spec;
    base.theta0 = Vector::Zero(d);
    if (base.null_gen.direction && base.null_gen.direction->size() != d) {
      throw Error(ErrorCode::kInvalidConfiguration,
                  "null direction does not match dimension");
    }
    ValidateHierarchicalSpec(base);
    const GaussianMeanModel model = GaussianMeanModel::Isotropic(d, base.sigma);
    Vector lip_pi(base.num_sources);
    for (int k = 1; k <= base.num_sources; ++k) {
      lip_pi(k - 1) = base.is_relevant(k) ? config.pi_relevant : config.pi_other;
    }

    std::vector<std::array<Vector, kNumMethods>> estimates(config.replications);
    std::vector<int> fallbacks(config.replications, 0);
    std::vector<HierarchicalSample> first(1);
    ParallelFor(config.replications, config.jobs, [&](int r) {
      HierarchicalSpec spec = base;
      spec.seed = DeriveSeed(base.seed, static_cast<std::uint64_t>(d), r);
      HierarchicalSample sample = GenerateHierarchical(spec);
      const BaselineEstimates b = RunBaselines(
          model, sample.target, sample.sources, config.em, config.p0, &lip_pi);
      estimates[r] = {OracleEstimate(model, sample.target, sample.sources,
                                     spec.relevant),
                      b.target_only, b.pooled, b.uniform_em, *b.lip_em};
      fallbacks[r] = b.null_fallbacks;
      if (r == 0) first[0] = std::move(sample);
    });

    const std::string setting = "d=" + std::to_string(d);
    for (int m = 0; m < kNumMethods; ++m) {
      BenchReport report{kMethods[m], "MSE", setting, {}};
      for (int r = 0; r < config.replications; ++r) {
        report.values.push_back((estimates[r][m] - base.theta0).squaredNorm());
      }
      set.reports.push_back(std::move(report));
    }
    set.details[setting] = {
        {"oracle_closed_form",
         OracleMseClosedForm(d, base.sigma, base.n0, base.n,
                             static_cast<int>(base.relevant.size()),
                             base.tau)},
        {"null_fallbacks",
         std::accumulate(fallbacks.begin(), fallbacks.end(), 0)}};

    // Density curves along the first coordinate for replication 0.
    const HierarchicalSample& sample = first[0];
    double lo = base.theta0(0), hi = base.theta0(0);
    for (const Vector& t : sample.theta) {
      lo = std::min(lo, t(0));
      hi = std::max(hi, t(0));
    }
    lo -= 4.0 * base.sigma;
    hi += 4.0 * base.sigma;
    const int points = std::max(config.plot_points, 2);
    const auto density = [&](double x, double mean) {
      const double z = (x - mean) / base.sigma;
      return std::exp(-0.5 * z * z) /
             (base.sigma * std::sqrt(2.0 * std::numbers::pi));
    };
    const auto add_series = [&](const std::string& name, double mean) {
      PlotSeries series{name, setting, {}};
      for (int i = 0; i < points; ++i) {
        const double x = lo + (hi - lo) * i / (points - 1);
        series.points.push_back({x, density(x, mean)});
      }
      set.plots.push_back(std::move(series));
    };
    add_series("Truth", base.theta0(0));
    for (int m = 0; m < kNumMethods; ++m) add_series(kMethods[m], estimates[0][m](0));
    for (int k = 1; k <= base.num_sources; ++k) {
      add_series("Source-" + std::to_string(k), sample.theta[k](0));
    }
    PlotSeries target_points{"Target-Samples", setting, {}};
    for (int i = 0; i < sample.target.size(); ++i) {
      target_points.points.push_back({sample.target.rows()(i, 0), 0.0});
    }
    set.plots.push_back(std::move(target_points));
  }
  return set;
}

// ---------------------------------------------------------------------------

double OracleMseClosedForm(int dim, double sigma, int n0, int n,
                           int num_relevant, double tau) {
  const double total = n0 + static_cast<double>(n) * num_relevant;
  return dim * sigma * sigma / total +
         dim * tau * tau * static_cast<double>(n) * n * num_relevant /
             (total * total);
}

double FixedWeightMse(const Vector& theta0,
                      const std::vector<Vector>& source_theta,
                      const Vector& weights, double sigma, int n0, int n) {
  const int d = static_cast<int>(theta0.size());
  double total = n0, effective = n0;
  Vector bias = Vector::Zero(d);
  for (size_t k = 0; k < source_theta.size(); ++k) {
    const double w = weights(static_cast<Eigen::Index>(k));
    total += n * w;
    effective += n * w * w;
    bias += w * n * (source_theta[k] - theta0);
  }
  bias /= total;
  return d * sigma * sigma * effective / (total * total) + bias.squaredNorm();
}

ReportSet OracleMseCheck(const OracleMseConfig& config) {
  if (config.replications < 1000) {
    throw Error(ErrorCode::kInvalidConfiguration,
                "oracle-mse needs at least 1000 replications");
  }
  if (config.dim < 1 || config.num_relevant < 1 || config.n0 < 1 ||
      config.n < 1 || !(config.sigma > 0.0)) {
    throw Error(ErrorCode::kInvalidConfiguration, "invalid oracle-mse config");
  }
  ReportSet set;
  set.name = "oracle_mse";
  set.config = {{"dim", config.dim},
                {"sigma", config.sigma},
                {"n0", config.n0},
                {"n", config.n},
                {"num_relevant", config.num_relevant},
                {"taus", config.taus},
                {"replications", config.replications},
                {"fixed_weight_cases", config.fixed_weight_cases},
                {"num_irrelevant", config.num_irrelevant},
                {"null_gen", NullGenJson(config.null_gen)},
                {"seed", config.seed}};
  const int d = config.dim;
  const Vector theta0 = Vector::Zero(d);
  const auto summarize = [](const BenchReport& report, double closed) {
    const double se = report.standard_error();
    return ordered_json{{"closed_form", closed},
                        {"mc_mean", report.mean()},
                        {"mc_stderr", se},
                        {"z", se > 0 ? (report.mean() - closed) / se : 0.0}};
  };

  set.details["oracle"] = ordered_json::array();
  for (size_t ti = 0; ti < config.taus.size(); ++ti) {
    const double tau = config.taus[ti];
    if (!(tau >= 0.0)) {
      throw Error(ErrorCode::kInvalidConfiguration, "tau must be >= 0");
    }
    BenchReport report{"Oracle", "MSE", Setting("tau", tau),
                       std::vector<double>(config.replications)};
    ParallelFor(config.replications, config.jobs, [&](int r) {
      std::mt19937_64 rng(DeriveSeed(config.seed, 100 + ti, r));
      Vector sum = config.n0 * DrawSampleMean(theta0, config.sigma, config.n0, rng);
      for (int k = 0; k < config.num_relevant; ++k) {
        const Vector theta_k = theta0 + tau * StandardNormal(d, rng);
        sum += config.n * DrawSampleMean(theta_k, config.sigma, config.n, rng);
      }
      const double total =
          config.n0 + static_cast<double>(config.n) * config.num_relevant;
      report.values[r] = (sum / total - theta0).squaredNorm();
    });
    const double closed =
        OracleMseClosedForm(d, config.sigma, config.n0, config.n,
                            config.num_relevant, tau);
    ordered_json entry = summarize(report, closed);
    entry["tau"] = tau;
    set.details["oracle"].push_back(std::move(entry));
    set.reports.push_back(std::move(report));
  }

  HierarchicalSpec spec;
  spec.num_sources = config.num_relevant + config.num_irrelevant;
  spec.relevant.clear();
  for (int k = 1; k <= config.num_relevant; ++k) spec.relevant.push_back(k);
  spec.theta0 = theta0;
  spec.tau = config.taus.empty() ? 0.0 : config.taus.back();
  spec.null_gen = config.null_gen;
  spec.sigma = config.sigma;
  spec.n0 = config.n0;
  spec.n = config.n;
  ValidateHierarchicalSpec(spec);
  set.details["fixed_weight"] = ordered_json::array();
  for (int c = 0; c < config.fixed_weight_cases; ++c) {
    std::mt19937_64 setup(DeriveSeed(config.seed, 200, c));
    const std::vector<Vector> theta = DrawSourceParameters(spec, setup);
    const std::vector<Vector> source_theta(theta.begin() + 1, theta.end());
    std::uniform_real_distribution<double> unit;
    Vector weights(spec.num_sources);
    for (int k = 0; k < spec.num_sources; ++k) weights(k) = unit(setup);

    const double total = config.n0 + config.n * weights.sum();
    BenchReport report{"Fixed-Weight", "MSE", "case=" + std::to_string(c),
                       std::vector<double>(config.replications)};
    ParallelFor(config.replications, config.jobs, [&](int r) {
      std::mt19937_64 rng(DeriveSeed(config.seed, 300 + c, r));
      Vector sum = config.n0 * DrawSampleMean(theta0, config.sigma, config.n0, rng);
      for (int k = 0; k < spec.num_sources; ++k) {
        sum += weights(k) * config.n *
               DrawSampleMean(source_theta[k], config.sigma, config.n, rng);
      }
      report.values[r] = (sum / total - theta0).squaredNorm();
    });
    ordered_json entry = summarize(
        report, FixedWeightMse(theta0, source_theta, weights, config.sigma,
                               config.n0, config.n));
    entry["weights"] = ToJson(weights);
    set.details["fixed_weight"].push_back(std::move(entry));
    set.reports.push_back(std::move(report));
  }
  return set;
}

// ---------------------------------------------------------------------------

ReportSet DichotomyCheck(const DichotomyConfig& config) {
  if (config.num_relevant < 0 || config.num_irrelevant < 0 ||
      config.num_relevant + config.num_irrelevant < 1 || config.dim < 1 ||
      config.replications < 1 || config.n_sweep.empty() || config.n0 < 1) {
    throw Error(ErrorCode::kInvalidConfiguration, "invalid dichotomy config");
  }
  for (double p : config.priors) {
    if (!(p > 0.0 && p < 1.0)) {
      throw Error(ErrorCode::kInvalidConfiguration, "priors must lie in (0,1)");
    }
  }
  std::vector<int> sweep = config.n_sweep;
  if (!std::is_sorted(sweep.begin(), sweep.end()) || sweep.front() < 1) {
    throw Error(ErrorCode::kInvalidConfiguration,
                "n_sweep must be positive and ascending");
  }
  ReportSet set;
  set.name = "dichotomy";
  set.config = {{"dim", config.dim},
                {"num_relevant", config.num_relevant},
                {"num_irrelevant", config.num_irrelevant},
                {"shift", config.shift},
                {"sigma", config.sigma},
                {"n0", config.n0},
                {"n_sweep", config.n_sweep},
                {"priors", config.priors},
                {"replications", config.replications},
                {"relevant_floor", config.relevant_floor},
                {"irrelevant_ceiling", config.irrelevant_ceiling},
                {"null", NullKindName(config.null_spec.kind)},
                {"seed", config.seed}};

  const int d = config.dim;
  const int num_sources = config.num_relevant + config.num_irrelevant;
  const Vector theta0 = Vector::Zero(d);
  Vector offset = Vector::Zero(d);
  offset(0) = config.shift * config.sigma;
  const GaussianMeanModel model = GaussianMeanModel::Isotropic(d, config.sigma);
  const int num_n = static_cast<int>(sweep.size());
  EmConfig em;
  em.null_spec = config.null_spec;

  set.details["priors"] = ordered_json::array();
  for (double prior : config.priors) {
    // weights[r][i][k]: replication r, sweep entry i, source k.
    std::vector<std::vector<Vector>> weights(config.replications);
    ParallelFor(config.replications, config.jobs, [&](int r) {
      std::mt19937_64 rng(DeriveSeed(config.seed, 500, r));
      const Dataset target = DrawGaussian(theta0, config.sigma, config.n0, rng);
      std::vector<Dataset> full;
      for (int k = 0; k < num_sources; ++k) {
        const Vector mean = k < config.num_relevant ? theta0 : theta0 + offset;
        full.push_back(DrawGaussian(mean, config.sigma, sweep.back(), rng));
      }
      const Vector pi = Vector::Constant(num_sources, prior);
      for (int n : sweep) {
        std::vector<Dataset> sources;
        for (const Dataset& f : full) sources.push_back(f.Head(n));
        const SufficientStats stats =
            SufficientStats::Compute(model, target, sources, em.null_spec);
        EmState state;
        state.theta = theta0;
        state.weights = pi;
        state.beta = Vector::Ones(num_sources);
        state.t = 1;
        weights[r].push_back(EStep(state, stats, pi, em));
      }
    });

    ordered_json entry = {{"prior", prior}};
    ordered_json medians = ordered_json::array();
    bool relevant_monotone = true;
    for (int k = 0; k < num_sources; ++k) {
      const bool relevant = k < config.num_relevant;
      const std::string method =
          (relevant ? "relevant-" : "irrelevant-") + std::to_string(k + 1);
      std::vector<double> curve;
      for (int i = 0; i < num_n; ++i) {
        BenchReport report{method, "weight",
                           Setting("prior", prior) + ";N=" +
                               std::to_string(sweep[i]),
                           {}};
        for (int r = 0; r < config.replications; ++r) {
          report.values.push_back(weights[r][i](k));
        }
        curve.push_back(Median(report.values));
        set.reports.push_back(std::move(report));
      }
      if (relevant) {
        for (int i = 1; i < num_n; ++i) {
          relevant_monotone = relevant_monotone && curve[i] >= curve[i - 1];
        }
      }
      medians.push_back({{"source", k + 1},
                         {"relevant", relevant},
                         {"median_weight", curve}});
    }
    int committed = 0;
    for (int r = 0; r < config.replications; ++r) {
      bool ok = true;
      for (int k = 0; k < num_sources; ++k) {
        const double w = weights[r][num_n - 1](k);
        ok = ok && (k < config.num_relevant ? w >= config.relevant_floor
                                            : w <= config.irrelevant_ceiling);
      }
      committed += ok;
    }
    entry["medians"] = std::move(medians);
    entry["relevant_median_nondecreasing"] = relevant_monotone;
    entry["terminal_committed"] = committed;
    entry["replications"] = config.replications;
    set.details["priors"].push_back(std::move(entry));
  }
  return set;
}

// ---------------------------------------------------------------------------

ReportSet ConsistencyCheck(const ConsistencyConfig& config) {
  if (config.dim < 1 || config.n < 1 || config.replications < 1 ||
      config.n0_sweep.empty() || !(config.sigma > 0.0)) {
    throw Error(ErrorCode::kInvalidConfiguration, "invalid consistency config");
  }
  ValidateEmConfig(config.em);
  ReportSet set;
  set.name = "consistency";
  set.config = {{"dim", config.dim},
                {"shift", config.shift},
                {"sigma", config.sigma},
                {"n", config.n},
                {"n0_sweep", config.n0_sweep},
                {"adversarial_pi", config.adversarial_pi},
                {"relevant_pi", config.relevant_pi},
                {"replications", config.replications},
                {"em", EmConfigJson(config.em)},
                {"seed", config.seed}};
  const int d = config.dim;
  const Vector theta0 = Vector::Zero(d);
  Vector offset = Vector::Zero(d);
  offset(0) = config.shift * config.sigma;
  const GaussianMeanModel model = GaussianMeanModel::Isotropic(d, config.sigma);
  Vector pi(2);
  pi << config.relevant_pi, config.adversarial_pi;
  const int num_n0 = static_cast<int>(config.n0_sweep.size());
  const double bound = 5.0 * config.sigma *
                       std::sqrt(d / static_cast<double>(config.n0_sweep.back()));

  set.details["variants"] = ordered_json::array();
  for (MStepVariant variant :
       {MStepVariant::kExactHessianReuse, MStepVariant::kSmallTauSurrogate}) {
    EmConfig em = config.em;
    em.variant = variant;
    std::vector<std::vector<double>> errors(
        num_n0, std::vector<double>(config.replications));
    ParallelFor(config.replications, config.jobs, [&](int r) {
      std::mt19937_64 rng(DeriveSeed(config.seed, 600, r));
      std::vector<Dataset> sources;
      sources.push_back(DrawGaussian(theta0, config.sigma, config.n, rng));
      sources.push_back(DrawGaussian(theta0 + offset, config.sigma, config.n, rng));
      for (int i = 0; i < num_n0; ++i) {
        std::mt19937_64 target_rng(DeriveSeed(config.seed, 601 + i, r));
        const Dataset target =
            DrawGaussian(theta0, config.sigma, config.n0_sweep[i], target_rng);
        const EmResult result = RunEm(model, target, sources, pi, em);
        errors[i][r] = (result.state.theta - theta0).norm();
      }
    });
    std::vector<double> medians;
    for (int i = 0; i < num_n0; ++i) {
      medians.push_back(Median(errors[i]));
      set.reports.push_back({std::string(MStepVariantName(variant)),
                             "error_norm",
                             "N0=" + std::to_string(config.n0_sweep[i]),
                             errors[i]});
    }
    bool decreasing = true;
    for (int i = 1; i < num_n0; ++i) {
      decreasing = decreasing && medians[i] < medians[i - 1];
    }
    set.details["variants"].push_back(
        {{"variant", MStepVariantName(variant)},
         {"median_error", medians},
         {"strictly_decreasing", decreasing},
         {"bound", bound},
         {"final_within_bound", medians.back() <= bound}});
  }
  return set;
}

}  // namespace lipem
