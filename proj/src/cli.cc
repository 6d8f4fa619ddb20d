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

#include "lipem/cli.h"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>

#include "CLI11.hpp"
#include "lipem/io.h"
#include "lipem/likelihood.h"
#include "lipem/log.h"
#include "lipem/report.h"

namespace lipem {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Strict config reading

class Section {
 public:
  Section(const json& value, std::string path)
      : value_(value), path_(std::move(path)) {
    if (!value_.is_object()) {
      throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }
  }

  std::string KeyPath(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json* Find(const std::string& key) {
    seen_.insert(key);
    auto it = value_.find(key);
    return it == value_.end() ? nullptr : &*it;
  }

  void Get(const std::string& key, double* out) {
    if (const json* v = Find(key)) {
      if (!v->is_number()) throw ConfigError(KeyPath(key), "expected a number");
      *out = v->get<double>();
    }
  }
  void Get(const std::string& key, int* out) {
    if (const json* v = Find(key)) {
      if (!v->is_number_integer()) {
        throw ConfigError(KeyPath(key), "expected an integer");
      }
      *out = v->get<int>();
    }
  }
  void Get(const std::string& key, std::uint64_t* out) {
    if (const json* v = Find(key)) {
      if (!v->is_number_unsigned()) {
        throw ConfigError(KeyPath(key), "expected a nonnegative integer");
      }
      *out = v->get<std::uint64_t>();
    }
  }
  void Get(const std::string& key, bool* out) {
    if (const json* v = Find(key)) {
      if (!v->is_boolean()) throw ConfigError(KeyPath(key), "expected a boolean");
      *out = v->get<bool>();
    }
  }
  void Get(const std::string& key, std::string* out) {
    if (const json* v = Find(key)) {
      if (!v->is_string()) throw ConfigError(KeyPath(key), "expected a string");
      *out = v->get<std::string>();
    }
  }
  void Get(const std::string& key, std::vector<int>* out) {
    if (const json* v = Find(key)) {
      if (!v->is_array()) throw ConfigError(KeyPath(key), "expected an array");
      out->clear();
      for (const json& e : *v) {
        if (!e.is_number_integer()) {
          throw ConfigError(KeyPath(key), "expected integers");
        }
        out->push_back(e.get<int>());
      }
    }
  }
  void Get(const std::string& key, std::vector<double>* out) {
    if (const json* v = Find(key)) {
      if (!v->is_array()) throw ConfigError(KeyPath(key), "expected an array");
      out->clear();
      for (const json& e : *v) {
        if (!e.is_number()) throw ConfigError(KeyPath(key), "expected numbers");
        out->push_back(e.get<double>());
      }
    }
  }

  template <typename F>
  void Child(const std::string& key, F read) {
    if (const json* v = Find(key)) {
      Section child(*v, KeyPath(key));
      read(child);
      child.Finish();
    }
  }

  void Finish() const {
    for (auto it = value_.begin(); it != value_.end(); ++it) {
      if (!seen_.contains(it.key())) {
        throw ConfigError(KeyPath(it.key()), "unknown key");
      }
    }
  }

 private:
  const json& value_;
  std::string path_;
  std::set<std::string> seen_;
};

MStepVariant ParseVariant(const std::string& s, const std::string& key) {
  if (s == "exact_hessian_reuse" || s == "exact") {
    return MStepVariant::kExactHessianReuse;
  }
  if (s == "small_tau_surrogate" || s == "surrogate") {
    return MStepVariant::kSmallTauSurrogate;
  }
  throw ConfigError(key, "unknown variant '" + s + "'");
}

TemperingMode ParseTempering(const std::string& s, const std::string& key) {
  if (s == "trace_exact") return TemperingMode::kTraceExact;
  if (s == "fisher_ratio") return TemperingMode::kFisherRatio;
  throw ConfigError(key, "unknown tempering mode '" + s + "'");
}

NullKind ParseNull(const std::string& s, const std::string& key) {
  if (s == "empirical_bayes_mixture") return NullKind::kEmpiricalBayesMixture;
  if (s == "parametric_pooled") return NullKind::kParametricPooled;
  if (s == "fixed") return NullKind::kFixed;
  throw ConfigError(key, "unknown null kind '" + s + "'");
}

template <typename F>
void Validated(const std::string& key, F check) {
  try {
    check();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kInvalidConfiguration) throw;
    throw ConfigError(key, e.what());
  }
}

void ReadEm(Section& s, EmConfig* em) {
  s.Get("tau", &em->tau);
  s.Get("nu", &em->nu);
  std::string text;
  if (s.Find("variant")) {
    s.Get("variant", &text);
    em->variant = ParseVariant(text, s.KeyPath("variant"));
  }
  if (s.Find("null")) {
    s.Get("null", &text);
    em->null_spec.kind = ParseNull(text, s.KeyPath("null"));
  }
  if (s.Find("fixed_null")) {
    std::vector<double> table;
    s.Get("fixed_null", &table);
    em->null_spec.fixed_log_density =
        Eigen::Map<const Vector>(table.data(), static_cast<Eigen::Index>(table.size()));
  }
  s.Get("max_iters", &em->max_iters);
  s.Get("tol", &em->tol);
  s.Get("patience", &em->patience);
  if (s.Find("tempering")) {
    s.Get("tempering", &text);
    em->tempering_mode = ParseTempering(text, s.KeyPath("tempering"));
  }
  s.Get("init_at_target_mle", &em->init_at_target_mle);
  if (const json* v = s.Find("beta_cap")) {
    if (v->is_null()) {
      em->beta_cap.reset();
    } else {
      double cap = 0.0;
      s.Get("beta_cap", &cap);
      em->beta_cap = cap;
    }
  }
  Validated(s.KeyPath(""), [&] { ValidateEmConfig(*em); });
}

void ReadNullGen(Section& s, NullGenerator* g) {
  if (const json* v = s.Find("null_direction")) {
    if (v->is_null()) {
      g->direction.reset();
    } else {
      std::vector<double> direction;
      s.Get("null_direction", &direction);
      g->direction = Eigen::Map<const Vector>(
          direction.data(), static_cast<Eigen::Index>(direction.size()));
    }
  }
  s.Get("null_axis_aligned", &g->axis_aligned);
  s.Get("null_first_axis_sign", &g->first_axis_sign);
  s.Get("null_min_radius", &g->min_radius);
  s.Get("null_max_radius", &g->max_radius);
  s.Get("null_spread", &g->spread);
}

void ReadLip(Section& s, LipFitOptions* lip) {
  s.Get("p0", &lip->p0);
  s.Get("eps", &lip->eps);
  s.Get("tol", &lip->tol);
  s.Get("max_iters", &lip->max_iters);
  if (!(lip->p0 > 0.0 && lip->p0 < 1.0)) throw ConfigError(s.KeyPath("p0"), "p0 must lie in (0, 1)");
  if (!(lip->eps > 0.0)) throw ConfigError(s.KeyPath("eps"), "eps must be > 0");
  if (!(lip->tol > 0.0)) throw ConfigError(s.KeyPath("tol"), "tol must be > 0");
}

}  // namespace

RunConfig ParseRunConfig(const json& document) {
  RunConfig c;
  Section root(document, "");
  root.Get("seed", &c.seed);
  root.Get("out", &c.out);
  root.Get("jobs", &c.jobs);
  if (c.jobs < 1) throw ConfigError("jobs", "jobs must be >= 1");
  root.Child("em", [&](Section& s) { ReadEm(s, &c.em); });
  root.Child("lip", [&](Section& s) { ReadLip(s, &c.lip); });
  root.Child("model", [&](Section& s) {
    s.Get("kind", &c.model.kind);
    if (c.model.kind != "gaussian" && c.model.kind != "spline") {
      throw ConfigError(s.KeyPath("kind"), "expected 'gaussian' or 'spline'");
    }
    s.Get("sigma", &c.model.sigma);
    s.Get("num_knots", &c.model.num_knots);
    s.Get("knot_lo", &c.model.knot_lo);
    s.Get("knot_hi", &c.model.knot_hi);
    s.Get("ridge", &c.model.ridge);
    s.Get("noise_variance", &c.model.noise_variance);
  });
  root.Child("gaussian", [&](Section& s) {
    GaussianExperimentConfig& g = c.gaussian;
    s.Get("dims", &g.dims);
    s.Get("num_sources", &g.spec.num_sources);
    s.Get("relevant", &g.spec.relevant);
    s.Get("tau", &g.spec.tau);
    s.Get("sigma", &g.spec.sigma);
    s.Get("n0", &g.spec.n0);
    s.Get("n", &g.spec.n);
    ReadNullGen(s, &g.spec.null_gen);
    s.Get("replications", &g.replications);
    s.Get("pi_relevant", &g.pi_relevant);
    s.Get("pi_other", &g.pi_other);
    s.Get("p0", &g.p0);
    s.Get("plot_points", &g.plot_points);
    s.Child("em", [&](Section& e) { ReadEm(e, &g.em); });
    Validated(s.KeyPath(""), [&] { ValidateHierarchicalSpec(g.spec); });
  });
  root.Child("oracle_mse", [&](Section& s) {
    OracleMseConfig& o = c.oracle_mse;
    s.Get("dim", &o.dim);
    s.Get("sigma", &o.sigma);
    s.Get("n0", &o.n0);
    s.Get("n", &o.n);
    s.Get("num_relevant", &o.num_relevant);
    s.Get("taus", &o.taus);
    s.Get("replications", &o.replications);
    s.Get("fixed_weight_cases", &o.fixed_weight_cases);
    s.Get("num_irrelevant", &o.num_irrelevant);
    ReadNullGen(s, &o.null_gen);
  });
  root.Child("dichotomy", [&](Section& s) {
    DichotomyConfig& d = c.dichotomy;
    s.Get("dim", &d.dim);
    s.Get("num_relevant", &d.num_relevant);
    s.Get("num_irrelevant", &d.num_irrelevant);
    s.Get("shift", &d.shift);
    s.Get("sigma", &d.sigma);
    s.Get("n0", &d.n0);
    s.Get("n_sweep", &d.n_sweep);
    s.Get("priors", &d.priors);
    s.Get("replications", &d.replications);
    s.Get("relevant_floor", &d.relevant_floor);
    s.Get("irrelevant_ceiling", &d.irrelevant_ceiling);
    if (s.Find("null")) {
      std::string text;
      s.Get("null", &text);
      d.null_spec.kind = ParseNull(text, s.KeyPath("null"));
    }
  });
  root.Child("consistency", [&](Section& s) {
    ConsistencyConfig& k = c.consistency;
    s.Get("dim", &k.dim);
    s.Get("shift", &k.shift);
    s.Get("sigma", &k.sigma);
    s.Get("n", &k.n);
    s.Get("n0_sweep", &k.n0_sweep);
    s.Get("adversarial_pi", &k.adversarial_pi);
    s.Get("relevant_pi", &k.relevant_pi);
    s.Get("replications", &k.replications);
    s.Child("em", [&](Section& e) { ReadEm(e, &k.em); });
  });
  root.Child("cmapss", [&](Section& s) {
    CmapssConfig& m = c.cmapss;
    std::string path;
    s.Get("data", &path);
    if (!path.empty()) m.data_path = path;
    s.Get("lip", &m.lip_source);
    s.Get("cutoffs", &m.cutoffs);
    s.Get("engines", &m.engines);
    s.Get("num_knots", &m.num_knots);
    s.Get("knot_lo", &m.knot_lo);
    s.Get("knot_hi", &m.knot_hi);
    s.Get("baseline_ridge", &m.baseline_ridge);
    s.Get("em_ridge", &m.em_ridge);
    s.Get("p0", &m.p0);
    s.Get("lip_eps", &m.lip_fit.eps);
    s.Child("em", [&](Section& e) { ReadEm(e, &m.em); });
  });
  root.Child("judge", [&](Section& s) {
    TransportConfig& t = c.judge;
    s.Get("url", &t.base_url);
    s.Get("path", &t.path);
    s.Get("model", &t.model);
    s.Get("temperature", &t.temperature);
    s.Get("max_retries", &t.max_retries);
    s.Get("fire_interval", &t.fire_interval_seconds);
    s.Get("timeout", &t.timeout_seconds);
  });
  root.Child("elicit", [&](Section& s) {
    s.Get("queries", &c.elicit.queries);
    s.Get("sizes", &c.elicit.sizes);
    std::uint64_t budget = c.elicit.byte_budget;
    s.Get("byte_budget", &budget);
    c.elicit.byte_budget = static_cast<size_t>(budget);
  });
  root.Finish();
  return c;
}

RunConfig LoadRunConfig(const std::string& path) {
  const std::string text = ReadTextFile(path);
  json document;
  try {
    document = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  return ParseRunConfig(document);
}

std::string FormatErrorLine(const Error& error) {
  std::string message = error.what();
  std::replace(message.begin(), message.end(), '\n', ' ');
  std::string line = "error: code=" + std::string(ErrorCodeName(error.code()));
  if (const auto* config = dynamic_cast<const ConfigError*>(&error)) {
    line += " key=" + config->key();
  }
  return line + " message=" + message;
}

// ---------------------------------------------------------------------------
// Dispatch

namespace {

// Command-line values applied on top of the config file when given.
class Overrides {
 public:
  template <typename T, typename F>
  CLI::Option* Add(CLI::App* app, const std::string& name,
                   const std::string& help, F apply) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(name, *value, help);
    entries_.push_back({opt, [value, apply](RunConfig& c) { apply(c, *value); }});
    return opt;
  }

  void Apply(RunConfig& c) const {
    for (const Entry& e : entries_) {
      if (e.option->count() > 0) e.apply(c);
    }
  }

 private:
  struct Entry {
    CLI::Option* option;
    std::function<void(RunConfig&)> apply;
  };
  std::vector<Entry> entries_;
};

fs::path OutputPath(const RunConfig& c, const std::string& given,
                    const std::string& fallback) {
  fs::path path = given.empty() ? fs::path(c.out) / fallback : fs::path(given);
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) {
      throw Error(ErrorCode::kIo, "cannot create " +
                                      path.parent_path().string() + ": " +
                                      ec.message());
    }
  }
  return path;
}

int MaxSourceIndex(const ElicitationSet& records) {
  int k = 0;
  for (const ChoiceRecord& r : records) {
    for (int j : r.subgroup) k = std::max(k, j);
  }
  return k;
}

void AddEmFlags(CLI::App* app, Overrides* o) {
  o->Add<double>(app, "--tau", "relevant-cluster spread",
                 [](RunConfig& c, double v) { c.em.tau = v; });
  o->Add<double>(app, "--nu", "tempering rate",
                 [](RunConfig& c, double v) { c.em.nu = v; });
  o->Add<std::string>(app, "--variant",
                      "exact_hessian_reuse | small_tau_surrogate",
                      [](RunConfig& c, const std::string& v) {
                        c.em.variant = ParseVariant(v, "variant");
                      });
  o->Add<std::string>(app, "--null",
                      "empirical_bayes_mixture | parametric_pooled | fixed",
                      [](RunConfig& c, const std::string& v) {
                        c.em.null_spec.kind = ParseNull(v, "null");
                      });
  o->Add<std::string>(app, "--fixed-null",
                      "file with one null log-density per source",
                      [](RunConfig& c, const std::string& v) {
                        const Dataset table = ReadDatasetFile(v);
                        const Matrix& m = table.rows();
                        c.em.null_spec.fixed_log_density =
                            Eigen::Map<const Vector>(m.data(), m.size());
                      });
  o->Add<std::string>(app, "--tempering", "trace_exact | fisher_ratio",
                      [](RunConfig& c, const std::string& v) {
                        c.em.tempering_mode = ParseTempering(v, "tempering");
                      });
  o->Add<int>(app, "--max-iters", "EM iteration cap",
              [](RunConfig& c, int v) { c.em.max_iters = v; });
  o->Add<double>(app, "--tol", "weight-change tolerance",
                 [](RunConfig& c, double v) { c.em.tol = v; });
  o->Add<int>(app, "--patience", "consecutive iterations under tol",
              [](RunConfig& c, int v) { c.em.patience = v; });
  o->Add<double>(app, "--beta-cap", "upper bound on tempering values",
                 [](RunConfig& c, double v) { c.em.beta_cap = v; });
}

Lip PriorForRun(const std::string& source, int num_sources, double p0) {
  if (source.empty() || source == "uniform") return Lip::Uniform(num_sources, p0);
  Lip lip = ReadPriorFile(source).lip;
  if (lip.num_sources() != num_sources) {
    throw ConfigError("lip", "prior has K=" + std::to_string(lip.num_sources()) +
                                 " but " + std::to_string(num_sources) +
                                 " sources were given");
  }
  return lip;
}

void PrintPaths(std::ostream& out, const std::vector<fs::path>& paths) {
  for (const fs::path& p : paths) out << "wrote " << p.string() << "\n";
}

}  // namespace

int Dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Language-induced prior and tempered EM for multi-source "
               "domain adaptation",
               "lipem"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  Overrides global;
  app.add_option("--config", config_path, "strict JSON run configuration");
  global.Add<std::uint64_t>(&app, "--seed", "master seed (default 42)",
                            [](RunConfig& c, std::uint64_t v) { c.seed = v; });
  global.Add<std::string>(&app, "--out", "output directory",
                          [](RunConfig& c, const std::string& v) { c.out = v; });
  global.Add<int>(&app, "--jobs", "parallelism bound",
                  [](RunConfig& c, int v) {
                    if (v < 1) throw ConfigError("jobs", "jobs must be >= 1");
                    c.jobs = v;
                  });

  std::function<int(RunConfig&)> action;
  Overrides local;

  // fit-lip
  CLI::App* fit = app.add_subcommand("fit-lip", "fit worths from a records file");
  std::string fit_records, fit_output;
  int fit_k = 0;
  fit->add_option("--records", fit_records, "elicitation-record file")->required();
  fit->add_option("--num-sources", fit_k, "K (default: largest index seen)");
  fit->add_option("--output", fit_output, "LIP file (default <out>/lip.txt)");
  local.Add<double>(fit, "--p0", "default probability",
                    [](RunConfig& c, double v) { c.lip.p0 = v; });
  local.Add<double>(fit, "--eps", "regularization strength",
                    [](RunConfig& c, double v) { c.lip.eps = v; });
  local.Add<double>(fit, "--lip-tol", "gradient tolerance",
                    [](RunConfig& c, double v) { c.lip.tol = v; });
  fit->callback([&] {
    action = [&](RunConfig& c) {
      const ElicitationSet records = ReadRecordsFile(fit_records);
      const int k = fit_k > 0 ? fit_k : MaxSourceIndex(records);
      if (k < 1) {
        throw ConfigError("num-sources",
                          "cannot infer K from an empty records file");
      }
      for (const ChoiceRecord& r : records) ValidateRecord(r, k);
      const LipFit result = FitLip(records, k, c.lip);
      const fs::path path = OutputPath(c, fit_output, "lip.txt");
      WriteWorthsFile(path, result.worths);
      out << "fit-lip: K=" << k << " records=" << records.size()
          << " iterations=" << result.iterations
          << " gradient_norm=" << FormatDouble(result.gradient_norm) << "\n";
      PrintPaths(out, {path});
      return kExitOk;
    };
  });

  // simulate-oracle
  CLI::App* sim = app.add_subcommand(
      "simulate-oracle", "draw records from planted worths");
  std::string sim_worths, sim_output;
  sim->add_option("--worths", sim_worths, "LIP file with alpha_0..alpha_K")
      ->required();
  sim->add_option("--output", sim_output,
                  "records file (default <out>/records.txt)");
  local.Add<int>(sim, "--queries", "number of subgroup queries",
                 [](RunConfig& c, int v) { c.elicit.queries = v; });
  local.Add<std::vector<int>>(sim, "--sizes", "allowed subgroup sizes",
                              [](RunConfig& c, const std::vector<int>& v) {
                                c.elicit.sizes = v;
                              });
  sim->callback([&] {
    action = [&](RunConfig& c) {
      const PriorFile prior = ReadPriorFile(sim_worths);
      if (!prior.worths) {
        throw ConfigError("worths", "file must list alpha_0..alpha_K");
      }
      std::mt19937_64 rng(c.seed);
      const auto subgroups = SampleSubgroups(prior.worths->num_sources(),
                                             c.elicit.sizes, c.elicit.queries,
                                             rng);
      const ElicitationSet records =
          SimulateRecords(*prior.worths, subgroups, rng);
      const fs::path path = OutputPath(c, sim_output, "records.txt");
      WriteRecordsFile(path, records);
      out << "simulate-oracle: records=" << records.size() << "\n";
      PrintPaths(out, {path});
      return kExitOk;
    };
  });

  // elicit
  CLI::App* elicit = app.add_subcommand("elicit", "query a live judge");
  std::string context_file, replay_file, elicit_output;
  std::vector<std::string> elicit_sources;
  bool offline = false;
  elicit->add_option("--context", context_file, "target description file")
      ->required();
  elicit->add_option("--source", elicit_sources,
                     "source dataset files, in index order")
      ->required();
  elicit->add_option("--replay", replay_file,
                     "replay log (default <out>/replay.jsonl)");
  elicit->add_option("--output", elicit_output,
                     "records file (default <out>/records.txt)");
  elicit->add_flag("--offline", offline, "answer from the replay log only");
  local.Add<int>(elicit, "--queries", "number of subgroup queries",
                 [](RunConfig& c, int v) { c.elicit.queries = v; });
  local.Add<std::vector<int>>(elicit, "--sizes", "allowed subgroup sizes",
                              [](RunConfig& c, const std::vector<int>& v) {
                                c.elicit.sizes = v;
                              });
  elicit->callback([&] {
    action = [&](RunConfig& c) {
      const std::string context = ReadTextFile(context_file);
      std::map<int, std::string> summaries;
      for (size_t k = 0; k < elicit_sources.size(); ++k) {
        summaries[static_cast<int>(k) + 1] = SummarizeDataset(
            ReadDatasetFile(elicit_sources[k]), c.elicit.byte_budget);
      }
      std::mt19937_64 rng(c.seed);
      const auto subgroups =
          SampleSubgroups(static_cast<int>(elicit_sources.size()),
                          c.elicit.sizes, c.elicit.queries, rng);
      ReplayLog log(OutputPath(c, replay_file, "replay.jsonl"));
      const TransportConfig transport_config =
          TransportConfig::FromEnvironment(c.judge);
      HttpTransport http(transport_config);
      LlmJudge judge(offline ? nullptr : &http, transport_config, &log);
      const ElicitResult result =
          Elicit(judge, context, subgroups, summaries, c.jobs);
      const fs::path path = OutputPath(c, elicit_output, "records.txt");
      WriteRecordsFile(path, result.records);
      const JudgeTelemetry t = judge.telemetry();
      out << "elicit: records=" << result.records.size()
          << " skipped=" << result.skipped.size() << " requests=" << t.requests
          << " retries=" << t.retries << " cache_hits=" << t.cache_hits
          << " malformed=" << t.malformed << "\n";
      PrintPaths(out, {path});
      return kExitOk;
    };
  });

  // run-em
  CLI::App* run = app.add_subcommand("run-em", "run LIP-aided EM on datasets");
  std::string target_file, run_lip = "uniform", run_output;
  std::vector<std::string> source_files;
  run->add_option("--target", target_file, "target dataset file")->required();
  run->add_option("--source", source_files, "source dataset files")->required();
  run->add_option("--lip", run_lip, "LIP file or 'uniform'");
  run->add_option("--output", run_output,
                  "EM report (default <out>/em_report.tsv)");
  local.Add<std::string>(run, "--model", "gaussian | spline",
                         [](RunConfig& c, const std::string& v) {
                           if (v != "gaussian" && v != "spline") {
                             throw ConfigError("model",
                                               "expected 'gaussian' or 'spline'");
                           }
                           c.model.kind = v;
                         });
  local.Add<double>(run, "--sigma", "Gaussian noise scale",
                    [](RunConfig& c, double v) { c.model.sigma = v; });
  local.Add<int>(run, "--knots", "number of uniform spline knots",
                 [](RunConfig& c, int v) { c.model.num_knots = v; });
  local.Add<double>(run, "--knot-lo", "first knot",
                    [](RunConfig& c, double v) { c.model.knot_lo = v; });
  local.Add<double>(run, "--knot-hi", "last knot",
                    [](RunConfig& c, double v) { c.model.knot_hi = v; });
  local.Add<double>(run, "--ridge", "spline ridge",
                    [](RunConfig& c, double v) { c.model.ridge = v; });
  local.Add<double>(run, "--noise-variance",
                    "spline noise variance (default: pooled over sources)",
                    [](RunConfig& c, double v) { c.model.noise_variance = v; });
  local.Add<double>(run, "--p0", "uniform prior value",
                    [](RunConfig& c, double v) { c.lip.p0 = v; });
  AddEmFlags(run, &local);
  run->callback([&] {
    action = [&](RunConfig& c) {
      const Dataset target = ReadDatasetFile(target_file);
      std::vector<Dataset> sources;
      for (const std::string& f : source_files) {
        sources.push_back(ReadDatasetFile(f));
      }
      const int k = static_cast<int>(sources.size());
      const Lip lip = PriorForRun(run_lip, k, c.lip.p0);
      std::unique_ptr<LikelihoodModel> model;
      if (c.model.kind == "gaussian") {
        Validated("model", [&] {
          model = std::make_unique<GaussianMeanModel>(GaussianMeanModel::Isotropic(
              target.observation_dim(), c.model.sigma));
        });
      } else {
        std::unique_ptr<SplineGlmModel> spline;
        Validated("model", [&] {
          spline = std::make_unique<SplineGlmModel>(
              UniformKnots(c.model.num_knots, c.model.knot_lo, c.model.knot_hi),
              1.0, c.model.ridge);
        });
        const double variance = c.model.noise_variance > 0
                                    ? c.model.noise_variance
                                    : PooledResidualVariance(*spline, sources);
        model = std::make_unique<SplineGlmModel>(spline->WithNoiseVariance(variance));
      }
      if (target.observation_dim() != model->observation_dim()) {
        throw Error(ErrorCode::kInvalidConfiguration,
                    "target rows have " + std::to_string(target.observation_dim()) +
                        " columns; the model expects " +
                        std::to_string(model->observation_dim()));
      }
      const EmResult result = RunEm(*model, target, sources, lip.pi, c.em);
      const fs::path path = OutputPath(c, run_output, "em_report.tsv");
      WriteEmReport(path, c.em, result);
      out << "run-em: converged=" << (result.report.converged ? "true" : "false")
          << " iterations=" << result.report.iterations << "\n";
      out << "theta=";
      for (Eigen::Index i = 0; i < result.state.theta.size(); ++i) {
        out << (i ? "," : "") << FormatDouble(result.state.theta(i));
      }
      out << "\nweights=";
      for (Eigen::Index i = 0; i < result.state.weights.size(); ++i) {
        out << (i ? "," : "") << FormatDouble(result.state.weights(i));
      }
      out << "\n";
      PrintPaths(out, {path});
      return kExitOk;
    };
  });

  // bench
  CLI::App* bench = app.add_subcommand("bench", "experiments and theory checks");
  bench->require_subcommand(1);
  const auto write_set = [&](RunConfig& c, const ReportSet& set) {
    PrintPaths(out, WriteReportSet(set, c.out));
    return kExitOk;
  };

  CLI::App* gaussian = bench->add_subcommand("gaussian", "Gaussian-mean experiment");
  local.Add<int>(gaussian, "--replications", "replications per dimension",
                 [](RunConfig& c, int v) { c.gaussian.replications = v; });
  local.Add<std::vector<int>>(gaussian, "--dims", "dimensions to run",
                              [](RunConfig& c, const std::vector<int>& v) {
                                c.gaussian.dims = v;
                              });
  gaussian->callback([&] {
    action = [&](RunConfig& c) {
      c.gaussian.spec.seed = c.seed;
      c.gaussian.jobs = c.jobs;
      return write_set(c, GaussianExperiment(c.gaussian));
    };
  });

  CLI::App* oracle = bench->add_subcommand("oracle-mse", "oracle MSE identities");
  local.Add<int>(oracle, "--replications", "Monte Carlo replications",
                 [](RunConfig& c, int v) { c.oracle_mse.replications = v; });
  local.Add<std::vector<double>>(oracle, "--tau", "spread values",
                                 [](RunConfig& c, const std::vector<double>& v) {
                                   c.oracle_mse.taus = v;
                                 });
  oracle->callback([&] {
    action = [&](RunConfig& c) {
      c.oracle_mse.seed = c.seed;
      c.oracle_mse.jobs = c.jobs;
      return write_set(c, OracleMseCheck(c.oracle_mse));
    };
  });

  CLI::App* dichotomy = bench->add_subcommand("dichotomy", "weight dichotomy");
  local.Add<int>(dichotomy, "--replications", "replications",
                 [](RunConfig& c, int v) { c.dichotomy.replications = v; });
  local.Add<std::string>(dichotomy, "--null", "null kind",
                         [](RunConfig& c, const std::string& v) {
                           c.dichotomy.null_spec.kind = ParseNull(v, "null");
                         });
  dichotomy->callback([&] {
    action = [&](RunConfig& c) {
      c.dichotomy.seed = c.seed;
      c.dichotomy.jobs = c.jobs;
      return write_set(c, DichotomyCheck(c.dichotomy));
    };
  });

  CLI::App* consistency =
      bench->add_subcommand("consistency", "consistency in the target size");
  local.Add<int>(consistency, "--replications", "replications",
                 [](RunConfig& c, int v) { c.consistency.replications = v; });
  consistency->callback([&] {
    action = [&](RunConfig& c) {
      c.consistency.seed = c.seed;
      c.consistency.jobs = c.jobs;
      return write_set(c, ConsistencyCheck(c.consistency));
    };
  });

  CLI::App* cmapss = bench->add_subcommand("cmapss", "C-MAPSS FD001 experiment");
  local.Add<std::string>(cmapss, "--data", "train_FD001.txt or its directory",
                         [](RunConfig& c, const std::string& v) {
                           c.cmapss.data_path = v;
                         });
  local.Add<std::string>(cmapss, "--lip", "'uniform', a LIP file or a records file",
                         [](RunConfig& c, const std::string& v) {
                           c.cmapss.lip_source = v;
                         });
  local.Add<std::vector<double>>(cmapss, "--cutoff", "RUL cutoffs",
                                 [](RunConfig& c, const std::vector<double>& v) {
                                   c.cmapss.cutoffs = v;
                                 });
  local.Add<std::vector<int>>(cmapss, "--engines", "target engine ids",
                              [](RunConfig& c, const std::vector<int>& v) {
                                c.cmapss.engines = v;
                              });
  cmapss->callback([&] {
    action = [&](RunConfig& c) {
      if (c.cmapss.data_path.empty()) {
        const char* env = std::getenv("LIPEM_CMAPSS_DIR");
        c.cmapss.data_path = env != nullptr && *env != '\0' ? env : "data";
      }
      c.cmapss.jobs = c.jobs;
      return write_set(c, CmapssExperiment(c.cmapss));
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << app.help();
    std::string message = e.what();
    std::replace(message.begin(), message.end(), '\n', ' ');
    err << "error: code=usage message=" << message << "\n";
    return kExitUsage;
  }

  try {
    RunConfig config = config_path.empty() ? RunConfig{} : LoadRunConfig(config_path);
    global.Apply(config);
    local.Apply(config);
    if (!action) {
      err << app.help();
      err << "error: code=usage message=no subcommand\n";
      return kExitUsage;
    }
    return action(config);
  } catch (const Error& e) {
    err << FormatErrorLine(e) << "\n";
    return e.code() == ErrorCode::kInvalidConfiguration ? kExitConfig
                                                        : kExitFailure;
  } catch (const std::exception& e) {
    std::string message = e.what();
    std::replace(message.begin(), message.end(), '\n', ' ');
    err << "error: code=internal message=" << message << "\n";
    return kExitFailure;
  }
}

int Dispatch(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return Dispatch(args, std::cout, std::cerr);
}

}  // namespace lipem
