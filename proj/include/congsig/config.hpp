// Copyright 2026 The congsig Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/// \file config.hpp
/// Strict parsing of the JSON run configuration.
///
///   {
///     "costs": {"N": 40,
///               "c_A": {"kind": "affine", "intercept": 1.2, "slope": 1},
///               "c_B": {"kind": "reciprocal", "base": 1, "pole": 1.08, "scale": 0.0454}},
///     "population": {"kind": "delays", "atoms": [[1, 1.0]]},
///     "scheme": {"kind": "scalar", "sigma": 0.3},
///     "simulation": {"T": 30, "R": 100, "seed": 1, "initial_allocation": 8},
///     "sweep": {"sigma": {"min": 0.05, "max": 1.5, "step": 0.05}},
///     "output": {"path": "out.csv", "format": "csv"}
///   }
///
/// Unknown keys are rejected. Errors carry the dotted path of the field.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "congsig/cost_model.hpp"
#include "congsig/error.hpp"
#include "congsig/interval_signalling.hpp"
#include "congsig/population.hpp"
#include "congsig/scalar_signalling.hpp"
#include "congsig/simulator.hpp"

namespace congsig {

/// Inclusive arithmetic grid min, min + step, ..., <= max.
struct Grid {
  double min = 0.0;
  double max = 0.0;
  double step = 1.0;

  std::vector<double> values() const {
    std::vector<double> out;
    if (step <= 0.0 || max < min) return {min};
    const auto count = static_cast<long>(std::floor((max - min) / step + 1e-9));
    for (long i = 0; i <= count; ++i) {
      // Snap to 12 significant digits so 0.05 * 6 prints as 0.3.
      const double v = min + static_cast<double>(i) * step;
      const double scale = std::pow(10.0, 11 - std::floor(std::log10(std::max(std::abs(v), 1e-300))));
      out.push_back(v == 0.0 ? 0.0 : std::round(v * scale) / scale);
    }
    return out;
  }
};

struct SweepSection {
  std::optional<std::vector<double>> sigma;
  std::optional<std::vector<double>> delta;
  std::optional<std::vector<double>> gamma;
  std::optional<std::vector<double>> x0;
  std::optional<std::vector<double>> eps;
  std::optional<int> condition_on;  // defaults to the social optimum
};

struct OutputSection {
  std::optional<std::string> path;
  std::optional<std::string> iterates_path;
};

struct RunConfig {
  CostPair pair;
  std::optional<PopulationDistribution> population{};
  std::optional<SchemeConfig> scheme{};
  int horizon = 30;
  int replications = 100;
  std::uint64_t seed = 1;
  std::optional<int> initial_allocation{};
  bool sample_risk_levels = false;
  SweepSection sweep{};
  OutputSection output{};

  /// Simulation config; throws ConfigError if population or scheme is missing.
  SimulationConfig simulation() const {
    if (!population) throw ConfigError("population", "required for simulation");
    if (!scheme) throw ConfigError("scheme", "required for simulation");
    SimulationConfig cfg{pair, *population, *scheme, horizon, initial_allocation,
                         seed, replications, sample_risk_levels};
    validate(cfg);
    return cfg;
  }
};

namespace config_detail {

using json = nlohmann::json;

inline void only_keys(const json& obj, const std::string& where,
                      std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where.empty() ? key : where + "." + key, "unknown key");
  }
}

inline std::string join(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

inline const json& require(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) throw ConfigError(join(where, key), "missing required key");
  return obj.at(key);
}

inline double number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(field, "expected a finite number");
  return d;
}

inline long long integer(const json& v, const std::string& field) {
  if (!v.is_number_integer()) throw ConfigError(field, "expected an integer");
  return v.get<long long>();
}

inline std::string string(const json& v, const std::string& field) {
  if (!v.is_string()) throw ConfigError(field, "expected a string");
  return v.get<std::string>();
}

inline std::vector<double> number_list(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) throw ConfigError(field, "expected a non-empty array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(number(v[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

/// Either an explicit array or {"min", "max", "step"}.
inline std::vector<double> grid(const json& v, const std::string& field) {
  if (v.is_array()) return number_list(v, field);
  only_keys(v, field, {"min", "max", "step"});
  Grid g{number(require(v, field, "min"), join(field, "min")),
         number(require(v, field, "max"), join(field, "max")),
         number(require(v, field, "step"), join(field, "step"))};
  if (!(g.step > 0.0)) throw ConfigError(join(field, "step"), "step must be positive");
  if (g.max < g.min) throw ConfigError(join(field, "max"), "max below min");
  return g.values();
}

inline CostFunction parse_cost(const json& v, const std::string& where, int n) {
  const std::string kind = string(require(v, where, "kind"), join(where, "kind"));
  try {
    if (kind == "affine") {
      only_keys(v, where, {"kind", "intercept", "slope"});
      return CostFunction::affine(number(require(v, where, "intercept"), join(where, "intercept")),
                                  number(require(v, where, "slope"), join(where, "slope")), n);
    }
    if (kind == "reciprocal") {
      only_keys(v, where, {"kind", "base", "pole", "scale"});
      return CostFunction::reciprocal(number(require(v, where, "base"), join(where, "base")),
                                      number(require(v, where, "pole"), join(where, "pole")),
                                      number(require(v, where, "scale"), join(where, "scale")), n);
    }
    if (kind == "tabular") {
      only_keys(v, where, {"kind", "values"});
      return CostFunction::tabular(
          number_list(require(v, where, "values"), join(where, "values")), n);
    }
  } catch (const ConfigError& e) {
    if (e.field().rfind(where, 0) == 0) throw;
    throw ConfigError(e.field().empty() ? where : join(where, e.field()), e.message());
  }
  throw ConfigError(join(where, "kind"), "unknown cost kind '" + kind + "'");
}

inline PopulationDistribution parse_population(const json& v, int n, bool& sampled) {
  const std::string where = "population";
  const std::string kind = string(require(v, where, "kind"), "population.kind");
  if (kind == "risk_uniform") {
    only_keys(v, where, {"kind", "sampling"});
    if (v.contains("sampling")) {
      const std::string s = string(v.at("sampling"), "population.sampling");
      if (s != "stratified" && s != "iid") {
        throw ConfigError("population.sampling", "expected 'stratified' or 'iid'");
      }
      sampled = s == "iid";
    }
    return {RiskUniform{}, n};
  }
  if (kind == "risk_lattice") {
    only_keys(v, where, {"kind"});
    return risk_lattice(n);
  }
  if (kind != "delays" && kind != "risk_discrete") {
    throw ConfigError("population.kind", "unknown population kind '" + kind + "'");
  }
  only_keys(v, where, {"kind", "atoms"});
  const json& atoms = require(v, where, "atoms");
  if (!atoms.is_array() || atoms.empty()) {
    throw ConfigError("population.atoms", "expected a non-empty array of [type, weight]");
  }
  PopulationDistribution dist{DelayClasses{}, n};
  if (kind == "delays") {
    DelayClasses d;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const std::string f = "population.atoms[" + std::to_string(i) + "]";
      if (!atoms[i].is_array() || atoms[i].size() != 2) throw ConfigError(f, "expected [k, weight]");
      d.atoms.push_back({static_cast<int>(integer(atoms[i][0], f + "[0]")),
                         number(atoms[i][1], f + "[1]")});
    }
    dist.kind = d;
  } else {
    RiskDiscrete r;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const std::string f = "population.atoms[" + std::to_string(i) + "]";
      if (!atoms[i].is_array() || atoms[i].size() != 2) {
        throw ConfigError(f, "expected [lambda, weight]");
      }
      r.atoms.push_back({number(atoms[i][0], f + "[0]"), number(atoms[i][1], f + "[1]")});
    }
    dist.kind = r;
  }
  if (auto err = validate(dist)) throw ConfigError(err->field, err->message);
  return dist;
}

inline SchemeConfig parse_scheme(const json& v) {
  const std::string kind = string(require(v, "scheme", "kind"), "scheme.kind");
  if (kind == "scalar") {
    only_keys(v, "scheme", {"kind", "sigma"});
    return ScalarSchemeConfig(number(require(v, "scheme", "sigma"), "scheme.sigma"));
  }
  if (kind == "interval") {
    only_keys(v, "scheme", {"kind", "delta", "gamma"});
    return IntervalSchemeConfig(number(require(v, "scheme", "delta"), "scheme.delta"),
                                number(require(v, "scheme", "gamma"), "scheme.gamma"));
  }
  throw ConfigError("scheme.kind", "unknown scheme kind '" + kind + "'");
}

inline CostPair parse_costs(const json& v) {
  only_keys(v, "costs", {"N", "c_A", "c_B"});
  const long long n = integer(require(v, "costs", "N"), "costs.N");
  if (n < 1 || n > 1000000) throw ConfigError("costs.N", "must lie in 1..1000000");
  const int total = static_cast<int>(n);
  return CostPair(parse_cost(require(v, "costs", "c_A"), "costs.c_A", total),
                  parse_cost(require(v, "costs", "c_B"), "costs.c_B", total));
}

}  // namespace config_detail

/// Parses a run configuration from JSON text. Throws ConfigError.
inline RunConfig parse_run_config(const std::string& text) {
  using namespace config_detail;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a line number for the diagnostic.
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
    throw ConfigError("line " + std::to_string(line), e.what());
  }
  only_keys(root, "", {"costs", "population", "scheme", "simulation", "sweep", "output"});

  RunConfig cfg{.pair = parse_costs(require(root, "", "costs"))};
  const int total = cfg.pair.population_size();
  if (root.contains("population")) {
    cfg.population = parse_population(root.at("population"), total, cfg.sample_risk_levels);
  }
  if (root.contains("scheme")) cfg.scheme = parse_scheme(root.at("scheme"));

  if (root.contains("simulation")) {
    const json& s = root.at("simulation");
    only_keys(s, "simulation", {"T", "R", "seed", "initial_allocation"});
    if (s.contains("T")) {
      const auto t = integer(s.at("T"), "simulation.T");
      if (t < 1 || t > 100000000) throw ConfigError("simulation.T", "must be positive");
      cfg.horizon = static_cast<int>(t);
    }
    if (s.contains("R")) {
      const auto r = integer(s.at("R"), "simulation.R");
      if (r < 1 || r > 100000000) throw ConfigError("simulation.R", "must be positive");
      cfg.replications = static_cast<int>(r);
    }
    if (s.contains("seed")) {
      const json& seed = s.at("seed");
      if (!seed.is_number_unsigned()) throw ConfigError("simulation.seed", "expected an unsigned integer");
      cfg.seed = seed.get<std::uint64_t>();
    }
    if (s.contains("initial_allocation")) {
      const json& init = s.at("initial_allocation");
      if (init.is_string()) {
        if (init.get<std::string>() != "policy-default") {
          throw ConfigError("simulation.initial_allocation", "expected an integer or 'policy-default'");
        }
      } else {
        const auto n0 = integer(init, "simulation.initial_allocation");
        if (n0 < 0 || n0 > total) throw ConfigError("simulation.initial_allocation", "must lie in 0..N");
        cfg.initial_allocation = static_cast<int>(n0);
      }
    }
  }

  if (root.contains("sweep")) {
    const json& s = root.at("sweep");
    only_keys(s, "sweep", {"sigma", "delta", "gamma", "x0", "eps", "condition_on"});
    if (s.contains("sigma")) cfg.sweep.sigma = grid(s.at("sigma"), "sweep.sigma");
    if (s.contains("delta")) cfg.sweep.delta = grid(s.at("delta"), "sweep.delta");
    if (s.contains("gamma")) cfg.sweep.gamma = grid(s.at("gamma"), "sweep.gamma");
    if (s.contains("x0")) cfg.sweep.x0 = number_list(s.at("x0"), "sweep.x0");
    if (s.contains("eps")) cfg.sweep.eps = number_list(s.at("eps"), "sweep.eps");
    if (s.contains("condition_on")) {
      const auto c = integer(s.at("condition_on"), "sweep.condition_on");
      if (c < 0 || c > total) throw ConfigError("sweep.condition_on", "must lie in 0..N");
      cfg.sweep.condition_on = static_cast<int>(c);
    }
  }

  if (root.contains("output")) {
    const json& o = root.at("output");
    only_keys(o, "output", {"path", "format", "iterates_path"});
    if (o.contains("path")) cfg.output.path = string(o.at("path"), "output.path");
    if (o.contains("iterates_path")) {
      cfg.output.iterates_path = string(o.at("iterates_path"), "output.iterates_path");
    }
    if (o.contains("format") && string(o.at("format"), "output.format") != "csv") {
      throw ConfigError("output.format", "only 'csv' is supported");
    }
  }
  return cfg;
}

}  // namespace congsig
