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

/// \file population.hpp
/// Distribution of agent types and its materialization into a roster.
///
/// Two families of types exist: actuation delays k (paired with scalar
/// signalling) and risk levels lambda in [0,1] (paired with interval
/// signalling). Discrete distributions must place an integer number of agents
/// on every atom.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "congsig/error.hpp"
#include "congsig/random.hpp"

namespace congsig {

struct DelayAtom {
  int delay = 1;
  double weight = 0.0;
};

struct RiskAtom {
  double lambda = 0.0;
  double weight = 0.0;
};

struct DelayClasses {
  std::vector<DelayAtom> atoms;
};

struct RiskDiscrete {
  std::vector<RiskAtom> atoms;
};

/// Continuous uniform risk levels over [0,1].
struct RiskUniform {};

using PopulationKind = std::variant<DelayClasses, RiskDiscrete, RiskUniform>;

struct PopulationDistribution {
  PopulationKind kind;
  int population_size = 0;

  bool is_delay() const noexcept { return std::holds_alternative<DelayClasses>(kind); }
  bool is_risk() const noexcept { return !is_delay(); }
};

/// Uniform delays {1, ..., max_delay}; N must be divisible by max_delay.
inline PopulationDistribution uniform_delays(int max_delay, int n) {
  DelayClasses d;
  for (int k = 1; k <= max_delay; ++k) d.atoms.push_back({k, 1.0 / max_delay});
  return {d, n};
}

/// Risk levels {1/N, 2/N, ..., 1} with one agent each.
inline PopulationDistribution risk_lattice(int n) {
  RiskDiscrete r;
  for (int j = 1; j <= n; ++j) r.atoms.push_back({static_cast<double>(j) / n, 1.0 / n});
  return {r, n};
}

struct ValidationError {
  std::string field;
  std::string message;
};

inline constexpr double kWeightSumTolerance = 1e-12;
inline constexpr double kIntegralityTolerance = 1e-9;

namespace detail {

template <class Atom, class TypeOf>
std::optional<ValidationError> validate_atoms(const std::vector<Atom>& atoms, int n,
                                              TypeOf type_of, const char* type_name) {
  if (atoms.empty()) return ValidationError{"population.atoms", "no atoms"};
  double sum = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const auto& atom = atoms[i];
    const std::string where = "population.atoms[" + std::to_string(i) + "]";
    if (!(atom.weight >= 0.0 && atom.weight <= 1.0)) {
      return ValidationError{where, "weight must lie in [0,1]"};
    }
    const double count = atom.weight * n;
    if (std::abs(count - std::round(count)) > kIntegralityTolerance) {
      return ValidationError{where, std::string("mu*N = ") + std::to_string(count) +
                                        " agents is not an integer (" + type_name + "=" +
                                        std::to_string(type_of(atom)) + ")"};
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (type_of(atoms[j]) == type_of(atom)) {
        return ValidationError{where, std::string("duplicate ") + type_name};
      }
    }
    sum += atom.weight;
  }
  if (std::abs(sum - 1.0) > kWeightSumTolerance) {
    return ValidationError{"population.atoms",
                           "weights sum to " + std::to_string(sum) + ", expected 1"};
  }
  return std::nullopt;
}

}  // namespace detail

/// Checks normalization, integrality of mu*N and distinctness of types.
inline std::optional<ValidationError> validate(const PopulationDistribution& dist) {
  if (dist.population_size < 1) return ValidationError{"costs.N", "must be positive"};
  return std::visit(
      [&](const auto& k) -> std::optional<ValidationError> {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, DelayClasses>) {
          for (std::size_t i = 0; i < k.atoms.size(); ++i) {
            if (k.atoms[i].delay < 1) {
              return ValidationError{"population.atoms[" + std::to_string(i) + "]",
                                     "delay must be a positive integer"};
            }
          }
          return detail::validate_atoms(k.atoms, dist.population_size,
                                        [](const DelayAtom& a) { return a.delay; }, "k");
        } else if constexpr (std::is_same_v<K, RiskDiscrete>) {
          for (std::size_t i = 0; i < k.atoms.size(); ++i) {
            if (!(k.atoms[i].lambda >= 0.0 && k.atoms[i].lambda <= 1.0)) {
              return ValidationError{"population.atoms[" + std::to_string(i) + "]",
                                     "lambda must lie in [0,1]"};
            }
          }
          return detail::validate_atoms(k.atoms, dist.population_size,
                                        [](const RiskAtom& a) { return a.lambda; }, "lambda");
        } else {
          return std::nullopt;
        }
      },
      dist.kind);
}

/// Per-agent types, indexed by agent id 0..N-1. Exactly one of the vectors is filled.
struct AgentRoster {
  std::vector<int> delays;
  std::vector<double> risk_levels;

  std::size_t size() const noexcept { return delays.size() + risk_levels.size(); }
};

/// Deterministic roster in ascending type order. RiskUniform is realized by
/// the stratified quantiles (i - 1/2) / N.
inline AgentRoster materialize(const PopulationDistribution& dist) {
  if (auto err = validate(dist)) throw ConfigError(err->field, err->message);
  const int n = dist.population_size;
  AgentRoster roster;
  if (const auto* d = std::get_if<DelayClasses>(&dist.kind)) {
    auto atoms = d->atoms;
    std::ranges::sort(atoms, {}, &DelayAtom::delay);
    for (const auto& a : atoms) {
      roster.delays.insert(roster.delays.end(), static_cast<std::size_t>(std::lround(a.weight * n)),
                           a.delay);
    }
  } else if (const auto* r = std::get_if<RiskDiscrete>(&dist.kind)) {
    auto atoms = r->atoms;
    std::ranges::sort(atoms, {}, &RiskAtom::lambda);
    for (const auto& a : atoms) {
      roster.risk_levels.insert(roster.risk_levels.end(),
                                static_cast<std::size_t>(std::lround(a.weight * n)), a.lambda);
    }
  } else {
    roster.risk_levels.reserve(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) roster.risk_levels.push_back((i - 0.5) / n);
  }
  return roster;
}

/// RiskUniform realized by i.i.d. Uniform[0,1] draws, sorted ascending.
/// Discrete kinds ignore the seed and return materialize(dist).
inline AgentRoster materialize_sampled(const PopulationDistribution& dist, std::uint64_t seed) {
  if (!std::holds_alternative<RiskUniform>(dist.kind)) return materialize(dist);
  if (auto err = validate(dist)) throw ConfigError(err->field, err->message);
  AgentRoster roster;
  auto rng = substream(seed, StreamTag::kPopulation, 0, 0, 0);
  for (int i = 0; i < dist.population_size; ++i) roster.risk_levels.push_back(uniform01(rng));
  std::ranges::sort(roster.risk_levels);
  return roster;
}

}  // namespace congsig
