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

/// \file cost_model.hpp
/// Two-action congestion costs and the social cost functional.
///
/// A population of N agents splits between actions A and B. With n agents on
/// A, each of them pays c_A(n) and each of the N - n agents on B pays
/// c_B(N - n). The social cost is the population-weighted mean of the two.

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "congsig/error.hpp"

namespace congsig {

/// c(n) = intercept + slope * n / N
struct AffineCost {
  double intercept = 0.0;
  double slope = 0.0;
};

/// c(n) = base + scale / (pole - n / N); requires pole > 1.
struct ReciprocalCost {
  double base = 0.0;
  double pole = 2.0;
  double scale = 0.0;
};

/// c(n) = values[n]; exactly N + 1 entries.
struct TabularCost {
  std::vector<double> values;
};

using CostKind = std::variant<AffineCost, ReciprocalCost, TabularCost>;

/// Per-action congestion cost on the domain {0, ..., N}.
///
/// Construction validates the parametrization so that evaluation is total on
/// 0..N and always yields a finite non-negative value.
class CostFunction {
 public:
  CostFunction(CostKind kind, int population_size)
      : kind_(std::move(kind)), population_size_(population_size) {
    validate();
  }

  static CostFunction affine(double intercept, double slope, int n) {
    return CostFunction(AffineCost{intercept, slope}, n);
  }
  static CostFunction reciprocal(double base, double pole, double scale, int n) {
    return CostFunction(ReciprocalCost{base, pole, scale}, n);
  }
  static CostFunction tabular(std::vector<double> values, int n) {
    return CostFunction(TabularCost{std::move(values)}, n);
  }

  int population_size() const noexcept { return population_size_; }
  const CostKind& kind() const noexcept { return kind_; }

  double operator()(int n) const {
    if (n < 0 || n > population_size_) {
      throw DomainError("cost evaluated at n=" + std::to_string(n) +
                        " outside 0.." + std::to_string(population_size_));
    }
    return unchecked(n);
  }

 private:
  double unchecked(int n) const {
    const double frac = static_cast<double>(n) / population_size_;
    return std::visit(
        [&](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, AffineCost>) {
            return k.intercept + k.slope * frac;
          } else if constexpr (std::is_same_v<K, ReciprocalCost>) {
            return k.base + k.scale / (k.pole - frac);
          } else {
            return k.values[static_cast<std::size_t>(n)];
          }
        },
        kind_);
  }

  void validate() const {
    if (population_size_ < 1) {
      throw ConfigError("N", "population size must be positive");
    }
    if (const auto* r = std::get_if<ReciprocalCost>(&kind_); r && !(r->pole > 1.0)) {
      throw ConfigError("pole", "reciprocal cost requires pole > 1");
    }
    if (const auto* t = std::get_if<TabularCost>(&kind_);
        t && t->values.size() != static_cast<std::size_t>(population_size_) + 1) {
      throw ConfigError("values", "tabular cost needs exactly N+1 entries, got " +
                                      std::to_string(t->values.size()));
    }
    for (int n = 0; n <= population_size_; ++n) {
      const double v = unchecked(n);
      if (!std::isfinite(v) || v < 0.0) {
        throw ConfigError("", "cost is not finite and non-negative at n=" + std::to_string(n));
      }
    }
  }

  CostKind kind_;
  int population_size_;
};

/// The pair (c_A, c_B) sharing a population size N.
class CostPair {
 public:
  CostPair(CostFunction cost_a, CostFunction cost_b)
      : a_(std::move(cost_a)), b_(std::move(cost_b)) {
    if (a_.population_size() != b_.population_size()) {
      throw ConfigError("costs", "c_A and c_B disagree on N");
    }
  }

  const CostFunction& cost_a() const noexcept { return a_; }
  const CostFunction& cost_b() const noexcept { return b_; }
  int population_size() const noexcept { return a_.population_size(); }

  /// c_A(n): cost paid by each agent on A when n agents chose A.
  double a(int n) const { return a_(n); }
  /// c_B(m): cost paid by each agent on B when m agents chose B.
  double b(int m) const { return b_(m); }

 private:
  CostFunction a_;
  CostFunction b_;
};

inline double eval_cost(const CostFunction& cf, int n) { return cf(n); }

/// C(n) = (n/N) c_A(n) + ((N-n)/N) c_B(N-n)
inline double social_cost(const CostPair& pair, int n) {
  const int total = pair.population_size();
  if (n < 0 || n > total) {
    throw DomainError("social cost evaluated at n=" + std::to_string(n) + " outside 0.." +
                      std::to_string(total));
  }
  // Boundary terms are taken verbatim so C(N) == c_A(N) and C(0) == c_B(N) bitwise.
  if (n == total) return pair.a(total);
  if (n == 0) return pair.b(total);
  const double frac = static_cast<double>(n) / total;
  return frac * pair.a(n) + (static_cast<double>(total - n) / total) * pair.b(total - n);
}

/// Mean of C(n^A_1), ..., C(n^A_T).
inline double time_averaged_social_cost(std::span<const double> costs) {
  if (costs.empty()) throw DomainError("time average of an empty cost sequence");
  double sum = 0.0;
  for (double c : costs) sum += c;
  return sum / static_cast<double>(costs.size());
}

struct SocialOptimum {
  int n_star = 0;
  double value = 0.0;
};

/// Exhaustive minimization of C over {0, ..., N}; ties go to the smallest n.
inline SocialOptimum social_optimum(const CostPair& pair) {
  SocialOptimum best{0, social_cost(pair, 0)};
  for (int n = 1; n <= pair.population_size(); ++n) {
    const double c = social_cost(pair, n);
    if (c < best.value) best = {n, c};
  }
  return best;
}

/// The running example: c_A(n) = 1.2 + n/N, c_B(n) = 1 + (1.08 - n/N)^-1 / 22.
inline CostPair reference_cost_pair(int n = 40) {
  return CostPair(CostFunction::affine(1.2, 1.0, n),
                  CostFunction::reciprocal(1.0, 1.08, 1.0 / 22.0, n));
}

}  // namespace congsig
