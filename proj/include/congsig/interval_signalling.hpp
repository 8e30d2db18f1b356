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

/// \file interval_signalling.hpp
/// Broadcast interval signals and the risk-weighted policy.
///
/// One signal per step is shared by every agent. The interval for A has width
/// delta and is shifted by nu ~ U[-delta/2, delta/2]; the interval for B has
/// width gamma and shift eta ~ U[-gamma/2, gamma/2]. The true cost always lies
/// inside its interval.

#pragma once

#include <cmath>
#include <string>

#include "congsig/cost_model.hpp"
#include "congsig/error.hpp"
#include "congsig/random.hpp"
#include "congsig/scalar_signalling.hpp"

namespace congsig {

struct IntervalSignal {
  double lo_a = 0.0;
  double hi_a = 0.0;
  double lo_b = 0.0;
  double hi_b = 0.0;
};

struct IntervalSchemeConfig {
  double delta = 0.0;  // width of the A interval
  double gamma = 0.0;  // width of the B interval

  IntervalSchemeConfig(double d = 0.0, double g = 0.0) : delta(d), gamma(g) {
    if (!(delta >= 0.0) || !std::isfinite(delta)) {
      throw ConfigError("scheme.delta", "delta must be a finite non-negative number");
    }
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
      throw ConfigError("scheme.gamma", "gamma must be a finite non-negative number");
    }
  }
};

/// Builds the signal from given shifts; nu and eta must lie in their supports.
/// Offsets are formed before adding the cost so that lo <= cost <= hi holds
/// under rounding (the offsets have the right sign exactly).
inline IntervalSignal make_interval_signal(double cost_a, double cost_b,
                                           const IntervalSchemeConfig& cfg, double nu,
                                           double eta) {
  return {cost_a + (nu - cfg.delta / 2.0), cost_a + (nu + cfg.delta / 2.0),
          cost_b + (eta - cfg.gamma / 2.0), cost_b + (eta + cfg.gamma / 2.0)};
}

template <class Rng>
IntervalSignal gen_interval_signal(const CostPair& pair, int n_prev,
                                   const IntervalSchemeConfig& cfg, Rng& rng) {
  const double nu = uniform(rng, -cfg.delta / 2.0, cfg.delta / 2.0);
  const double eta = uniform(rng, -cfg.gamma / 2.0, cfg.gamma / 2.0);
  return make_interval_signal(pair.a(n_prev), pair.b(pair.population_size() - n_prev), cfg, nu,
                              eta);
}

/// Scores lambda * lo + (1 - lambda) * hi per action; the strictly smaller
/// score wins and ties go to A. lambda = 0 is risk-averse, lambda = 1 risk-seeking.
inline Action risk_weighted_choice(const IntervalSignal& s, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw DomainError("risk level must lie in [0,1], got " + std::to_string(lambda));
  }
  const double score_a = lambda * s.lo_a + (1.0 - lambda) * s.hi_a;
  const double score_b = lambda * s.lo_b + (1.0 - lambda) * s.hi_b;
  return score_b < score_a ? Action::B : Action::A;
}

}  // namespace congsig
