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

/// \file scalar_signalling.hpp
/// Per-agent noisy cost reports and the greedy delayed policy.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "congsig/cost_model.hpp"
#include "congsig/error.hpp"
#include "congsig/random.hpp"

namespace congsig {

enum class Action : std::uint8_t { A, B };

struct ScalarSignal {
  double y_a = 0.0;
  double y_b = 0.0;
};

struct ScalarSchemeConfig {
  double sigma = 0.0;  // standard deviation of w_A - w_B

  explicit ScalarSchemeConfig(double s = 0.0) : sigma(s) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
      throw ConfigError("scheme.sigma", "sigma must be a finite non-negative number");
    }
  }
};

/// Identifies the per-agent substreams of one time step of one replication.
struct StepKey {
  std::uint64_t seed = 0;
  std::uint64_t replication = 0;
  std::uint64_t step = 0;
};

/// One report for a single agent. w_A and w_B are i.i.d. N(0, sigma^2 / 2), so
/// w_A - w_B has variance sigma^2; sigma == 0 yields the exact costs.
template <class Rng>
ScalarSignal draw_scalar_signal(double cost_a, double cost_b, const ScalarSchemeConfig& cfg,
                                Rng& rng) {
  if (cfg.sigma == 0.0) return {cost_a, cost_b};
  const double half_sd = cfg.sigma * std::numbers::sqrt2 / 2.0;
  const double w_a = half_sd * standard_normal(rng);
  const double w_b = half_sd * standard_normal(rng);
  return {cost_a + w_a, cost_b + w_b};
}

/// Signals for all N agents from one shared stream, drawn in agent order.
template <class Rng>
std::vector<ScalarSignal> gen_scalar_signals(const CostPair& pair, int n_prev,
                                             const ScalarSchemeConfig& cfg, Rng& rng) {
  const int total = pair.population_size();
  const double cost_a = pair.a(n_prev);
  const double cost_b = pair.b(total - n_prev);
  std::vector<ScalarSignal> out;
  out.reserve(static_cast<std::size_t>(total));
  for (int i = 0; i < total; ++i) out.push_back(draw_scalar_signal(cost_a, cost_b, cfg, rng));
  return out;
}

/// Signals for all N agents; agent i draws from substream (key, i).
inline std::vector<ScalarSignal> gen_scalar_signals(const CostPair& pair, int n_prev,
                                                    const ScalarSchemeConfig& cfg,
                                                    const StepKey& key) {
  const int total = pair.population_size();
  const double cost_a = pair.a(n_prev);
  const double cost_b = pair.b(total - n_prev);
  std::vector<ScalarSignal> out;
  out.reserve(static_cast<std::size_t>(total));
  for (int i = 0; i < total; ++i) {
    auto rng = substream(key.seed, StreamTag::kScalarNoise, key.replication, key.step,
                         static_cast<std::uint64_t>(i));
    out.push_back(draw_scalar_signal(cost_a, cost_b, cfg, rng));
  }
  return out;
}

/// Smaller report wins; exact ties go to A.
inline constexpr Action greedy_choice(const ScalarSignal& s) noexcept {
  return s.y_b < s.y_a ? Action::B : Action::A;
}

/// Policy with actuation delay k at step t (t >= 1). `history` holds this
/// agent's signals s_1, ..., s_{t-1}; s_j sits at history[j - 1]. Before a
/// signal k steps old exists the agent plays A.
inline Action delayed_action(int delay, int t, std::span<const ScalarSignal> history) {
  if (t < 1) throw DomainError("time index must be >= 1, got " + std::to_string(t));
  if (delay < 1) throw DomainError("delay must be >= 1, got " + std::to_string(delay));
  if (t < delay + 1) return Action::A;
  const auto index = static_cast<std::size_t>(t - delay - 1);
  if (index >= history.size()) {
    throw DomainError("signal history too short for step " + std::to_string(t));
  }
  return greedy_choice(history[index]);
}

}  // namespace congsig
