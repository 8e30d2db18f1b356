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

/// \file simulator.hpp
/// Closed-loop Monte Carlo of signaller and population.
///
/// Step 1 uses the configured initial allocation (or all agents on A). At the
/// end of every step t the signaller turns n^A_t into signals: per-agent
/// scalar reports s_t, or for the interval scheme the broadcast used at step
/// t + 1. A delay-k agent acts at step t on s_{t-k} and plays A while that
/// signal does not exist yet.
///
/// Randomness is keyed by (seed, replication, step, agent), so a trace does
/// not depend on which thread computed it.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "congsig/cost_model.hpp"
#include "congsig/error.hpp"
#include "congsig/interval_signalling.hpp"
#include "congsig/parallel.hpp"
#include "congsig/population.hpp"
#include "congsig/random.hpp"
#include "congsig/scalar_signalling.hpp"

namespace congsig {

using SchemeConfig = std::variant<ScalarSchemeConfig, IntervalSchemeConfig>;

struct SimulationConfig {
  CostPair pair;
  PopulationDistribution population;
  SchemeConfig scheme;
  int horizon = 30;
  std::optional<int> initial_allocation;  // empty: every agent starts on A
  std::uint64_t seed = 0;
  int replications = 1;
  bool sample_risk_levels = false;  // i.i.d. lambdas for RiskUniform
};

/// Throws ConfigError naming the offending field.
inline void validate(const SimulationConfig& cfg) {
  const int total = cfg.pair.population_size();
  if (cfg.population.population_size != total) {
    throw ConfigError("population", "population size differs from costs.N");
  }
  if (auto err = validate(cfg.population)) throw ConfigError(err->field, err->message);
  const bool scalar = std::holds_alternative<ScalarSchemeConfig>(cfg.scheme);
  if (scalar && !cfg.population.is_delay()) {
    throw ConfigError("scheme.kind", "scalar signalling needs a delay population");
  }
  if (!scalar && !cfg.population.is_risk()) {
    throw ConfigError("scheme.kind", "interval signalling needs a risk-level population");
  }
  if (cfg.horizon < 1) throw ConfigError("simulation.T", "horizon must be positive");
  if (cfg.replications < 1) throw ConfigError("simulation.R", "replications must be positive");
  if (cfg.initial_allocation && (*cfg.initial_allocation < 0 || *cfg.initial_allocation > total)) {
    throw ConfigError("simulation.initial_allocation", "must lie in 0..N");
  }
}

/// Per-step record; index 0 is step t = 1.
struct SimulationTrace {
  std::vector<int> n_a;
  std::vector<double> cost_a;
  std::vector<double> cost_b;
  std::vector<double> social_cost;
  std::vector<double> running_avg_cost;

  std::size_t steps() const noexcept { return n_a.size(); }
};

/// Test instrumentation. `allocation_override(t, n)` may replace the tallied
/// n^A_t before costs and signals are computed from it;
/// `scalar_signal_override(t, signals)` may edit the scalar signals s_t.
struct SimulationHooks {
  std::function<int(int, int)> allocation_override;
  std::function<void(int, std::vector<ScalarSignal>&)> scalar_signal_override;
};

inline AgentRoster make_roster(const SimulationConfig& cfg) {
  return cfg.sample_risk_levels ? materialize_sampled(cfg.population, cfg.seed)
                                : materialize(cfg.population);
}

namespace detail {

inline void record_step(const CostPair& pair, int n, SimulationTrace& trace, double& cost_sum) {
  const int total = pair.population_size();
  trace.n_a.push_back(n);
  trace.cost_a.push_back(pair.a(n));
  trace.cost_b.push_back(pair.b(total - n));
  const double c = social_cost(pair, n);
  trace.social_cost.push_back(c);
  cost_sum += c;
  trace.running_avg_cost.push_back(cost_sum / static_cast<double>(trace.n_a.size()));
}

inline SimulationTrace run_with_roster(const SimulationConfig& cfg, const AgentRoster& roster,
                                       std::uint64_t replication, const SimulationHooks& hooks) {
  const CostPair& pair = cfg.pair;
  const int total = pair.population_size();
  const auto agents = static_cast<std::size_t>(total);
  SimulationTrace trace;
  double cost_sum = 0.0;

  const auto apply_override = [&](int t, int n) {
    if (!hooks.allocation_override) return n;
    const int forced = hooks.allocation_override(t, n);
    if (forced < 0 || forced > total) throw DomainError("allocation override outside 0..N");
    return forced;
  };

  int n = apply_override(1, cfg.initial_allocation.value_or(total));
  record_step(pair, n, trace, cost_sum);

  if (const auto* scalar = std::get_if<ScalarSchemeConfig>(&cfg.scheme)) {
    std::vector<std::vector<ScalarSignal>> history(agents);
    for (auto& h : history) h.reserve(static_cast<std::size_t>(cfg.horizon));
    for (int t = 1; t <= cfg.horizon; ++t) {
      if (t > 1) {
        int count_a = 0;
        for (std::size_t i = 0; i < agents; ++i) {
          count_a += delayed_action(roster.delays[i], t, history[i]) == Action::A;
        }
        n = apply_override(t, count_a);
        record_step(pair, n, trace, cost_sum);
      }
      if (t == cfg.horizon) break;
      // s_t, built from n^A_t
      auto signals = gen_scalar_signals(pair, n, *scalar,
                                        StepKey{cfg.seed, replication, static_cast<std::uint64_t>(t)});
      if (hooks.scalar_signal_override) hooks.scalar_signal_override(t, signals);
      for (std::size_t i = 0; i < agents; ++i) history[i].push_back(signals[i]);
    }
  } else {
    const auto& interval = std::get<IntervalSchemeConfig>(cfg.scheme);
    for (int t = 2; t <= cfg.horizon; ++t) {
      auto rng = substream(cfg.seed, StreamTag::kIntervalNoise, replication,
                           static_cast<std::uint64_t>(t), 0);
      const IntervalSignal signal = gen_interval_signal(pair, n, interval, rng);
      int count_a = 0;
      for (double lambda : roster.risk_levels) {
        count_a += risk_weighted_choice(signal, lambda) == Action::A;
      }
      n = apply_override(t, count_a);
      record_step(pair, n, trace, cost_sum);
    }
  }
  return trace;
}

}  // namespace detail

/// One replication. `replication_index` selects the random substreams.
inline SimulationTrace run_once(const SimulationConfig& cfg, std::uint64_t replication_index,
                                const SimulationHooks& hooks = {}) {
  validate(cfg);
  return detail::run_with_roster(cfg, make_roster(cfg), replication_index, hooks);
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 when R == 1
};

/// Mean and sample standard deviation, accumulated in index order.
inline MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) return {*lo, 0.0};  // exact, free of summation rounding
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

struct ReplicationStats {
  int replications = 0;
  MeanStd final_avg_cost;                  // C-hat_T
  std::vector<MeanStd> frac_a;             // n^A_t / N per step
  std::vector<MeanStd> social_cost;        // C(n^A_t) per step
  std::vector<double> final_avg_samples;   // per replication, in index order
  std::vector<double> next_step_samples;   // C(n^A_2) per replication (T >= 2)
};

/// Runs replications 1..R and aggregates them. Results are identical for any
/// worker count.
inline ReplicationStats run_replications(const SimulationConfig& cfg, unsigned workers = 1) {
  validate(cfg);
  const AgentRoster roster = make_roster(cfg);
  const auto reps = static_cast<std::size_t>(cfg.replications);
  std::vector<SimulationTrace> traces(reps);
  parallel_for(reps, workers, [&](std::size_t r) {
    traces[r] = detail::run_with_roster(cfg, roster, r + 1, {});
  });

  ReplicationStats stats;
  stats.replications = cfg.replications;
  const int total = cfg.pair.population_size();
  const auto steps = static_cast<std::size_t>(cfg.horizon);
  std::vector<double> column(reps);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t r = 0; r < reps; ++r) column[r] = static_cast<double>(traces[r].n_a[t]) / total;
    stats.frac_a.push_back(mean_std(column));
    for (std::size_t r = 0; r < reps; ++r) column[r] = traces[r].social_cost[t];
    stats.social_cost.push_back(mean_std(column));
    if (t == 1) stats.next_step_samples = column;
  }
  for (std::size_t r = 0; r < reps; ++r) column[r] = traces[r].running_avg_cost.back();
  stats.final_avg_samples = column;
  stats.final_avg_cost = mean_std(column);
  return stats;
}

/// Lag-1 sample autocorrelation; 0 for a constant or too-short series.
inline double lag1_autocorrelation(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    den += (x[i] - mean) * (x[i] - mean);
    if (i + 1 < x.size()) num += (x[i] - mean) * (x[i + 1] - mean);
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace congsig
