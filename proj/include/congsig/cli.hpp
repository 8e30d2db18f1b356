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

/// \file cli.hpp
/// Command-line front end: subcommands, CSV emission and exit codes.
///
/// Exit codes: 0 success, 1 I/O failure, 2 invalid configuration or arguments.

#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "congsig/analytics.hpp"
#include "congsig/config.hpp"
#include "congsig/cost_model.hpp"
#include "congsig/parallel.hpp"
#include "congsig/simulator.hpp"

namespace congsig {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitInvalid = 2;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest text with 17 significant digits; round-trips every double.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

/// Accumulates CSV rows in memory; written out once the command succeeded.
class CsvTable {
 public:
  explicit CsvTable(std::string header) { text_ << header << '\n'; }

  template <class... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((text_ << (first ? "" : ",") << cell(cells), first = false), ...);
    text_ << '\n';
  }

  std::string str() const { return text_.str(); }

 private:
  static std::string cell(double v) { return format_number(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(long v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }
  static std::string cell(bool v) { return v ? "true" : "false"; }
  static std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

  std::ostringstream text_;
};

/// Writes via a sibling temporary file and an atomic rename.
inline void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename onto " + path);
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Commands. Each returns the CSV text; callers decide where it goes.

struct RunOptions {
  unsigned workers = 1;
};

inline int conditioning_allocation(const RunConfig& cfg) {
  return cfg.sweep.condition_on.value_or(social_optimum(cfg.pair).n_star);
}

/// True when every agent has delay 1, the setting of the binomial next-step law.
inline bool homogeneous_delay_one(const PopulationDistribution& pop) {
  const auto* d = std::get_if<DelayClasses>(&pop.kind);
  if (!d) return false;
  for (const auto& a : d->atoms) {
    if (a.delay != 1 && a.weight != 0.0) return false;
  }
  return true;
}

/// Per-step trace; with R > 1 every column is the mean over replications.
inline std::string cmd_simulate(const RunConfig& cfg, const RunOptions& opts) {
  const SimulationConfig sim = cfg.simulation();
  const AgentRoster roster = make_roster(sim);
  const auto reps = static_cast<std::size_t>(sim.replications);
  std::vector<SimulationTrace> traces(reps);
  parallel_for(reps, opts.workers, [&](std::size_t r) {
    traces[r] = detail::run_with_roster(sim, roster, r + 1, {});
  });

  CsvTable table("t,n_A,frac_A,cost_A,cost_B,social_cost,running_avg_cost");
  const int total = sim.pair.population_size();
  for (std::size_t t = 0; t < static_cast<std::size_t>(sim.horizon); ++t) {
    if (reps == 1) {
      const auto& tr = traces[0];
      table.row(static_cast<int>(t + 1), tr.n_a[t], static_cast<double>(tr.n_a[t]) / total,
                tr.cost_a[t], tr.cost_b[t], tr.social_cost[t], tr.running_avg_cost[t]);
      continue;
    }
    double n_a = 0.0, cost_a = 0.0, cost_b = 0.0, social = 0.0, running = 0.0;
    for (const auto& tr : traces) {
      n_a += tr.n_a[t];
      cost_a += tr.cost_a[t];
      cost_b += tr.cost_b[t];
      social += tr.social_cost[t];
      running += tr.running_avg_cost[t];
    }
    const double r = static_cast<double>(reps);
    table.row(static_cast<int>(t + 1), n_a / r, n_a / r / total, cost_a / r, cost_b / r,
              social / r, running / r);
  }
  return table.str();
}

/// Scalar-scheme sweep over sigma, conditioned on n^A_1 = n*.
inline std::string cmd_sweep_sigma(const RunConfig& cfg, const std::vector<double>& sigmas,
                                   const RunOptions& opts) {
  if (sigmas.empty()) throw ConfigError("sweep.sigma", "grid is empty");
  for (double s : sigmas) {
    if (!(s >= 0.0)) throw ConfigError("sweep.sigma", "sigma must be non-negative");
  }
  SimulationConfig base = cfg.simulation();
  if (!std::holds_alternative<ScalarSchemeConfig>(base.scheme)) {
    throw ConfigError("scheme.kind", "sweep-sigma needs the scalar scheme");
  }
  const int n_cond = conditioning_allocation(cfg);
  base.initial_allocation = n_cond;
  base.horizon = std::max(base.horizon, 2);
  const bool analytic = homogeneous_delay_one(base.population);

  struct Row {
    std::optional<double> analytic;
    MeanStd next;
    MeanStd avg;
  };
  std::vector<Row> rows(sigmas.size());
  parallel_for(sigmas.size(), opts.workers, [&](std::size_t i) {
    SimulationConfig c = base;
    c.scheme = ScalarSchemeConfig(sigmas[i]);
    const auto stats = run_replications(c, 1);
    rows[i].next = mean_std(stats.next_step_samples);
    rows[i].avg = stats.final_avg_cost;
    if (analytic) rows[i].analytic = expected_next_step_cost_scalar(c.pair, n_cond, sigmas[i]);
  });

  CsvTable table("sigma,analytic_cost,sim_mean,sim_std,avg_cost_mean,avg_cost_std");
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    table.row(sigmas[i], rows[i].analytic, rows[i].next.mean, rows[i].next.std, rows[i].avg.mean,
              rows[i].avg.std);
  }
  return table.str();
}

/// Interval-scheme heatmap over (delta, gamma), long form, conditioned on n*.
inline std::string cmd_sweep_interval(const RunConfig& cfg, const std::vector<double>& deltas,
                                      const std::vector<double>& gammas, const RunOptions& opts) {
  if (deltas.empty()) throw ConfigError("sweep.delta", "grid is empty");
  if (gammas.empty()) throw ConfigError("sweep.gamma", "grid is empty");
  for (double d : deltas) {
    if (!(d >= 0.0)) throw ConfigError("sweep.delta", "delta must be non-negative");
  }
  for (double g : gammas) {
    if (!(g >= 0.0)) throw ConfigError("sweep.gamma", "gamma must be non-negative");
  }
  SimulationConfig base = cfg.simulation();
  if (!std::holds_alternative<IntervalSchemeConfig>(base.scheme)) {
    throw ConfigError("scheme.kind", "sweep-interval needs the interval scheme");
  }
  const int n_cond = conditioning_allocation(cfg);
  base.initial_allocation = n_cond;
  base.horizon = 2;

  struct Cell {
    double analytic = 0.0;
    MeanStd sim;
  };
  std::vector<Cell> cells(deltas.size() * gammas.size());
  parallel_for(cells.size(), opts.workers, [&](std::size_t idx) {
    const double delta = deltas[idx / gammas.size()];
    const double gamma = gammas[idx % gammas.size()];
    SimulationConfig c = base;
    c.scheme = IntervalSchemeConfig(delta, gamma);
    cells[idx].sim = mean_std(run_replications(c, 1).next_step_samples);
    cells[idx].analytic =
        expected_next_step_cost_interval(c.pair, n_cond, delta, gamma, c.population);
  });

  CsvTable table("delta,gamma,analytic_cost,sim_mean,sim_std");
  for (std::size_t idx = 0; idx < cells.size(); ++idx) {
    table.row(deltas[idx / gammas.size()], gammas[idx % gammas.size()], cells[idx].analytic,
              cells[idx].sim.mean, cells[idx].sim.std);
  }
  return table.str();
}

struct FixedPointOutput {
  std::string report;
  std::string iterates;  // long form sigma,x0,t,x
};

inline FixedPointOutput cmd_fixed_point(const RunConfig& cfg, const std::vector<double>& sigmas,
                                        const std::vector<double>& starts,
                                        const RunOptions& opts) {
  if (sigmas.empty()) throw ConfigError("sweep.sigma", "list is empty");
  if (starts.empty()) throw ConfigError("sweep.x0", "list is empty");
  for (double s : sigmas) {
    if (!(s > 0.0)) throw ConfigError("sweep.sigma", "sigma must be positive");
  }
  for (double x : starts) {
    if (!(x >= 0.0 && x <= 1.0)) throw ConfigError("sweep.x0", "x0 must lie in [0,1]");
  }
  std::vector<FixedPointReport> reports(sigmas.size() * starts.size());
  FixedPointOptions fp;
  fp.record_iterates = true;
  parallel_for(reports.size(), opts.workers, [&](std::size_t idx) {
    reports[idx] = find_fixed_point(cfg.pair, sigmas[idx / starts.size()],
                                    starts[idx % starts.size()], fp);
  });

  CsvTable table("sigma,x0,limit,iterations,residual,contraction_estimate,converged");
  CsvTable iterates("sigma,x0,t,x");
  for (std::size_t idx = 0; idx < reports.size(); ++idx) {
    const double sigma = sigmas[idx / starts.size()];
    const double x0 = starts[idx % starts.size()];
    const auto& r = reports[idx];
    table.row(sigma, x0, r.limit, r.iterations, r.residual, r.contraction_estimate, r.converged);
    for (std::size_t t = 0; t < r.iterates.size(); ++t) {
      iterates.row(sigma, x0, static_cast<int>(t), r.iterates[t]);
    }
  }
  return {table.str(), iterates.str()};
}

inline std::string cmd_social_optimum(const RunConfig& cfg) {
  const auto opt = social_optimum(cfg.pair);
  CsvTable table("n_star,frac,cost");
  table.row(opt.n_star, static_cast<double>(opt.n_star) / cfg.pair.population_size(), opt.value);
  return table.str();
}

/// Expected next-step social cost given a constant allocation history n_prev.
/// For the interval scheme, shared_signal_cost is the same expectation when
/// every agent reads one broadcast signal.
inline std::string cmd_expected_cost(const RunConfig& cfg, const std::vector<int>& n_prev) {
  if (n_prev.empty()) throw ConfigError("--n-prev", "list is empty");
  const SimulationConfig sim = cfg.simulation();
  validate(sim);
  const int total = cfg.pair.population_size();
  for (int n : n_prev) {
    if (n < 0 || n > total) throw ConfigError("--n-prev", "must lie in 0..N");
  }
  const AgentRoster roster = make_roster(sim);
  CsvTable table("n_prev,p_choose_a,expected_cost,shared_signal_cost");
  for (int n : n_prev) {
    if (const auto* scalar = std::get_if<ScalarSchemeConfig>(&sim.scheme)) {
      // Every delay class reads a signal built from the same n_prev.
      const double p = p_sigma_n(cfg.pair, n, scalar->sigma);
      table.row(n, p, expected_next_step_cost(next_step_distribution(total, p), cfg.pair),
                std::optional<double>{});
    } else {
      const auto& interval = std::get<IntervalSchemeConfig>(sim.scheme);
      const double p =
          population_choice_prob(cfg.pair, n, interval.delta, interval.gamma, sim.population);
      const double shared = expected_next_step_cost(
          broadcast_next_step_distribution(cfg.pair, n, interval.delta, interval.gamma,
                                           roster.risk_levels),
          cfg.pair);
      table.row(n, p, expected_next_step_cost(next_step_distribution(total, p), cfg.pair),
                std::optional<double>{shared});
    }
  }
  return table.str();
}

/// Concentration bounds at n*, with the empirical exceedance frequency over R
/// single-step simulations when a scalar scheme and delay-1 population are set.
inline std::string cmd_bounds(const RunConfig& cfg, const std::vector<double>& eps_list,
                              const RunOptions& opts) {
  if (eps_list.empty()) throw ConfigError("sweep.eps", "list is empty");
  for (double e : eps_list) {
    if (!(e > 0.0)) throw ConfigError("sweep.eps", "eps must be positive");
  }
  const int total = cfg.pair.population_size();
  const auto opt = social_optimum(cfg.pair);
  const double lipschitz = lipschitz_constant(cfg.pair);

  std::vector<double> ratios;
  double expected_ratio = 0.0;
  const bool empirical = cfg.population && cfg.scheme &&
                         std::holds_alternative<ScalarSchemeConfig>(*cfg.scheme) &&
                         homogeneous_delay_one(*cfg.population);
  if (empirical) {
    SimulationConfig sim = cfg.simulation();
    sim.initial_allocation = opt.n_star;
    sim.horizon = 2;
    const double sigma = std::get<ScalarSchemeConfig>(sim.scheme).sigma;
    expected_ratio = expected_next_step_cost_scalar(cfg.pair, opt.n_star, sigma) / opt.value;
    for (double c : run_replications(sim, opts.workers).next_step_samples) {
      ratios.push_back(c / opt.value);
    }
  }

  CsvTable table("eps,lipschitz,c_star,published_bound,mcdiarmid_bound,empirical_frequency");
  for (double eps : eps_list) {
    std::optional<double> freq;
    if (empirical) {
      long hits = 0;
      for (double r : ratios) hits += std::abs(r - expected_ratio) >= eps;
      freq = static_cast<double>(hits) / static_cast<double>(ratios.size());
    }
    table.row(eps, lipschitz, opt.value, concentration_bound_published(eps, lipschitz, opt.value),
              concentration_bound_mcdiarmid(eps, lipschitz, total, opt.value), freq);
  }
  return table.str();
}

// ---------------------------------------------------------------------------

namespace cli_detail {

inline void emit(const std::optional<std::string>& path, const std::string& text,
                 std::ostream& out) {
  if (path && !path->empty() && *path != "-") {
    write_file_atomic(*path, text);
  } else {
    out << text;
  }
}

inline std::vector<double> flag_grid(const std::optional<double>& lo,
                                     const std::optional<double>& hi,
                                     const std::optional<double>& step,
                                     const std::optional<std::vector<double>>& fallback,
                                     const char* name) {
  if (lo || hi || step) {
    if (!lo || !hi || !step) {
      throw ConfigError(std::string("--") + name, "min, max and step must be given together");
    }
    if (!(*step > 0.0)) throw ConfigError(std::string("--") + name + "-step", "must be positive");
    if (*hi < *lo) throw ConfigError(std::string("--") + name + "-max", "below min");
    return Grid{*lo, *hi, *step}.values();
  }
  if (fallback) return *fallback;
  throw ConfigError(std::string("sweep.") + name, "no grid in config or flags");
}

}  // namespace cli_detail

/// Entry point shared by the executable and the tests. `args` excludes argv[0].
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Randomized congestion-signalling simulator and analytics"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> replications;
  std::optional<int> horizon;
  std::optional<std::string> output;
  unsigned workers = 1;

  const auto add_globals = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration (JSON)")->required();
    sub->add_option("--seed", seed, "override simulation.seed");
    sub->add_option("--replications,-R", replications, "override simulation.R");
    sub->add_option("--horizon,-T", horizon, "override simulation.T");
    sub->add_option("--output,-o", output, "output CSV path ('-' for stdout)");
    sub->add_option("--workers,-j", workers, "worker threads")->check(CLI::Range(1u, 1024u));
  };

  auto* simulate = app.add_subcommand("simulate", "run the closed loop and emit a trace");
  add_globals(simulate);

  std::optional<double> sigma_min, sigma_max, sigma_step;
  auto* sweep_sigma = app.add_subcommand("sweep-sigma", "next-step and averaged cost versus sigma");
  add_globals(sweep_sigma);
  sweep_sigma->add_option("--sigma-min", sigma_min);
  sweep_sigma->add_option("--sigma-max", sigma_max);
  sweep_sigma->add_option("--sigma-step", sigma_step);

  std::optional<double> delta_min, delta_max, delta_step, gamma_min, gamma_max, gamma_step;
  auto* sweep_interval = app.add_subcommand("sweep-interval", "next-step cost over (delta, gamma)");
  add_globals(sweep_interval);
  sweep_interval->add_option("--delta-min", delta_min);
  sweep_interval->add_option("--delta-max", delta_max);
  sweep_interval->add_option("--delta-step", delta_step);
  sweep_interval->add_option("--gamma-min", gamma_min);
  sweep_interval->add_option("--gamma-max", gamma_max);
  sweep_interval->add_option("--gamma-step", gamma_step);

  std::vector<double> fp_sigmas, fp_starts;
  std::optional<std::string> iterates_path;
  auto* fixed_point = app.add_subcommand("fixed-point", "iterate the mean-field map");
  add_globals(fixed_point);
  fixed_point->add_option("--sigma", fp_sigmas, "comma-separated sigma values")->delimiter(',');
  fixed_point->add_option("--x0", fp_starts, "comma-separated starting points")->delimiter(',');
  fixed_point->add_option("--iterates", iterates_path, "also write every iterate (long form)");

  std::vector<int> n_prev_list;
  auto* expected = app.add_subcommand("expected-cost", "exact next-step expected social cost");
  add_globals(expected);
  expected->add_option("--n-prev", n_prev_list, "comma-separated previous allocations")
      ->delimiter(',');

  auto* optimum = app.add_subcommand("social-optimum", "minimizer of the social cost");
  add_globals(optimum);

  std::vector<double> eps_list;
  auto* bounds = app.add_subcommand("bounds", "concentration bounds at the optimum");
  add_globals(bounds);
  bounds->add_option("--eps", eps_list, "comma-separated deviations")->delimiter(',');

  std::vector<const char*> argv{"congsig"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }

  try {
    RunConfig cfg = parse_run_config(read_file(config_path));
    if (seed) cfg.seed = *seed;
    if (replications) {
      if (*replications < 1) throw ConfigError("--replications", "must be positive");
      cfg.replications = *replications;
    }
    if (horizon) {
      if (*horizon < 1) throw ConfigError("--horizon", "must be positive");
      cfg.horizon = *horizon;
    }
    const auto out_path = output ? output : cfg.output.path;
    const RunOptions opts{workers};

    std::string text;
    if (simulate->parsed()) {
      text = cmd_simulate(cfg, opts);
    } else if (sweep_sigma->parsed()) {
      text = cmd_sweep_sigma(
          cfg, cli_detail::flag_grid(sigma_min, sigma_max, sigma_step, cfg.sweep.sigma, "sigma"),
          opts);
    } else if (sweep_interval->parsed()) {
      text = cmd_sweep_interval(
          cfg, cli_detail::flag_grid(delta_min, delta_max, delta_step, cfg.sweep.delta, "delta"),
          cli_detail::flag_grid(gamma_min, gamma_max, gamma_step, cfg.sweep.gamma, "gamma"), opts);
    } else if (fixed_point->parsed()) {
      if (fp_sigmas.empty()) {
        if (!cfg.sweep.sigma) throw ConfigError("sweep.sigma", "no sigma list in config or flags");
        fp_sigmas = *cfg.sweep.sigma;
      }
      if (fp_starts.empty()) fp_starts = cfg.sweep.x0.value_or(std::vector<double>{0.0, 0.5, 1.0});
      auto result = cmd_fixed_point(cfg, fp_sigmas, fp_starts, opts);
      const auto it_path = iterates_path ? iterates_path : cfg.output.iterates_path;
      if (it_path) cli_detail::emit(it_path, result.iterates, out);
      text = std::move(result.report);
    } else if (expected->parsed()) {
      if (n_prev_list.empty()) n_prev_list.push_back(conditioning_allocation(cfg));
      text = cmd_expected_cost(cfg, n_prev_list);
    } else if (optimum->parsed()) {
      text = cmd_social_optimum(cfg);
    } else {
      if (eps_list.empty()) eps_list = cfg.sweep.eps.value_or(std::vector<double>{0.05, 0.1, 0.2});
      text = cmd_bounds(cfg, eps_list, opts);
    }
    cli_detail::emit(out_path, text, out);
  } catch (const ConfigError& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const DomainError& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitOk;
}

}  // namespace congsig
