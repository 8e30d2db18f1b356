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

/// \file analytics.hpp
/// Closed-form quantities for both signalling schemes.
///
/// Scalar scheme, delay 1: given n^A_{t-1} = n every agent independently
/// picks A with probability p = Phi_sigma(c_B(N-n) - c_A(n)), so n^A_t is
/// Binomial(N, p). Mixed delays give a sum of independent binomials.
///
/// Interval scheme: an agent with risk level lambda picks A with probability
/// F(lambda) = P(nu + eta > z(lambda)), where nu + eta has a trapezoidal law.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "congsig/cost_model.hpp"
#include "congsig/error.hpp"
#include "congsig/population.hpp"

namespace congsig {

// ---------------------------------------------------------------------------
// Gaussian choice probability

/// P(Z <= x) for Z ~ N(0, sigma^2).
inline double normal_cdf(double x, double sigma) {
  if (!(sigma > 0.0)) throw DomainError("normal_cdf requires sigma > 0");
  return 0.5 * std::erfc(-x / (sigma * std::numbers::sqrt2));
}

/// Probability that a delay-1 agent picks A when n agents picked A last step.
/// sigma == 0 is the noiseless step limit: 1, 0.5 or 0 for a positive, zero
/// or negative cost gap.
inline double p_sigma_n(const CostPair& pair, int n, double sigma) {
  const double gap = pair.b(pair.population_size() - n) - pair.a(n);
  if (sigma == 0.0) return gap > 0.0 ? 1.0 : (gap < 0.0 ? 0.0 : 0.5);
  return normal_cdf(gap, sigma);
}

// ---------------------------------------------------------------------------
// Allocation laws

/// Probability mass over allocations {0, ..., N}.
struct CountDistribution {
  std::vector<double> pmf;

  int population_size() const noexcept { return static_cast<int>(pmf.size()) - 1; }

  double total() const noexcept {
    double s = 0.0;
    for (double v : pmf) s += v;
    return s;
  }

  double mean() const noexcept {
    double s = 0.0;
    for (std::size_t m = 0; m < pmf.size(); ++m) s += static_cast<double>(m) * pmf[m];
    return s;
  }

  static CountDistribution point_mass(int n_total, int at) {
    CountDistribution d{std::vector<double>(static_cast<std::size_t>(n_total) + 1, 0.0)};
    d.pmf[static_cast<std::size_t>(at)] = 1.0;
    return d;
  }
};

namespace detail {

/// log binom(N, m) for m = 0..N.
inline std::vector<double> log_binomial_coefficients(int n_total) {
  std::vector<double> out(static_cast<std::size_t>(n_total) + 1);
  const double log_n_fact = std::lgamma(n_total + 1.0);
  for (int m = 0; m <= n_total; ++m) {
    out[static_cast<std::size_t>(m)] =
        log_n_fact - std::lgamma(m + 1.0) - std::lgamma(n_total - m + 1.0);
  }
  return out;
}

inline CountDistribution binomial_pmf(int n_total, double p, std::span<const double> log_coef) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binomial p outside [0,1]");
  if (p == 0.0) return CountDistribution::point_mass(n_total, 0);
  if (p == 1.0) return CountDistribution::point_mass(n_total, n_total);
  CountDistribution d{std::vector<double>(static_cast<std::size_t>(n_total) + 1)};
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  double top = -std::numeric_limits<double>::infinity();
  for (int m = 0; m <= n_total; ++m) {
    const auto i = static_cast<std::size_t>(m);
    d.pmf[i] = log_coef[i] + m * log_p + (n_total - m) * log_q;
    top = std::max(top, d.pmf[i]);
  }
  // lgamma rounding grows with N; rescale so the entries sum to 1.
  double sum = 0.0;
  for (double& v : d.pmf) {
    v = std::exp(v - top);
    sum += v;
  }
  for (double& v : d.pmf) v /= sum;
  return d;
}

}  // namespace detail

/// Binomial(N, p) computed in log space.
inline CountDistribution next_step_distribution(int n_total, double p) {
  if (n_total < 0) throw DomainError("binomial with negative N");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binomial p outside [0,1]");
  if (p == 0.0 || p == 1.0) return detail::binomial_pmf(n_total, p, {});
  return detail::binomial_pmf(n_total, p, detail::log_binomial_coefficients(n_total));
}

/// E C(n^A_t) = sum_m C(m) pmf[m].
inline double expected_next_step_cost(const CountDistribution& dist, const CostPair& pair) {
  if (dist.population_size() != pair.population_size()) {
    throw DomainError("distribution over 0.." + std::to_string(dist.population_size()) +
                      " does not match N=" + std::to_string(pair.population_size()));
  }
  double sum = 0.0;
  for (int m = 0; m <= pair.population_size(); ++m) {
    const double w = dist.pmf[static_cast<std::size_t>(m)];
    if (w != 0.0) sum += social_cost(pair, m) * w;
  }
  return sum;
}

/// Expected next-step cost under the scalar scheme with delay-1 agents.
inline double expected_next_step_cost_scalar(const CostPair& pair, int n_prev, double sigma) {
  return expected_next_step_cost(
      next_step_distribution(pair.population_size(), p_sigma_n(pair, n_prev, sigma)), pair);
}

struct BinomialComponent {
  int count = 0;
  double p = 0.0;
};

/// Law of sum_j X_j with independent X_j ~ Binomial(count_j, p_j), by
/// sequential convolution. Counts must sum to `n_total`.
inline CountDistribution convolve_binomials(std::span<const BinomialComponent> components,
                                            int n_total) {
  int sum = 0;
  for (const auto& c : components) {
    if (c.count < 0) throw DomainError("negative component count");
    sum += c.count;
  }
  if (sum != n_total) {
    throw DomainError("component counts sum to " + std::to_string(sum) + ", expected " +
                      std::to_string(n_total));
  }
  std::vector<double> acc{1.0};
  for (const auto& c : components) {
    const auto part = next_step_distribution(c.count, c.p).pmf;
    std::vector<double> next(acc.size() + part.size() - 1, 0.0);
    for (std::size_t i = 0; i < acc.size(); ++i) {
      if (acc[i] == 0.0) continue;
      for (std::size_t j = 0; j < part.size(); ++j) next[i + j] += acc[i] * part[j];
    }
    acc = std::move(next);
  }
  return CountDistribution{std::move(acc)};
}

// ---------------------------------------------------------------------------
// Concentration of the next-step cost ratio C(n^A_t) / C(n*)

/// 2 exp(-2 eps^2 c* / (2 (L + 1))), the bound in its published form.
inline double concentration_bound_published(double eps, double lipschitz, double c_star) {
  return 2.0 * std::exp(-2.0 * eps * eps * c_star / (2.0 * (lipschitz + 1.0)));
}

/// McDiarmid with per-agent bounded difference 2 (1 + L) / (N c*):
/// 2 exp(-eps^2 N c*^2 / (2 (1 + L)^2)).
inline double concentration_bound_mcdiarmid(double eps, double lipschitz, int n_total,
                                             double c_star) {
  const double l1 = 1.0 + lipschitz;
  return 2.0 * std::exp(-eps * eps * n_total * c_star * c_star / (2.0 * l1 * l1));
}

/// Largest slope of c_A or c_B with respect to the fraction n/N, measured on
/// consecutive grid points: max_n N |c(n+1) - c(n)|.
inline double lipschitz_constant(const CostPair& pair) {
  const int total = pair.population_size();
  double best = 0.0;
  for (int n = 0; n < total; ++n) {
    best = std::max(best, total * std::abs(pair.a(n + 1) - pair.a(n)));
    best = std::max(best, total * std::abs(pair.b(n + 1) - pair.b(n)));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Mean-field iteration x_t = f(x_{t-1}) for delay-1 agents

namespace detail {

/// f with the per-allocation choice probabilities and binomial coefficients
/// computed once.
class MeanFieldMap {
 public:
  MeanFieldMap(const CostPair& pair, double sigma)
      : total_(pair.population_size()), log_coef_(log_binomial_coefficients(total_)) {
    for (int m = 0; m <= total_; ++m) phi_.push_back(p_sigma_n(pair, m, sigma));
  }

  double operator()(double x) const {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("fixed_point_map requires x in [0,1]");
    const auto weights = binomial_pmf(total_, x, log_coef_);
    double sum = 0.0;
    for (std::size_t m = 0; m < phi_.size(); ++m) {
      if (weights.pmf[m] != 0.0) sum += phi_[m] * weights.pmf[m];
    }
    return std::clamp(sum, 0.0, 1.0);
  }

 private:
  int total_;
  std::vector<double> log_coef_;
  std::vector<double> phi_;
};

}  // namespace detail

/// f(x) = sum_m Phi_sigma(c_B(N-m) - c_A(m)) Binomial(N, x)[m].
inline double fixed_point_map(double x, const CostPair& pair, double sigma) {
  return detail::MeanFieldMap(pair, sigma)(x);
}

struct FixedPointOptions {
  double tolerance = 1e-12;
  int max_iterations = 100000;
  int contraction_grid = 1000;
  double contraction_step = 1e-6;
  bool record_iterates = false;
};

/// Outcome of iterating f. Non-convergence is reported, not thrown.
struct FixedPointReport {
  double limit = 0.0;  // last iterate
  int iterations = 0;
  double residual = 0.0;  // |f(limit) - limit|
  double contraction_estimate = 0.0;  // max |f(x+h) - f(x)| / h on a grid
  bool converged = false;
  std::vector<double> iterates;  // x0, x1, ... when requested
};

/// max |f(x+h) - f(x)| / h over `grid` equally spaced x in [0, 1-h].
inline double contraction_estimate(const CostPair& pair, double sigma, int grid = 1000,
                                   double h = 1e-6) {
  const detail::MeanFieldMap f(pair, sigma);
  double best = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double x = (1.0 - h) * i / (grid - 1);
    best = std::max(best, std::abs(f(x + h) - f(x)) / h);
  }
  return best;
}

inline FixedPointReport find_fixed_point(const CostPair& pair, double sigma, double x0,
                                         const FixedPointOptions& opts = {}) {
  if (!(sigma > 0.0)) throw DomainError("find_fixed_point requires sigma > 0");
  if (!(x0 >= 0.0 && x0 <= 1.0)) throw DomainError("find_fixed_point requires x0 in [0,1]");
  const detail::MeanFieldMap f(pair, sigma);
  FixedPointReport report;
  if (opts.record_iterates) report.iterates.push_back(x0);
  double x = x0;
  while (report.iterations < opts.max_iterations) {
    const double next = f(x);
    ++report.iterations;
    if (opts.record_iterates) report.iterates.push_back(next);
    const double step = std::abs(next - x);
    x = next;
    if (step <= opts.tolerance) {
      report.converged = true;
      break;
    }
  }
  report.limit = x;
  report.residual = std::abs(f(x) - x);
  report.contraction_estimate =
      contraction_estimate(pair, sigma, opts.contraction_grid, opts.contraction_step);
  return report;
}

// ---------------------------------------------------------------------------
// Interval scheme

/// P(nu + eta > z) with nu ~ U[-delta/2, delta/2] and eta ~ U[-gamma/2, gamma/2].
///
/// With half-widths a, b > 0 the CDF of the sum is
///   [r(s+a+b) - r(s+a-b) - r(s-a+b) + r(s-a-b)] / (8ab),  r(x) = max(x, 0)^2,
/// and the tail for z >= 0 equals that CDF at -z. Negative z uses symmetry.
inline double trapezoid_tail(double z, double delta, double gamma) {
  if (!(delta >= 0.0) || !(gamma >= 0.0)) throw DomainError("interval widths must be >= 0");
  const double a = delta / 2.0;
  const double b = gamma / 2.0;
  if (a == 0.0 && b == 0.0) return z < 0.0 ? 1.0 : 0.0;
  if (z < 0.0) return 1.0 - trapezoid_tail(-z, delta, gamma);
  if (z >= a + b) return 0.0;
  if (a == 0.0 || b == 0.0) {
    const double w = a + b;  // the non-degenerate half-width
    return (w - z) / (2.0 * w);
  }
  const auto r = [](double x) { return x > 0.0 ? x * x : 0.0; };
  const double s = -z;
  const double cdf = (r(s + a + b) - r(s + a - b) - r(s - a + b) + r(s - a - b)) / (8.0 * a * b);
  return std::clamp(cdf, 0.0, 1.0);
}

/// Threshold z(lambda) = c_A(n) - c_B(N-n) + (delta - gamma)(1/2 - lambda).
inline double choice_threshold(const CostPair& pair, int n, double delta, double gamma,
                               double lambda) {
  return pair.a(n) - pair.b(pair.population_size() - n) + (delta - gamma) * (0.5 - lambda);
}

/// F(lambda): probability that a risk-level-lambda agent picks A given n^A_{t-1} = n.
inline double choice_prob_lambda(const CostPair& pair, int n, double delta, double gamma,
                                 double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("lambda must lie in [0,1]");
  return trapezoid_tail(choice_threshold(pair, n, delta, gamma, lambda), delta, gamma);
}

/// Integral of F(lambda) against the risk distribution mu.
///
/// For the continuous uniform mu, F is piecewise quadratic in lambda with
/// breakpoints where z(lambda) hits a knot of the trapezoid; each piece is
/// integrated by 3-point Gauss-Legendre, which is exact for quadratics.
inline double population_choice_prob(const CostPair& pair, int n, double delta, double gamma,
                                     const PopulationDistribution& mu) {
  if (const auto* d = std::get_if<RiskDiscrete>(&mu.kind)) {
    double sum = 0.0;
    for (const auto& atom : d->atoms) {
      sum += atom.weight * choice_prob_lambda(pair, n, delta, gamma, atom.lambda);
    }
    return std::clamp(sum, 0.0, 1.0);
  }
  if (!std::holds_alternative<RiskUniform>(mu.kind)) {
    throw DomainError("population_choice_prob requires a risk-level population");
  }
  const auto f = [&](double lambda) { return choice_prob_lambda(pair, n, delta, gamma, lambda); };
  if (delta == gamma) return f(0.5);

  const double a = delta / 2.0;
  const double b = gamma / 2.0;
  const double z_mid = choice_threshold(pair, n, delta, gamma, 0.5);
  std::vector<double> cuts{0.0, 1.0};
  for (double knot : {-(a + b), -std::abs(a - b), 0.0, std::abs(a - b), a + b}) {
    // z(lambda) = z_mid + (delta - gamma)(1/2 - lambda) = knot
    const double lambda = 0.5 - (knot - z_mid) / (delta - gamma);
    if (lambda > 0.0 && lambda < 1.0) cuts.push_back(lambda);
  }
  std::ranges::sort(cuts);

  static constexpr double kNode = 0.7745966692414834;  // sqrt(3/5)
  static constexpr double kW0 = 8.0 / 9.0;
  static constexpr double kW1 = 5.0 / 9.0;
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i];
    const double hi = cuts[i + 1];
    if (!(hi > lo)) continue;
    const double half = (hi - lo) / 2.0;
    const double mid = (hi + lo) / 2.0;
    sum += half * (kW0 * f(mid) + kW1 * (f(mid - half * kNode) + f(mid + half * kNode)));
  }
  return std::clamp(sum, 0.0, 1.0);
}

/// Expected next-step cost under the interval scheme in its binomial form:
/// each agent independently picks A with the population-averaged probability.
inline double expected_next_step_cost_interval(const CostPair& pair, int n_prev, double delta,
                                               double gamma, const PopulationDistribution& mu) {
  return expected_next_step_cost(
      next_step_distribution(pair.population_size(),
                             population_choice_prob(pair, n_prev, delta, gamma, mu)),
      pair);
}

/// Exact law of n^A_t under one broadcast interval signal for a concrete
/// roster of risk levels. Every agent sees the same shift U = eta - nu, and
/// agent j picks A iff z(lambda_j) < U, so n^A_t >= k iff U exceeds the k-th
/// smallest threshold.
inline CountDistribution broadcast_next_step_distribution(const CostPair& pair, int n_prev,
                                                          double delta, double gamma,
                                                          std::span<const double> risk_levels) {
  const int total = pair.population_size();
  if (risk_levels.size() != static_cast<std::size_t>(total)) {
    throw DomainError("roster size does not match N");
  }
  std::vector<double> z;
  z.reserve(risk_levels.size());
  for (double lambda : risk_levels) z.push_back(choice_threshold(pair, n_prev, delta, gamma, lambda));
  std::ranges::sort(z);
  CountDistribution d{std::vector<double>(static_cast<std::size_t>(total) + 1, 0.0)};
  double at_least_k = 1.0;  // P(n >= 0)
  for (int k = 0; k <= total; ++k) {
    const double at_least_next =
        k < total ? trapezoid_tail(z[static_cast<std::size_t>(k)], delta, gamma) : 0.0;
    d.pmf[static_cast<std::size_t>(k)] = std::max(0.0, at_least_k - at_least_next);
    at_least_k = at_least_next;
  }
  return d;
}

}  // namespace congsig
