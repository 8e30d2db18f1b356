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

#include "congsig/analytics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "congsig/random.hpp"
#include "congsig/scalar_signalling.hpp"
#include "oracles.hpp"

namespace congsig {
namespace {

CostPair constant_pair(double c_a, double c_b, int n) {
  return CostPair(CostFunction::affine(c_a, 0.0, n), CostFunction::affine(c_b, 0.0, n));
}

// --- Gaussian choice probability ----------------------------------------------

TEST(NormalCdfTest, Values) {
  EXPECT_EQ(normal_cdf(0.0, 1.0), 0.5);
  for (double sigma : {0.1, 0.3, 1.0, 7.0}) {
    EXPECT_NEAR(normal_cdf(sigma, sigma), 0.8413447460685429, 1e-15);
  }
  // scipy.stats.norm.cdf(-0.23766, scale=0.3)
  EXPECT_NEAR(normal_cdf(-0.23766, 0.3), 0.2141220342957587, 1e-13);
  EXPECT_THROW(normal_cdf(0.0, 0.0), DomainError);
  EXPECT_THROW(normal_cdf(0.0, -1.0), DomainError);
}

TEST(PSigmaTest, Values) {
  EXPECT_EQ(p_sigma_n(constant_pair(1.0, 1.0, 10), 3, 0.5), 0.5);
  EXPECT_EQ(p_sigma_n(constant_pair(1.0, 1.3, 10), 3, 0.0), 1.0);
  EXPECT_EQ(p_sigma_n(constant_pair(1.3, 1.0, 10), 3, 0.0), 0.0);
  EXPECT_EQ(p_sigma_n(constant_pair(1.0, 1.0, 10), 3, 0.0), 0.5);
  EXPECT_NEAR(p_sigma_n(constant_pair(1.0, 1.3, 10), 3, 1e-9), 1.0, 1e-15);

  const auto pair = reference_cost_pair(40);
  const double gap = pair.b(32) - pair.a(8);
  EXPECT_NEAR(gap, -0.23766, 1e-5);
  EXPECT_NEAR(p_sigma_n(pair, 8, 0.3), 0.214, 5e-4);
}

// --- allocation laws ------------------------------------------------------------

TEST(NextStepDistributionTest, DegenerateAndFairCoin) {
  const auto zero = next_step_distribution(5, 0.0);
  EXPECT_EQ(zero.pmf, (std::vector<double>{1, 0, 0, 0, 0, 0}));
  const auto one = next_step_distribution(3, 1.0);
  EXPECT_EQ(one.pmf, (std::vector<double>{0, 0, 0, 1}));
  const auto coin = next_step_distribution(2, 0.5);
  ASSERT_EQ(coin.pmf.size(), 3u);
  EXPECT_NEAR(coin.pmf[0], 0.25, 1e-15);
  EXPECT_NEAR(coin.pmf[1], 0.5, 1e-15);
  EXPECT_NEAR(coin.pmf[2], 0.25, 1e-15);
}

TEST(NextStepDistributionTest, NormalizedAndNonNegative) {
  Xoshiro256 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 400);
    const double p = uniform01(rng);
    const auto d = next_step_distribution(n, p);
    EXPECT_NEAR(d.total(), 1.0, 1e-12);
    EXPECT_NEAR(d.mean(), n * p, 1e-9 * n);
    for (double v : d.pmf) EXPECT_GE(v, 0.0);
  }
  EXPECT_NEAR(next_step_distribution(10000, 0.37).total(), 1.0, 1e-12);
}

TEST(NextStepDistributionTest, MatchesSimulatedStepsChiSquare) {
  const auto pair = reference_cost_pair(40);
  const double p = p_sigma_n(pair, 8, 0.3);
  const auto law = next_step_distribution(40, p);
  constexpr long kSteps = 100000;
  std::vector<long> counts(41, 0);
  for (long s = 0; s < kSteps; ++s) {
    const auto signals =
        gen_scalar_signals(pair, 8, ScalarSchemeConfig(0.3), StepKey{17, 0, static_cast<std::uint64_t>(s)});
    int n_a = 0;
    for (const auto& sig : signals) n_a += greedy_choice(sig) == Action::A;
    ++counts[static_cast<std::size_t>(n_a)];
  }
  const auto [stat, dof] = oracle::chi_square(counts, law.pmf, kSteps);
  EXPECT_LT(stat, oracle::chi_square_critical(dof)) << "dof=" << dof;
}

TEST(ExpectedCostTest, DegenerateDistributions) {
  const auto pair = reference_cost_pair(40);
  for (int m : {0, 8, 40}) {
    EXPECT_EQ(expected_next_step_cost(CountDistribution::point_mass(40, m), pair),
              social_cost(pair, m));
  }
  const CostPair tiny(CostFunction::tabular({1.0, 3.0}, 1), CostFunction::tabular({2.0, 5.0}, 1));
  EXPECT_DOUBLE_EQ(expected_next_step_cost(CountDistribution{{0.5, 0.5}}, tiny),
                   (social_cost(tiny, 0) + social_cost(tiny, 1)) / 2);
  EXPECT_THROW(expected_next_step_cost(CountDistribution{{0.5, 0.5}}, pair), DomainError);
}

TEST(ExpectedCostTest, SigmaMinimizerNearPointThree) {
  const auto pair = reference_cost_pair(40);
  double best_sigma = 0.0;
  double best = 1e9;
  for (int i = 1; i <= 30; ++i) {
    const double sigma = 0.05 * i;
    const double c = expected_next_step_cost_scalar(pair, 8, sigma);
    if (c < best) best = c, best_sigma = sigma;
  }
  EXPECT_GE(best_sigma, 0.2);
  EXPECT_LE(best_sigma, 0.4);
}

// --- concentration --------------------------------------------------------------

TEST(ConcentrationTest, PublishedForm) {
  EXPECT_NEAR(concentration_bound_published(0.1, 1.0, 1.2), 2 * std::exp(-0.006), 1e-15);
  EXPECT_NEAR(concentration_bound_published(0.1, 1.0, 1.2), 1.988, 1e-3);
  EXPECT_EQ(concentration_bound_published(0.0, 1.0, 1.2), 2.0);
  EXPECT_LT(concentration_bound_published(1e3, 1.0, 1.2), 1e-300);
}

TEST(ConcentrationTest, McDiarmidForm) {
  EXPECT_NEAR(concentration_bound_mcdiarmid(0.1, 1.0, 40, 1.2), 2 * std::exp(-0.072), 1e-15);
  EXPECT_NEAR(concentration_bound_mcdiarmid(0.1, 1.0, 40, 1.2), 1.861, 1e-3);
  EXPECT_LT(concentration_bound_mcdiarmid(1e3, 1.0, 40, 1.2), 1e-300);
  for (int n : {1, 10, 40, 1000}) {
    EXPECT_LT(concentration_bound_mcdiarmid(0.1, 1.0, 2 * n, 1.2),
              concentration_bound_mcdiarmid(0.1, 1.0, n, 1.2));
  }
}

TEST(ConcentrationTest, LipschitzOfReferencePair) {
  const auto pair = reference_cost_pair(40);
  // Steepest step of c_B is at the pole side: 40 (c_B(40) - c_B(39)).
  const double expected = 40 * (pair.b(40) - pair.b(39));
  EXPECT_DOUBLE_EQ(lipschitz_constant(pair), expected);
  EXPECT_DOUBLE_EQ(lipschitz_constant(constant_pair(1, 2, 10)), 0.0);
}

// --- mean-field map -------------------------------------------------------------

TEST(FixedPointMapTest, ConstantGap) {
  const auto pair = constant_pair(1.0, 1.25, 30);
  for (double x : {0.0, 0.1, 0.5, 0.9, 1.0}) {
    EXPECT_NEAR(fixed_point_map(x, pair, 0.4), normal_cdf(0.25, 0.4), 1e-14);
  }
}

TEST(FixedPointMapTest, ZeroIsPointMass) {
  const auto pair = reference_cost_pair(40);
  EXPECT_EQ(fixed_point_map(0.0, pair, 0.6), normal_cdf(pair.b(40) - pair.a(0), 0.6));
  EXPECT_EQ(fixed_point_map(1.0, pair, 0.6), normal_cdf(pair.b(0) - pair.a(40), 0.6));
  EXPECT_THROW(fixed_point_map(1.5, pair, 0.6), DomainError);
}

TEST(FixedPointMapTest, MapsUnitIntervalIntoItself) {
  const auto pair = reference_cost_pair(40);
  for (double sigma : {0.05, 0.3, 2.0}) {
    for (int i = 0; i <= 100; ++i) {
      const double y = fixed_point_map(i / 100.0, pair, sigma);
      EXPECT_GE(y, 0.0);
      EXPECT_LE(y, 1.0);
    }
  }
}

TEST(FixedPointMapTest, MatchesMonteCarlo) {
  // m ~ Binomial(40, x) from 40 coin flips, then the indicator that the noise
  // difference falls below the gap at m.
  const auto pair = reference_cost_pair(40);
  const double sigma = 0.6;
  constexpr int kSamples = 100000;
  for (int i = 0; i <= 100; ++i) {
    const double x = i / 100.0;
    auto rng = substream(6, StreamTag::kTest, 0, static_cast<std::uint64_t>(i), 0);
    long hits = 0;
    for (int s = 0; s < kSamples; ++s) {
      int m = 0;
      for (int a = 0; a < 40; ++a) m += uniform01(rng) < x;
      hits += sigma * standard_normal(rng) < pair.b(40 - m) - pair.a(m);
    }
    const double est = static_cast<double>(hits) / kSamples;
    const double f = fixed_point_map(x, pair, sigma);
    const double se = std::sqrt(std::max(f * (1 - f), 1e-12) / kSamples);
    EXPECT_NEAR(est, f, 3 * se + 1e-12) << "x=" << x;
  }
}

TEST(FindFixedPointTest, ConstantGapConvergesImmediately) {
  const auto pair = constant_pair(1.0, 1.25, 30);
  const auto r = find_fixed_point(pair, 0.4, 0.9);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 2);
  EXPECT_NEAR(r.limit, normal_cdf(0.25, 0.4), 1e-13);
  EXPECT_LE(r.residual, 1e-12);
}

TEST(FindFixedPointTest, ReferencePairAtPointSix) {
  const auto pair = reference_cost_pair(40);
  std::vector<double> limits;
  for (double x0 : {0.0, 0.5, 1.0}) {
    const auto r = find_fixed_point(pair, 0.6, x0);
    EXPECT_TRUE(r.converged) << "x0=" << x0;
    EXPECT_LE(r.residual, 1e-12);
    limits.push_back(r.limit);
  }
  EXPECT_NEAR(limits[0], limits[1], 1e-8);
  EXPECT_NEAR(limits[0], limits[2], 1e-8);
  EXPECT_NEAR(limits[0], 0.2, 0.1);

  // Bisection on f(x) - x as an independent route to the same point.
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = (lo + hi) / 2;
    (fixed_point_map(mid, pair, 0.6) - mid > 0 ? lo : hi) = mid;
  }
  EXPECT_NEAR(limits[0], lo, 1e-9);
}

TEST(FindFixedPointTest, SmallSigmaReportsInsteadOfThrowing) {
  const auto pair = reference_cost_pair(40);
  FixedPointOptions opts;
  opts.max_iterations = 2000;
  const auto r = find_fixed_point(pair, 0.1, 0.5, opts);
  EXPECT_GT(r.contraction_estimate, 0.0);
  if (!r.converged) {
    EXPECT_EQ(r.iterations, opts.max_iterations);
  }
  EXPECT_GE(r.limit, 0.0);
  EXPECT_LE(r.limit, 1.0);
}

TEST(FindFixedPointTest, RecordsIterates) {
  FixedPointOptions opts;
  opts.record_iterates = true;
  const auto r = find_fixed_point(reference_cost_pair(40), 1.0, 0.0, opts);
  ASSERT_EQ(r.iterates.size(), static_cast<std::size_t>(r.iterations) + 1);
  EXPECT_EQ(r.iterates.front(), 0.0);
  EXPECT_EQ(r.iterates.back(), r.limit);
}

// --- sums of binomials --------------------------------------------------------------

TEST(ConvolveBinomialsTest, SingleComponentIsBinomial) {
  const std::vector<BinomialComponent> one{{40, 0.3}};
  const auto conv = convolve_binomials(one, 40);
  const auto plain = next_step_distribution(40, 0.3);
  for (std::size_t m = 0; m < plain.pmf.size(); ++m) EXPECT_EQ(conv.pmf[m], plain.pmf[m]);
}

TEST(ConvolveBinomialsTest, DegenerateComponents) {
  const std::vector<BinomialComponent> c{{2, 1.0}, {2, 0.0}};
  EXPECT_EQ(convolve_binomials(c, 4).pmf, (std::vector<double>{0, 0, 1, 0, 0}));
}

TEST(ConvolveBinomialsTest, VandermondeAndEnumeration) {
  const std::vector<BinomialComponent> c{{3, 0.4}, {5, 0.4}};
  const auto conv = convolve_binomials(c, 8);
  const auto plain = next_step_distribution(8, 0.4);
  const std::vector<double> agents(8, 0.4);
  const auto brute = oracle::enumerate_successes(agents);
  for (std::size_t m = 0; m <= 8; ++m) {
    EXPECT_NEAR(conv.pmf[m], plain.pmf[m], 1e-12);
    EXPECT_NEAR(conv.pmf[m], brute[m], 1e-12);
  }
}

TEST(ConvolveBinomialsTest, RandomMixedInstancesMatchEnumeration) {
  Xoshiro256 rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    const int parts = 1 + static_cast<int>(rng() % 4);
    std::vector<BinomialComponent> comps;
    std::vector<double> agents;
    int total = 0;
    for (int j = 0; j < parts; ++j) {
      const int count = static_cast<int>(rng() % 4);
      const double p = uniform01(rng);
      comps.push_back({count, p});
      agents.insert(agents.end(), static_cast<std::size_t>(count), p);
      total += count;
    }
    const auto conv = convolve_binomials(comps, total);
    const auto brute = oracle::enumerate_successes(agents);
    ASSERT_EQ(conv.pmf.size(), brute.size());
    for (std::size_t m = 0; m < brute.size(); ++m) EXPECT_NEAR(conv.pmf[m], brute[m], 1e-12);
    EXPECT_NEAR(conv.total(), 1.0, 1e-12);
  }
}

TEST(ConvolveBinomialsTest, CountMismatchIsDomainError) {
  const std::vector<BinomialComponent> c{{3, 0.4}, {5, 0.4}};
  EXPECT_THROW(convolve_binomials(c, 9), DomainError);
}

// --- trapezoid law ------------------------------------------------------------------

TEST(TrapezoidTailTest, Landmarks) {
  EXPECT_EQ(trapezoid_tail(-0.75, 1.0, 0.5), 1.0);
  EXPECT_EQ(trapezoid_tail(-10.0, 1.0, 0.5), 1.0);
  EXPECT_EQ(trapezoid_tail(0.75, 1.0, 0.5), 0.0);
  EXPECT_EQ(trapezoid_tail(0.0, 1.0, 0.5), 0.5);
  EXPECT_EQ(trapezoid_tail(0.0, 0.3, 0.3), 0.5);
  EXPECT_NEAR(trapezoid_tail(0.5, 1.0, 0.5), 0.0625, 1e-12);
  // Point mass at zero.
  EXPECT_EQ(trapezoid_tail(-1e-9, 0.0, 0.0), 1.0);
  EXPECT_EQ(trapezoid_tail(0.0, 0.0, 0.0), 0.0);
  // One width zero: uniform on [-w, w].
  EXPECT_NEAR(trapezoid_tail(0.1, 0.0, 0.4), 0.25, 1e-15);
  EXPECT_NEAR(trapezoid_tail(-0.1, 0.4, 0.0), 0.75, 1e-15);
}

TEST(TrapezoidTailTest, MonotoneAndSymmetric) {
  for (double delta : {0.0, 0.2, 0.5, 1.0, 2.0}) {
    for (double gamma : {0.0, 0.2, 0.5, 1.0}) {
      if (delta == 0.0 && gamma == 0.0) continue;
      double prev = 1.0;
      for (int i = -300; i <= 300; ++i) {
        const double z = i / 200.0;
        const double t = trapezoid_tail(z, delta, gamma);
        EXPECT_LE(t, prev + 1e-15);
        EXPECT_NEAR(t, 1.0 - trapezoid_tail(-z, delta, gamma), 1e-15);
        prev = t;
      }
    }
  }
}

TEST(TrapezoidTailTest, MatchesMonteCarlo) {
  const double delta = 1.0, gamma = 0.5;
  constexpr int kSamples = 1000000;
  Xoshiro256 rng(12);
  std::vector<double> sums(kSamples);
  for (auto& s : sums) s = uniform(rng, -0.5, 0.5) + uniform(rng, -0.25, 0.25);
  for (int i = -8; i <= 8; ++i) {
    const double z = i * 0.1;
    long above = 0;
    for (double s : sums) above += s > z;
    const double t = trapezoid_tail(z, delta, gamma);
    const double se = std::sqrt(std::max(t * (1 - t), 1e-12) / kSamples);
    EXPECT_NEAR(static_cast<double>(above) / kSamples, t, 3 * se + 1e-12) << "z=" << z;
  }
}

TEST(TrapezoidTailTest, MatchesQuadrature) {
  for (double delta : {0.0, 0.5, 1.0}) {
    for (double gamma : {0.0, 0.2, 0.5}) {
      const double top = (delta + gamma) / 2;
      for (int i = -12; i <= 12; ++i) {
        const double z = top * i / 10.0;
        EXPECT_NEAR(trapezoid_tail(z, delta, gamma),
                    oracle::trapezoid_tail_by_quadrature(z, delta, gamma), 1e-9)
            << "delta=" << delta << " gamma=" << gamma << " z=" << z;
      }
    }
  }
}

// --- interval choice probabilities ----------------------------------------------------

TEST(ChoiceProbLambdaTest, EqualWidthsAreRiskIndependent) {
  const auto pair = reference_cost_pair(40);
  const double f0 = choice_prob_lambda(pair, 10, 0.7, 0.7, 0.0);
  EXPECT_EQ(choice_prob_lambda(pair, 10, 0.7, 0.7, 0.5), f0);
  EXPECT_EQ(choice_prob_lambda(pair, 10, 0.7, 0.7, 1.0), f0);
}

TEST(ChoiceProbLambdaTest, RiskNeutralUsesRawGap) {
  const auto pair = reference_cost_pair(40);
  EXPECT_EQ(choice_prob_lambda(pair, 8, 1.0, 0.2, 0.5),
            trapezoid_tail(pair.a(8) - pair.b(32), 1.0, 0.2));
}

TEST(ChoiceProbLambdaTest, WorkedExampleParameters) {
  const auto pair = constant_pair(1.0, 1.0, 10);
  EXPECT_NEAR(choice_threshold(pair, 4, 1.0, 0.5, 1.0), -0.25, 1e-15);
  EXPECT_NEAR(choice_prob_lambda(pair, 4, 1.0, 0.5, 1.0), 0.75, 1e-12);
  EXPECT_THROW(choice_prob_lambda(pair, 4, 1.0, 0.5, 1.5), DomainError);
}

TEST(ChoiceProbLambdaTest, MonotoneInRiskLevel) {
  const auto pair = reference_cost_pair(40);
  for (int n : {0, 8, 20, 40}) {
    double prev_up = -1.0, prev_down = 2.0;
    for (int i = 0; i <= 100; ++i) {
      const double lambda = i / 100.0;
      const double up = choice_prob_lambda(pair, n, 1.5, 0.3, lambda);    // delta > gamma
      const double down = choice_prob_lambda(pair, n, 0.3, 1.5, lambda);  // delta < gamma
      EXPECT_GE(up, prev_up);
      EXPECT_LE(down, prev_down);
      prev_up = up;
      prev_down = down;
    }
  }
}

TEST(PopulationChoiceProbTest, PointMassAndEqualWidths) {
  const auto pair = reference_cost_pair(40);
  const PopulationDistribution point{RiskDiscrete{{{0.3, 1.0}}}, 40};
  EXPECT_EQ(population_choice_prob(pair, 8, 1.0, 0.2, point),
            choice_prob_lambda(pair, 8, 1.0, 0.2, 0.3));
  const PopulationDistribution uniform{RiskUniform{}, 40};
  EXPECT_NEAR(population_choice_prob(pair, 8, 0.9, 0.9, uniform),
              choice_prob_lambda(pair, 8, 0.9, 0.9, 0.77), 1e-15);
  EXPECT_NEAR(population_choice_prob(pair, 8, 0.9, 0.9, risk_lattice(40)),
              choice_prob_lambda(pair, 8, 0.9, 0.9, 0.1), 1e-15);
}

TEST(PopulationChoiceProbTest, UniformMatchesSimpson) {
  const auto pair = reference_cost_pair(40);
  const PopulationDistribution uniform{RiskUniform{}, 40};
  const std::vector<std::pair<double, double>> widths{{1.0, 0.2}, {0.2, 1.0}, {2.0, 0.1},
                                                      {0.5, 0.45}, {1.8, 1.2}};
  for (const auto& [delta, gamma] : widths) {
    for (int n : {0, 8, 16, 40}) {
      const double simpson = oracle::simpson(
          [&](double l) { return choice_prob_lambda(pair, n, delta, gamma, l); }, 0.0, 1.0, 100000);
      EXPECT_NEAR(population_choice_prob(pair, n, delta, gamma, uniform), simpson, 1e-9)
          << "delta=" << delta << " gamma=" << gamma << " n=" << n;
    }
  }
}

TEST(PopulationChoiceProbTest, DelayPopulationRejected) {
  const auto pair = reference_cost_pair(40);
  EXPECT_THROW(population_choice_prob(pair, 8, 1.0, 0.2, uniform_delays(1, 40)), DomainError);
}

TEST(BroadcastLawTest, NormalizedAndMeanAgreesWithAveragedProbability) {
  // The broadcast law correlates agents, but E n^A is still N times the
  // population-averaged choice probability.
  const auto pair = reference_cost_pair(40);
  const auto roster = materialize(risk_lattice(40));
  for (double delta : {0.2, 1.0, 2.0}) {
    for (double gamma : {0.2, 0.6, 2.0}) {
      const auto law = broadcast_next_step_distribution(pair, 8, delta, gamma, roster.risk_levels);
      EXPECT_NEAR(law.total(), 1.0, 1e-12);
      EXPECT_NEAR(law.mean(), 40 * population_choice_prob(pair, 8, delta, gamma, risk_lattice(40)),
                  1e-9);
    }
  }
}

}  // namespace
}  // namespace congsig
