#include <gtest/gtest.h>

#include <cmath>

#include "oht/acceptance.hpp"
#include "oht/detector.hpp"
#include "oht/large_deviations.hpp"
#include "support.hpp"

using namespace oht;

namespace {

const OutlierSet kB({1}, 4);

// Frozen from the 0.02-resolution grid oracle (acceptance::detail::ld_grid_oracle)
// and cross-checked by an independent dense-grid script; the solver must not
// exceed them by more than the grid's own discretization error.
constexpr double kGrid025 = 0.160984743943;
constexpr double kGrid050 = 0.0570433806495;
constexpr double kGrid075 = 0.0129638667324;

}  // namespace

TEST(LdInner, ZeroWhenAnomaliesAreNominal) {
  const Scenario flat(4, Distribution{0.3, 0.7}, {Distribution{0.3, 0.7}});
  const auto s = ld_inner(LdProblem{flat, kB, 0.05, OutlierSet({2}, 4), OutlierSet({3}, 4)});
  EXPECT_EQ(s.value, 0.0);
  ASSERT_EQ(s.minimizer.size(), 4u);
  for (const auto& q : s.minimizer) EXPECT_TRUE(q == flat.nominal());
}

TEST(LdInner, ZeroWhenTruthIsFeasible) {
  const Scenario sc = gen::binary_scenario();
  const OutlierSet C({2}, 4), D({3}, 4);
  const auto truth = sc.truth_panel(kB);
  const double lambda = std::max(g_score(C, truth), g_score(D, truth));
  EXPECT_EQ(ld_inner(LdProblem{sc, kB, lambda, C, D}).value, 0.0);
}

TEST(LdInner, RejectsBadProblems) {
  const Scenario sc = gen::binary_scenario();
  EXPECT_THROW(ld_inner(LdProblem{sc, kB, 0.1, OutlierSet({2}, 4), OutlierSet({2}, 4)}), Error);
  EXPECT_THROW(ld_inner(LdProblem{sc, kB, 0.0, OutlierSet({2}, 4), OutlierSet({3}, 4)}), Error);
}

TEST(LdExponent, MatchesGridOracle) {
  const Scenario sc = gen::binary_scenario();
  const double g = profile(kB, sc).gd_min;
  const double frozen[] = {kGrid025, kGrid050, kGrid075};
  int k = 0;
  for (double f : {0.25, 0.5, 0.75}) {
    const auto s = ld_exponent(kB, sc, f * g);
    ASSERT_TRUE(s.feasible);
    EXPECT_LE(s.value, frozen[k] + 1e-9);
    EXPECT_NEAR(s.value, frozen[k], 0.03);
    // Minimizer is feasible and reproduces the reported value.
    ASSERT_TRUE(s.pair.has_value());
    EXPECT_LE(g_score(s.pair->first, s.minimizer), f * g + 1e-8);
    EXPECT_LE(g_score(s.pair->second, s.minimizer), f * g + 1e-8);
    EXPECT_NEAR(detail::ld_objective(s.minimizer, kB, sc), s.value, 1e-10);
    ++k;
  }
}

TEST(LdExponent, GridOracleReproducesFrozenValues) {
  const Scenario sc = gen::binary_scenario();
  const double g = profile(kB, sc).gd_min;
  EXPECT_NEAR(acceptance::detail::ld_grid_oracle(0.2, 0.8, 0.5 * g, 50), kGrid050, 1e-9);
}

TEST(LdExponent, PositiveExactlyBelowGdMin) {
  CounterRng rng(derive_key(51, {}));
  for (int s = 0; s < 3; ++s) {
    const Scenario sc(4, gen::random_distribution(2, rng, 0.2), {gen::random_distribution(2, rng, 0.2)});
    const double g = profile(kB, sc).gd_min;
    EXPECT_LE(ld_exponent(kB, sc, 1.1 * g).value, 1e-4);
    EXPECT_GT(ld_exponent(kB, sc, 0.9 * g).value, 1e-7);
    EXPECT_GT(ld_exponent(kB, sc, 0.5 * g).value, 1e-4);
  }
}

TEST(LdExponent, NonincreasingInLambdaAndBelowUpperBound) {
  const Scenario sc = gen::binary_scenario();
  const double g = profile(kB, sc).gd_min;
  const double cap = ld_max_upper_bound(kB, sc);
  double previous = std::numeric_limits<double>::infinity();
  for (double f : {0.05, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2}) {
    const double v = ld_exponent(kB, sc, f * g).value;
    EXPECT_LE(v, previous + 1e-8) << "factor " << f;
    EXPECT_LE(v, cap + 1e-8);
    previous = v;
  }
}

TEST(LdExponent, ZeroWhenAnomaliesAreNominal) {
  const Scenario flat(5, Distribution{0.3, 0.7}, {Distribution{0.3, 0.7}, Distribution{0.3, 0.7}});
  EXPECT_EQ(ld_exponent(OutlierSet({1, 2}, 5), flat, 0.01).value, 0.0);
}

TEST(LdUpperBound, ZeroWhenAnomaliesAreNominal) {
  const Scenario flat(4, Distribution{0.3, 0.7}, {Distribution{0.3, 0.7}});
  EXPECT_NEAR(ld_max_upper_bound(kB, flat), 0.0, 1e-15);
}

TEST(LdUpperBound, MatchesOneDimensionalGrid) {
  CounterRng rng(derive_key(52, {}));
  for (int s = 0; s < 5; ++s) {
    const Scenario sc(4, gen::random_distribution(2, rng, 0.05), {gen::random_distribution(2, rng, 0.05)});
    const double pn = sc.nominal()[0], pa = sc.anomaly(1)[0];
    // Golden-section refinement of a coarse grid over q in (0, 1).
    auto f = [&](double q) {
      return acceptance::detail::binary_kl(q, pa) + 3.0 * acceptance::detail::binary_kl(q, pn);
    };
    double best_q = 0.0, best = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 10000; ++k) {
      const double q = k / 10000.0;
      if (f(q) < best) best = f(q), best_q = q;
    }
    double lo = std::max(0.0, best_q - 1e-4), hi = std::min(1.0, best_q + 1e-4);
    for (int it = 0; it < 100; ++it) {
      const double a = lo + (hi - lo) * 0.381966, b = hi - (hi - lo) * 0.381966;
      if (f(a) < f(b)) hi = b;
      else lo = a;
    }
    EXPECT_NEAR(ld_max_upper_bound(kB, sc), f(0.5 * (lo + hi)), 1e-6);
  }
}
