#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oht/detector.hpp"
#include "support.hpp"

using namespace oht;

namespace {

const Alphabet kAb(std::vector<std::string>{"a", "b"});
const double kRivalScore = std::log(3.0) + 2.0 * std::log(1.5);

std::vector<EmpiricalDistribution> empiricals(const std::vector<std::string>& panel) {
  std::vector<EmpiricalDistribution> out;
  for (const auto& s : panel) out.push_back(empirical(s, kAb));
  return out;
}

std::vector<EmpiricalDistribution> random_panel(std::size_t M, std::size_t K, std::size_t n, CounterRng& rng) {
  std::vector<EmpiricalDistribution> out;
  for (std::size_t i = 0; i < M; ++i) {
    std::vector<std::uint64_t> counts(K, 0);
    // Coarse per-sequence bias so that panels differ.
    const std::size_t favoured = gen::uniform_index(rng, K);
    for (std::size_t k = 0; k < n; ++k)
      ++counts[rng.uniform() < 0.4 ? favoured : gen::uniform_index(rng, K)];
    out.emplace_back(std::move(counts));
  }
  return out;
}

}  // namespace

TEST(GScore, IdenticalPanelScoresZero) {
  const std::vector<Distribution> q(5, Distribution{0.3, 0.3, 0.4});
  const auto space = enumerate(5);
  for (const auto& B : space.sets()) EXPECT_EQ(g_score(B, q), 0.0);
}

TEST(GScore, PointMassPanel) {
  const std::vector<Distribution> q{Distribution{1.0, 0.0}, Distribution{0.0, 1.0}, Distribution{0.0, 1.0},
                                    Distribution{0.0, 1.0}};
  EXPECT_EQ(g_score(OutlierSet({1}, 4), q), 0.0);
  EXPECT_NEAR(g_score(OutlierSet({2}, 4), q), kRivalScore, 1e-14);
  EXPECT_NEAR(kRivalScore, 1.9095, 5e-5);
}

TEST(ScoreAll, HandEvaluatedTable) {
  const auto table = score_all(empiricals({"aaaa", "bbbb", "bbbb", "bbbb"}), enumerate(4));
  EXPECT_EQ(table.score(0), 0.0);
  for (std::size_t k = 1; k < 4; ++k) EXPECT_NEAR(table.score(k), kRivalScore, 1e-14);
}

TEST(ScoreAll, IdenticalEmpiricalsAllZero) {
  const auto table = score_all(empiricals({"abab", "baba", "abba", "baab"}), enumerate(4));
  for (double s : table.scores()) EXPECT_EQ(s, 0.0);
}

TEST(ScoreAll, FiveRandomSequences) {
  CounterRng rng(derive_key(21, {}));
  const auto table = score_all(random_panel(5, 3, 40, rng), enumerate(5));
  EXPECT_EQ(table.scores().size(), 15u);
  for (double s : table.scores()) EXPECT_TRUE(std::isfinite(s));
}

TEST(ScoreAll, Errors) {
  try {
    score_all(empiricals({"ab", "ab", "ab"}), enumerate(4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::LengthMismatch);
  }
  try {
    score_all(empiricals({"ab", "ab", "abb", "ab"}), enumerate(4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::LengthMismatch);
  }
}

TEST(Decide, HandEvaluatedPanel) {
  const auto table = score_all(empiricals({"aaaa", "bbbb", "bbbb", "bbbb"}), enumerate(4));
  EXPECT_EQ(decide(table, 1.0), Verdict::outliers(OutlierSet({1}, 4)));
  EXPECT_TRUE(decide(table, 2.5).is_reject());
  EXPECT_THROW(decide(table, 0.0), Error);
}

TEST(Decide, AllZeroScoresReject) {
  const auto table = score_all(empiricals({"abab", "baba", "abba", "baab"}), enumerate(4));
  EXPECT_TRUE(decide(table, 0.1).is_reject());
}

TEST(Decide, TiesReject) {
  const auto space = enumerate(4);
  EXPECT_TRUE(decide(ScoreTable(space, {0.5, 0.5, 2.0, 3.0}), 0.1).is_reject());
  EXPECT_TRUE(decide(ScoreTable(space, {0.0, 1.0, 2.0, 3.0}), 1.0).is_reject());
  EXPECT_EQ(decide(ScoreTable(space, {3.0, 1.5, 2.0, 0.2}), 1.0), Verdict::outliers(OutlierSet({4}, 4)));
}

TEST(RunTest, EndToEnd) {
  const std::vector<std::string> panel{"aaaa", "bbbb", "bbbb", "bbbb"};
  EXPECT_EQ(run_test(panel, kAb, 1.0), Verdict::outliers(OutlierSet({1}, 4)));
  const std::vector<std::string> balanced{"abab", "baba", "abba", "baab"};
  EXPECT_TRUE(run_test(balanced, kAb, 0.1).is_reject());
}

TEST(RunTest, LargeThresholdAlwaysRejects) {
  CounterRng rng(derive_key(22, {}));
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t M = 3 + gen::uniform_index(rng, 8);
    const auto table = score_all(random_panel(M, 2 + gen::uniform_index(rng, 3), 30, rng), enumerate(M));
    EXPECT_TRUE(decide(table, 10.0).is_reject());
  }
}

TEST(ScoreProperties, BoundedAndZeroExactlyWhenOffSetEqual) {
  CounterRng rng(derive_key(23, {}));
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t M = 3 + gen::uniform_index(rng, 5);
    const std::size_t K = 2 + gen::uniform_index(rng, 3);
    const auto panel = random_panel(M, K, 1 + gen::uniform_index(rng, 12), rng);
    const auto space = enumerate(M);
    const auto table = score_all(panel, space);
    for (std::size_t c = 0; c < space.size(); ++c) {
      const auto off = complement(space[c]);
      const double m = static_cast<double>(off.size());
      EXPECT_GE(table.score(c), 0.0);
      EXPECT_LE(table.score(c), m * std::log(m) + 1e-12);
      const bool equal = std::all_of(off.begin(), off.end(),
                                     [&](std::size_t i) { return std::ranges::equal(panel[i - 1].counts(), panel[off[0] - 1].counts()); });
      EXPECT_EQ(table.score(c) == 0.0, equal) << "trial " << trial;
    }
  }
}

TEST(ScoreProperties, DeclaredSetIsUniqueStrictMinimizer) {
  CounterRng rng(derive_key(24, {}));
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t M = 3 + gen::uniform_index(rng, 4);
    const auto table = score_all(random_panel(M, 2, 8, rng), enumerate(M));
    const auto v = decide(table, 0.05 + rng.uniform());
    if (v.is_reject()) continue;
    const double s = table.score(v.set());
    for (std::size_t c = 0; c < table.scores().size(); ++c)
      if (!(table.space()[c] == v.set())) {
        EXPECT_LT(s, table.score(c));
      }
  }
}

TEST(ScoreProperties, PermutationEquivariance) {
  CounterRng rng(derive_key(25, {}));
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t M = 3 + gen::uniform_index(rng, 4);
    const auto panel = random_panel(M, 3, 20, rng);
    std::vector<std::size_t> pi(M);  // pi[i-1] is the image of i
    std::iota(pi.begin(), pi.end(), 1);
    for (std::size_t i = M - 1; i > 0; --i) std::swap(pi[i], pi[gen::uniform_index(rng, i + 1)]);
    std::vector<EmpiricalDistribution> moved(panel);
    for (std::size_t i = 0; i < M; ++i) moved[pi[i] - 1] = panel[i];
    const auto space = enumerate(M);
    const auto a = score_all(panel, space);
    const auto b = score_all(moved, space);
    auto image = [&](const OutlierSet& B) {
      std::vector<std::size_t> m;
      for (std::size_t i : B.members()) m.push_back(pi[i - 1]);
      return OutlierSet(m, M);
    };
    for (std::size_t c = 0; c < space.size(); ++c) EXPECT_NEAR(b.score(image(space[c])), a.score(c), 1e-12);
    const double lambda = 0.2;
    const auto va = decide(a, lambda);
    const auto vb = decide(b, lambda);
    EXPECT_EQ(va.is_reject(), vb.is_reject());
    if (!va.is_reject()) {
      EXPECT_EQ(vb.set(), image(va.set()));
    }
  }
}
