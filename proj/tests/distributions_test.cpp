#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oht/distributions.hpp"
#include "support.hpp"

using namespace oht;

namespace {

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no oht::Error thrown";
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(Alphabet, LabelsAndLookup) {
  const Alphabet ab(std::vector<std::string>{"a", "b", "c"});
  EXPECT_EQ(ab.size(), 3u);
  EXPECT_EQ(ab.index_of("c"), 2u);
  EXPECT_EQ(kind_of([&] { ab.index_of("z"); }), ErrorKind::UnknownSymbol);
  EXPECT_EQ(kind_of([] { Alphabet(1); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { Alphabet(std::vector<std::string>{"a", "a"}); }), ErrorKind::InvalidArgument);
}

TEST(Distribution, ValidatesAndRenormalizes) {
  const Distribution d{0.25, 0.75 + 5e-13};
  EXPECT_DOUBLE_EQ(d[0] + d[1], 1.0);
  EXPECT_TRUE(d.strictly_positive());
  EXPECT_FALSE((Distribution{1.0, 0.0}).strictly_positive());
  EXPECT_EQ(kind_of([] { Distribution{0.5, 0.4}; }), ErrorKind::InvalidDistribution);
  EXPECT_EQ(kind_of([] { Distribution{1.2, -0.2}; }), ErrorKind::InvalidDistribution);
  EXPECT_EQ(kind_of([] { Distribution{std::nan(""), 1.0}; }), ErrorKind::InvalidDistribution);
}

TEST(KlDivergence, IdentityIsZero) { EXPECT_EQ(kl_divergence({0.5, 0.5}, {0.5, 0.5}), 0.0); }

TEST(KlDivergence, PointMassAgainstThirds) {
  EXPECT_NEAR(kl_divergence({1.0, 0.0}, {1.0 / 3.0, 2.0 / 3.0}), std::log(3.0), 1e-15);
}

TEST(KlDivergence, HandEvaluatedSum) {
  const double expected = 0.9 * std::log(1.8) + 0.1 * std::log(0.2);
  EXPECT_NEAR(kl_divergence({0.9, 0.1}, {0.5, 0.5}), expected, 1e-15);
}

TEST(KlDivergence, Errors) {
  EXPECT_EQ(kind_of([] { kl_divergence({0.5, 0.5}, {1.0, 0.0}); }), ErrorKind::SupportViolation);
  EXPECT_EQ(kind_of([] { kl_divergence({0.5, 0.5}, {0.2, 0.3, 0.5}); }), ErrorKind::AlphabetMismatch);
}

TEST(KlDivergence, GibbsInequalityOnRandomPairs) {
  CounterRng rng(derive_key(11, {}));
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t K = 2 + gen::uniform_index(rng, 5);
    const Distribution p = gen::random_sparse_distribution(K, rng);
    const Distribution q = gen::random_distribution(K, rng, 1e-3);
    const double d = kl_divergence(p, q);
    EXPECT_GE(d, 0.0) << "trial " << trial;
    if (!(p == q)) {
      EXPECT_GT(d, 0.0) << "trial " << trial;
    }
    EXPECT_EQ(kl_divergence(q, q), 0.0);
  }
}

TEST(KlDivergence, UniformMixtureBoundedByLogK) {
  CounterRng rng(derive_key(12, {}));
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t k = 2 + gen::uniform_index(rng, 6);
    const std::size_t K = 2 + gen::uniform_index(rng, 4);
    std::vector<Distribution> comps;
    for (std::size_t i = 0; i < k; ++i) comps.push_back(gen::random_sparse_distribution(K, rng));
    const std::vector<double> w(k, 1.0 / static_cast<double>(k));
    const Distribution m = mixture(w, comps);
    for (const auto& q : comps) EXPECT_LE(kl_divergence(q, m), std::log(static_cast<double>(k)) + 1e-12);
  }
}

TEST(Empirical, CountsSymbols) {
  const Alphabet ab(std::vector<std::string>{"a", "b"});
  const auto e = empirical("aab", ab);
  EXPECT_TRUE(std::ranges::equal(e.counts(), std::vector<std::uint64_t>{2, 1}));
  EXPECT_EQ(e.n(), 3u);
  EXPECT_TRUE(std::ranges::equal(empirical("bbbb", ab).counts(), std::vector<std::uint64_t>{0, 4}));
  EXPECT_DOUBLE_EQ(e.mass()[0], 2.0 / 3.0);
}

TEST(Empirical, Errors) {
  const Alphabet ab(std::vector<std::string>{"a", "b"});
  EXPECT_EQ(kind_of([&] { empirical("", ab); }), ErrorKind::EmptySequence);
  EXPECT_EQ(kind_of([&] { empirical("abc", ab); }), ErrorKind::UnknownSymbol);
  const SymbolSequence bad{0, 2};
  EXPECT_EQ(kind_of([&] { empirical(std::span<const Symbol>(bad), ab); }), ErrorKind::UnknownSymbol);
}

TEST(Empirical, MultiByteSymbols) {
  const Alphabet ab(std::vector<std::string>{"α", "β"});
  EXPECT_TRUE(std::ranges::equal(empirical("αββ", ab).counts(), std::vector<std::uint64_t>{1, 2}));
}

TEST(Mixture, IdempotentOnCopies) {
  const Distribution p{0.3, 0.7};
  EXPECT_TRUE(mixture({0.5, 0.5}, {p, p}) == p);
}

TEST(Mixture, PointMassesGiveWeights) {
  const Distribution m = mixture({1.0 / 3.0, 2.0 / 3.0}, {Distribution{1.0, 0.0}, Distribution{0.0, 1.0}});
  EXPECT_NEAR(m[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(m[1], 2.0 / 3.0, 1e-15);
}

TEST(Mixture, OneAnomalyTwoNominals) {
  const Distribution m = mixture({1.0 / 3.0, 2.0 / 3.0}, {Distribution{0.8, 0.2}, Distribution{0.2, 0.8}});
  EXPECT_NEAR(m[0], 0.4, 1e-15);
  EXPECT_NEAR(m[1], 0.6, 1e-15);
}

TEST(Mixture, Errors) {
  EXPECT_EQ(kind_of([] { mixture({0.5, 0.4}, {Distribution{0.5, 0.5}, Distribution{0.5, 0.5}}); }),
            ErrorKind::WeightSumViolation);
  EXPECT_EQ(kind_of([] { mixture({0.5, 0.5}, {Distribution{0.5, 0.5}, Distribution{0.2, 0.3, 0.5}}); }),
            ErrorKind::AlphabetMismatch);
}

TEST(Mixture, PermutationInvariant) {
  CounterRng rng(derive_key(13, {}));
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + gen::uniform_index(rng, 4);
    std::vector<Distribution> comps;
    std::vector<double> w;
    for (std::size_t i = 0; i < k; ++i) comps.push_back(gen::random_sparse_distribution(3, rng));
    const Distribution wd = gen::random_distribution(k, rng);
    w.assign(wd.mass().begin(), wd.mass().end());
    std::vector<std::size_t> perm(k);
    for (std::size_t i = 0; i < k; ++i) perm[i] = i;
    std::reverse(perm.begin(), perm.end());
    std::rotate(perm.begin(), perm.begin() + static_cast<long>(gen::uniform_index(rng, k)), perm.end());
    std::vector<Distribution> pc;
    std::vector<double> pw;
    for (std::size_t i : perm) {
      pc.push_back(comps[i]);
      pw.push_back(w[i]);
    }
    const Distribution a = mixture(w, comps);
    const Distribution b = mixture(pw, pc);
    for (std::size_t x = 0; x < 3; ++x) EXPECT_NEAR(a[x], b[x], 1e-15);
  }
}

TEST(Mixture, PositiveWhenAPositivelyWeightedComponentIs) {
  const Distribution m = mixture({0.5, 0.5}, {Distribution{1.0, 0.0}, Distribution{0.3, 0.7}});
  EXPECT_TRUE(m.strictly_positive());
  EXPECT_FALSE(mixture({1.0, 0.0}, {Distribution{1.0, 0.0}, Distribution{0.3, 0.7}}).strictly_positive());
}
