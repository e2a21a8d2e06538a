#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oht/gaussian.hpp"
#include "oht/random.hpp"

using namespace oht;

TEST(Orthant, UnivariateMedian) {
  const std::vector<double> x{0.0};
  const auto r = orthant_q(x, Eigen::MatrixXd::Identity(1, 1));
  EXPECT_EQ(r.probability, 0.5);
  EXPECT_EQ(r.method, OrthantMethod::ClosedForm);
}

TEST(Orthant, BivariateIdentity) {
  const std::vector<double> x{0.0, 0.0};
  EXPECT_NEAR(orthant_q(x, Eigen::MatrixXd::Identity(2, 2)).probability, 0.25, 1e-10);
}

TEST(Orthant, SheppardFormula) {
  const std::vector<double> x{0.0, 0.0};
  for (double rho : {-0.8, -0.3, 0.0, 0.5, 0.9}) {
    Eigen::MatrixXd s(2, 2);
    s << 1.0, rho, rho, 1.0;
    const double oracle = 0.25 + std::asin(rho) / (2.0 * std::numbers::pi);
    EXPECT_NEAR(orthant_q(x, s).probability, oracle, 1e-9) << "rho " << rho;
  }
  Eigen::MatrixXd s(2, 2);
  s << 1.0, 0.5, 0.5, 1.0;
  EXPECT_NEAR(0.25 + std::asin(0.5) / (2.0 * std::numbers::pi), 1.0 / 3.0, 1e-12);
}

TEST(Orthant, ZeroVarianceCoordinatesAreExact) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2, 2);
  s(0, 0) = 1.0;
  const std::vector<double> below{0.0, -1.0};
  const std::vector<double> above{0.0, 1.0};
  EXPECT_NEAR(orthant_q(below, s).probability, 0.5, 1e-15);
  EXPECT_EQ(orthant_q(above, s).probability, 0.0);
}

TEST(Orthant, DiagonalFactorizesWithinMonteCarloError) {
  CounterRng rng(derive_key(31, {}));
  for (std::size_t k : {3u, 4u, 5u}) {
    std::vector<double> x(k);
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    double product = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
      x[i] = rng.uniform() - 0.5;
      const double v = 0.5 + rng.uniform();
      s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = v;
      product *= normal_tail(x[i] / std::sqrt(v));
    }
    const auto r = orthant_q(x, s);
    EXPECT_EQ(r.method, OrthantMethod::MonteCarlo);
    EXPECT_NEAR(r.probability, product, 3.0 * r.std_error) << "k " << k;
  }
}

TEST(Orthant, NonincreasingInEachCoordinate) {
  Eigen::MatrixXd s(3, 3);
  s << 1.0, 0.3, 0.1, 0.3, 2.0, -0.2, 0.1, -0.2, 0.5;
  std::vector<double> x{-0.2, 0.1, 0.3};
  double previous = orthant_q(x, s).probability;
  for (int step = 0; step < 5; ++step) {
    x[static_cast<std::size_t>(step % 3)] += 0.2;
    const double now = orthant_q(x, s).probability;
    EXPECT_LE(now, previous);
    previous = now;
  }
  std::vector<double> y{-0.5, 0.0};
  Eigen::MatrixXd s2(2, 2);
  s2 << 1.0, 0.4, 0.4, 1.5;
  double last = 1.0;
  for (int step = 0; step < 10; ++step) {
    y[1] += 0.3;
    const double now = orthant_q(y, s2).probability;
    EXPECT_LE(now, last + 1e-12);
    last = now;
  }
}

TEST(Orthant, SameSeedSameEstimate) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(3, 3);
  s(0, 1) = s(1, 0) = 0.4;
  const std::vector<double> x{0.1, 0.2, -0.3};
  EXPECT_EQ(orthant_q(x, s).probability, orthant_q(x, s).probability);
}

TEST(Orthant, Errors) {
  const std::vector<double> x{0.0, 0.0};
  try {
    orthant_q(x, Eigen::MatrixXd::Identity(3, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  try {
    orthant_q(x, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotPsd);
  }
}
