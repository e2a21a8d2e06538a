#pragma once

// Gaussian tail probabilities. orthant_q(x, Sigma) = P[Z_1 > x_1, ..., Z_k > x_k]
// for Z ~ N(0, Sigma).
//
// Zero-variance coordinates are constant zero and are resolved exactly. The
// remaining dimension picks the route: one coordinate uses erfc, two use
// adaptive Gauss-Kronrod quadrature of the conditional tail, three or more
// use Monte Carlo sampling through the eigendecomposition of Sigma (negative
// eigenvalues within tolerance are clipped to zero).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "oht/error.hpp"

namespace oht {

inline constexpr double kPsdTolerance = 1e-9;
inline constexpr double kZeroVariance = 1e-14;

// P[Z > x] for standard normal Z.
inline double normal_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::InvalidArgument, "quantile level must be in (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

enum class OrthantMethod { Exact, ClosedForm, Quadrature, MonteCarlo };

struct OrthantOptions {
  std::size_t samples = 200000;
  std::uint64_t seed = 0x0b5e55ed5eedULL;
  bool force_monte_carlo = false;
};

struct OrthantResult {
  double probability = 0.0;
  double std_error = 0.0;
  OrthantMethod method = OrthantMethod::Exact;
};

namespace detail {

inline double bivariate_tail(double a1, double a2, double rho) {
  constexpr double kCut = 12.0;
  if (rho >= 1.0 - 1e-12) return normal_tail(std::max(a1, a2));
  if (rho <= -1.0 + 1e-12) return std::max(0.0, normal_tail(a1) - normal_tail(-a2));
  if (a1 >= kCut || a2 >= kCut) return 0.0;
  const double s = std::sqrt(1.0 - rho * rho);
  auto integrand = [&](double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi) * normal_tail((a2 - rho * z) / s);
  };
  const double lo = std::max(a1, -kCut);
  double err = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, lo, kCut, 20, 1e-13, &err);
  return std::clamp(value, 0.0, 1.0);
}

inline void validate_covariance(std::span<const double> x, const Eigen::MatrixXd& sigma) {
  const auto k = static_cast<Eigen::Index>(x.size());
  if (sigma.rows() != k || sigma.cols() != k)
    throw Error(ErrorKind::DimensionMismatch, "covariance must be k x k for a length-k point");
  if (k > 0 && (sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, sigma.cwiseAbs().maxCoeff()))
    throw Error(ErrorKind::NotPsd, "covariance is not symmetric");
}

}  // namespace detail

inline OrthantResult orthant_q(std::span<const double> x, const Eigen::MatrixXd& sigma,
                               const OrthantOptions& options = {}) {
  detail::validate_covariance(x, sigma);
  const std::size_t k = x.size();
  if (k == 0) return {1.0, 0.0, OrthantMethod::Exact};

  const double scale = std::max(1.0, sigma.diagonal().cwiseAbs().maxCoeff());
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -kPsdTolerance * scale)
      throw Error(ErrorKind::NotPsd, "covariance has eigenvalue " + std::to_string(eig.eigenvalues().minCoeff()));
  }

  // Zero-variance coordinates are identically zero.
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < k; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (sigma(ii, ii) <= kZeroVariance * scale) {
      if (!(0.0 > x[i])) return {0.0, 0.0, OrthantMethod::Exact};
    } else {
      live.push_back(i);
    }
  }
  if (live.empty()) return {1.0, 0.0, OrthantMethod::Exact};

  const auto d = static_cast<Eigen::Index>(live.size());
  Eigen::MatrixXd sub(d, d);
  Eigen::VectorXd point(d);
  for (Eigen::Index a = 0; a < d; ++a) {
    point(a) = x[live[static_cast<std::size_t>(a)]];
    for (Eigen::Index b = 0; b < d; ++b)
      sub(a, b) = sigma(static_cast<Eigen::Index>(live[static_cast<std::size_t>(a)]),
                        static_cast<Eigen::Index>(live[static_cast<std::size_t>(b)]));
  }

  if (!options.force_monte_carlo) {
    if (d == 1) return {normal_tail(point(0) / std::sqrt(sub(0, 0))), 0.0, OrthantMethod::ClosedForm};
    if (d == 2) {
      const double s1 = std::sqrt(sub(0, 0));
      const double s2 = std::sqrt(sub(1, 1));
      const double rho = std::clamp(sub(0, 1) / (s1 * s2), -1.0, 1.0);
      return {detail::bivariate_tail(point(0) / s1, point(1) / s2, rho), 0.0, OrthantMethod::Quadrature};
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sub);
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd factor = eig.eigenvectors() * root.asDiagonal();

  std::mt19937_64 gen(options.seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd g(d);
  Eigen::VectorXd z(d);
  std::size_t hits = 0;
  const std::size_t samples = std::max<std::size_t>(options.samples, 1);
  for (std::size_t s = 0; s < samples; ++s) {
    for (Eigen::Index a = 0; a < d; ++a) g(a) = normal(gen);
    z.noalias() = factor * g;
    if ((z.array() > point.array()).all()) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(samples);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(samples)), OrthantMethod::MonteCarlo};
}

}  // namespace oht
