#pragma once

// Closed-form performance quantities of the threshold test under a known
// scenario (P_N, P_A,1..P_A,T): the limiting rival scores GD(B, C), the
// information densities and their covariance structure, the finite-length
// error bounds, and the second-order threshold calibration.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oht/detector.hpp"
#include "oht/distributions.hpp"
#include "oht/gaussian.hpp"
#include "oht/hypothesis_space.hpp"

namespace oht {

// Nominal law plus one anomalous law per possible outlier rank. Under H_B the
// i-th smallest member of B follows anomalies[i - 1].
class Scenario {
 public:
  Scenario(std::size_t M, Distribution nominal, std::vector<Distribution> anomalies,
           std::size_t max_M = kDefaultMaxSequences)
      : space_(enumerate(M, max_M)), nominal_(std::move(nominal)), anomalies_(std::move(anomalies)) {
    if (anomalies_.size() != space_.T())
      throw Error(ErrorKind::InvalidArgument, "expected T = " + std::to_string(space_.T()) +
                                                  " anomalous distributions, got " +
                                                  std::to_string(anomalies_.size()));
    if (!nominal_.strictly_positive())
      throw Error(ErrorKind::NonPositiveMass, "nominal distribution must be strictly positive");
    for (const auto& a : anomalies_) {
      require_same_alphabet(nominal_, a);
      if (!a.strictly_positive())
        throw Error(ErrorKind::NonPositiveMass, "anomalous distributions must be strictly positive");
    }
  }

  std::size_t M() const noexcept { return space_.M(); }
  std::size_t alphabet_size() const noexcept { return nominal_.size(); }
  const HypothesisSpace& space() const noexcept { return space_; }
  const Distribution& nominal() const noexcept { return nominal_; }
  const std::vector<Distribution>& anomalies() const noexcept { return anomalies_; }
  const Distribution& anomaly(std::size_t rank) const { return anomalies_.at(rank - 1); }

  // Law of sequence i (1-based) under H_B.
  const Distribution& law(const OutlierSet& B, std::size_t i) const {
    return B.contains(i) ? anomaly(ordered_rank(B, i)) : nominal_;
  }

  // Law of every sequence under H_B, i.e. the truth panel.
  std::vector<Distribution> truth_panel(const OutlierSet& B) const {
    std::vector<Distribution> panel;
    panel.reserve(M());
    for (std::size_t i = 1; i <= M(); ++i) panel.push_back(law(B, i));
    return panel;
  }

  // Anomalous laws equal to the nominal make every exponent degenerate.
  std::vector<std::string> warnings() const {
    std::vector<std::string> out;
    for (std::size_t j = 0; j < anomalies_.size(); ++j)
      if (anomalies_[j] == nominal_)
        out.push_back("anomalous distribution " + std::to_string(j + 1) + " equals the nominal");
    return out;
  }

 private:
  HypothesisSpace space_;
  Distribution nominal_;
  std::vector<Distribution> anomalies_;
};

// Mean of the laws (under H_B) of the sequences outside C.
inline Distribution p_mix(const OutlierSet& B, const OutlierSet& C, const Scenario& scenario) {
  const std::size_t K = scenario.alphabet_size();
  std::vector<double> mass(K, 0.0);
  const auto off = complement(C);
  for (std::size_t i : off) {
    const Distribution& law = scenario.law(B, i);
    for (std::size_t x = 0; x < K; ++x) mass[x] += law[x];
  }
  for (double& m : mass) m /= static_cast<double>(off.size());
  return Distribution::normalized(std::move(mass));
}

inline double gd(const OutlierSet& B, const OutlierSet& C, const Scenario& scenario) {
  if (B == C) return 0.0;
  const Distribution mix = p_mix(B, C, scenario);
  double sum = 0.0;
  for (std::size_t i : complement(C)) sum += kl_divergence(scenario.law(B, i), mix);
  return sum;
}

namespace detail {

inline double log_ratio(const Distribution& p, const Distribution& mix, Symbol x) {
  if (x >= p.size()) throw Error(ErrorKind::UnknownSymbol, "symbol outside alphabet");
  if (!(p[x] > 0.0) || !(mix[x] > 0.0))
    throw Error(ErrorKind::NonPositiveMass, "information density needs positive mass at symbol " +
                                                std::to_string(x));
  return std::log(p[x] / mix[x]);
}

// Per-symbol density log(P_j(x) / P_Mix(x)) for one sequence law.
inline std::vector<double> density_vector(const Distribution& law, const Distribution& mix) {
  std::vector<double> out(law.size());
  for (std::size_t x = 0; x < law.size(); ++x) out[x] = log_ratio(law, mix, x);
  return out;
}

inline double mean_under(const Distribution& law, std::span<const double> f) {
  double m = 0.0;
  for (std::size_t x = 0; x < law.size(); ++x) m += law[x] * f[x];
  return m;
}

inline double covariance_under(const Distribution& law, std::span<const double> f, std::span<const double> g) {
  const double mf = mean_under(law, f);
  const double mg = mean_under(law, g);
  double c = 0.0;
  for (std::size_t x = 0; x < law.size(); ++x) c += law[x] * (f[x] - mf) * (g[x] - mg);
  return c;
}

}  // namespace detail

// log(P_A,l(x) / P_Mix(x)), l in [|B|].
inline double info_density_anomalous(std::size_t l, Symbol x, const OutlierSet& B, const OutlierSet& C,
                                     const Scenario& scenario) {
  if (l < 1 || l > B.size())
    throw Error(ErrorKind::InvalidArgument, "anomaly rank must lie in [1, |B|]");
  return detail::log_ratio(scenario.anomaly(l), p_mix(B, C, scenario), x);
}

// log(P_N(x) / P_Mix(x)).
inline double info_density_nominal(Symbol x, const OutlierSet& B, const OutlierSet& C, const Scenario& scenario) {
  return detail::log_ratio(scenario.nominal(), p_mix(B, C, scenario), x);
}

inline double variance_sum(const OutlierSet& B, const OutlierSet& C, const Scenario& scenario) {
  const Distribution mix = p_mix(B, C, scenario);
  double v = 0.0;
  for (std::size_t i : complement(C)) {
    const Distribution& law = scenario.law(B, i);
    const auto f = detail::density_vector(law, mix);
    v += detail::covariance_under(law, f, f);
  }
  return v;
}

// Covariance of the per-symbol density sums for the rivals of B in canonical
// order. Entry (i, k) sums, over sequences j outside both C_i and C_k, the
// covariance under the law of X_j of log(P_j / P_Mix(C_i)) and
// log(P_j / P_Mix(C_k)). Densities are centered.
inline Eigen::MatrixXd covariance_matrix(const OutlierSet& B, const Scenario& scenario) {
  const auto rival_sets = rivals(B, scenario.space());
  const std::size_t r = rival_sets.size();
  const std::size_t M = scenario.M();

  // densities[c][j] is the density vector of sequence j+1 for rival c, empty
  // when j+1 belongs to that rival.
  std::vector<std::vector<std::vector<double>>> densities(r, std::vector<std::vector<double>>(M));
  for (std::size_t c = 0; c < r; ++c) {
    const Distribution mix = p_mix(B, rival_sets[c], scenario);
    for (std::size_t i : complement(rival_sets[c]))
      densities[c][i - 1] = detail::density_vector(scenario.law(B, i), mix);
  }

  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r));
  for (std::size_t a = 0; a < r; ++a) {
    for (std::size_t b = a; b < r; ++b) {
      double c = 0.0;
      for (std::size_t j = 0; j < M; ++j) {
        if (densities[a][j].empty() || densities[b][j].empty()) continue;
        c += detail::covariance_under(scenario.law(B, j + 1), densities[a][j], densities[b][j]);
      }
      V(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = c;
      V(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = c;
    }
  }
  return V;
}

// Relative tolerance for "equals the minimal value" when counting d(B).
inline constexpr double kMinimizerTolerance = 1e-9;

struct TheoryProfile {
  OutlierSet B;
  std::vector<OutlierSet> rivals;
  std::vector<double> gd;
  double gd_min = 0.0;
  std::vector<std::size_t> minimizers;  // indices into rivals
  std::size_t d = 0;
  Eigen::MatrixXd V;

  // V restricted to the minimizing rivals.
  Eigen::MatrixXd minimizer_covariance() const {
    const auto k = static_cast<Eigen::Index>(minimizers.size());
    Eigen::MatrixXd sub(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
      for (Eigen::Index b = 0; b < k; ++b)
        sub(a, b) = V(static_cast<Eigen::Index>(minimizers[static_cast<std::size_t>(a)]),
                      static_cast<Eigen::Index>(minimizers[static_cast<std::size_t>(b)]));
    return sub;
  }
};

inline TheoryProfile profile(const OutlierSet& B, const Scenario& scenario) {
  TheoryProfile p{B, rivals(B, scenario.space()), {}, 0.0, {}, 0, {}};
  p.gd.reserve(p.rivals.size());
  for (const auto& C : p.rivals) p.gd.push_back(gd(B, C, scenario));
  p.gd_min = *std::min_element(p.gd.begin(), p.gd.end());
  const double tol = kMinimizerTolerance * std::max(1.0, std::abs(p.gd_min));
  for (std::size_t i = 0; i < p.gd.size(); ++i)
    if (p.gd[i] - p.gd_min <= tol) p.minimizers.push_back(i);
  p.d = p.minimizers.size();
  p.V = covariance_matrix(B, scenario);
  return p;
}

// sum_{t=1}^{T} C(M, t).
inline std::uint64_t hypothesis_count(std::size_t M) {
  std::uint64_t total = 0;
  std::uint64_t binom = 1;
  for (std::size_t t = 1; t <= max_outliers(M); ++t) {
    binom = binom * (M - t + 1) / t;
    total += binom;
  }
  return total;
}

// Misclassification bound exp(-n lambda + |X| log((M - 1) n + 1)); may exceed 1.
inline double misclassification_bound(double n, double lambda, std::size_t M, std::size_t alphabet_size) {
  return std::exp(-n * lambda + static_cast<double>(alphabet_size) *
                                    std::log(static_cast<double>(M - 1) * n + 1.0));
}

// False-alarm bound: |S|^2 times the misclassification bound.
inline double false_alarm_bound(double n, double lambda, std::size_t M, std::size_t alphabet_size) {
  const auto s = static_cast<double>(hypothesis_count(M));
  return s * s * misclassification_bound(n, lambda, M, alphabet_size);
}

// 1 - Q_{|S|-1}(sqrt(n) (lambda - GD(B, C_i))_i ; V(B)), clamped to [0, 1].
// Lower-order remainder terms are not included.
inline double false_reject_bound(const TheoryProfile& p, double lambda, double n,
                                 const OrthantOptions& options = {}) {
  std::vector<double> point(p.gd.size());
  const double root_n = std::sqrt(n);
  for (std::size_t i = 0; i < point.size(); ++i) point[i] = root_n * (lambda - p.gd[i]);
  const double q = orthant_q(point, p.V, options).probability;
  return std::clamp(1.0 - q, 0.0, 1.0);
}

struct LStar {
  double value = 0.0;
  bool degenerate = false;  // minimizer covariance ~ 0; value forced to 0
};

// Largest L with Q_d(L 1; V_sub) >= 1 - epsilon, by bisection.
inline LStar l_star(double epsilon, const TheoryProfile& p, const OrthantOptions& options = {}) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(ErrorKind::InvalidArgument, "epsilon must be in (0,1)");
  const Eigen::MatrixXd sub = p.minimizer_covariance();
  const double scale = std::max(1.0, sub.diagonal().cwiseAbs().maxCoeff());
  if (sub.diagonal().maxCoeff() <= kZeroVariance * scale) return {0.0, true};

  auto q_at = [&](double L) {
    std::vector<double> point(p.d, L);
    return orthant_q(point, sub, options).probability;
  };
  const double target = 1.0 - epsilon;
  double lo = -1.0;
  double hi = 1.0;
  while (q_at(lo) < target) lo *= 2.0;
  while (q_at(hi) >= target) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (q_at(mid) >= target) lo = mid;
    else hi = mid;
  }
  return {lo, false};
}

// GD_min + L* / sqrt(n).
inline double lambda_star(double n, double epsilon, const TheoryProfile& p, const OrthantOptions& options = {}) {
  if (!(n >= 1.0)) throw Error(ErrorKind::InvalidArgument, "n must be >= 1");
  const double value = p.gd_min + l_star(epsilon, p, options).value / std::sqrt(n);
  if (!(value > 0.0))
    throw Error(ErrorKind::NonPositiveThreshold,
                "lambda* = " + std::to_string(value) + " at n = " + std::to_string(n));
  return value;
}

// All anomalies equal to P_A: l D(P_A || mix) + (M - t - l) D(P_N || mix) with
// mix = (l P_A + (M - t - l) P_N) / (M - t).
inline double gd_all_same(std::size_t M, std::size_t t, std::size_t l, const Distribution& nominal,
                          const Distribution& anomaly) {
  if (t < 1 || t > max_outliers(M)) throw Error(ErrorKind::InvalidArgument, "t must lie in [1, T]");
  if (l < 1 || t + l > M) throw Error(ErrorKind::InvalidArgument, "l must lie in [1, M - t]");
  const double nominal_weight = static_cast<double>(M - t - l) / static_cast<double>(M - t);
  const double anomaly_weight = static_cast<double>(l) / static_cast<double>(M - t);
  const Distribution mix = mixture({anomaly_weight, nominal_weight}, {anomaly, nominal});
  return static_cast<double>(l) * kl_divergence(anomaly, mix) +
         static_cast<double>(M - t - l) * kl_divergence(nominal, mix);
}

// Minimum of gd_all_same over t in [T], l in [outlier_count].
inline double gd_min_all_same(std::size_t outlier_count, std::size_t M, const Distribution& nominal,
                              const Distribution& anomaly) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t t = 1; t <= max_outliers(M); ++t)
    for (std::size_t l = 1; l <= outlier_count && t + l <= M; ++l)
      best = std::min(best, gd_all_same(M, t, l, nominal, anomaly));
  return best;
}

}  // namespace oht
