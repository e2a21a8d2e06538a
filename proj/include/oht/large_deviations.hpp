#pragma once

// False-reject exponent of the threshold test.
//
// For a pair of distinct sets (C, D) the inner problem is
//
//   minimize   sum_{i in B} D(Q_i || P_A,rank(i)) + sum_{i not in B} D(Q_i || P_N)
//   subject to G_C(Q) <= lambda, G_D(Q) <= lambda
//
// over M-tuples of distributions. The objective and both constraints are
// convex in Q (the constraints are KL divergences against a linear function
// of Q), and any panel with all Q_i equal is strictly feasible. Each Q_i is
// parameterized by softmax logits and the constraints enter through a log
// barrier whose weight is driven to zero; every barrier stage is minimized
// by damped Newton steps with a feasibility-preserving backtracking line search.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "oht/detector.hpp"
#include "oht/theory.hpp"

namespace oht {

struct LdOptions {
  std::size_t random_starts = 5;
  std::uint64_t seed = 0x1d5eed;
  double barrier_initial = 1.0;
  double barrier_final = 1e-10;
  double barrier_factor = 0.1;
  std::size_t max_iterations = 200;  // Newton steps per barrier stage
  double gradient_tolerance = 1e-13;
};

struct LdProblem {
  Scenario scenario;
  OutlierSet B;
  double lambda;
  OutlierSet C;
  OutlierSet D;
};

struct LdSolution {
  double value = 0.0;
  std::vector<Distribution> minimizer;
  std::optional<std::pair<OutlierSet, OutlierSet>> pair;
  bool feasible = false;
  bool converged = false;
  double gap = 0.0;  // duality-gap estimate of the final barrier stage
};

namespace detail {

// Objective of the exponent problem at Q against the H_B laws.
inline double ld_objective(const std::vector<Distribution>& Q, const OutlierSet& B, const Scenario& scenario) {
  double total = 0.0;
  for (std::size_t i = 1; i <= scenario.M(); ++i) total += kl_divergence(Q[i - 1], scenario.law(B, i));
  return total;
}

class BarrierSolver {
 public:
  BarrierSolver(const LdProblem& problem, const LdOptions& options)
      : options_(options), M_(problem.scenario.M()), K_(problem.scenario.alphabet_size()),
        lambda_(problem.lambda) {
    log_ref_.resize(M_ * K_);
    for (std::size_t i = 0; i < M_; ++i) {
      const Distribution& law = problem.scenario.law(problem.B, i + 1);
      for (std::size_t x = 0; x < K_; ++x) log_ref_[i * K_ + x] = std::log(law[x]);
    }
    const auto& space = problem.scenario.space();
    const auto c = space.complement_indices(space.index_of(problem.C));
    const auto d = space.complement_indices(space.index_of(problem.D));
    off_[0].assign(c.begin(), c.end());
    off_[1].assign(d.begin(), d.end());
  }

  struct Result {
    std::vector<double> q;  // M x K, row major
    bool converged = false;
    double gap = 0.0;
  };

  // start: strictly positive, strictly feasible panel (M x K, row major).
  Result solve(const std::vector<double>& start) const {
    // Free logits: the last logit of every row is pinned at zero.
    Eigen::VectorXd theta(static_cast<Eigen::Index>(M_ * (K_ - 1)));
    for (std::size_t i = 0; i < M_; ++i)
      for (std::size_t x = 0; x + 1 < K_; ++x)
        theta(free_index(i, x)) = std::log(start[i * K_ + x]) - std::log(start[i * K_ + K_ - 1]);

    bool converged = false;
    double mu = options_.barrier_initial;
    while (true) {
      converged = minimize_stage(theta, mu);
      if (mu <= options_.barrier_final) break;
      mu = std::max(mu * options_.barrier_factor, options_.barrier_final);
    }
    Result r;
    r.q = softmax(theta);
    r.converged = converged;
    r.gap = 2.0 * mu;
    return r;
  }

  double g_value(const std::vector<double>& q, std::size_t which) const {
    const auto avg = average(q, off_[which]);
    double g = 0.0;
    for (std::size_t t : off_[which])
      for (std::size_t x = 0; x < K_; ++x) {
        const double v = q[t * K_ + x];
        if (v > 0.0) g += v * std::log(v / avg[x]);
      }
    return g;
  }

 private:
  struct Eval {
    double value = 0.0;
    bool feasible = false;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
  };

  Eigen::Index free_index(std::size_t i, std::size_t x) const {
    return static_cast<Eigen::Index>(i * (K_ - 1) + x);
  }

  std::vector<double> softmax(const Eigen::VectorXd& theta) const {
    std::vector<double> q(M_ * K_);
    for (std::size_t i = 0; i < M_; ++i) {
      double top = 0.0;
      for (std::size_t x = 0; x + 1 < K_; ++x) top = std::max(top, theta(free_index(i, x)));
      double z = std::exp(-top);
      for (std::size_t x = 0; x + 1 < K_; ++x) z += std::exp(theta(free_index(i, x)) - top);
      for (std::size_t x = 0; x < K_; ++x) {
        const double logit = x + 1 < K_ ? theta(free_index(i, x)) : 0.0;
        q[i * K_ + x] = std::exp(logit - top) / z;
      }
    }
    return q;
  }

  std::vector<double> average(const std::vector<double>& q, const std::vector<std::size_t>& off) const {
    std::vector<double> avg(K_, 0.0);
    for (std::size_t t : off)
      for (std::size_t x = 0; x < K_; ++x) avg[x] += q[t * K_ + x];
    for (double& a : avg) a /= static_cast<double>(off.size());
    return avg;
  }

  // Barrier objective with gradient and Hessian in the free logits. Derivatives
  // are formed in Q-space and pulled back through each row's softmax.
  Eval evaluate(const Eigen::VectorXd& theta, double mu, bool derivatives) const {
    Eval e;
    const std::size_t N = M_ * K_;
    const auto q = softmax(theta);
    for (double v : q)
      if (!(v > 0.0)) {
        e.value = std::numeric_limits<double>::infinity();
        return e;
      }

    double objective = 0.0;
    Eigen::VectorXd g_q(static_cast<Eigen::Index>(N));
    for (std::size_t k = 0; k < N; ++k) {
      const double lr = std::log(q[k]) - log_ref_[k];
      objective += q[k] * lr;
      g_q(static_cast<Eigen::Index>(k)) = lr;
    }

    double slack[2];
    std::vector<double> avg[2];
    for (int c = 0; c < 2; ++c) {
      slack[c] = lambda_ - g_value(q, static_cast<std::size_t>(c));
      avg[c] = average(q, off_[static_cast<std::size_t>(c)]);
    }
    e.feasible = slack[0] > 0.0 && slack[1] > 0.0 && std::isfinite(objective);
    if (!e.feasible) {
      e.value = std::numeric_limits<double>::infinity();
      return e;
    }
    e.value = objective - mu * (std::log(slack[0]) + std::log(slack[1]));
    if (!derivatives) return e;

    Eigen::MatrixXd h_q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    for (std::size_t k = 0; k < N; ++k) h_q(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = 1.0 / q[k];
    for (int c = 0; c < 2; ++c) {
      const auto& off = off_[static_cast<std::size_t>(c)];
      const double m = static_cast<double>(off.size());
      Eigen::VectorXd dg = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N));
      for (std::size_t t : off)
        for (std::size_t x = 0; x < K_; ++x)
          dg(static_cast<Eigen::Index>(t * K_ + x)) = std::log(q[t * K_ + x] / avg[c][x]);
      const double w = mu / slack[c];
      g_q += w * dg;
      h_q += (w / slack[c]) * (dg * dg.transpose());
      for (std::size_t t : off) {
        for (std::size_t x = 0; x < K_; ++x) {
          const auto tx = static_cast<Eigen::Index>(t * K_ + x);
          h_q(tx, tx) += w / q[t * K_ + x];
          for (std::size_t s : off)
            h_q(tx, static_cast<Eigen::Index>(s * K_ + x)) -= w / (m * avg[c][x]);
        }
      }
    }

    // Pull back: J_i = d q_i / d theta_i restricted to the free logits.
    const auto n = static_cast<Eigen::Index>(M_ * (K_ - 1));
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N), n);
    for (std::size_t i = 0; i < M_; ++i)
      for (std::size_t x = 0; x < K_; ++x)
        for (std::size_t a = 0; a + 1 < K_; ++a)
          J(static_cast<Eigen::Index>(i * K_ + x), free_index(i, a)) =
              q[i * K_ + x] * ((x == a ? 1.0 : 0.0) - q[i * K_ + a]);
    e.grad = J.transpose() * g_q;
    e.hess = J.transpose() * h_q * J;
    // Curvature of the softmax itself, weighted by the Q-gradient.
    for (std::size_t i = 0; i < M_; ++i) {
      double mean = 0.0;
      for (std::size_t x = 0; x < K_; ++x) mean += q[i * K_ + x] * g_q(static_cast<Eigen::Index>(i * K_ + x));
      for (std::size_t a = 0; a + 1 < K_; ++a) {
        const double qa = q[i * K_ + a];
        const double ga = g_q(static_cast<Eigen::Index>(i * K_ + a));
        e.hess(free_index(i, a), free_index(i, a)) += qa * (ga - mean);
        for (std::size_t b = 0; b + 1 < K_; ++b) {
          const double qb = q[i * K_ + b];
          const double gb = g_q(static_cast<Eigen::Index>(i * K_ + b));
          e.hess(free_index(i, a), free_index(i, b)) -= qa * qb * (ga + gb - 2.0 * mean);
        }
      }
    }
    return e;
  }

  // Damped Newton on one barrier stage, with eigenvalue-modified Hessian.
  // Returns true once the Newton decrement is negligible.
  bool minimize_stage(Eigen::VectorXd& theta, double mu) const {
    Eval current = evaluate(theta, mu, true);
    for (std::size_t it = 0; it < options_.max_iterations; ++it) {
      if (current.grad.lpNorm<Eigen::Infinity>() < options_.gradient_tolerance) return true;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (current.hess + current.hess.transpose()));
      const double top = std::max(eig.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
      const Eigen::VectorXd inv = eig.eigenvalues().cwiseAbs().cwiseMax(1e-14 * top).cwiseInverse();
      const Eigen::VectorXd direction =
          -(eig.eigenvectors() * inv.asDiagonal() * (eig.eigenvectors().transpose() * current.grad));
      const double decrement = -current.grad.dot(direction);
      if (decrement < 1e-20) return true;
      double step = 1.0;
      bool accepted = false;
      Eval next;
      for (int bt = 0; bt < 80; ++bt) {
        next = evaluate(theta + step * direction, mu, true);
        if (next.feasible && next.value <= current.value - 1e-4 * step * decrement) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) return decrement < 1e-12;
      theta += step * direction;
      current = std::move(next);
    }
    return false;
  }

  LdOptions options_;
  std::size_t M_;
  std::size_t K_;
  double lambda_;
  std::vector<double> log_ref_;
  std::vector<std::size_t> off_[2];
};

inline std::vector<double> flatten(const std::vector<Distribution>& panel) {
  std::vector<double> out;
  for (const auto& d : panel) out.insert(out.end(), d.mass().begin(), d.mass().end());
  return out;
}

inline std::vector<Distribution> unflatten(const std::vector<double>& q, std::size_t M, std::size_t K) {
  std::vector<Distribution> out;
  out.reserve(M);
  for (std::size_t i = 0; i < M; ++i)
    out.push_back(Distribution::normalized(std::vector<double>(q.begin() + static_cast<std::ptrdiff_t>(i * K),
                                                               q.begin() + static_cast<std::ptrdiff_t>((i + 1) * K))));
  return out;
}

// Moves a panel toward its mean until both constraints sit at or below
// lambda / 2. G is convex and vanishes at the mean, so it is at most
// (1 - s) G(panel) along the segment.
inline std::vector<double> shrink_to_feasible(std::vector<double> q, std::size_t M, std::size_t K,
                                              const BarrierSolver& solver, double lambda) {
  const double worst = std::max(solver.g_value(q, 0), solver.g_value(q, 1));
  const double target = 0.5 * lambda;
  if (worst <= target) return q;
  const double s = 1.0 - target / worst;
  std::vector<double> mean(K, 0.0);
  for (std::size_t i = 0; i < M; ++i)
    for (std::size_t x = 0; x < K; ++x) mean[x] += q[i * K + x] / static_cast<double>(M);
  for (std::size_t i = 0; i < M; ++i)
    for (std::size_t x = 0; x < K; ++x) q[i * K + x] = (1.0 - s) * q[i * K + x] + s * mean[x];
  return q;
}

}  // namespace detail

// Normalized weighted geometric mean prod_k P_k^(w_k / M) of the H_B laws,
// which minimizes sum_{i in B} D(Q || P_A,rank(i)) + (M - |B|) D(Q || P_N).
inline Distribution ld_upper_bound_minimizer(const OutlierSet& B, const Scenario& scenario) {
  const std::size_t K = scenario.alphabet_size();
  std::vector<double> log_mass(K, 0.0);
  for (std::size_t i = 1; i <= scenario.M(); ++i) {
    const Distribution& law = scenario.law(B, i);
    for (std::size_t x = 0; x < K; ++x) log_mass[x] += std::log(law[x]) / static_cast<double>(scenario.M());
  }
  const double top = *std::max_element(log_mass.begin(), log_mass.end());
  std::vector<double> w(K);
  for (std::size_t x = 0; x < K; ++x) w[x] = std::exp(log_mass[x] - top);
  return Distribution::normalized(std::move(w));
}

inline double ld_max_upper_bound(const OutlierSet& B, const Scenario& scenario) {
  const Distribution q = ld_upper_bound_minimizer(B, scenario);
  double total = 0.0;
  for (std::size_t i = 1; i <= scenario.M(); ++i) total += kl_divergence(q, scenario.law(B, i));
  return total;
}

inline LdSolution ld_inner(const LdProblem& problem, const LdOptions& options = {}) {
  if (!(problem.lambda > 0.0)) throw Error(ErrorKind::InvalidArgument, "lambda must be positive");
  if (problem.C == problem.D) throw Error(ErrorKind::InvalidArgument, "C and D must differ");
  const Scenario& sc = problem.scenario;
  const std::size_t M = sc.M();
  const std::size_t K = sc.alphabet_size();
  const auto truth = sc.truth_panel(problem.B);

  LdSolution best;
  best.value = std::numeric_limits<double>::infinity();

  // The truth panel has zero objective; if it is feasible it is optimal.
  if (g_score(problem.C, truth) <= problem.lambda && g_score(problem.D, truth) <= problem.lambda) {
    best.value = 0.0;
    best.minimizer = truth;
    best.feasible = true;
    best.converged = true;
    return best;
  }

  const detail::BarrierSolver solver(problem, options);

  std::vector<std::vector<double>> starts;
  starts.push_back(detail::flatten(std::vector<Distribution>(M, sc.nominal())));
  starts.push_back(detail::flatten(std::vector<Distribution>(M, ld_upper_bound_minimizer(problem.B, sc))));
  starts.push_back(detail::shrink_to_feasible(detail::flatten(truth), M, K, solver, problem.lambda));
  std::mt19937_64 gen(options.seed);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  for (std::size_t r = 0; r < options.random_starts; ++r) {
    std::vector<double> q(M * K);
    for (std::size_t i = 0; i < M; ++i) {
      double total = 0.0;
      for (std::size_t x = 0; x < K; ++x) total += (q[i * K + x] = unit(gen));
      for (std::size_t x = 0; x < K; ++x) q[i * K + x] /= total;
    }
    starts.push_back(detail::shrink_to_feasible(std::move(q), M, K, solver, problem.lambda));
  }

  for (const auto& start : starts) {
    const auto r = solver.solve(start);
    const auto panel = detail::unflatten(r.q, M, K);
    const double value = detail::ld_objective(panel, problem.B, sc);
    const bool feasible = g_score(problem.C, panel) <= problem.lambda && g_score(problem.D, panel) <= problem.lambda;
    if (feasible && value < best.value) {
      best.value = value;
      best.minimizer = panel;
      best.feasible = true;
      best.converged = r.converged;
      best.gap = r.gap;
    }
  }
  return best;
}

// Minimum of ld_inner over unordered pairs of distinct sets; the constraint
// pair is symmetric in (C, D).
inline LdSolution ld_exponent(const OutlierSet& B, const Scenario& scenario, double lambda,
                              const LdOptions& options = {}) {
  const auto& space = scenario.space();
  LdSolution best;
  best.value = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < space.size(); ++c) {
    for (std::size_t d = c + 1; d < space.size(); ++d) {
      LdSolution s = ld_inner(LdProblem{scenario, B, lambda, space[c], space[d]}, options);
      if (s.feasible && s.value < best.value) {
        best = std::move(s);
        best.pair = std::make_pair(space[c], space[d]);
        if (best.value == 0.0) return best;
      }
    }
  }
  return best;
}

}  // namespace oht
