#pragma once

// End-to-end acceptance checks. Every check writes plot-ready CSV files into
// an output directory and returns one pass/fail record; run_suite adds a
// summary.txt. CSV contents are deterministic for a fixed seed, timings only
// appear in the summary.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oht/detector.hpp"
#include "oht/gaussian.hpp"
#include "oht/io.hpp"
#include "oht/large_deviations.hpp"
#include "oht/montecarlo.hpp"
#include "oht/random.hpp"
#include "oht/theory.hpp"

namespace oht::acceptance {

namespace fs = std::filesystem;

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct SuiteOptions {
  fs::path out_dir = "paper-suite";
  bool quick = false;
  std::uint64_t seed = 20240521;
  std::size_t threads = 0;  // 0: worker_count()
};

using GdFunction = std::function<double(const OutlierSet&, const OutlierSet&, const Scenario&)>;

namespace detail {

using io::format_double;

inline std::ofstream open_csv(const fs::path& dir, const std::string& name, const std::string& header) {
  fs::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + (dir / name).string());
  out << header << "\n";
  return out;
}

inline std::string fmt(double x) { return format_double(x); }

// Strictly positive random distribution; entries are at least floor / K.
inline Distribution random_distribution(std::size_t K, CounterRng& rng, double floor = 0.01) {
  std::vector<double> w(K);
  double total = 0.0;
  for (auto& v : w) total += (v = -std::log(1.0 - rng.uniform()) + floor);
  for (auto& v : w) v /= total;
  return Distribution::normalized(std::move(w));
}

inline Scenario random_scenario(std::size_t M, std::size_t K, CounterRng& rng, double floor = 0.01) {
  Distribution nominal = random_distribution(K, rng, floor);
  std::vector<Distribution> anomalies;
  for (std::size_t t = 0; t < max_outliers(M); ++t) anomalies.push_back(random_distribution(K, rng, floor));
  return Scenario(M, std::move(nominal), std::move(anomalies));
}

// The binary scenario shared by the simulation checks.
inline Scenario binary_scenario() { return Scenario(4, Distribution{0.2, 0.8}, {Distribution{0.8, 0.2}}); }

inline OutlierSet first_set() { return OutlierSet({1}, 4); }

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

inline std::string runtime_note(double seconds, double limit) {
  std::ostringstream ss;
  ss << "runtime " << seconds << " s (limit " << limit << " s)";
  return ss.str();
}

// gd(B, C) through the expectation identity: anomalous members of M_C
// contribute E[i_A,l], nominal members E[i_N], computed symbol by symbol.
inline double gd_by_expectation(const OutlierSet& B, const OutlierSet& C, const Scenario& sc) {
  double total = 0.0;
  for (std::size_t i : complement(C)) {
    const Distribution& law = sc.law(B, i);
    for (Symbol x = 0; x < sc.alphabet_size(); ++x) {
      const double density = B.contains(i) ? info_density_anomalous(ordered_rank(B, i), x, B, C, sc)
                                           : info_density_nominal(x, B, C, sc);
      total += law[x] * density;
    }
  }
  return total;
}

inline double binary_kl(double q, double p) {
  double d = 0.0;
  if (q > 0.0) d += q * std::log(q / p);
  if (q < 1.0) d += (1.0 - q) * std::log((1.0 - q) / (1.0 - p));
  return d;
}

// Grid oracle for LD over (q_1..q_4) in {0, h, ..., 1}^4, for B = {1} with
// four singleton hypotheses: the minimum objective over points where at least
// two of the four scores are <= lambda.
inline double ld_grid_oracle(double pn, double pa, double lambda, std::size_t steps) {
  std::vector<double> q(steps + 1);
  for (std::size_t s = 0; s <= steps; ++s) q[s] = static_cast<double>(s) / static_cast<double>(steps);
  std::vector<double> obj_a(q.size()), obj_n(q.size());
  for (std::size_t s = 0; s < q.size(); ++s) {
    obj_a[s] = binary_kl(q[s], pa);
    obj_n[s] = binary_kl(q[s], pn);
  }
  auto score = [&](double a, double b, double c) {
    const double m = (a + b + c) / 3.0;
    return binary_kl(a, m) + binary_kl(b, m) + binary_kl(c, m);
  };
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < q.size(); ++a)
    for (std::size_t b = 0; b < q.size(); ++b)
      for (std::size_t c = 0; c < q.size(); ++c)
        for (std::size_t d = 0; d < q.size(); ++d) {
          const double value = obj_a[a] + obj_n[b] + obj_n[c] + obj_n[d];
          if (value >= best) continue;
          int ok = 0;
          ok += score(q[b], q[c], q[d]) <= lambda;
          ok += score(q[a], q[c], q[d]) <= lambda;
          if (ok < 2) ok += score(q[a], q[b], q[d]) <= lambda;
          if (ok < 2) ok += score(q[a], q[b], q[c]) <= lambda;
          if (ok >= 2) best = value;
        }
  return best;
}

inline std::string pair_label(const LdSolution& s) {
  if (!s.pair) return "";
  return s.pair->first.to_string(';') + "|" + s.pair->second.to_string(';');
}

}  // namespace detail

// 1. gd(B, C) against the score of C on the H_B truth panel.
inline CheckResult check_gd_identity(const SuiteOptions& opt, const GdFunction& gd_fn = gd) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t scenarios = opt.quick ? 40 : 200;
  const double tol = 1e-12;
  auto out = detail::open_csv(opt.out_dir, "gd_identity.csv", "scenario,M,K,pairs,max_abs_diff");
  double worst = 0.0;
  for (std::size_t s = 0; s < scenarios; ++s) {
    CounterRng rng(derive_key(opt.seed, {1, s}));
    const std::size_t M = 3 + s % 3;
    const std::size_t K = 2 + (s / 3) % 3;
    const Scenario sc = detail::random_scenario(M, K, rng);
    double local = 0.0;
    std::size_t pairs = 0;
    for (const auto& B : sc.space().sets()) {
      const auto panel = sc.truth_panel(B);
      for (const auto& C : sc.space().sets()) {
        local = std::max(local, std::abs(gd_fn(B, C, sc) - g_score(C, panel)));
        ++pairs;
      }
    }
    worst = std::max(worst, local);
    out << s << "," << M << "," << K << "," << pairs << "," << detail::fmt(local) << "\n";
  }
  const double secs = detail::seconds_since(start);
  return {1, "GD/G identity", worst <= tol && secs < 10.0,
          "max |gd - G| = " + detail::fmt(worst) + " over " + std::to_string(scenarios) + " scenarios; " +
              detail::runtime_note(secs, 10.0),
          secs};
}

// 2. gd(B, C) against the information-density expectation form.
inline CheckResult check_gd_expectation(const SuiteOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t scenarios = opt.quick ? 40 : 200;
  const double tol = 1e-12;
  auto out = detail::open_csv(opt.out_dir, "gd_expectation.csv", "scenario,M,K,pairs,max_abs_diff");
  double worst = 0.0;
  for (std::size_t s = 0; s < scenarios; ++s) {
    CounterRng rng(derive_key(opt.seed, {1, s}));
    const std::size_t M = 3 + s % 3;
    const std::size_t K = 2 + (s / 3) % 3;
    const Scenario sc = detail::random_scenario(M, K, rng);
    double local = 0.0;
    std::size_t pairs = 0;
    for (const auto& B : sc.space().sets())
      for (const auto& C : sc.space().sets()) {
        local = std::max(local, std::abs(gd(B, C, sc) - detail::gd_by_expectation(B, C, sc)));
        ++pairs;
      }
    worst = std::max(worst, local);
    out << s << "," << M << "," << K << "," << pairs << "," << detail::fmt(local) << "\n";
  }
  const double secs = detail::seconds_since(start);
  return {2, "GD expectation identity", worst <= tol,
          "max |gd - sum of expected densities| = " + detail::fmt(worst), secs};
}

// 3. Orthant probabilities against closed forms.
inline CheckResult check_orthant(const SuiteOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  auto out = detail::open_csv(opt.out_dir, "orthant.csv", "case,k,method,estimate,std_error,oracle,abs_diff,tolerance");
  bool ok = true;
  std::ostringstream detail_text;
  auto method_name = [](OrthantMethod m) {
    switch (m) {
      case OrthantMethod::Exact: return "exact";
      case OrthantMethod::ClosedForm: return "closed_form";
      case OrthantMethod::Quadrature: return "quadrature";
      case OrthantMethod::MonteCarlo: return "monte_carlo";
    }
    return "";
  };
  auto record = [&](const std::string& name, std::size_t k, const OrthantResult& r, double oracle, double tol) {
    const double diff = std::abs(r.probability - oracle);
    const bool pass = diff <= tol;
    ok = ok && pass;
    out << name << "," << k << "," << method_name(r.method) << "," << detail::fmt(r.probability) << ","
        << detail::fmt(r.std_error) << "," << detail::fmt(oracle) << "," << detail::fmt(diff) << ","
        << detail::fmt(tol) << "\n";
    if (!pass) detail_text << name << " off by " << detail::fmt(diff) << "; ";
  };

  {
    const std::vector<double> x{0.0};
    const Eigen::MatrixXd s = Eigen::MatrixXd::Identity(1, 1);
    const auto r = orthant_q(x, s);
    ok = ok && r.method == OrthantMethod::ClosedForm && r.probability == 0.5;
    record("q1_origin", 1, r, 0.5, 0.0);
  }
  {
    const std::vector<double> x{0.0, 0.0};
    Eigen::MatrixXd s(2, 2);
    s << 1.0, 0.5, 0.5, 1.0;
    const double sheppard = 0.25 + std::asin(0.5) / (2.0 * std::numbers::pi);
    OrthantOptions mc;
    mc.force_monte_carlo = true;
    mc.samples = 1000000;
    mc.seed = derive_key(opt.seed, {3, 2});
    record("q2_sheppard_mc", 2, orthant_q(x, s, mc), sheppard, 2e-3);
    record("q2_sheppard_quadrature", 2, orthant_q(x, s), sheppard, 1e-9);
  }
  for (std::size_t k : {3u, 4u}) {
    CounterRng rng(derive_key(opt.seed, {3, k}));
    std::vector<double> x(k);
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    double product = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
      x[i] = 2.0 * rng.uniform() - 1.0;
      const double var = 0.25 + 2.0 * rng.uniform();
      s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = var;
      product *= normal_tail(x[i] / std::sqrt(var));
    }
    OrthantOptions mc;
    mc.seed = derive_key(opt.seed, {3, k, 1});
    const auto r = orthant_q(x, s, mc);
    record("diagonal_factorization", k, r, product, 3.0 * r.std_error);
  }
  const double secs = detail::seconds_since(start);
  return {3, "Orthant oracle", ok, ok ? "closed form, Sheppard and diagonal factorization agree" : detail_text.str(),
          secs};
}

// 4. Off-diagonal entries of V against a sampled covariance of the rival
// density sums.
inline CheckResult check_covariance(const SuiteOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t draws = opt.quick ? 100000 : 1000000;
  auto out = detail::open_csv(opt.out_dir, "covariance.csv", "scenario,row,col,theory,monte_carlo,std_error,z");
  bool ok = true;
  double worst_z = 0.0;
  for (std::size_t s = 0; s < 5; ++s) {
    CounterRng prng(derive_key(opt.seed, {4, s}));
    const Scenario sc = detail::random_scenario(4, 2, prng, 0.2);
    const OutlierSet B = detail::first_set();
    const TheoryProfile p = profile(B, sc);
    const std::size_t r = p.rivals.size();
    const std::size_t M = sc.M();

    // log(P_j(x) / P_Mix(C_c)(x)) tables, and which sequences enter each sum.
    std::vector<std::vector<std::vector<double>>> dens(r, std::vector<std::vector<double>>(M));
    for (std::size_t c = 0; c < r; ++c) {
      const Distribution mix = p_mix(B, p.rivals[c], sc);
      for (std::size_t j = 1; j <= M; ++j) {
        if (p.rivals[c].contains(j)) continue;
        const Distribution& law = sc.law(B, j);
        for (Symbol x = 0; x < sc.alphabet_size(); ++x) dens[c][j - 1].push_back(std::log(law[x] / mix[x]));
      }
    }
    std::vector<std::discrete_distribution<std::size_t>> laws;
    for (std::size_t j = 1; j <= M; ++j) {
      const auto m = sc.law(B, j).mass();
      laws.emplace_back(m.begin(), m.end());
    }
    std::mt19937_64 gen(derive_key(opt.seed, {4, s, 1}));
    std::vector<double> sum(r * r, 0.0), sum_sq(r * r, 0.0), vals(r);
    std::vector<std::size_t> x(M);
    for (std::size_t t = 0; t < draws; ++t) {
      for (std::size_t j = 0; j < M; ++j) x[j] = laws[j](gen);
      for (std::size_t c = 0; c < r; ++c) {
        double v = 0.0;
        for (std::size_t j = 0; j < M; ++j)
          if (!dens[c][j].empty()) v += dens[c][j][x[j]];
        vals[c] = v - p.gd[c];  // centered at the exact mean
      }
      for (std::size_t a = 0; a < r; ++a)
        for (std::size_t b = a + 1; b < r; ++b) {
          const double prod = vals[a] * vals[b];
          sum[a * r + b] += prod;
          sum_sq[a * r + b] += prod * prod;
        }
    }
    const double nd = static_cast<double>(draws);
    for (std::size_t a = 0; a < r; ++a)
      for (std::size_t b = a + 1; b < r; ++b) {
        const double mean = sum[a * r + b] / nd;
        const double var = std::max(0.0, sum_sq[a * r + b] / nd - mean * mean);
        const double se = std::sqrt(var / nd);
        const double theory = p.V(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        const double z = se > 0.0 ? std::abs(mean - theory) / se : (mean == theory ? 0.0 : 1e300);
        worst_z = std::max(worst_z, z);
        ok = ok && z <= 3.0;
        out << s << "," << a << "," << b << "," << detail::fmt(theory) << "," << detail::fmt(mean) << ","
            << detail::fmt(se) << "," << detail::fmt(z) << "\n";
      }
  }
  const double secs = detail::seconds_since(start);
  return {4, "Covariance vs Monte Carlo", ok,
          "largest deviation " + detail::fmt(worst_z) + " standard errors (limit 3), " + std::to_string(draws) +
              " draws per scenario",
          secs};
}

// 5. LD solver against the grid oracle, and the sign change at gd_min.
inline CheckResult check_ld_bruteforce(const SuiteOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  const Scenario sc = detail::binary_scenario();
  const OutlierSet B = detail::first_set();
  const double g = profile(B, sc).gd_min;
  auto out = detail::open_csv(opt.out_dir, "ld_bruteforce.csv", "lambda_factor,lambda,solver,oracle,abs_diff,pair");
  bool ok = true;
  std::ostringstream text;
  for (double f : {0.25, 0.5, 0.75}) {
    const auto s = ld_exponent(B, sc, f * g);
    const double oracle = detail::ld_grid_oracle(0.2, 0.8, f * g, 50);
    const double diff = std::abs(s.value - oracle);
    ok = ok && s.feasible && diff <= 0.03;
    out << f << "," << detail::fmt(f * g) << "," << detail::fmt(s.value) << "," << detail::fmt(oracle) << ","
        << detail::fmt(diff) << "," << detail::pair_label(s) << "\n";
    text << "LD(" << f << " gd) = " << detail::fmt(s.value) << " vs grid " << detail::fmt(oracle) << "; ";
  }
  const auto above = ld_exponent(B, sc, 1.1 * g);
  const auto below = ld_exponent(B, sc, 0.9 * g);
  out << 1.1 << "," << detail::fmt(1.1 * g) << "," << detail::fmt(above.value) << ",,," << detail::pair_label(above)
      << "\n";
  out << 0.9 << "," << detail::fmt(0.9 * g) << "," << detail::fmt(below.value) << ",,," << detail::pair_label(below)
      << "\n";
  ok = ok && above.value <= 1e-4 && below.value > 1e-3;
  const double secs = detail::seconds_since(start);
  ok = ok && secs < 300.0;
  text << "LD(1.1 gd) = " << detail::fmt(above.value) << ", LD(0.9 gd) = " << detail::fmt(below.value) << "; "
       << detail::runtime_note(secs, 300.0);
  return {5, "LD brute force", ok, text.str(), secs};
}

// 6. The hand-evaluated four-sequence panel.
inline CheckResult check_hand_detection(const SuiteOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  const Alphabet ab(std::vector<std::string>{"a", "b"});
  const std::vector<std::string> panel{"aaaa", "bbbb", "bbbb", "bbbb"};
  const Verdict low = run_test(panel, ab, 1.0);
  const Verdict high = run_test(panel, ab, 2.5);
  const double rival = std::log(3.0) + 2.0 * std::log(1.5);
  std::vector<EmpiricalDistribution> emp;
  for (const auto& s : panel) emp.push_back(empirical(s, ab));
  const ScoreTable table = score_all(emp, enumerate(4));
  auto out = detail::open_csv(opt.out_dir, "hand_detection.csv", "set,score");
  for (std::size_t k = 0; k < table.space().size(); ++k)
    out << table.space()[k].to_string(';') << "," << detail::fmt(table.score(k)) << "\n";
  const bool ok = low == Verdict::outliers(OutlierSet({1}, 4)) && high.is_reject() &&
                  std::abs(table.score(1) - rival) < 1e-12;
  return {6, "Hand-computed detection", ok,
          "lambda=1 -> " + low.to_string() + ", lambda=2.5 -> " + high.to_string() + ", rival score " +
              detail::fmt(table.score(1)),
          detail::seconds_since(start)};
}

namespace detail {

inline ExperimentSpec binary_spec(std::optional<OutlierSet> truth, std::vector<std::size_t> grid, LambdaSpec lambda,
                                  std::size_t trials, std::uint64_t seed) {
  ExperimentSpec spec{binary_scenario(), std::move(truth), std::move(grid), lambda, trials, seed};
  spec.validate();
  return spec;
}

inline void write_report(const fs::path& dir, const std::string& name, const TrialReport& report) {
  fs::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary);
  io::write_report_csv(report, out);
}

}  // namespace detail

// 7. False-reject phase transition around gd_min, plus bound dominance.
inline CheckResult check_phase_transition(const SuiteOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t trials = opt.quick ? 2000 : 10000;
  const std::vector<std::size_t> grid{100, 300, 1000};
  const OutlierSet B = detail::first_set();
  const double g = profile(B, detail::binary_scenario()).gd_min;
  const EstimateOptions eo{opt.threads, {}};
  bool ok = true;
  std::ostringstream text;
  for (double f : {0.5, 1.5}) {
    const std::string tag = f < 1.0 ? "0.5" : "1.5";
    const auto under_b = estimate(detail::binary_spec(B, grid, LambdaSpec::fixed(f * g), trials, opt.seed), eo);
    const auto under_null =
        estimate(detail::binary_spec(std::nullopt, grid, LambdaSpec::fixed(f * g), trials, opt.seed + 1), eo);
    detail::write_report(opt.out_dir, "phase_" + tag + "_truth.csv", under_b);
    detail::write_report(opt.out_dir, "phase_" + tag + "_null.csv", under_null);
    const double last = under_b.rows.back().reject->estimate;
    if (f < 1.0) {
      ok = ok && last <= 0.05;
      text << "reject(n=1000, 0.5 gd) = " << detail::fmt(last) << " <= 0.05; ";
    } else {
      ok = ok && last >= 0.95;
      text << "reject(n=1000, 1.5 gd) = " << detail::fmt(last) << " >= 0.95; ";
    }
    for (const auto& row : under_b.rows)
      if (row.bound_miscls < 1.0 && row.miscls->estimate > row.bound_miscls) {
        ok = false;
        text << "misclassification above bound at n=" << row.n << "; ";
      }
    for (const auto& row : under_null.rows)
      if (row.bound_falarm < 1.0 && row.falarm->estimate > row.bound_falarm) {
        ok = false;
        text << "false alarm above bound at n=" << row.n << "; ";
      }
  }
  const double secs = detail::seconds_since(start);
  ok = ok && secs < 120.0;
  text << detail::runtime_note(secs, 120.0);
  return {7, "Phase transition", ok, text.str(), secs};
}

// 8. Running at lambda*(n, 0.2) keeps the false-reject rate near 0.2.
inline CheckResult check_lambda_star(const SuiteOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t trials = opt.quick ? 2000 : 10000;
  const double eps = 0.2;
  const auto report = estimate(detail::binary_spec(detail::first_set(), {100, 300, 1000}, LambdaSpec::automatic(eps),
                                                   trials, opt.seed + 2),
                               EstimateOptions{opt.threads, {}});
  detail::write_report(opt.out_dir, "lambda_star.csv", report);
  const auto& r = *report.rows.back().reject;
  const double limit = eps + 3.0 * r.half_width();
  return {8, "lambda* calibration", r.estimate <= limit,
          "reject(n=1000) = " + detail::fmt(r.estimate) + " <= " + detail::fmt(limit) + " at lambda* = " +
              detail::fmt(report.rows.back().lambda),
          detail::seconds_since(start)};
}

// 9. Fitted false-reject exponent against the LD prediction.
inline CheckResult check_exponent(const SuiteOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  // The decay outruns smaller budgets within the n grid, so the smoke run keeps
  // the full trial count.
  const std::size_t trials = 100000;
  const Scenario sc = detail::binary_scenario();
  const OutlierSet B = detail::first_set();
  const double g = profile(B, sc).gd_min;
  const double predicted = ld_exponent(B, sc, 0.5 * g).value;
  std::vector<std::size_t> grid;
  for (std::size_t n = 50; n <= 400; n += 50) grid.push_back(n);
  const auto report =
      estimate(detail::binary_spec(B, grid, LambdaSpec::fixed(0.5 * g), trials, opt.seed + 3), {opt.threads, {}});
  detail::write_report(opt.out_dir, "exponent.csv", report);
  std::ostringstream text;
  bool ok = false;
  try {
    const auto fit = exponent_fit(report, ErrorType::FalseReject);
    const double ratio = fit.slope / predicted;
    ok = ratio >= 0.5 && ratio <= 1.5;
    auto out = detail::open_csv(opt.out_dir, "exponent_fit.csv", "slope,std_error,predicted,ratio,used,dropped");
    out << detail::fmt(fit.slope) << "," << detail::fmt(fit.std_error) << "," << detail::fmt(predicted) << ","
        << detail::fmt(ratio) << "," << fit.used_n.size() << "," << fit.dropped_n.size() << "\n";
    text << "slope " << detail::fmt(fit.slope) << " +- " << detail::fmt(fit.std_error) << ", LD "
         << detail::fmt(predicted) << ", ratio " << detail::fmt(ratio) << " (band [0.5, 1.5]); " << fit.used_n.size()
         << " points used, " << fit.dropped_n.size() << " dropped; ";
  } catch (const Error& e) {
    text << e.what() << "; ";
  }
  const double secs = detail::seconds_since(start);
  ok = ok && secs < 600.0;
  text << detail::runtime_note(secs, 600.0);
  return {9, "Exponent consistency", ok, text.str(), secs};
}

namespace detail {

inline std::vector<fs::path> csv_files(const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(fs::relative(e.path(), root));
  std::sort(files.begin(), files.end());
  return files;
}

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Empty when the two trees hold byte-identical CSV files.
inline std::string compare_csv_trees(const fs::path& a, const fs::path& b) {
  const auto fa = csv_files(a);
  const auto fb = csv_files(b);
  if (fa != fb) return "different CSV file sets";
  if (fa.empty()) return "no CSV files";
  for (const auto& f : fa)
    if (slurp(a / f) != slurp(b / f)) return f.string() + " differs";
  return {};
}

inline std::vector<CheckResult> run_quick_checks(SuiteOptions opt) {
  opt.quick = true;
  return {check_gd_identity(opt), check_orthant(opt), check_covariance(opt), check_hand_detection(opt),
          check_phase_transition(opt), check_lambda_star(opt)};
}

}  // namespace detail

// 10. Two quick runs with the same seed, one single-threaded, produce
// byte-identical CSV files.
inline CheckResult check_determinism(const SuiteOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  SuiteOptions a = opt, b = opt;
  a.out_dir = opt.out_dir / "determinism" / "run_a";
  b.out_dir = opt.out_dir / "determinism" / "run_b";
  a.threads = 1;
  fs::remove_all(a.out_dir);
  fs::remove_all(b.out_dir);
  detail::run_quick_checks(a);
  detail::run_quick_checks(b);
  const std::string diff = detail::compare_csv_trees(a.out_dir, b.out_dir);
  return {10, "Determinism", diff.empty(),
          diff.empty() ? std::to_string(detail::csv_files(a.out_dir).size()) + " CSV files byte-identical" : diff,
          detail::seconds_since(start)};
}

inline std::string format_line(const CheckResult& r) {
  std::ostringstream ss;
  ss << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << ": " << r.detail;
  return ss.str();
}

// Runs every check, writes summary.txt and returns the results in order.
// `progress` is called after each check.
inline std::vector<CheckResult> run_suite(const SuiteOptions& opt,
                                          const std::function<void(const CheckResult&)>& progress = {}) {
  fs::create_directories(opt.out_dir);
  using Check = CheckResult (*)(const SuiteOptions&);
  const std::vector<Check> checks{[](const SuiteOptions& o) { return check_gd_identity(o); },
                                  check_gd_expectation,
                                  check_orthant,
                                  check_covariance,
                                  check_ld_bruteforce,
                                  check_hand_detection,
                                  check_phase_transition,
                                  check_lambda_star,
                                  check_exponent,
                                  check_determinism};
  std::vector<CheckResult> results;
  for (const auto& c : checks) {
    results.push_back(c(opt));
    if (progress) progress(results.back());
  }
  std::ofstream summary(opt.out_dir / "summary.txt", std::ios::binary);
  summary << "mode: " << (opt.quick ? "smoke (reduced budgets)" : "full") << "\n";
  summary << "seed: " << opt.seed << "\n";
  std::size_t passed = 0;
  for (const auto& r : results) {
    summary << format_line(r) << " (" << r.seconds << " s)\n";
    passed += r.passed;
  }
  summary << passed << "/" << results.size() << " checks passed\n";
  return results;
}

}  // namespace oht::acceptance
