#pragma once

// Monte Carlo estimation of the misclassification, false-reject and
// false-alarm probabilities of the threshold test, alongside the theoretical
// bounds for the same (scenario, n, lambda) cell.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "oht/detector.hpp"
#include "oht/random.hpp"
#include "oht/theory.hpp"

namespace oht {

// Fixed threshold, or lambda*(n, epsilon) for the true outlier set.
struct LambdaSpec {
  enum class Kind { Fixed, Auto };
  Kind kind = Kind::Fixed;
  double value = 0.0;  // lambda for Fixed, epsilon for Auto

  static LambdaSpec fixed(double lambda) { return {Kind::Fixed, lambda}; }
  static LambdaSpec automatic(double epsilon) { return {Kind::Auto, epsilon}; }

  std::string to_string() const {
    return kind == Kind::Fixed ? std::to_string(value) : "auto:" + std::to_string(value);
  }
};

struct ExperimentSpec {
  Scenario scenario;
  std::optional<OutlierSet> truth;  // nullopt: no outliers (H_r)
  std::vector<std::size_t> n_grid;
  LambdaSpec lambda;
  std::size_t trials = 10000;
  std::uint64_t seed = 1;

  void validate() const {
    if (trials < 1) throw Error(ErrorKind::InvalidArgument, "trials must be >= 1");
    if (n_grid.empty()) throw Error(ErrorKind::InvalidArgument, "n grid is empty");
    for (std::size_t n : n_grid)
      if (n < 1) throw Error(ErrorKind::InvalidArgument, "sequence length must be >= 1");
    if (truth && !scenario.space().contains(*truth))
      throw Error(ErrorKind::SetNotInSpace, truth->to_string());
    if (lambda.kind == LambdaSpec::Kind::Fixed && !(lambda.value > 0.0))
      throw Error(ErrorKind::InvalidArgument, "lambda must be positive");
    if (lambda.kind == LambdaSpec::Kind::Auto) {
      if (!(lambda.value > 0.0 && lambda.value < 1.0))
        throw Error(ErrorKind::InvalidArgument, "auto lambda needs epsilon in (0,1)");
      if (!truth) throw Error(ErrorKind::InvalidArgument, "auto lambda needs a non-null truth");
    }
  }
};

struct Interval {
  double estimate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double half_width() const { return 0.5 * (hi - lo); }
};

inline constexpr double kWilsonZ95 = 1.959963984540054;

inline Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = kWilsonZ95) {
  if (trials == 0) throw Error(ErrorKind::InvalidArgument, "no trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  // The bounds are exactly 0 and 1 at the extremes; rounding would leave a
  // hair above 0 or below 1.
  const double lo = successes == 0 ? 0.0 : std::max(0.0, centre - half);
  const double hi = successes == trials ? 1.0 : std::min(1.0, centre + half);
  return {p, lo, hi};
}

struct ReportRow {
  std::string hypothesis;  // "null" or the truth set, e.g. "{1;3}"
  std::size_t n = 0;
  double lambda = 0.0;
  std::uint64_t trials = 0;
  // Outcome tallies; correct + misclassified + rejected + false_alarms ==
  // trials. Under H_r a reject verdict is the correct outcome.
  std::uint64_t correct = 0;
  std::uint64_t misclassified = 0;
  std::uint64_t rejected = 0;
  std::uint64_t false_alarms = 0;
  std::optional<Interval> miscls;  // under H_B
  std::optional<Interval> reject;  // under H_B
  std::optional<Interval> falarm;  // under H_r
  double bound_miscls = 0.0;
  double bound_falarm = 0.0;
  std::optional<double> bound_reject;  // under H_B
};

struct TrialReport {
  std::vector<ReportRow> rows;
};

inline std::size_t worker_count() {
  std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("OHT_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) hw = std::min<std::size_t>(hw, static_cast<std::size_t>(cap));
  }
  return hw;
}

namespace detail {

// Cumulative mass of each sequence's law under the experiment's hypothesis.
inline std::vector<std::vector<double>> sequence_cdfs(const ExperimentSpec& spec) {
  const Scenario& sc = spec.scenario;
  std::vector<std::vector<double>> cdfs;
  for (std::size_t i = 1; i <= sc.M(); ++i) {
    const Distribution& law = spec.truth ? sc.law(*spec.truth, i) : sc.nominal();
    std::vector<double> cdf(law.size());
    double acc = 0.0;
    for (std::size_t x = 0; x < law.size(); ++x) cdf[x] = (acc += law[x]);
    cdf.back() = 1.0;
    cdfs.push_back(std::move(cdf));
  }
  return cdfs;
}

inline Symbol draw(const std::vector<double>& cdf, CounterRng& rng) {
  const double u = rng.uniform();
  Symbol x = 0;
  while (u >= cdf[x] && x + 1 < cdf.size()) ++x;
  return x;
}

}  // namespace detail

// Sequence i is drawn i.i.d. from P_A,rank(i) when i is in the truth set and
// from P_N otherwise.
inline std::vector<SymbolSequence> sample_panel(const ExperimentSpec& spec, std::size_t n, CounterRng& rng) {
  const auto cdfs = detail::sequence_cdfs(spec);
  std::vector<SymbolSequence> panel(cdfs.size(), SymbolSequence(n));
  for (std::size_t i = 0; i < cdfs.size(); ++i)
    for (std::size_t k = 0; k < n; ++k) panel[i][k] = detail::draw(cdfs[i], rng);
  return panel;
}

// Stream for trial `trial` at sequence length n.
inline CounterRng trial_stream(std::uint64_t seed, std::size_t n, std::uint64_t trial) {
  return CounterRng(derive_key(seed, {static_cast<std::uint64_t>(n), trial}));
}

struct CellCounts {
  std::uint64_t correct = 0;
  std::uint64_t misclassified = 0;
  std::uint64_t rejected = 0;
};

// Runs `trials` independent tests at one (n, lambda) and tallies outcomes.
// Under the null, "correct" counts rejections.
inline CellCounts run_cell(const ExperimentSpec& spec, std::size_t n, double lambda, std::size_t threads = 0) {
  const Scenario& sc = spec.scenario;
  const HypothesisSpace& space = sc.space();
  const std::size_t M = sc.M();
  const std::size_t K = sc.alphabet_size();
  const auto cdfs = detail::sequence_cdfs(spec);
  const std::optional<std::size_t> truth_index =
      spec.truth ? std::optional<std::size_t>(space.index_of(*spec.truth)) : std::nullopt;

  if (threads == 0) threads = worker_count();
  threads = std::max<std::size_t>(1, std::min<std::size_t>(threads, spec.trials));
  std::vector<CellCounts> partial(threads);

  auto work = [&](std::size_t w) {
    const std::size_t begin = spec.trials * w / threads;
    const std::size_t end = spec.trials * (w + 1) / threads;
    std::vector<std::uint64_t> counts(M * K);
    std::vector<std::uint64_t> totals(K);
    std::vector<double> scores(space.size());
    CellCounts& out = partial[w];
    for (std::size_t t = begin; t < end; ++t) {
      CounterRng rng = trial_stream(spec.seed, n, t);
      std::fill(counts.begin(), counts.end(), 0);
      for (std::size_t i = 0; i < M; ++i)
        for (std::size_t k = 0; k < n; ++k) ++counts[i * K + detail::draw(cdfs[i], rng)];
      for (std::size_t c = 0; c < space.size(); ++c)
        scores[c] = detail::score_from_counts(counts, K, n, space.complement_indices(c), totals);
      const auto verdict = detail::decide_index(scores, lambda);
      if (!verdict) ++out.rejected;
      else if (truth_index && *verdict == *truth_index) ++out.correct;
      else ++out.misclassified;
    }
  };

  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  CellCounts total;
  for (const auto& p : partial) {
    total.correct += p.correct;
    total.misclassified += p.misclassified;
    total.rejected += p.rejected;
  }
  if (!truth_index) total.correct = total.rejected;
  return total;
}

struct EstimateOptions {
  std::size_t threads = 0;  // 0: worker_count()
  OrthantOptions orthant;
};

inline std::string hypothesis_label(const std::optional<OutlierSet>& truth) {
  return truth ? truth->to_string(';') : "null";
}

inline TrialReport estimate(const ExperimentSpec& spec, const EstimateOptions& options = {}) {
  spec.validate();
  const Scenario& sc = spec.scenario;
  std::optional<TheoryProfile> prof;
  if (spec.truth) prof = profile(*spec.truth, sc);
  std::optional<double> l_star_value;
  if (spec.lambda.kind == LambdaSpec::Kind::Auto) l_star_value = l_star(spec.lambda.value, *prof, options.orthant).value;

  TrialReport report;
  for (std::size_t n : spec.n_grid) {
    double lambda = spec.lambda.value;
    if (l_star_value) {
      lambda = prof->gd_min + *l_star_value / std::sqrt(static_cast<double>(n));
      if (!(lambda > 0.0))
        throw Error(ErrorKind::NonPositiveThreshold, "lambda* <= 0 at n = " + std::to_string(n));
    }
    const CellCounts counts = run_cell(spec, n, lambda, options.threads);

    ReportRow row;
    row.hypothesis = hypothesis_label(spec.truth);
    row.n = n;
    row.lambda = lambda;
    row.trials = spec.trials;
    const double nd = static_cast<double>(n);
    row.bound_miscls = misclassification_bound(nd, lambda, sc.M(), sc.alphabet_size());
    row.bound_falarm = false_alarm_bound(nd, lambda, sc.M(), sc.alphabet_size());
    if (spec.truth) {
      row.correct = counts.correct;
      row.rejected = counts.rejected;
      row.misclassified = counts.misclassified;
      row.miscls = wilson_interval(counts.misclassified, spec.trials);
      row.reject = wilson_interval(counts.rejected, spec.trials);
      row.bound_reject = false_reject_bound(*prof, lambda, nd, options.orthant);
    } else {
      row.correct = counts.rejected;
      row.false_alarms = spec.trials - counts.rejected;
      row.falarm = wilson_interval(row.false_alarms, spec.trials);
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

enum class ErrorType { Misclassification, FalseReject, FalseAlarm };

struct ExponentFit {
  double slope = 0.0;
  double std_error = 0.0;
  std::vector<std::size_t> used_n;
  std::vector<std::size_t> dropped_n;  // zero-count rows
};

namespace detail {

inline std::uint64_t error_count(const ReportRow& row, ErrorType which) {
  switch (which) {
    case ErrorType::Misclassification: return row.misclassified;
    case ErrorType::FalseReject: return row.rejected;
    case ErrorType::FalseAlarm: return row.false_alarms;
  }
  return 0;
}

}  // namespace detail

// Slope of -log(estimate) against n by weighted least squares. Each point is
// weighted by the inverse delta-method variance of log p-hat,
// count / (1 - p-hat). Zero-count rows are dropped and listed.
inline ExponentFit exponent_fit(const TrialReport& report, ErrorType which) {
  ExponentFit fit;
  std::vector<double> xs, ys, ws;
  for (const auto& row : report.rows) {
    const std::uint64_t count = detail::error_count(row, which);
    if (count == 0) {
      fit.dropped_n.push_back(row.n);
      continue;
    }
    const double trials = static_cast<double>(row.trials);
    const double p = static_cast<double>(count) / trials;
    xs.push_back(static_cast<double>(row.n));
    ys.push_back(-std::log(p));
    ws.push_back(static_cast<double>(count) / std::max(1.0 - p, 1.0 / trials));
    fit.used_n.push_back(row.n);
  }
  if (xs.size() < 3)
    throw Error(ErrorKind::InsufficientData,
                "only " + std::to_string(xs.size()) + " rows with nonzero counts; the exponent outruns the trial budget");
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sw += ws[k];
    sx += ws[k] * xs[k];
    sy += ws[k] * ys[k];
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += ws[k] * (xs[k] - mx) * (xs[k] - mx);
    sxy += ws[k] * (xs[k] - mx) * (ys[k] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::InsufficientData, "n grid has no spread");
  fit.slope = sxy / sxx;
  fit.std_error = std::sqrt(1.0 / sxx);
  return fit;
}

}  // namespace oht
