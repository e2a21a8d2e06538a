#pragma once

// Scoring function G_B and the threshold test.
//
// For a candidate set B the score is the sum, over the sequences outside B,
// of the KL divergence from each empirical distribution to the average of
// those empirical distributions. The test declares B when its score is the
// strict minimum of the table and every rival score exceeds the threshold;
// otherwise it rejects (no outliers).

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oht/distributions.hpp"
#include "oht/hypothesis_space.hpp"

namespace oht {

namespace detail {

// Score of one set from raw counts, laid out as counts[t * K + x]. Ratios are
// formed from exact integers so equal off-set rows give exactly zero.
inline double score_from_counts(std::span<const std::uint64_t> counts, std::size_t K,
                                std::uint64_t n, std::span<const std::size_t> off_set,
                                std::span<std::uint64_t> totals) {
  const auto m = static_cast<std::uint64_t>(off_set.size());
  for (std::size_t x = 0; x < K; ++x) {
    std::uint64_t s = 0;
    for (std::size_t t : off_set) s += counts[t * K + x];
    totals[x] = s;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  double score = 0.0;
  for (std::size_t t : off_set) {
    double term = 0.0;
    for (std::size_t x = 0; x < K; ++x) {
      const std::uint64_t c = counts[t * K + x];
      if (c == 0) continue;
      const double ratio = static_cast<double>(m * c) / static_cast<double>(totals[x]);
      term += static_cast<double>(c) * inv_n * std::log(ratio);
    }
    score += term;
  }
  return score < 0.0 ? 0.0 : score;
}

}  // namespace detail

// G_B(Q) = sum_{t not in B} D(Q_t || mean of Q_l, l not in B).
inline double g_score(const OutlierSet& B, std::span<const Distribution> Q) {
  if (Q.size() != B.M())
    throw Error(ErrorKind::DimensionMismatch,
                "expected " + std::to_string(B.M()) + " distributions, got " + std::to_string(Q.size()));
  const std::size_t K = Q.front().size();
  for (const auto& q : Q) require_same_alphabet(Q.front(), q);

  const auto off = complement(B);
  bool all_equal = true;
  for (std::size_t i : off)
    if (!(Q[i - 1] == Q[off.front() - 1])) all_equal = false;
  if (all_equal) return 0.0;

  std::vector<double> avg(K, 0.0);
  for (std::size_t i : off)
    for (std::size_t x = 0; x < K; ++x) avg[x] += Q[i - 1][x];
  for (double& a : avg) a /= static_cast<double>(off.size());

  double score = 0.0;
  for (std::size_t i : off) {
    double term = 0.0;
    for (std::size_t x = 0; x < K; ++x) {
      const double q = Q[i - 1][x];
      if (q > 0.0) term += q * std::log(q / avg[x]);
    }
    score += term;
  }
  return score < 0.0 ? 0.0 : score;
}

class ScoreTable {
 public:
  ScoreTable(HypothesisSpace space, std::vector<double> scores)
      : space_(std::move(space)), scores_(std::move(scores)) {
    if (scores_.size() != space_.size())
      throw Error(ErrorKind::DimensionMismatch, "one score per hypothesis required");
  }

  const HypothesisSpace& space() const noexcept { return space_; }
  std::span<const double> scores() const noexcept { return scores_; }
  double score(std::size_t k) const { return scores_.at(k); }
  double score(const OutlierSet& B) const { return scores_[space_.index_of(B)]; }

 private:
  HypothesisSpace space_;
  std::vector<double> scores_;
};

class Verdict {
 public:
  static Verdict reject() { return Verdict(std::nullopt); }
  static Verdict outliers(OutlierSet B) { return Verdict(std::move(B)); }

  bool is_reject() const noexcept { return !set_.has_value(); }
  const OutlierSet& set() const {
    if (!set_) throw Error(ErrorKind::InvalidArgument, "reject verdict has no outlier set");
    return *set_;
  }

  std::string to_string() const { return is_reject() ? "reject" : "outliers " + set_->to_string(); }

  bool operator==(const Verdict&) const = default;

 private:
  explicit Verdict(std::optional<OutlierSet> set) : set_(std::move(set)) {}
  std::optional<OutlierSet> set_;
};

inline ScoreTable score_all(std::span<const EmpiricalDistribution> panel, const HypothesisSpace& space) {
  if (panel.size() != space.M())
    throw Error(ErrorKind::LengthMismatch, "panel has " + std::to_string(panel.size()) +
                                               " sequences, space expects " + std::to_string(space.M()));
  const std::size_t K = panel.front().alphabet_size();
  const std::uint64_t n = panel.front().n();
  std::vector<std::uint64_t> counts(panel.size() * K);
  for (std::size_t t = 0; t < panel.size(); ++t) {
    if (panel[t].alphabet_size() != K)
      throw Error(ErrorKind::AlphabetMismatch, "panel entries over different alphabets");
    if (panel[t].n() != n)
      throw Error(ErrorKind::LengthMismatch, "sequence " + std::to_string(t + 1) + " has length " +
                                                 std::to_string(panel[t].n()) + ", expected " +
                                                 std::to_string(n));
    for (std::size_t x = 0; x < K; ++x) counts[t * K + x] = panel[t].count(x);
  }
  std::vector<std::uint64_t> totals(K);
  std::vector<double> scores(space.size());
  for (std::size_t k = 0; k < space.size(); ++k)
    scores[k] = detail::score_from_counts(counts, K, n, space.complement_indices(k), totals);
  return ScoreTable(space, std::move(scores));
}

namespace detail {

// Index of the declared set, or nullopt for reject. Strict inequalities:
// any tie resolves to reject.
inline std::optional<std::size_t> decide_index(std::span<const double> scores, double lambda) {
  std::size_t best = 0;
  double lowest = std::numeric_limits<double>::infinity();
  double runner_up = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < scores.size(); ++k) {
    if (scores[k] < lowest) {
      runner_up = lowest;
      lowest = scores[k];
      best = k;
    } else if (scores[k] < runner_up) {
      runner_up = scores[k];
    }
  }
  if (lowest < runner_up && runner_up > lambda) return best;
  return std::nullopt;
}

}  // namespace detail

inline Verdict decide(const ScoreTable& table, double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorKind::InvalidArgument, "lambda must be positive");
  const auto k = detail::decide_index(table.scores(), lambda);
  return k ? Verdict::outliers(table.space()[*k]) : Verdict::reject();
}

inline Verdict run_test(std::span<const SymbolSequence> sequences, const Alphabet& alphabet, double lambda) {
  const HypothesisSpace space = enumerate(sequences.size());
  std::vector<EmpiricalDistribution> panel;
  panel.reserve(sequences.size());
  for (const auto& seq : sequences) panel.push_back(empirical(std::span<const Symbol>(seq), alphabet));
  return decide(score_all(panel, space), lambda);
}

inline Verdict run_test(std::span<const std::string> sequences, const Alphabet& alphabet, double lambda) {
  std::vector<SymbolSequence> encoded;
  encoded.reserve(sequences.size());
  for (const auto& s : sequences) {
    if (s.empty()) throw Error(ErrorKind::EmptySequence, "sequence is empty");
    encoded.push_back(encode(s, alphabet));
  }
  return run_test(std::span<const SymbolSequence>(encoded), alphabet, lambda);
}

}  // namespace oht
