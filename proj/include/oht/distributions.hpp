#pragma once

// Finite-alphabet probability vectors, empirical distributions (types),
// KL divergence and mixtures. All logarithms are natural.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oht/error.hpp"

namespace oht {

inline constexpr double kNormalizationTolerance = 1e-12;

using Symbol = std::size_t;
using SymbolSequence = std::vector<Symbol>;

class Alphabet {
 public:
  explicit Alphabet(std::size_t size) : labels_(size) {
    if (size < 2) throw Error(ErrorKind::InvalidArgument, "alphabet size must be >= 2");
    for (std::size_t i = 0; i < size; ++i) labels_[i] = std::to_string(i);
  }

  explicit Alphabet(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.size() < 2) throw Error(ErrorKind::InvalidArgument, "alphabet size must be >= 2");
    for (std::size_t i = 0; i < labels_.size(); ++i)
      for (std::size_t j = i + 1; j < labels_.size(); ++j)
        if (labels_[i] == labels_[j])
          throw Error(ErrorKind::InvalidArgument, "duplicate alphabet label '" + labels_[i] + "'");
  }

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::string& label(Symbol s) const { return labels_.at(s); }

  Symbol index_of(std::string_view label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i)
      if (labels_[i] == label) return i;
    throw Error(ErrorKind::UnknownSymbol, "symbol '" + std::string(label) + "' is not in the alphabet");
  }

  bool operator==(const Alphabet&) const = default;

 private:
  std::vector<std::string> labels_;
};

// Probability vector over an alphabet of size mass.size(). Alphabets are
// matched by size.
class Distribution {
 public:
  // Validating constructor: entries must be finite and >= 0 and sum to 1
  // within kNormalizationTolerance; the stored vector is renormalized.
  explicit Distribution(std::vector<double> mass) : mass_(std::move(mass)) {
    if (mass_.size() < 2)
      throw Error(ErrorKind::InvalidDistribution, "distribution needs at least 2 entries");
    double total = 0.0;
    for (double m : mass_) {
      if (!std::isfinite(m) || m < 0.0)
        throw Error(ErrorKind::InvalidDistribution, "mass entries must be finite and non-negative");
      total += m;
    }
    if (std::abs(total - 1.0) > kNormalizationTolerance)
      throw Error(ErrorKind::InvalidDistribution,
                  "mass sums to " + std::to_string(total) + ", not 1");
    if (total != 1.0)
      for (double& m : mass_) m /= total;
    refresh_positivity();
  }

  Distribution(std::initializer_list<double> mass) : Distribution(std::vector<double>(mass)) {}

  // Divides by the total; for internally computed vectors (mixtures,
  // softmax outputs) whose sum is only approximately one.
  static Distribution normalized(std::vector<double> weights) {
    double total = 0.0;
    for (double w : weights) {
      if (!std::isfinite(w) || w < 0.0)
        throw Error(ErrorKind::InvalidDistribution, "weights must be finite and non-negative");
      total += w;
    }
    if (!(total > 0.0)) throw Error(ErrorKind::InvalidDistribution, "weights sum to zero");
    for (double& w : weights) w /= total;
    Distribution d;
    d.mass_ = std::move(weights);
    d.refresh_positivity();
    return d;
  }

  static Distribution uniform(std::size_t size) {
    return normalized(std::vector<double>(size, 1.0));
  }

  static Distribution point_mass(std::size_t size, Symbol at) {
    std::vector<double> m(size, 0.0);
    m.at(at) = 1.0;
    return Distribution(std::move(m));
  }

  std::size_t size() const noexcept { return mass_.size(); }
  double operator[](Symbol x) const { return mass_[x]; }
  std::span<const double> mass() const noexcept { return mass_; }
  bool strictly_positive() const noexcept { return strictly_positive_; }

  bool operator==(const Distribution& other) const { return mass_ == other.mass_; }

 private:
  Distribution() = default;

  void refresh_positivity() {
    strictly_positive_ = true;
    for (double m : mass_)
      if (!(m > 0.0)) strictly_positive_ = false;
  }

  std::vector<double> mass_;
  bool strictly_positive_ = false;
};

class EmpiricalDistribution {
 public:
  EmpiricalDistribution(std::vector<std::uint64_t> counts) : counts_(std::move(counts)) {
    if (counts_.size() < 2)
      throw Error(ErrorKind::InvalidArgument, "counts need an alphabet of size >= 2");
    n_ = std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
    if (n_ == 0) throw Error(ErrorKind::EmptySequence, "empirical distribution of an empty sequence");
  }

  std::span<const std::uint64_t> counts() const noexcept { return counts_; }
  std::uint64_t count(Symbol x) const { return counts_.at(x); }
  std::uint64_t n() const noexcept { return n_; }
  std::size_t alphabet_size() const noexcept { return counts_.size(); }

  Distribution mass() const {
    std::vector<double> m(counts_.size());
    for (std::size_t i = 0; i < m.size(); ++i)
      m[i] = static_cast<double>(counts_[i]) / static_cast<double>(n_);
    return Distribution::normalized(std::move(m));
  }

  bool operator==(const EmpiricalDistribution&) const = default;

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t n_ = 0;
};

inline void require_same_alphabet(const Distribution& p, const Distribution& q) {
  if (p.size() != q.size())
    throw Error(ErrorKind::AlphabetMismatch, "distributions over alphabets of size " +
                                                 std::to_string(p.size()) + " and " +
                                                 std::to_string(q.size()));
}

// D(p || q) in nats with 0 log(0/q) = 0. A point with p(x) > 0 = q(x) is a
// caller error rather than +infinity.
inline double kl_divergence(const Distribution& p, const Distribution& q) {
  require_same_alphabet(p, q);
  double sum = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p[x] == 0.0) continue;
    if (q[x] == 0.0)
      throw Error(ErrorKind::SupportViolation,
                  "p(" + std::to_string(x) + ") > 0 but q(" + std::to_string(x) + ") = 0");
    sum += p[x] * std::log(p[x] / q[x]);
  }
  return sum < 0.0 ? 0.0 : sum;
}

inline EmpiricalDistribution empirical(std::span<const Symbol> x, const Alphabet& alphabet) {
  if (x.empty()) throw Error(ErrorKind::EmptySequence, "sequence is empty");
  std::vector<std::uint64_t> counts(alphabet.size(), 0);
  for (Symbol s : x) {
    if (s >= alphabet.size())
      throw Error(ErrorKind::UnknownSymbol, "symbol index " + std::to_string(s) +
                                                " outside alphabet of size " +
                                                std::to_string(alphabet.size()));
    ++counts[s];
  }
  return EmpiricalDistribution(std::move(counts));
}

// Splits a UTF-8 string into code points, each returned as its own string.
inline std::vector<std::string> split_utf8(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if (lead >= 0xF0) len = 4;
    else if (lead >= 0xE0) len = 3;
    else if (lead >= 0xC0) len = 2;
    if (i + len > text.size())
      throw Error(ErrorKind::ParseError, "truncated UTF-8 sequence");
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

inline SymbolSequence encode(std::string_view text, const Alphabet& alphabet) {
  SymbolSequence seq;
  for (const auto& cp : split_utf8(text)) seq.push_back(alphabet.index_of(cp));
  return seq;
}

inline EmpiricalDistribution empirical(std::string_view x, const Alphabet& alphabet) {
  if (x.empty()) throw Error(ErrorKind::EmptySequence, "sequence is empty");
  const SymbolSequence seq = encode(x, alphabet);
  return empirical(std::span<const Symbol>(seq), alphabet);
}

inline Distribution mixture(std::span<const double> weights, std::span<const Distribution> components) {
  if (components.empty()) throw Error(ErrorKind::InvalidArgument, "mixture of zero components");
  if (weights.size() != components.size())
    throw Error(ErrorKind::DimensionMismatch, "one weight per component required");
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0)
      throw Error(ErrorKind::WeightSumViolation, "weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > kNormalizationTolerance)
    throw Error(ErrorKind::WeightSumViolation, "weights sum to " + std::to_string(total));
  const std::size_t k = components.front().size();
  std::vector<double> mass(k, 0.0);
  for (std::size_t c = 0; c < components.size(); ++c) {
    require_same_alphabet(components.front(), components[c]);
    for (std::size_t x = 0; x < k; ++x) mass[x] += weights[c] * components[c][x];
  }
  return Distribution::normalized(std::move(mass));
}

inline Distribution mixture(std::initializer_list<double> weights,
                            std::initializer_list<Distribution> components) {
  return mixture(std::span<const double>(weights.begin(), weights.size()),
                 std::span<const Distribution>(components.begin(), components.size()));
}

}  // namespace oht
