#pragma once

// Candidate outlier sets. Sequence indices are 1-based throughout the
// public interface, matching the usual [M] = {1, ..., M} notation.

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "oht/error.hpp"

namespace oht {

inline constexpr std::size_t kDefaultMaxSequences = 16;

// Largest admissible outlier count for M sequences: ceil(M/2 - 1).
constexpr std::size_t max_outliers(std::size_t M) { return M < 2 ? 0 : (M - 1) / 2; }

class OutlierSet {
 public:
  OutlierSet(std::vector<std::size_t> members, std::size_t M) : members_(std::move(members)), M_(M) {
    std::sort(members_.begin(), members_.end());
    if (members_.empty()) throw Error(ErrorKind::InvalidArgument, "outlier set must be non-empty");
    if (std::adjacent_find(members_.begin(), members_.end()) != members_.end())
      throw Error(ErrorKind::InvalidArgument, "outlier set has duplicate indices");
    if (members_.front() < 1 || members_.back() > M_)
      throw Error(ErrorKind::InvalidArgument, "outlier index outside [1, M]");
    if (members_.size() > max_outliers(M_))
      throw Error(ErrorKind::InvalidArgument,
                  "outlier set of size " + std::to_string(members_.size()) + " exceeds T = " +
                      std::to_string(max_outliers(M_)));
  }

  std::span<const std::size_t> members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  std::size_t M() const noexcept { return M_; }

  bool contains(std::size_t i) const { return std::binary_search(members_.begin(), members_.end(), i); }

  std::string to_string(char sep = ',') const {
    std::string s = "{";
    for (std::size_t k = 0; k < members_.size(); ++k) {
      if (k) s += sep;
      s += std::to_string(members_[k]);
    }
    return s + "}";
  }

  // Canonical order: by size, then lexicographic on members.
  friend bool operator<(const OutlierSet& a, const OutlierSet& b) {
    if (a.members_.size() != b.members_.size()) return a.members_.size() < b.members_.size();
    return a.members_ < b.members_;
  }
  friend bool operator==(const OutlierSet& a, const OutlierSet& b) {
    return a.M_ == b.M_ && a.members_ == b.members_;
  }

 private:
  std::vector<std::size_t> members_;
  std::size_t M_;
};

// M_B = [M] \ B, ascending.
inline std::vector<std::size_t> complement(const OutlierSet& B) {
  std::vector<std::size_t> out;
  out.reserve(B.M() - B.size());
  for (std::size_t i = 1; i <= B.M(); ++i)
    if (!B.contains(i)) out.push_back(i);
  return out;
}

// j such that i is the j-th smallest member of B (1-based).
inline std::size_t ordered_rank(const OutlierSet& B, std::size_t i) {
  const auto members = B.members();
  const auto it = std::lower_bound(members.begin(), members.end(), i);
  if (it == members.end() || *it != i)
    throw Error(ErrorKind::IndexNotInSet, std::to_string(i) + " is not in " + B.to_string());
  return static_cast<std::size_t>(it - members.begin()) + 1;
}

// The family S of all outlier sets of size 1..T, materialized in canonical
// order. Copies share the immutable storage.
class HypothesisSpace {
 public:
  std::size_t M() const noexcept { return data_->M; }
  std::size_t T() const noexcept { return max_outliers(data_->M); }
  std::size_t size() const noexcept { return data_->sets.size(); }
  const std::vector<OutlierSet>& sets() const noexcept { return data_->sets; }
  const OutlierSet& operator[](std::size_t k) const { return data_->sets.at(k); }

  // 0-based complement indices of set k, for hot loops.
  std::span<const std::size_t> complement_indices(std::size_t k) const {
    return data_->complements.at(k);
  }

  std::size_t index_of(const OutlierSet& B) const {
    if (B.M() != M()) throw Error(ErrorKind::SetNotInSpace, B.to_string() + " has a different M");
    const auto it = data_->index.find(std::vector<std::size_t>(B.members().begin(), B.members().end()));
    if (it == data_->index.end()) throw Error(ErrorKind::SetNotInSpace, B.to_string());
    return it->second;
  }

  bool contains(const OutlierSet& B) const {
    return B.M() == M() &&
           data_->index.count(std::vector<std::size_t>(B.members().begin(), B.members().end())) > 0;
  }

  bool operator==(const HypothesisSpace& other) const { return M() == other.M(); }

  friend HypothesisSpace enumerate(std::size_t M, std::size_t max_M);

 private:
  struct Data {
    std::size_t M = 0;
    std::vector<OutlierSet> sets;
    std::vector<std::vector<std::size_t>> complements;
    std::map<std::vector<std::size_t>, std::size_t> index;
  };
  std::shared_ptr<const Data> data_;
};

inline HypothesisSpace enumerate(std::size_t M, std::size_t max_M = kDefaultMaxSequences) {
  if (M < 3) throw Error(ErrorKind::MTooSmall, "M = " + std::to_string(M) + " gives T = 0");
  if (M > max_M)
    throw Error(ErrorKind::MTooLarge,
                "M = " + std::to_string(M) + " exceeds the guard of " + std::to_string(max_M));
  auto data = std::make_shared<HypothesisSpace::Data>();
  data->M = M;
  const std::size_t T = max_outliers(M);
  for (std::size_t t = 1; t <= T; ++t) {
    // Lexicographic t-combinations of {1..M}.
    std::vector<std::size_t> comb(t);
    for (std::size_t k = 0; k < t; ++k) comb[k] = k + 1;
    while (true) {
      data->sets.emplace_back(comb, M);
      std::size_t k = t;
      while (k > 0 && comb[k - 1] == M - t + k) --k;
      if (k == 0) break;
      ++comb[k - 1];
      for (std::size_t j = k; j < t; ++j) comb[j] = comb[j - 1] + 1;
    }
  }
  for (std::size_t k = 0; k < data->sets.size(); ++k) {
    const auto& B = data->sets[k];
    std::vector<std::size_t> comp;
    for (std::size_t i : complement(B)) comp.push_back(i - 1);
    data->complements.push_back(std::move(comp));
    data->index.emplace(std::vector<std::size_t>(B.members().begin(), B.members().end()), k);
  }
  HypothesisSpace space;
  space.data_ = std::move(data);
  return space;
}

// S_B = S \ {B} in canonical order.
inline std::vector<OutlierSet> rivals(const OutlierSet& B, const HypothesisSpace& space) {
  const std::size_t skip = space.index_of(B);
  std::vector<OutlierSet> out;
  out.reserve(space.size() - 1);
  for (std::size_t k = 0; k < space.size(); ++k)
    if (k != skip) out.push_back(space[k]);
  return out;
}

}  // namespace oht
