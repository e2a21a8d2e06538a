#pragma once

// Hand-rolled generators for property tests. Each test seeds its own stream so
// failures reproduce from the seed printed in the assertion message.

#include <cstdint>
#include <vector>

#include "oht/random.hpp"
#include "oht/theory.hpp"

namespace oht::gen {

inline Distribution random_distribution(std::size_t K, CounterRng& rng, double floor = 0.0) {
  std::vector<double> w(K);
  double total = 0.0;
  for (auto& v : w) total += (v = -std::log(1.0 - rng.uniform()) + floor);
  for (auto& v : w) v /= total;
  return Distribution::normalized(std::move(w));
}

// Occasionally puts zero mass on a symbol.
inline Distribution random_sparse_distribution(std::size_t K, CounterRng& rng) {
  std::vector<double> w(K);
  double total = 0.0;
  for (auto& v : w) total += (v = rng.uniform() < 0.2 ? 0.0 : rng.uniform());
  if (total == 0.0) {
    w[0] = 1.0;
    total = 1.0;
  }
  for (auto& v : w) v /= total;
  return Distribution::normalized(std::move(w));
}

inline Scenario random_scenario(std::size_t M, std::size_t K, CounterRng& rng, double floor = 0.02) {
  Distribution nominal = random_distribution(K, rng, floor);
  std::vector<Distribution> anomalies;
  for (std::size_t t = 0; t < max_outliers(M); ++t) anomalies.push_back(random_distribution(K, rng, floor));
  return Scenario(M, std::move(nominal), std::move(anomalies));
}

inline std::size_t uniform_index(CounterRng& rng, std::size_t n) {
  return static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)) % n;
}

inline Distribution bern(double p1) { return Distribution{1.0 - p1, p1}; }

// P_N = (0.2, 0.8), P_A = (0.8, 0.2), M = 4.
inline Scenario binary_scenario() { return Scenario(4, Distribution{0.2, 0.8}, {Distribution{0.8, 0.2}}); }

}  // namespace oht::gen
