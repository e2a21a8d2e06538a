#pragma once

// Counter-based random streams. Each stream is identified by a key derived
// from the experiment seed and stream coordinates (e.g. grid cell, trial), so
// the values a trial sees do not depend on which thread runs it or in which
// order trials execute.

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace oht {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> coordinates) {
  std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc909ULL);
  for (std::uint64_t c : coordinates) h = mix64(h ^ mix64(c + 0x9e3779b97f4a7c15ULL));
  return h;
}

// Satisfies UniformRandomBitGenerator; output k is mix64(key + k * gamma).
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t key) : state_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  // Uniform on [0, 1) with 53 random bits.
  constexpr double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace oht
