#pragma once

#include <cstdint>

namespace gibbslab {

// SplitMix64 finalizer, used as a keyed hash.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                                 std::uint64_t c) {
  return mix64(mix64(mix64(mix64(seed) ^ a) ^ b) ^ c);
}

constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Counter-based uniform in [0,1): the same key always yields the same value,
// so two chains that share (seed, chain, sweep, slot) see identical variates.
constexpr double keyed_uniform(std::uint64_t seed, std::uint64_t chain, std::uint64_t sweep,
                               std::uint64_t slot) {
  return to_unit(hash_key(seed, chain, sweep, slot));
}

// Sequential stream over a fixed key; draw i is keyed_uniform(seed, stream, i).
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}
  double uniform() { return keyed_uniform(seed_, stream_, 0, counter_++); }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    const auto v = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    return v < n ? v : n - 1;
  }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace gibbslab
