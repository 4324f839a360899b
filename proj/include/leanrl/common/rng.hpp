#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace leanrl {

// Randomness is derived, never shared: every decision that must be
// reproducible draws from a generator seeded by derive_seed(root, ids...).
// The derivation is splitmix64 folded over the ids, so results do not depend
// on thread scheduling or on how many other draws happened first.

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> ids);
std::uint64_t fnv1a64(std::string_view text);

// Small deterministic generator (splitmix64 stream). Sequences are identical
// across platforms, unlike std::uniform_*_distribution.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  // Uniform in [0, 1) with 53 bits of precision.
  double uniform01();
  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);
  bool bernoulli(double p) { return uniform01() < p; }

  // UniformRandomBitGenerator surface so std::shuffle and friends accept it.
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next(); }

 private:
  std::uint64_t state_;
};

}  // namespace leanrl
