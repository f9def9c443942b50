#pragma once

// Portable seeded randomness.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the
// C++ standard. Bounded integers and unit doubles are derived here rather
// than through <random> distributions, whose algorithms are
// implementation-defined.
//
// Stream splitting: the child stream for `index` under `master` is seeded
// with split_seed(master, index) = splitmix64(master ^ splitmix64(index + 1)),
// where splitmix64 is the finalizer of Steele, Lea and Flood's SplitMix64.

#include <cstdint>
#include <random>

namespace occuthresh {

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t split_seed(std::uint64_t master, std::uint64_t index);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform integer in [0, bound); bound > 0. Unbiased by rejection.
  std::uint64_t below(std::uint64_t bound);
  /// Uniform double in [0, 1) with 53 random bits.
  double unit();

 private:
  std::mt19937_64 engine_;
};

}  // namespace occuthresh
