#pragma once

// r-in-k occupation solutions on configurations: a 0/1 assignment is a
// solution when every constraint has exactly r of its k f-edges wired to
// variables set to one. A variable incident to a constraint twice counts
// twice.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "occuthresh/instances.hpp"

namespace occuthresh {

using Assignment = std::vector<std::uint8_t>;

inline constexpr std::uint32_t kDefaultEnumerationCap = 32;

/// n1 = r*n/k when integral; otherwise no solution can exist.
std::optional<std::uint32_t> ones_quota(const Params& params);

bool is_solution(const Configuration& cfg, std::span<const std::uint8_t> x);

/// Exact number of solutions. Throws CapacityError when n exceeds `cap`.
std::uint64_t count_solutions(const Configuration& cfg,
                              std::uint32_t cap = kDefaultEnumerationCap);

/// Z > 0, stopping at the first solution found.
bool is_satisfiable(const Configuration& cfg, std::uint32_t cap = kDefaultEnumerationCap);

/// First solution in search order, if any.
std::optional<Assignment> find_solution(const Configuration& cfg,
                                        std::uint32_t cap = kDefaultEnumerationCap);

struct OverlapProfile {
  std::uint32_t r1 = 0;  ///< variables set to one by both solutions
  std::uint32_t r2 = 0;  ///< constraints with two f-edges on such variables
  double w1 = 0.0;       ///< r1 / n1
  double w2 = 0.0;       ///< r2 / m
};

/// Overlap of two solutions. Throws ContractViolation if either is not a
/// solution of `cfg`.
OverlapProfile overlap(const Configuration& cfg, std::span<const std::uint8_t> x,
                       std::span<const std::uint8_t> y);

struct ProportionInterval {
  double low;
  double high;
};

/// Wilson score interval for a binomial proportion (95% by default).
ProportionInterval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                                   double z = 1.959963984540054);

struct SatEstimate {
  std::uint32_t n;
  std::uint64_t trials;
  std::uint64_t sat_count;
  double sat_fraction;
  double ci_low;
  double ci_high;
  std::uint64_t seed;
};

/// For each n, samples `trials` configurations with seeds
/// split_seed(split_seed(seed, n), trial) and decides satisfiability.
/// Results do not depend on `threads`.
std::vector<SatEstimate> estimate_sat_probability(std::uint32_t k, std::uint32_t d,
                                                  std::uint32_t r,
                                                  std::span<const std::uint32_t> n_list,
                                                  std::uint64_t trials, std::uint64_t seed,
                                                  unsigned threads = 1,
                                                  std::uint32_t cap = kDefaultEnumerationCap);

/// Sums over every one of the (dn)! configurations of a tiny instance.
struct EnumeratedMoments {
  std::uint64_t configurations = 0;
  std::uint64_t sum_z = 0;          ///< sum of Z
  std::uint64_t sum_z2 = 0;         ///< sum of Z^2
  std::uint64_t sum_z_x1 = 0;       ///< sum of Z * (number of two-cycles)
  std::uint64_t sum_redundant = 0;  ///< sum of redundant constraint pairs

  double mean(std::uint64_t sum) const {
    return static_cast<double>(sum) / static_cast<double>(configurations);
  }
};

inline constexpr std::uint64_t kMaxEnumeratedEdges = 10;

/// Visits all wirings in lexicographic order. Throws CapacityError when
/// d*n exceeds kMaxEnumeratedEdges. Integer sums make the result
/// independent of `threads`.
EnumeratedMoments enumerate_moments(const Params& params, unsigned threads = 1);

/// CSV with header n,trials,sat_count,sat_fraction,ci_low,ci_high,seed.
std::string sat_table_csv(std::span<const SatEstimate> rows);

}  // namespace occuthresh
