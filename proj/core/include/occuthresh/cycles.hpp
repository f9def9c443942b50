#pragma once

// Short alternating cycles in configurations and their Poisson limits.
// A 2l-cycle visits l distinct variables and l distinct constraints and
// uses 2l distinct wiring edges.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "occuthresh/instances.hpp"

namespace occuthresh {

inline constexpr std::uint32_t kDefaultCycleLength = 6;

struct CycleCensus {
  /// counts[l - 1] = number of 2l-cycles.
  std::vector<std::uint64_t> counts;

  std::uint64_t operator()(std::uint32_t l) const { return counts.at(l - 1); }
  std::uint32_t l_max() const { return static_cast<std::uint32_t>(counts.size()); }
};

/// Counts directed rooted cycles by depth-first walks from every variable
/// and divides by 2l. Throws ContractViolation for l_max == 0.
CycleCensus count_cycles(const Configuration& cfg, std::uint32_t l_max = kDefaultCycleLength);

/// [(k-1)(d-1)]^l / (2l): limiting mean number of 2l-cycles.
double lambda_l(std::uint32_t l, std::uint32_t k, std::uint32_t d);
/// (-1/(k-1))^l.
double delta_l(std::uint32_t l, std::uint32_t k);
/// lambda_l * (1 + delta_l).
double mu_l(std::uint32_t l, std::uint32_t k, std::uint32_t d);

/// Tr(W^l) - 1 for the two-state chain with column-stochastic transition
/// matrix W = [[1 - 2/(k-1), 1 - 1/(k-1)], [2/(k-1), 1/(k-1)]], computed
/// by explicit matrix powers.
double markov_trace_delta(std::uint32_t l, std::uint32_t k);

struct PoissonFit {
  std::uint32_t l;
  double empirical_mean;
  double lambda;
  double z_score;         ///< (mean - lambda) / sqrt(lambda / samples)
  double empirical_var;   ///< unbiased sample variance
  double chi2;            ///< Pearson statistic against Poisson(lambda)
  std::uint32_t dof;      ///< bins - 1
};

/// Per-length comparison of sampled censuses with Poisson(lambda_l).
/// Bins 0..K-1 plus a tail bin, K chosen so every bin expects at least five
/// samples. Requires at least two samples.
std::vector<PoissonFit> poisson_gof(std::span<const CycleCensus> samples, std::uint32_t k,
                                    std::uint32_t d);

/// Pearson correlation of X_a and X_b across samples.
double census_correlation(std::span<const CycleCensus> samples, std::uint32_t a, std::uint32_t b);

/// CSV with header l,empirical_mean,lambda,z_score,empirical_var,chi2,dof.
std::string poisson_fit_csv(std::span<const PoissonFit> rows);

/// Censuses of `samples` independent configurations; sample s uses seed
/// split_seed(seed, s). Output independent of `threads`.
std::vector<CycleCensus> sample_censuses(const Params& params, std::uint32_t l_max,
                                         std::uint64_t samples, std::uint64_t seed,
                                         unsigned threads = 1);

}  // namespace occuthresh
