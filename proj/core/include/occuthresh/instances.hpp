#pragma once

// Configuration-model instances: a configuration is a bijection between
// the d*n variable half-edges (v-edges) and the k*m constraint half-edges
// (f-edges). Half-edges are flattened row-major and zero-based:
//   v-edge (i, h)  -> i * d + h
//   f-edge (a, h') -> a * k + h'

#include <cstdint>
#include <string>
#include <vector>

#include "occuthresh/num_kernel.hpp"

namespace occuthresh {

struct Params {
  std::uint32_t n = 0;  ///< variables
  std::uint32_t d = 0;  ///< variable degree
  std::uint32_t k = 0;  ///< constraint arity
  std::uint32_t r = 0;  ///< ones required per constraint
  std::uint32_t m = 0;  ///< constraints

  /// Derives m = d*n/k. Throws EmptyFamilyError when k does not divide d*n,
  /// DomainError when k, d or r are out of range.
  static Params make(std::uint32_t n, std::uint32_t d, std::uint32_t k, std::uint32_t r);

  std::uint64_t edges() const { return std::uint64_t{d} * n; }

  /// d*n == k*m with positive sizes. Enough to build a configuration.
  void validate_shape() const;
  /// Shape plus k >= 2, d >= 2, 1 <= r <= k-1.
  void validate() const;

  friend bool operator==(const Params&, const Params&) = default;
};

class Configuration {
 public:
  /// Throws ContractViolation unless `wiring` is a permutation of [0, d*n).
  Configuration(Params params, std::vector<std::uint32_t> wiring);

  /// Identity wiring: v-edge e is wired to f-edge e.
  static Configuration identity(Params params);

  const Params& params() const { return params_; }
  /// f-edge index wired to each v-edge.
  const std::vector<std::uint32_t>& wiring() const { return wiring_; }
  /// v-edge index wired to each f-edge.
  const std::vector<std::uint32_t>& inverse() const { return inverse_; }

  std::uint32_t variable_of_vedge(std::uint32_t v_edge) const { return v_edge / params_.d; }
  std::uint32_t constraint_of_fedge(std::uint32_t f_edge) const { return f_edge / params_.k; }
  /// Variable at the other end of f-edge `f_edge`.
  std::uint32_t variable_at(std::uint32_t f_edge) const {
    return variable_of_vedge(inverse_[f_edge]);
  }
  /// Constraint at the other end of v-edge `v_edge`.
  std::uint32_t constraint_at(std::uint32_t v_edge) const {
    return constraint_of_fedge(wiring_[v_edge]);
  }

  friend bool operator==(const Configuration& a, const Configuration& b) {
    return a.params_ == b.params_ && a.wiring_ == b.wiring_;
  }

 private:
  Params params_;
  std::vector<std::uint32_t> wiring_;
  std::vector<std::uint32_t> inverse_;
};

/// For each constraint a, the k variables on its f-edges in half-edge order
/// (so repeated variables appear repeatedly).
struct FactorGraph {
  Params params;
  std::vector<std::vector<std::uint32_t>> neighbors;
};

/// Uniform configuration by Fisher-Yates over the d*n slots.
Configuration sample_configuration(const Params& params, std::uint64_t seed);

FactorGraph to_factor_graph(const Configuration& cfg);

/// Unordered pairs of v-edges of one variable wired to f-edges of one
/// constraint.
std::uint64_t count_two_cycles(const Configuration& cfg);

/// Rejection sampler on configurations without two-cycles. Attempts draw
/// consecutively from one generator seeded by `seed`.
Configuration sample_simple(const Params& params, std::uint64_t seed, std::uint64_t max_attempts);

/// Unordered constraint pairs whose neighbor multisets coincide and consist
/// of k distinct variables.
std::uint64_t count_redundant_constraints(const FactorGraph& fg);

/// ln E[number of redundant constraint pairs] over uniform configurations:
/// C(m,2) (n)_k k! (d(d-1))^k (dn-2k)! / (dn)!.
LogReal expected_redundant_exact(const Params& params);

/// Canonical text form (JSON object with keys n, d, k, r, m, wiring in that
/// order).
std::string serialize(const Configuration& cfg);
/// Inverse of serialize. Throws ParseError naming the offending position.
Configuration deserialize(const std::string& text);

}  // namespace occuthresh
