#pragma once

// Shared numeric primitives: log-scale arithmetic, combinatorics,
// divergences and deterministic 1-d optimizers.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace occuthresh {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPmfTolerance = 1e-12;

/// Natural log of a nonnegative quantity; -inf encodes zero.
class LogReal {
 public:
  constexpr LogReal() = default;
  constexpr explicit LogReal(double log_value) : value_(log_value) {}

  static constexpr LogReal zero() { return LogReal(-kInf); }
  static constexpr LogReal one() { return LogReal(0.0); }
  static LogReal from_linear(double x);

  constexpr double log() const { return value_; }
  double linear() const { return std::exp(value_); }
  constexpr bool is_zero() const { return value_ == -kInf; }

  LogReal operator*(LogReal rhs) const;
  LogReal operator/(LogReal rhs) const;
  /// Linear-scale sum, evaluated with log-sum-exp.
  LogReal operator+(LogReal rhs) const;
  LogReal& operator*=(LogReal rhs) { return *this = *this * rhs; }
  LogReal& operator+=(LogReal rhs) { return *this = *this + rhs; }

  friend constexpr bool operator==(LogReal a, LogReal b) { return a.value_ == b.value_; }

 private:
  double value_ = -kInf;
};

/// Accumulates a long sequence of log-scale terms without overflow.
/// Terms are combined in insertion order, so the result is reproducible.
class LogSumAccumulator {
 public:
  void add(double log_term);
  void add(LogReal term) { add(term.log()); }
  LogReal total() const;
  std::size_t terms() const { return terms_; }

 private:
  double max_ = -kInf;
  double scaled_sum_ = 0.0;
  std::size_t terms_ = 0;
};

/// Probability mass function. Weights are nonnegative and sum to one.
class Pmf {
 public:
  Pmf() = default;
  /// Validates the weights. Negative entries no smaller than -1e-12 are
  /// rounded to zero; anything else violating the invariant throws.
  explicit Pmf(std::vector<double> weights);

  /// Rescales nonnegative weights to unit mass.
  static Pmf normalized(std::vector<double> weights);

  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const { return weights_; }

 private:
  std::vector<double> weights_;
};

/// Column-stochastic transition matrix; entry (y, x) = P[output y | input x].
class Channel {
 public:
  Channel(std::size_t n_out, std::size_t n_in, std::vector<double> row_major);

  static Channel identity(std::size_t n);

  std::size_t n_out() const { return n_out_; }
  std::size_t n_in() const { return n_in_; }
  double at(std::size_t y, std::size_t x) const { return entries_[y * n_in_ + x]; }

  /// q = W p on raw weights; no normalization check.
  std::vector<double> apply(std::span<const double> p) const;
  Pmf apply(const Pmf& p) const;

 private:
  std::size_t n_out_;
  std::size_t n_in_;
  std::vector<double> entries_;
};

/// ln(n!). Exact integer arithmetic up to 20!, lgamma beyond.
double log_factorial(std::uint64_t n);

/// ln of the multinomial coefficient n! / prod(k_i!). Throws
/// ContractViolation when the parts do not sum to n.
double log_multinomial(std::uint64_t n, std::span<const std::uint64_t> parts);

/// ln C(n, k); -inf when k > n.
double log_binomial(std::uint64_t n, std::uint64_t k);

/// ln of the falling factorial (n)_k = n (n-1) ... (n-k+1); -inf when k > n.
double log_falling(std::uint64_t n, std::uint64_t k);

/// Cached ln(i!) for i in [0, size). Lookups beyond the table fall back
/// to log_factorial.
class LogFactorialTable {
 public:
  explicit LogFactorialTable(std::size_t size);
  double operator()(std::int64_t n) const;
  /// -inf for k < 0 or k > n.
  double binomial(std::int64_t n, std::int64_t k) const;

 private:
  std::vector<double> table_;
};

/// H(p) = -p ln p - (1-p) ln(1-p) with 0 ln 0 = 0. Throws DomainError
/// outside [0, 1].
double binary_entropy(double p);

/// x ln(x / y) with the conventions 0 ln(0/y) = 0 and x ln(x/0) = +inf.
double kl_term(double x, double y);

/// KL(p || p_star) in nats; +inf on support violation, never throws for
/// equal-length input.
double kl_divergence(std::span<const double> p, std::span<const double> p_star);
double kl_divergence(const Pmf& p, const Pmf& p_star);

struct Maximum1d {
  double argmax;
  double max;
};

inline constexpr std::size_t kMinGridPoints = 10000;

/// Scans `grid_points + 1` equispaced points of [lo, hi], keeps the
/// leftmost best, then golden-section refines the bracketing cell until
/// its width is below `tol`. The refined point replaces the grid winner
/// only when strictly better.
Maximum1d maximize_1d(const std::function<double(double)>& f, double lo, double hi, double tol,
                      std::size_t grid_points = kMinGridPoints);

/// Bisection until the bracket is no wider than `tol`; returns its midpoint.
double find_root(const std::function<double(double)>& f, double lo, double hi, double tol);

}  // namespace occuthresh
