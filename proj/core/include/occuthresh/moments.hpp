#pragma once

// Threshold, annealed free entropies and the exact/asymptotic moments of
// the number Z of solutions of the 2-in-k occupation problem.
//
// Every exact quantity is a natural logarithm; factorials of d*n overflow
// doubles long before the instance sizes of interest.

#include <cstdint>

#include "occuthresh/instances.hpp"
#include "occuthresh/num_kernel.hpp"

namespace occuthresh {

struct ThresholdReport {
  std::uint32_t k = 0;
  double w1_star = 0.0;  ///< 2/k
  double w2_star = 0.0;  ///< 1/C(k,2)
  double d_star = 0.0;
  double lemma_residual = 0.0;  ///< f(d*) - 1 for the closed-form f(d)
  bool lemma_ok = false;        ///< |f(d*) - 1| <= 1e-10
  bool is_integer = false;      ///< d* within 1e-9 of an integer
  bool bounds_ok = false;       ///< 1 < d* < k
};

/// d* = k H(w1*) / (k H(w1*) + ln w2*). Throws DomainError for k < 4.
ThresholdReport threshold_dstar(std::uint32_t k);

/// (d/k)(-ln w2*) - (d-1) H(w1*). Throws DomainError unless k >= 4, d > 1.
double phi1(std::uint32_t k, double d);

/// ln(sqrt(d) e^{n phi1}), the leading-order asymptotics of E[Z].
double first_moment_asymptotic(std::uint32_t k, double d, std::uint32_t n);

/// Result of an exact moment: the log value, or a flag saying the quantity
/// is zero because n1 = 2n/k is not an integer.
struct ExactMoment {
  LogReal value;
  bool surely_zero = false;
};

/// ln E[Z] = ln[C(n,n1) C(k,2)^m (2m)! (dn-2m)! / (dn)!].
/// Throws DomainError unless r == 2.
ExactMoment first_moment_exact(const Params& params);

enum class Parametrization { main, appendix };

/// Overlap of two solutions in one of two coordinate systems.
///   main:     w2 = fraction of constraints with two shared ones;
///             domain max(0, 2 w1 - 1) <= w2 <= w1.
///   appendix: w2 = P[(Y_i, Y_j) = (1, 0)]; domain 0 <= w2 <= min(w1, 1 - w1).
/// The two are related by w2_main = w1 - w2_appendix.
struct OverlapPoint {
  double w1 = 0.0;
  double w2 = 0.0;
  Parametrization param = Parametrization::main;

  bool in_domain(double tol = 0.0) const;
  OverlapPoint to_main() const;
  OverlapPoint to_appendix() const;
};

/// w* in the requested parametrization.
OverlapPoint overlap_star(std::uint32_t k, Parametrization param = Parametrization::main);

/// (d/k) KL(P || P*) - (d-1) KL(Q || Q*). Throws DomainError outside the
/// point's domain or for k < 4.
double phi2(const OverlapPoint& w, std::uint32_t k, double d);

/// Hessian of phi2 at w* in the main coordinates.
struct Hessian2 {
  double h11 = 0.0;
  double h12 = 0.0;
  double h22 = 0.0;

  double det() const { return h11 * h22 - h12 * h12; }
  double trace() const { return h11 + h22; }
  bool positive_definite() const { return trace() > 0.0 && det() > 0.0; }
};

/// Closed-form entries. Throws DomainError for k < 4 (the formulas divide
/// by k - 3 and k - 2).
Hessian2 hessian_phi2(std::uint32_t k, double d);
/// d k (k-1)^2 (k-d) / (2 (k-2)^2 (k-3)).
double hessian_det_closed_form(std::uint32_t k, double d);

/// ln of the summand of E[Z^2]/E[Z]^2 at overlap (r1, r2): the
/// hypergeometric and multinomial terms p_v(r1) p_f(t) / p_e(d r1).
/// -inf outside the summation region.
double second_moment_summand(const Params& params, std::uint32_t r1, std::uint32_t r2);

/// ln E[Z^2]/E[Z]^2, summed exactly over r1 <= n1 and
/// max(0, d r1 - m) <= r2 <= floor(d r1 / 2). Rows r1 may be evaluated on
/// several threads; they are combined in increasing r1 order.
ExactMoment second_moment_exact_ratio(const Params& params, unsigned threads = 1);

struct SecondMomentAsymptotic {
  double ratio = 0.0;         ///< sqrt((k-1)/(k-d))
  double laplace_form = 0.0;  ///< f(w*) sqrt((2 pi)^2 / det((k / sqrt(2d)) H))
};

/// Limit of E[Z^2]/E[Z]^2. Both forms are computed independently and must
/// agree within 1e-10 (std::logic_error otherwise). +inf at d == k;
/// DomainError for d > k, d <= 1 or k < 4.
SecondMomentAsymptotic second_moment_asymptotic(std::uint32_t k, double d);

/// ln E[Z X_l], X_l the number of 2l-cycles. Throws DomainError unless
/// r == 2, l >= 1, d n1 >= 2l and d (n - n1) >= 2l.
ExactMoment joint_moment_exact(const Params& params, std::uint32_t l);

/// ln(E[Z X_l] / E[Z]).
ExactMoment joint_moment_ratio(const Params& params, std::uint32_t l);

struct VarianceExplained {
  double partial_sum = 0.0;  ///< sum_{l <= l_max} lambda_l delta_l^2
  double closed_form = 0.0;  ///< ln sqrt((k-1)/(k-d))
  double residual = 0.0;     ///< closed_form - partial_sum
};

/// Throws DomainError when the series diverges (d >= k) or d <= 1.
VarianceExplained variance_explained(std::uint32_t k, double d, std::uint32_t l_max);

}  // namespace occuthresh
