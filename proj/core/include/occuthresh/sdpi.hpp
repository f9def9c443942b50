#pragma once

// KL contraction coefficients of finite channels, the occupation channel
// on {0, 1, 2} and the k = 4 certificate curves.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "occuthresh/moments.hpp"
#include "occuthresh/num_kernel.hpp"

namespace occuthresh {

/// Channel mapping the number of shared ones seen by a constraint (0, 1, 2)
/// to the number of ones a uniformly chosen variable pair carries.
struct OccupationChannel {
  std::uint32_t k = 0;
  Channel W;
  Pmf p_star;
  Pmf q_star;

  /// Throws DomainError for k < 4.
  static OccupationChannel make(std::uint32_t k);
};

/// p(w) = (1 - 2 w1 + w2, 2 (w1 - w2), w2), main coordinates.
std::array<double, 3> occupation_p(double w1, double w2);
/// Closed form of W p(w): (1 - 2a + a w1, 2a (1 - w1), a w1) with a = 2/k.
std::array<double, 3> occupation_q(double w1, std::uint32_t k);

/// KL(p || q) as sum_i q_i g((p_i - q_i) / q_i), g(u) = (1+u) ln(1+u) - u.
/// Each term is nonnegative, so the value keeps full relative accuracy when
/// p is close to q. +inf on support violation.
double kl_near(std::span<const double> p, std::span<const double> q);

/// KL(Q || Q*) / KL(P || P*) for the occupation channel. Throws DomainError
/// at w = w* (0/0) or outside the domain.
double ratio_R(const OverlapPoint& w, std::uint32_t k);

struct ContractionResult {
  double d_star = 0.0;
  Pmf argmax;
};

/// sup_{P != P*} KL(WP || WP*) / KL(P || P*) over all compositions of
/// `grid_depth` into |P*| parts, then coordinate-wise mass transfers with
/// halving step until the step drops below `refine_tol`. Grid points
/// within 1e-9 total variation of P* are skipped. Ties go to the
/// lexicographically smallest grid point, so the result does not depend on
/// `threads`.
ContractionResult contraction_generic(const Pmf& p_star, const Channel& W, std::uint32_t grid_depth,
                                      double refine_tol, unsigned threads = 1);

struct OccupationSup {
  double sup = 0.0;
  OverlapPoint argmax;
  double conjectured = 0.0;  ///< H(w1*) / (-ln w2*)
  double gap = 0.0;          ///< sup - conjectured
};

/// H(2/k) / ln C(k, 2).
double conjectured_contraction(std::uint32_t k);

/// Supremum of ratio_R over the main domain, via contraction_generic on
/// the occupation channel. Throws DomainError for k < 4.
OccupationSup contraction_occupation(std::uint32_t k, std::uint32_t grid = 200,
                                     double refine_tol = 1e-10, unsigned threads = 1);

/// Curves of the k = 4 certificate in appendix coordinates
/// (w2 = P[(Y_i, Y_j) = (1, 0)]). Arguments outside each curve's domain
/// throw DomainError.
namespace k4 {

/// ln 2 / ln 6.
double d_star();
/// KL(P || P*) at (w1, w2).
double d1(double w1, double w2);
/// KL(Q || Q*) at w1.
double d2(double w1);
/// argmin over w2 of d1: (2 - sqrt(12 (w1 - 1/2)^2 + 1)) / 3.
double w2_min(double w1);
/// d1(w1, w2_min(w1)).
double d_min(double w1);
/// d2 / d_min, with the removable value 1/3 at w1 = 1/2.
double r_max(double w1);
/// 6 (1/2 - w1)^2, a lower bound of d_min on [0, 1].
double d_plus(double w1);
/// 2 w1 ln(12 w1 / 5) + (1 - 2 w1) ln(6 - 12 w1) on [0, 5/12).
double d_minus(double w1);
/// d2 / d_plus, 1/3 at w1 = 1/2.
double r_plus(double w1);
/// d2 / d_minus.
double r_minus(double w1);

}  // namespace k4

struct CheckMargin {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
  double margin = 0.0;     ///< worst slack found; >= -tolerance means pass
  double witness = 0.0;    ///< w1 where the worst slack occurs
  double tolerance = 0.0;
  bool passed = false;
};

struct K4Certificate {
  double w_bar = 0.0;  ///< root of d_minus - d_plus
  double w_0 = 0.0;    ///< nonzero root of d2 - d_* d_minus on (0, 5/12)
  std::size_t grid_resolution = 0;
  double root_tol = 0.0;
  double max_ratio_found = 0.0;
  double max_ratio_argmax = 0.0;
  double conjectured_d_star = 0.0;
  double boundary_ratio = 0.0;  ///< r_plus(w_bar) = r_minus(w_bar)
  std::vector<CheckMargin> checks;
};

inline constexpr std::size_t kDefaultK4Grid = 100000;

/// Grid certificate of the k = 4 contraction coefficient. Throws
/// ContractViolation for grid_points < 1e4 and CertificateFailure naming
/// the first failing check and its witness.
K4Certificate verify_k4(std::size_t grid_points = kDefaultK4Grid, double root_tol = 1e-14);

/// Runs every check and records the outcome instead of throwing.
K4Certificate evaluate_k4(std::size_t grid_points = kDefaultK4Grid, double root_tol = 1e-14);

/// Pretty-printed JSON object with every certificate field.
std::string certificate_json(const K4Certificate& cert);

/// Channel plus reference input read from a JSON document
/// {"n_in", "n_out", "matrix" (column-major), "reference_pmf"}.
struct ChannelInput {
  Channel W;
  Pmf reference;
};

/// Throws ParseError with the offending field or byte offset.
ChannelInput parse_channel_input(const std::string& text);

}  // namespace occuthresh
