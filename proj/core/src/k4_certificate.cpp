// Curves of the k = 4 contraction argument and the grid certificate.
//
// With x = w1 - 1/2 and s = sqrt(12 x^2 + 1) the minimising cell pmf is
//   6 p11 = 12 w1^2 / (2s + 1 - 6x),   6 p00 = 12 (1 - w1)^2 / (2s + 1 + 6x),
// which stays accurate near both endpoints. Around w1 = 1/2 the curves
// d2 and d_min vanish quadratically, so there they are evaluated through
// log1p/atanh forms that avoid cancelling two O(1) logarithms.

#include <cmath>
#include <numbers>

#include "json.hpp"
#include "occuthresh/errors.hpp"
#include "occuthresh/sdpi.hpp"

namespace occuthresh {

namespace k4 {

namespace {

constexpr double kDomainTol = 1e-12;
constexpr double kCentralBand = 0.25;

void require_unit(double w1, const char* what) {
  if (!(w1 >= -kDomainTol && w1 <= 1.0 + kDomainTol))
    throw DomainError(std::string(what) + ": w1 outside [0, 1]");
}

// p ln(c p) with 0 ln 0 = 0.
double xlog(double p, double c) { return p <= 0.0 ? 0.0 : p * std::log(c * p); }

double clamp01(double w) { return std::min(1.0, std::max(0.0, w)); }

}  // namespace

double d_star() { return std::numbers::ln2 / std::log(6.0); }

double d1(double w1, double w2) {
  const OverlapPoint w{w1, w2, Parametrization::appendix};
  if (!w.in_domain(kDomainTol)) throw DomainError("d1: point outside the appendix domain");
  return xlog(w1 - w2, 6.0) + 2.0 * xlog(w2, 3.0) + xlog(1.0 - w1 - w2, 6.0);
}

double d2(double w1) {
  require_unit(w1, "d2");
  w1 = clamp01(w1);
  const double u = 2.0 * w1 - 1.0;
  if (std::abs(u) < 2.0 * kCentralBand) return 0.5 * std::log1p(-u * u) + u * std::atanh(u);
  return xlog(w1, 2.0) + xlog(1.0 - w1, 2.0);
}

double w2_min(double w1) {
  require_unit(w1, "w2_min");
  w1 = clamp01(w1);
  const double x = w1 - 0.5;
  const double s = std::sqrt(12.0 * x * x + 1.0);
  // (2 - s) / 3 with the cancellation removed.
  return 4.0 * w1 * (1.0 - w1) / (2.0 + s);
}

double d_min(double w1) {
  require_unit(w1, "d_min");
  w1 = clamp01(w1);
  const double x = w1 - 0.5;
  const double s = std::sqrt(12.0 * x * x + 1.0);
  if (std::abs(x) < kCentralBand) {
    return 0.5 * std::log1p(12.0 * x * x * (s - 3.0) / (s + 1.0)) +
           2.0 * x * std::atanh(6.0 * x / (2.0 * s - 1.0));
  }
  const double six_p11 = 12.0 * w1 * w1 / (2.0 * s + 1.0 - 6.0 * x);
  const double six_p00 = 12.0 * (1.0 - w1) * (1.0 - w1) / (2.0 * s + 1.0 + 6.0 * x);
  const double a = w1 > 0.0 ? w1 * std::log(six_p11) : 0.0;
  const double b = w1 < 1.0 ? (1.0 - w1) * std::log(six_p00) : 0.0;
  return a + b;
}

double r_max(double w1) {
  if (w1 == 0.5) return 1.0 / 3.0;
  return d2(w1) / d_min(w1);
}

double d_plus(double w1) {
  require_unit(w1, "d_plus");
  return 6.0 * (0.5 - w1) * (0.5 - w1);
}

double d_minus(double w1) {
  if (!(w1 >= -kDomainTol && w1 < 5.0 / 12.0)) throw DomainError("d_minus: w1 outside [0, 5/12)");
  w1 = std::max(0.0, w1);
  return xlog(2.0 * w1, 6.0 / 5.0) + (1.0 - 2.0 * w1) * std::log(6.0 - 12.0 * w1);
}

double r_plus(double w1) {
  if (w1 == 0.5) return 1.0 / 3.0;
  return d2(w1) / d_plus(w1);
}

double r_minus(double w1) { return d2(w1) / d_minus(w1); }

}  // namespace k4

namespace {

constexpr double kCheckTol = 1e-12;
constexpr double kRatioSlack = 1e-6;

double grid_point(std::size_t i, std::size_t n, double lo, double hi) {
  return i == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
}

// First sign change of f on the grid of [lo, hi), refined by bisection.
double first_crossing(const std::function<double(double)>& f, double lo, double hi, std::size_t n,
                      double tol) {
  double prev_x = lo;
  double prev = f(lo);
  for (std::size_t i = 1; i < n; ++i) {
    const double x = grid_point(i, n, lo, hi);
    const double v = f(x);
    if ((prev > 0.0 && v <= 0.0) || (prev < 0.0 && v >= 0.0)) return find_root(f, prev_x, x, tol);
    prev_x = x;
    prev = v;
  }
  throw CertificateFailure("crossing", hi, "no sign change found on the grid");
}

CheckMargin lower_bound_check(std::string name, const std::function<double(double)>& upper,
                              const std::function<double(double)>& lower, double lo, double hi,
                              std::size_t n) {
  CheckMargin c{std::move(name), lo, hi, kInf, lo, kCheckTol, false};
  // Grid points of [0, 1] inside [lo, hi], plus the interval ends.
  auto visit = [&](double x) {
    const double slack = upper(x) - lower(x);
    if (slack < c.margin) {
      c.margin = slack;
      c.witness = x;
    }
  };
  visit(lo);
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = grid_point(i, n, 0.0, 1.0);
    if (x > lo && x < hi) visit(x);
  }
  visit(hi);
  c.passed = c.margin >= -c.tolerance;
  return c;
}

}  // namespace

K4Certificate evaluate_k4(std::size_t grid_points, double root_tol) {
  if (grid_points < 10000) throw ContractViolation("verify_k4 requires grid_points >= 1e4");
  if (!(root_tol > 0.0)) throw ContractViolation("verify_k4 requires root_tol > 0");
  using namespace k4;
  const std::size_t n = grid_points;
  const double ds = d_star();
  const double w_upper = 5.0 / 12.0;

  K4Certificate cert;
  cert.grid_resolution = n;
  cert.root_tol = root_tol;
  cert.conjectured_d_star = ds;
  cert.w_bar = first_crossing([](double w) { return d_minus(w) - d_plus(w); }, 0.0, w_upper, n,
                              root_tol);
  cert.boundary_ratio = r_plus(cert.w_bar);

  // (i) d_min >= d_plus on [0, 1].
  cert.checks.push_back(lower_bound_check("d_min >= d_plus on [0, 1]", d_min, d_plus, 0.0, 1.0, n));

  // (ii) d_min >= d_minus on [0, w_bar].
  cert.checks.push_back(
      lower_bound_check("d_min >= d_minus on [0, w_bar]", d_min, d_minus, 0.0, cert.w_bar, n));

  // (iii) r_plus nonincreasing on [w_bar, 1/2]: margin is the smallest
  // drop between consecutive evaluation points.
  {
    CheckMargin c{"r_plus decreasing on [w_bar, 0.5]", cert.w_bar, 0.5, kInf, cert.w_bar,
                  kCheckTol, false};
    double prev_x = cert.w_bar;
    double prev = r_plus(prev_x);
    auto step = [&](double x) {
      const double v = r_plus(x);
      if (prev - v < c.margin) {
        c.margin = prev - v;
        c.witness = x;
      }
      prev_x = x;
      prev = v;
    };
    for (std::size_t i = 0; i <= n; ++i) {
      const double x = grid_point(i, n, 0.0, 1.0);
      if (x > cert.w_bar && x < 0.5) step(x);
    }
    step(0.5);
    c.passed = c.margin >= -c.tolerance;
    cert.checks.push_back(c);
  }

  // (iv) f = d2 - d_star d_minus vanishes at 0, is negative right after it
  // and changes sign exactly once more before 5/12.
  {
    auto f = [&](double w) { return d2(w) - ds * d_minus(w); };
    CheckMargin c{"d2 - d_star*d_minus has roots {0, w_0} on [0, 5/12)", 0.0, w_upper, kInf, 0.0,
                  kCheckTol, false};
    const double f0 = f(0.0);
    int changes = 0;
    double prev_x = grid_point(1, n, 0.0, w_upper);
    double prev = f(prev_x);
    const bool negative_start = prev < 0.0;
    double cell_lo = 0.0, cell_hi = 0.0;
    double smallest = kInf;
    double smallest_at = prev_x;
    for (std::size_t i = 2; i < n; ++i) {
      const double x = grid_point(i, n, 0.0, w_upper);
      const double v = f(x);
      if ((prev < 0.0) != (v < 0.0) || v == 0.0) {
        ++changes;
        cell_lo = prev_x;
        cell_hi = x;
      } else if (std::abs(v) < smallest) {
        smallest = std::abs(v);
        smallest_at = x;
      }
      prev_x = x;
      prev = v;
    }
    if (changes >= 1) cert.w_0 = find_root(f, cell_lo, cell_hi, root_tol);
    // Margin: smallest |f| at grid points that are not next to a root.
    c.margin = smallest;
    c.witness = smallest_at;
    c.passed = std::abs(f0) <= kCheckTol && negative_start && changes == 1;
    if (!c.passed) {
      c.margin = -1.0;
      c.witness = changes == 1 ? 0.0 : cert.w_0;
    }
    cert.checks.push_back(c);
  }

  // (v) grid maximum of r_max over [0, 1].
  {
    CheckMargin c{"max r_max <= d_star + 1e-6 on [0, 1]", 0.0, 1.0, 0.0, 0.0, kCheckTol, false};
    double best = -kInf;
    double best_x = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      const double x = grid_point(i, n, 0.0, 1.0);
      const double v = r_max(x);
      if (v > best) {
        best = v;
        best_x = x;
      }
    }
    cert.max_ratio_found = best;
    cert.max_ratio_argmax = best_x;
    c.margin = ds + kRatioSlack - best;
    c.witness = best_x;
    c.passed = c.margin >= 0.0;
    cert.checks.push_back(c);
  }
  return cert;
}

K4Certificate verify_k4(std::size_t grid_points, double root_tol) {
  K4Certificate cert = evaluate_k4(grid_points, root_tol);
  for (const auto& c : cert.checks) {
    if (!c.passed) {
      throw CertificateFailure(c.name, c.witness,
                               "margin " + std::to_string(c.margin) + " below tolerance " +
                                   std::to_string(-c.tolerance));
    }
  }
  return cert;
}

std::string certificate_json(const K4Certificate& cert) {
  nlohmann::ordered_json j;
  j["w_bar"] = cert.w_bar;
  j["w_0"] = cert.w_0;
  j["grid_resolution"] = cert.grid_resolution;
  j["root_tol"] = cert.root_tol;
  j["max_ratio_found"] = cert.max_ratio_found;
  j["max_ratio_argmax"] = cert.max_ratio_argmax;
  j["conjectured_d_star"] = cert.conjectured_d_star;
  j["boundary_ratio"] = cert.boundary_ratio;
  auto checks = nlohmann::ordered_json::array();
  for (const auto& c : cert.checks) {
    nlohmann::ordered_json e;
    e["name"] = c.name;
    e["interval"] = {c.lo, c.hi};
    e["margin"] = c.margin;
    e["witness"] = c.witness;
    e["tolerance"] = c.tolerance;
    e["passed"] = c.passed;
    checks.push_back(std::move(e));
  }
  j["checks"] = std::move(checks);
  return j.dump(2);
}

}  // namespace occuthresh
