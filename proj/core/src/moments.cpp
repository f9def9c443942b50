#include "occuthresh/moments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "occuthresh/errors.hpp"
#include "occuthresh/occupancy.hpp"
#include "occuthresh/parallel.hpp"

namespace occuthresh {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_k4(std::uint32_t k, const char* what) {
  if (k < 4) throw DomainError(std::string(what) + " requires k >= 4 (got k=" + std::to_string(k) + ")");
}

double w1_star(std::uint32_t k) { return 2.0 / k; }
double w2_star(std::uint32_t k) { return 2.0 / (static_cast<double>(k) * (k - 1)); }

// Exponent times log of base, treating 0^0 as 1.
double log_power(double base, double exponent) {
  if (exponent == 0.0) return 0.0;
  if (base == 0.0) return -kInf;
  return exponent * std::log(base);
}

// n1 for r = 2 moment formulas; nullopt when Z = 0 surely.
std::optional<std::uint32_t> moment_quota(const Params& params, const char* what) {
  params.validate();
  if (params.r != 2) throw DomainError(std::string(what) + " is specified for r = 2 only");
  return ones_quota(params);
}

std::array<double, 3> main_p(double w1, double w2) {
  return {1.0 - 2.0 * w1 + w2, 2.0 * (w1 - w2), w2};
}

std::array<double, 3> main_q(double w1, double a) {
  return {1.0 - 2.0 * a + a * w1, 2.0 * a * (1.0 - w1), a * w1};
}

void clamp_rounding(std::span<double> p) {
  for (auto& x : p)
    if (x < 0.0) x = 0.0;
}

}  // namespace

ThresholdReport threshold_dstar(std::uint32_t k) {
  require_k4(k, "threshold_dstar");
  ThresholdReport rep;
  rep.k = k;
  rep.w1_star = w1_star(k);
  rep.w2_star = w2_star(k);
  const double kh = k * binary_entropy(rep.w1_star);
  rep.d_star = kh / (kh + std::log(rep.w2_star));

  const double kd = static_cast<double>(k);
  const double log_base = (kd - 1.0) * std::log(kd) - std::log(2.0) -
                          (kd - 2.0) * std::log(kd - 2.0) - std::log(kd - 1.0);
  const double log_f = std::log(rep.w2_star) + (rep.d_star - 1.0) * log_base;
  rep.lemma_residual = std::expm1(log_f);
  rep.lemma_ok = std::abs(rep.lemma_residual) <= 1e-10;
  rep.bounds_ok = rep.d_star > 1.0 && rep.d_star < kd;
  rep.is_integer = std::abs(rep.d_star - std::round(rep.d_star)) <= 1e-9;
  return rep;
}

double phi1(std::uint32_t k, double d) {
  require_k4(k, "phi1");
  if (!(d > 1.0)) throw DomainError("phi1 requires d > 1");
  return (d / k) * -std::log(w2_star(k)) - (d - 1.0) * binary_entropy(w1_star(k));
}

double first_moment_asymptotic(std::uint32_t k, double d, std::uint32_t n) {
  return 0.5 * std::log(d) + n * phi1(k, d);
}

ExactMoment first_moment_exact(const Params& params) {
  const auto n1 = moment_quota(params, "first_moment_exact");
  if (!n1) return {LogReal::zero(), true};
  const std::uint64_t dn = params.edges();
  const std::uint64_t m = params.m;
  if (dn < 2 * m) throw DomainError("first_moment_exact requires d*n >= 2m");
  const double v = log_binomial(params.n, *n1) + m * std::log(params.k * (params.k - 1) / 2.0) +
                   log_factorial(2 * m) + log_factorial(dn - 2 * m) - log_factorial(dn);
  return {LogReal(v), false};
}

bool OverlapPoint::in_domain(double tol) const {
  if (!(w1 >= -tol && w1 <= 1.0 + tol && w2 >= -tol)) return false;
  if (param == Parametrization::main) return w2 >= 2.0 * w1 - 1.0 - tol && w2 <= w1 + tol;
  return w2 <= w1 + tol && w2 <= 1.0 - w1 + tol;
}

OverlapPoint OverlapPoint::to_main() const {
  if (param == Parametrization::main) return *this;
  return {w1, w1 - w2, Parametrization::main};
}

OverlapPoint OverlapPoint::to_appendix() const {
  if (param == Parametrization::appendix) return *this;
  return {w1, w1 - w2, Parametrization::appendix};
}

OverlapPoint overlap_star(std::uint32_t k, Parametrization param) {
  const OverlapPoint star{w1_star(k), w2_star(k), Parametrization::main};
  return param == Parametrization::main ? star : star.to_appendix();
}

double phi2(const OverlapPoint& w, std::uint32_t k, double d) {
  require_k4(k, "phi2");
  if (!w.in_domain(1e-12)) throw DomainError("phi2: overlap point outside its domain");
  const double a = w1_star(k);
  double kl_p = 0.0;
  double kl_q = 0.0;
  if (w.param == Parametrization::main) {
    auto p = main_p(w.w1, w.w2);
    auto q = main_q(w.w1, a);
    clamp_rounding(p);
    clamp_rounding(q);
    kl_p = kl_divergence(p, main_p(a, w2_star(k)));
    kl_q = kl_divergence(q, main_q(a, a));
  } else {
    // Ordered cell pmfs (00, 01, 10, 11).
    const double ws = a - w2_star(k);
    std::array<double, 4> p{1.0 - w.w1 - w.w2, w.w2, w.w2, w.w1 - w.w2};
    const std::array<double, 4> ps{1.0 - a - ws, ws, ws, a - ws};
    std::array<double, 4> q{1.0 - a * (2.0 - w.w1), a * (1.0 - w.w1), a * (1.0 - w.w1), a * w.w1};
    const std::array<double, 4> qs{1.0 - a * (2.0 - a), a * (1.0 - a), a * (1.0 - a), a * a};
    clamp_rounding(p);
    clamp_rounding(q);
    kl_p = kl_divergence(p, ps);
    kl_q = kl_divergence(q, qs);
  }
  return (d / k) * kl_p - (d - 1.0) * kl_q;
}

Hessian2 hessian_phi2(std::uint32_t k, double d) {
  if (k == 3) throw DomainError("hessian_phi2: singular parameter k = 3 (division by k - 3)");
  require_k4(k, "hessian_phi2");
  const double kd = static_cast<double>(k);
  const double km1 = kd - 1.0, km2 = kd - 2.0, km3 = kd - 3.0;
  Hessian2 h;
  h.h11 = (d * (kd * kd - kd + 2.0) + kd * kd * km3) / (km2 * km2 * km3);
  h.h12 = -d * km1 * km1 / (km2 * km3);
  h.h22 = d * km1 * km1 / (2.0 * km3);
  return h;
}

double hessian_det_closed_form(std::uint32_t k, double d) {
  if (k == 3) throw DomainError("hessian_det_closed_form: singular parameter k = 3");
  require_k4(k, "hessian_det_closed_form");
  const double kd = static_cast<double>(k);
  return d * kd * (kd - 1.0) * (kd - 1.0) * (kd - d) / (2.0 * (kd - 2.0) * (kd - 2.0) * (kd - 3.0));
}

namespace {

// Everything a summand needs, computed once per parameter set.
struct SecondMomentTerms {
  std::int64_t n, n1, dn, dn1, m, d;
  std::array<double, 3> log_p_star;
  LogFactorialTable lf;
  double log_norm_v, log_norm_e;

  SecondMomentTerms(const Params& params, std::uint32_t quota)
      : n(params.n),
        n1(quota),
        dn(static_cast<std::int64_t>(params.edges())),
        dn1(static_cast<std::int64_t>(params.d) * quota),
        m(params.m),
        d(params.d),
        lf(static_cast<std::size_t>(dn) + 1) {
    const auto ps = main_p(w1_star(params.k), w2_star(params.k));
    for (int i = 0; i < 3; ++i) log_p_star[i] = std::log(ps[i]);
    log_norm_v = lf.binomial(n, n1);
    log_norm_e = lf.binomial(dn, dn1);
  }

  double summand(std::int64_t r1, std::int64_t r2) const {
    const std::int64_t dr1 = d * r1;
    const std::int64_t t0 = m - dr1 + r2, t1 = dr1 - 2 * r2, t2 = r2;
    if (r1 < 0 || r1 > n1 || t0 < 0 || t1 < 0 || t2 < 0) return -kInf;
    const double pv = lf.binomial(n1, r1) + lf.binomial(n - n1, n1 - r1) - log_norm_v;
    const double pe = lf.binomial(dn1, dr1) + lf.binomial(dn - dn1, dn1 - dr1) - log_norm_e;
    if (pv == -kInf || pe == -kInf) return -kInf;
    const double pf = lf(m) - lf(t0) - lf(t1) - lf(t2) + t0 * log_p_star[0] +
                      t1 * log_p_star[1] + t2 * log_p_star[2];
    return pv + pf - pe;
  }
};

}  // namespace

double second_moment_summand(const Params& params, std::uint32_t r1, std::uint32_t r2) {
  const auto n1 = moment_quota(params, "second_moment_summand");
  if (!n1) return -kInf;
  return SecondMomentTerms(params, *n1).summand(r1, r2);
}

ExactMoment second_moment_exact_ratio(const Params& params, unsigned threads) {
  const auto n1 = moment_quota(params, "second_moment_exact_ratio");
  if (!n1) return {LogReal::zero(), true};
  const SecondMomentTerms terms(params, *n1);

  std::vector<double> rows(*n1 + 1, -kInf);
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    const auto r1 = static_cast<std::int64_t>(i);
    const std::int64_t dr1 = terms.d * r1;
    LogSumAccumulator row;
    for (std::int64_t r2 = std::max<std::int64_t>(0, dr1 - terms.m); r2 <= dr1 / 2; ++r2)
      row.add(terms.summand(r1, r2));
    rows[i] = row.total().log();
  });

  LogSumAccumulator total;
  for (double r : rows) total.add(r);
  return {total.total(), false};
}

SecondMomentAsymptotic second_moment_asymptotic(std::uint32_t k, double d) {
  require_k4(k, "second_moment_asymptotic");
  const double kd = static_cast<double>(k);
  if (!(d > 1.0)) throw DomainError("second_moment_asymptotic requires d > 1");
  if (d > kd) throw DomainError("second_moment_asymptotic requires d <= k");
  if (d == kd) return {kInf, kInf};

  SecondMomentAsymptotic out;
  out.ratio = std::sqrt((kd - 1.0) / (kd - d));

  const auto ps = main_p(w1_star(k), w2_star(k));
  const double f_star = std::sqrt(2.0 / (kTwoPi * kTwoPi * ps[0] * ps[1] * ps[2]));
  const double scaled_det = (kd * kd / (2.0 * d)) * hessian_phi2(k, d).det();
  out.laplace_form = f_star * std::sqrt(kTwoPi * kTwoPi / scaled_det);

  if (std::abs(out.ratio - out.laplace_form) > 1e-10 * std::max(1.0, out.ratio))
    throw std::logic_error("second_moment_asymptotic: closed form and Laplace form disagree");
  return out;
}

namespace {

// counts[r1][r2] = number of y in {0,1}^l with r1 ones and r2 indices i
// where y_i = y_{i+1} = 1, indices taken cyclically.
std::vector<std::vector<std::uint64_t>> cyclic_pattern_counts(std::uint32_t l) {
  std::vector<std::vector<std::uint64_t>> counts(l + 1, std::vector<std::uint64_t>(l + 1, 0));
  for (int first = 0; first <= 1; ++first) {
    // state[last][ones][adj]
    std::vector<std::vector<std::vector<std::uint64_t>>> state(
        2, std::vector<std::vector<std::uint64_t>>(l + 1, std::vector<std::uint64_t>(l + 1, 0)));
    state[first][first][0] = 1;
    for (std::uint32_t pos = 1; pos < l; ++pos) {
      auto next = state;
      for (auto& a : next)
        for (auto& b : a) std::fill(b.begin(), b.end(), 0);
      for (int last = 0; last <= 1; ++last)
        for (std::uint32_t ones = 0; ones <= pos; ++ones)
          for (std::uint32_t adj = 0; adj < pos; ++adj) {
            const std::uint64_t c = state[last][ones][adj];
            if (c == 0) continue;
            next[0][ones][adj] += c;
            next[1][ones + 1][adj + (last == 1)] += c;
          }
      state = std::move(next);
    }
    for (int last = 0; last <= 1; ++last)
      for (std::uint32_t ones = 0; ones <= l; ++ones)
        for (std::uint32_t adj = 0; adj <= l; ++adj) {
          const std::uint64_t c = state[last][ones][adj];
          if (c == 0) continue;
          const std::uint32_t closing = (last == 1 && first == 1) ? 1 : 0;
          counts[ones][adj + closing] += c;
        }
  }
  return counts;
}

}  // namespace

ExactMoment joint_moment_exact(const Params& params, std::uint32_t l) {
  const auto quota = moment_quota(params, "joint_moment_exact");
  if (!quota) return {LogReal::zero(), true};
  if (l == 0) throw DomainError("joint_moment_exact requires l >= 1");
  if (l > 62) throw DomainError("joint_moment_exact supports l <= 62");
  const std::int64_t n = params.n, n1 = *quota, d = params.d, k = params.k, m = params.m;
  const std::int64_t L = l;
  if (d * n1 < 2 * L || d * (n - n1) < 2 * L)
    throw DomainError("joint_moment_exact requires d*n1 >= 2l and d*(n-n1) >= 2l");

  const std::int64_t dn = d * n;
  const double base = log_binomial(n, n1) + L * std::log(static_cast<double>(d * (d - 1))) +
                      m * std::log(static_cast<double>(k * (k - 1) / 2)) + log_falling(m, L) -
                      std::log(2.0 * L) - log_factorial(dn);
  const auto counts = cyclic_pattern_counts(l);

  LogSumAccumulator acc;
  for (std::int64_t r1 = 0; r1 <= L; ++r1) {
    for (std::int64_t r2 = 0; r2 <= L; ++r2) {
      const std::uint64_t c = counts[r1][r2];
      if (c == 0) continue;
      const std::int64_t a1 = d * n1 - 2 * r1;
      const std::int64_t a0 = d * (n - n1) - 2 * (L - r1);
      if (a1 < 0 || a0 < 0) continue;
      const double e1 = log_falling(n1, r1) + log_falling(n - n1, L - r1);
      const double e2 = r2 * std::log(2.0) +
                        log_power(2.0 * (k - 2), static_cast<double>(2 * (r1 - r2))) +
                        log_power(static_cast<double>((k - 2) * (k - 3)),
                                  static_cast<double>(L - 2 * r1 + r2));
      const double e3 = log_factorial(a1) + log_factorial(a0);
      acc.add(std::log(static_cast<double>(c)) + base + e1 + e2 + e3);
    }
  }
  return {acc.total(), false};
}

ExactMoment joint_moment_ratio(const Params& params, std::uint32_t l) {
  const ExactMoment joint = joint_moment_exact(params, l);
  if (joint.surely_zero) return joint;
  const ExactMoment first = first_moment_exact(params);
  return {joint.value / first.value, false};
}

VarianceExplained variance_explained(std::uint32_t k, double d, std::uint32_t l_max) {
  const double kd = static_cast<double>(k);
  if (k < 2) throw DomainError("variance_explained requires k >= 2");
  if (!(d > 1.0)) throw DomainError("variance_explained requires d > 1");
  if (d >= kd) throw DomainError("variance_explained: series diverges for d >= k");
  VarianceExplained out;
  const double growth = (kd - 1.0) * (d - 1.0);
  const double shrink = 1.0 / ((kd - 1.0) * (kd - 1.0));
  for (std::uint32_t l = 1; l <= l_max; ++l) {
    const double lambda = std::pow(growth, l) / (2.0 * l);
    out.partial_sum += lambda * std::pow(shrink, l);
  }
  out.closed_form = 0.5 * std::log((kd - 1.0) / (kd - d));
  out.residual = out.closed_form - out.partial_sum;
  return out;
}

}  // namespace occuthresh
