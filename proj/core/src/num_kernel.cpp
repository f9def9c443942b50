#include "occuthresh/num_kernel.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <sstream>

#include "occuthresh/errors.hpp"

namespace occuthresh {

LogReal LogReal::from_linear(double x) {
  if (x < 0.0 || std::isnan(x)) throw DomainError("LogReal of a negative quantity");
  return LogReal(x == 0.0 ? -kInf : std::log(x));
}

LogReal LogReal::operator*(LogReal rhs) const {
  if (is_zero() || rhs.is_zero()) return zero();
  return LogReal(value_ + rhs.value_);
}

LogReal LogReal::operator/(LogReal rhs) const {
  if (rhs.is_zero()) throw DomainError("LogReal division by zero");
  if (is_zero()) return zero();
  return LogReal(value_ - rhs.value_);
}

LogReal LogReal::operator+(LogReal rhs) const {
  if (is_zero()) return rhs;
  if (rhs.is_zero()) return *this;
  const double hi = std::max(value_, rhs.value_);
  const double lo = std::min(value_, rhs.value_);
  return LogReal(hi + std::log1p(std::exp(lo - hi)));
}

void LogSumAccumulator::add(double log_term) {
  ++terms_;
  if (log_term == -kInf) return;
  if (log_term <= max_) {
    scaled_sum_ += std::exp(log_term - max_);
  } else {
    scaled_sum_ = scaled_sum_ * std::exp(max_ - log_term) + 1.0;
    max_ = log_term;
  }
}

LogReal LogSumAccumulator::total() const {
  if (max_ == -kInf) return LogReal::zero();
  return LogReal(max_ + std::log(scaled_sum_));
}

namespace {

void check_pmf(std::vector<double>& w) {
  if (w.empty()) throw ContractViolation("pmf must have at least one outcome");
  double total = 0.0;
  for (auto& x : w) {
    if (!std::isfinite(x)) throw ContractViolation("pmf weight is not finite");
    if (x < 0.0) {
      if (x < -kPmfTolerance) throw ContractViolation("pmf weight is negative");
      x = 0.0;
    }
    total += x;
  }
  if (std::abs(total - 1.0) > kPmfTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "pmf weights sum to " << total << ", expected 1";
    throw ContractViolation(os.str());
  }
}

}  // namespace

Pmf::Pmf(std::vector<double> weights) : weights_(std::move(weights)) { check_pmf(weights_); }

Pmf Pmf::normalized(std::vector<double> weights) {
  double total = 0.0;
  for (double x : weights) {
    if (x < 0.0 || !std::isfinite(x)) throw ContractViolation("cannot normalize negative weight");
    total += x;
  }
  if (total <= 0.0) throw ContractViolation("cannot normalize zero mass");
  for (auto& x : weights) x /= total;
  return Pmf(std::move(weights));
}

Channel::Channel(std::size_t n_out, std::size_t n_in, std::vector<double> row_major)
    : n_out_(n_out), n_in_(n_in), entries_(std::move(row_major)) {
  if (n_out_ == 0 || n_in_ == 0) throw ContractViolation("channel dimensions must be positive");
  if (entries_.size() != n_out_ * n_in_) throw ContractViolation("channel matrix size mismatch");
  for (std::size_t x = 0; x < n_in_; ++x) {
    double col = 0.0;
    for (std::size_t y = 0; y < n_out_; ++y) {
      const double e = at(y, x);
      if (!(e >= 0.0) || !std::isfinite(e)) throw ContractViolation("channel entry is negative");
      col += e;
    }
    if (std::abs(col - 1.0) > kPmfTolerance)
      throw ContractViolation("channel column " + std::to_string(x) + " does not sum to 1");
  }
}

Channel Channel::identity(std::size_t n) {
  std::vector<double> e(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) e[i * n + i] = 1.0;
  return Channel(n, n, std::move(e));
}

std::vector<double> Channel::apply(std::span<const double> p) const {
  if (p.size() != n_in_) throw ContractViolation("channel input dimension mismatch");
  std::vector<double> q(n_out_, 0.0);
  for (std::size_t y = 0; y < n_out_; ++y) {
    double acc = 0.0;
    for (std::size_t x = 0; x < n_in_; ++x) acc += at(y, x) * p[x];
    q[y] = acc;
  }
  return q;
}

Pmf Channel::apply(const Pmf& p) const { return Pmf(apply(p.weights())); }

double log_factorial(std::uint64_t n) {
  static const std::array<double, 21> exact = [] {
    std::array<double, 21> t{};
    std::uint64_t f = 1;
    t[0] = 0.0;
    for (std::uint64_t i = 1; i <= 20; ++i) {
      f *= i;
      t[i] = std::log(static_cast<double>(f));
    }
    return t;
  }();
  if (n <= 20) return exact[n];
  return std::lgamma(static_cast<double>(n) + 1.0);
}

double log_multinomial(std::uint64_t n, std::span<const std::uint64_t> parts) {
  const std::uint64_t total = std::accumulate(parts.begin(), parts.end(), std::uint64_t{0});
  if (total != n) throw ContractViolation("multinomial parts do not sum to n");
  double v = log_factorial(n);
  for (auto p : parts) v -= log_factorial(p);
  return v;
}

double log_binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return -kInf;
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

double log_falling(std::uint64_t n, std::uint64_t k) {
  if (k > n) return -kInf;
  return log_factorial(n) - log_factorial(n - k);
}

LogFactorialTable::LogFactorialTable(std::size_t size) : table_(std::max<std::size_t>(size, 1)) {
  for (std::size_t i = 0; i < table_.size(); ++i) table_[i] = log_factorial(i);
}

double LogFactorialTable::operator()(std::int64_t n) const {
  if (n < 0) throw DomainError("factorial of a negative integer");
  if (static_cast<std::size_t>(n) < table_.size()) return table_[static_cast<std::size_t>(n)];
  return log_factorial(static_cast<std::uint64_t>(n));
}

double LogFactorialTable::binomial(std::int64_t n, std::int64_t k) const {
  if (k < 0 || n < 0 || k > n) return -kInf;
  return (*this)(n) - (*this)(k) - (*this)(n - k);
}

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binary entropy argument outside [0, 1]");
  double h = 0.0;
  if (p > 0.0) h -= p * std::log(p);
  if (p < 1.0) h -= (1.0 - p) * std::log1p(-p);
  return h;
}

double kl_term(double x, double y) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return kInf;
  return x * std::log(x / y);
}

double kl_divergence(std::span<const double> p, std::span<const double> p_star) {
  if (p.size() != p_star.size()) throw ContractViolation("KL divergence length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += kl_term(p[i], p_star[i]);
  // Rounding can push a true zero slightly negative.
  return std::max(acc, 0.0);
}

double kl_divergence(const Pmf& p, const Pmf& p_star) {
  return kl_divergence(p.weights(), p_star.weights());
}

namespace {

double checked_eval(const std::function<double(double)>& f, double x) {
  const double v = f(x);
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os.precision(17);
    os << "objective is not finite at x=" << x;
    throw EvaluationError(os.str(), x);
  }
  return v;
}

}  // namespace

Maximum1d maximize_1d(const std::function<double(double)>& f, double lo, double hi, double tol,
                      std::size_t grid_points) {
  if (!(lo < hi)) throw ContractViolation("maximize_1d requires lo < hi");
  if (!(tol > 0.0)) throw ContractViolation("maximize_1d requires tol > 0");
  grid_points = std::max(grid_points, kMinGridPoints);

  const double step = (hi - lo) / static_cast<double>(grid_points);
  auto grid_x = [&](std::size_t i) {
    return i == grid_points ? hi : lo + step * static_cast<double>(i);
  };

  std::size_t best_i = 0;
  double best = checked_eval(f, lo);
  for (std::size_t i = 1; i <= grid_points; ++i) {
    const double v = checked_eval(f, grid_x(i));
    if (v > best) {
      best = v;
      best_i = i;
    }
  }

  double a = grid_x(best_i == 0 ? 0 : best_i - 1);
  double b = grid_x(std::min(best_i + 1, grid_points));
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = checked_eval(f, c);
  double fd = checked_eval(f, d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = checked_eval(f, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = checked_eval(f, d);
    }
  }
  const double x = 0.5 * (a + b);
  const double fx = checked_eval(f, x);
  if (fx > best) return {x, fx};
  return {grid_x(best_i), best};
}

double find_root(const std::function<double(double)>& f, double lo, double hi, double tol) {
  if (!(lo < hi)) throw ContractViolation("find_root requires lo < hi");
  if (!(tol > 0.0)) throw ContractViolation("find_root requires tol > 0");
  double flo = checked_eval(f, lo);
  const double fhi = checked_eval(f, hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) throw BracketingError("find_root: no sign change on interval");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = checked_eval(f, mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace occuthresh
