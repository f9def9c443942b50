#include "occuthresh/cycles.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "occuthresh/errors.hpp"
#include "occuthresh/parallel.hpp"
#include "occuthresh/report.hpp"
#include "occuthresh/rng.hpp"

namespace occuthresh {

namespace {

class CycleWalker {
 public:
  CycleWalker(const Configuration& cfg, std::uint32_t l_max)
      : cfg_(cfg),
        p_(cfg.params()),
        l_max_(l_max),
        directed_(l_max, 0),
        var_used_(p_.n, 0),
        con_used_(p_.m, 0) {}

  std::vector<std::uint64_t> run() {
    for (std::uint32_t v = 0; v < p_.n; ++v) {
      root_ = v;
      var_used_[v] = 1;
      for (std::uint32_t h = 0; h < p_.d; ++h) {
        root_edge_ = v * p_.d + h;
        const std::uint32_t a = cfg_.constraint_at(root_edge_);
        con_used_[a] = 1;
        walk(a, cfg_.wiring()[root_edge_], 1);
        con_used_[a] = 0;
      }
      var_used_[v] = 0;
    }
    return directed_;
  }

 private:
  // At the depth-th constraint `a`, entered through f-edge `f_in`.
  void walk(std::uint32_t a, std::uint32_t f_in, std::uint32_t depth) {
    for (std::uint32_t s = 0; s < p_.k; ++s) {
      const std::uint32_t f = a * p_.k + s;
      if (f == f_in) continue;
      const std::uint32_t e_in = cfg_.inverse()[f];
      const std::uint32_t u = cfg_.variable_of_vedge(e_in);
      if (u == root_) {
        if (e_in != root_edge_) ++directed_[depth - 1];
        continue;
      }
      if (depth == l_max_ || var_used_[u]) continue;
      var_used_[u] = 1;
      for (std::uint32_t h = 0; h < p_.d; ++h) {
        const std::uint32_t e_out = u * p_.d + h;
        if (e_out == e_in) continue;
        const std::uint32_t b = cfg_.constraint_at(e_out);
        if (con_used_[b]) continue;
        con_used_[b] = 1;
        walk(b, cfg_.wiring()[e_out], depth + 1);
        con_used_[b] = 0;
      }
      var_used_[u] = 0;
    }
  }

  const Configuration& cfg_;
  const Params& p_;
  std::uint32_t l_max_;
  std::vector<std::uint64_t> directed_;
  std::vector<std::uint8_t> var_used_;
  std::vector<std::uint8_t> con_used_;
  std::uint32_t root_ = 0;
  std::uint32_t root_edge_ = 0;
};

using Mat2 = std::array<double, 4>;  // row-major

Mat2 multiply(const Mat2& a, const Mat2& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
          a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

std::vector<double> column(std::span<const CycleCensus> samples, std::uint32_t l) {
  std::vector<double> xs;
  xs.reserve(samples.size());
  for (const auto& c : samples) xs.push_back(static_cast<double>(c(l)));
  return xs;
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace

CycleCensus count_cycles(const Configuration& cfg, std::uint32_t l_max) {
  if (l_max == 0) throw ContractViolation("count_cycles requires l_max >= 1");
  const auto directed = CycleWalker(cfg, l_max).run();
  CycleCensus census;
  census.counts.resize(l_max);
  for (std::uint32_t l = 1; l <= l_max; ++l) {
    const std::uint64_t rooted = directed[l - 1];
    if (rooted % (2 * l) != 0)
      throw std::logic_error("directed cycle count not divisible by 2l at l=" + std::to_string(l));
    census.counts[l - 1] = rooted / (2 * l);
  }
  return census;
}

double lambda_l(std::uint32_t l, std::uint32_t k, std::uint32_t d) {
  if (l == 0) throw ContractViolation("cycle length l must be positive");
  const double base = static_cast<double>(k - 1) * static_cast<double>(d - 1);
  return std::pow(base, static_cast<double>(l)) / (2.0 * l);
}

double delta_l(std::uint32_t l, std::uint32_t k) {
  if (l == 0) throw ContractViolation("cycle length l must be positive");
  if (k < 2) throw DomainError("delta_l requires k >= 2");
  return std::pow(-1.0 / static_cast<double>(k - 1), static_cast<double>(l));
}

double mu_l(std::uint32_t l, std::uint32_t k, std::uint32_t d) {
  return lambda_l(l, k, d) * (1.0 + delta_l(l, k));
}

double markov_trace_delta(std::uint32_t l, std::uint32_t k) {
  if (l == 0) throw ContractViolation("cycle length l must be positive");
  if (k < 2) throw DomainError("markov_trace_delta requires k >= 2");
  const double inv = 1.0 / static_cast<double>(k - 1);
  const Mat2 w{1.0 - 2.0 * inv, 1.0 - inv, 2.0 * inv, inv};
  Mat2 acc{1.0, 0.0, 0.0, 1.0};
  Mat2 base = w;
  for (std::uint32_t e = l; e > 0; e >>= 1) {
    if (e & 1u) acc = multiply(acc, base);
    base = multiply(base, base);
  }
  return acc[0] + acc[3] - 1.0;
}

std::vector<PoissonFit> poisson_gof(std::span<const CycleCensus> samples, std::uint32_t k,
                                    std::uint32_t d) {
  if (samples.size() < 2) throw ContractViolation("poisson_gof requires at least two samples");
  const std::uint32_t l_max = samples.front().l_max();
  for (const auto& s : samples)
    if (s.l_max() != l_max) throw ContractViolation("censuses have different l_max");

  const double n_samples = static_cast<double>(samples.size());
  std::vector<PoissonFit> fits;
  for (std::uint32_t l = 1; l <= l_max; ++l) {
    const auto xs = column(samples, l);
    const double mean = mean_of(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double var = ss / (n_samples - 1.0);
    const double lambda = lambda_l(l, k, d);

    // Greedy binning from zero: close a bin once it expects >= 5 samples;
    // whatever remains joins the last bin as the tail.
    const double log_lambda = std::log(lambda);
    auto log_pmf = [&](double j) { return -lambda + j * log_lambda - std::lgamma(j + 1.0); };
    std::vector<std::pair<std::uint64_t, double>> bins;  // (upper value inclusive, expected)
    double open_expected = 0.0;
    double cumulative = 0.0;
    const auto j_end = static_cast<std::uint64_t>(lambda + 20.0 * std::sqrt(lambda) + 50.0);
    for (std::uint64_t j = 0; j <= j_end; ++j) {
      const double prob = std::exp(log_pmf(static_cast<double>(j)));
      open_expected += prob * n_samples;
      cumulative += prob;
      if (open_expected >= 5.0 && (1.0 - cumulative) * n_samples >= 5.0) {
        bins.emplace_back(j, open_expected);
        open_expected = 0.0;
      }
    }
    const double tail_expected = std::max(0.0, n_samples - [&] {
      double s = 0.0;
      for (const auto& b : bins) s += b.second;
      return s;
    }());
    bins.emplace_back(UINT64_MAX, tail_expected);

    std::vector<double> observed(bins.size(), 0.0);
    for (double x : xs) {
      const auto v = static_cast<std::uint64_t>(x);
      std::size_t b = 0;
      while (v > bins[b].first) ++b;
      observed[b] += 1.0;
    }
    double chi2 = 0.0;
    for (std::size_t b = 0; b < bins.size(); ++b) {
      if (bins[b].second > 0.0) {
        const double diff = observed[b] - bins[b].second;
        chi2 += diff * diff / bins[b].second;
      }
    }
    fits.push_back({l, mean, lambda, (mean - lambda) / std::sqrt(lambda / n_samples), var, chi2,
                    static_cast<std::uint32_t>(bins.size() - 1)});
  }
  return fits;
}

double census_correlation(std::span<const CycleCensus> samples, std::uint32_t a, std::uint32_t b) {
  if (samples.size() < 2) throw ContractViolation("correlation requires at least two samples");
  const auto xs = column(samples, a);
  const auto ys = column(samples, b);
  const double mx = mean_of(xs);
  const double my = mean_of(ys);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

std::string poisson_fit_csv(std::span<const PoissonFit> rows) {
  std::ostringstream os;
  os << "l,empirical_mean,lambda,z_score,empirical_var,chi2,dof\n";
  for (const auto& r : rows) {
    os << r.l << ',' << format_double(r.empirical_mean) << ',' << format_double(r.lambda) << ','
       << format_double(r.z_score) << ',' << format_double(r.empirical_var) << ','
       << format_double(r.chi2) << ',' << r.dof << '\n';
  }
  return os.str();
}

std::vector<CycleCensus> sample_censuses(const Params& params, std::uint32_t l_max,
                                         std::uint64_t samples, std::uint64_t seed,
                                         unsigned threads) {
  std::vector<CycleCensus> out(samples);
  parallel_for(samples, threads, [&](std::size_t s) {
    out[s] = count_cycles(sample_configuration(params, split_seed(seed, s)), l_max);
  });
  return out;
}

}  // namespace occuthresh
