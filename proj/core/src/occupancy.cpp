#include "occuthresh/occupancy.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "occuthresh/errors.hpp"
#include "occuthresh/parallel.hpp"
#include "occuthresh/report.hpp"
#include "occuthresh/rng.hpp"

namespace occuthresh {

std::optional<std::uint32_t> ones_quota(const Params& params) {
  const std::uint64_t num = std::uint64_t{params.r} * params.n;
  if (params.k == 0 || num % params.k != 0) return std::nullopt;
  return static_cast<std::uint32_t>(num / params.k);
}

bool is_solution(const Configuration& cfg, std::span<const std::uint8_t> x) {
  const Params& p = cfg.params();
  if (x.size() != p.n) throw ContractViolation("assignment length differs from n");
  for (std::uint32_t a = 0; a < p.m; ++a) {
    std::uint32_t ones = 0;
    for (std::uint32_t h = 0; h < p.k; ++h) ones += x[cfg.variable_at(a * p.k + h)] != 0;
    if (ones != p.r) return false;
  }
  return true;
}

namespace {

// Depth-first search over variables in breadth-first order of the factor
// graph. Each constraint tracks the ones and open slots it has seen; a
// branch is cut as soon as some constraint can no longer end with exactly
// r ones, or the global quota n1 becomes unreachable.
class SolutionSearch {
 public:
  SolutionSearch(const Configuration& cfg, std::uint32_t quota)
      : cfg_(cfg), p_(cfg.params()), quota_(quota) {
    order_ = search_order();
    incident_.resize(p_.n);
    for (std::uint32_t i = 0; i < p_.n; ++i)
      for (std::uint32_t h = 0; h < p_.d; ++h) incident_[i].push_back(cfg.constraint_at(i * p_.d + h));
    ones_.assign(p_.m, 0);
    open_.assign(p_.m, p_.k);
    value_.assign(p_.n, 0);
  }

  std::uint64_t count() {
    stop_at_first_ = false;
    return descend(0, quota_);
  }

  std::optional<Assignment> first() {
    stop_at_first_ = true;
    if (descend(0, quota_) == 0) return std::nullopt;
    return found_;
  }

 private:
  std::vector<std::uint32_t> search_order() const {
    std::vector<std::uint32_t> order;
    std::vector<bool> seen(p_.n, false);
    order.reserve(p_.n);
    for (std::uint32_t start = 0; start < p_.n; ++start) {
      if (seen[start]) continue;
      std::deque<std::uint32_t> queue{start};
      seen[start] = true;
      while (!queue.empty()) {
        const std::uint32_t v = queue.front();
        queue.pop_front();
        order.push_back(v);
        for (std::uint32_t h = 0; h < p_.d; ++h) {
          const std::uint32_t a = cfg_.constraint_at(v * p_.d + h);
          for (std::uint32_t s = 0; s < p_.k; ++s) {
            const std::uint32_t u = cfg_.variable_at(a * p_.k + s);
            if (!seen[u]) {
              seen[u] = true;
              queue.push_back(u);
            }
          }
        }
      }
    }
    return order;
  }

  bool apply(std::uint32_t v, std::uint8_t bit) {
    bool feasible = true;
    for (std::uint32_t a : incident_[v]) {
      ones_[a] += bit;
      --open_[a];
    }
    for (std::uint32_t a : incident_[v])
      if (ones_[a] > p_.r || ones_[a] + open_[a] < p_.r) feasible = false;
    return feasible;
  }

  void undo(std::uint32_t v, std::uint8_t bit) {
    for (std::uint32_t a : incident_[v]) {
      ones_[a] -= bit;
      ++open_[a];
    }
  }

  std::uint64_t descend(std::uint32_t pos, std::uint32_t ones_left) {
    if (pos == p_.n) {
      if (ones_left != 0) return 0;
      if (stop_at_first_) found_ = value_;
      return 1;
    }
    const std::uint32_t remaining = p_.n - pos;
    if (ones_left > remaining) return 0;
    const std::uint32_t v = order_[pos];
    std::uint64_t total = 0;
    for (std::uint8_t bit : {std::uint8_t{1}, std::uint8_t{0}}) {
      if (bit == 1 && ones_left == 0) continue;
      if (bit == 0 && ones_left > remaining - 1) continue;
      value_[v] = bit;
      if (apply(v, bit)) total += descend(pos + 1, ones_left - bit);
      undo(v, bit);
      value_[v] = 0;
      if (stop_at_first_ && total > 0) return total;
    }
    return total;
  }

  const Configuration& cfg_;
  const Params& p_;
  std::uint32_t quota_;
  bool stop_at_first_ = false;
  std::vector<std::uint32_t> order_;
  std::vector<std::vector<std::uint32_t>> incident_;
  std::vector<std::uint32_t> ones_;
  std::vector<std::uint32_t> open_;
  Assignment value_;
  Assignment found_;
};

void check_cap(const Params& p, std::uint32_t cap) {
  if (p.n > cap) {
    throw CapacityError("exact enumeration limited to n <= " + std::to_string(cap) + " (got n=" +
                        std::to_string(p.n) + "); use Monte Carlo moment estimates instead");
  }
}

}  // namespace

std::uint64_t count_solutions(const Configuration& cfg, std::uint32_t cap) {
  check_cap(cfg.params(), cap);
  const auto quota = ones_quota(cfg.params());
  if (!quota) return 0;
  return SolutionSearch(cfg, *quota).count();
}

std::optional<Assignment> find_solution(const Configuration& cfg, std::uint32_t cap) {
  check_cap(cfg.params(), cap);
  const auto quota = ones_quota(cfg.params());
  if (!quota) return std::nullopt;
  return SolutionSearch(cfg, *quota).first();
}

bool is_satisfiable(const Configuration& cfg, std::uint32_t cap) {
  return find_solution(cfg, cap).has_value();
}

OverlapProfile overlap(const Configuration& cfg, std::span<const std::uint8_t> x,
                       std::span<const std::uint8_t> y) {
  if (!is_solution(cfg, x) || !is_solution(cfg, y))
    throw ContractViolation("overlap requires two solutions");
  const Params& p = cfg.params();
  OverlapProfile prof;
  std::vector<std::uint8_t> shared(p.n, 0);
  for (std::uint32_t i = 0; i < p.n; ++i) {
    shared[i] = x[i] && y[i];
    prof.r1 += shared[i];
  }
  for (std::uint32_t a = 0; a < p.m; ++a) {
    std::uint32_t hits = 0;
    for (std::uint32_t h = 0; h < p.k; ++h) hits += shared[cfg.variable_at(a * p.k + h)];
    if (hits == 2) ++prof.r2;
  }
  const std::uint32_t n1 = *ones_quota(p);
  prof.w1 = n1 ? static_cast<double>(prof.r1) / n1 : 0.0;
  prof.w2 = static_cast<double>(prof.r2) / p.m;
  return prof;
}

ProportionInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) throw ContractViolation("wilson_interval requires trials >= 1");
  const double nt = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / nt;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nt;
  const double center = (phat + z2 / (2.0 * nt)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / nt + z2 / (4.0 * nt * nt)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

std::vector<SatEstimate> estimate_sat_probability(std::uint32_t k, std::uint32_t d,
                                                  std::uint32_t r,
                                                  std::span<const std::uint32_t> n_list,
                                                  std::uint64_t trials, std::uint64_t seed,
                                                  unsigned threads, std::uint32_t cap) {
  if (trials == 0) throw ContractViolation("satisfiability estimate requires trials >= 1");
  std::vector<Params> params;
  for (std::uint32_t n : n_list) {
    params.push_back(Params::make(n, d, k, r));
    check_cap(params.back(), cap);
  }

  std::vector<SatEstimate> rows;
  for (const Params& p : params) {
    const std::uint64_t n_seed = split_seed(seed, p.n);
    std::vector<std::uint8_t> sat(trials, 0);
    parallel_for(trials, threads, [&](std::size_t t) {
      const Configuration cfg = sample_configuration(p, split_seed(n_seed, t));
      sat[t] = is_satisfiable(cfg, cap) ? 1 : 0;
    });
    std::uint64_t count = 0;
    for (auto s : sat) count += s;
    const auto ci = wilson_interval(count, trials);
    rows.push_back({p.n, trials, count, static_cast<double>(count) / static_cast<double>(trials),
                    ci.low, ci.high, seed});
  }
  return rows;
}

EnumeratedMoments enumerate_moments(const Params& params, unsigned threads) {
  params.validate_shape();
  const std::uint64_t total = params.edges();
  if (total > kMaxEnumeratedEdges) {
    throw CapacityError("exhaustive enumeration limited to d*n <= " +
                        std::to_string(kMaxEnumeratedEdges) + " (got " + std::to_string(total) +
                        ")");
  }
  // One stripe per f-edge wired to v-edge 0.
  std::vector<EnumeratedMoments> stripes(total);
  parallel_for(total, threads, [&](std::size_t first) {
    EnumeratedMoments& acc = stripes[first];
    std::vector<std::uint32_t> rest;
    for (std::uint32_t f = 0; f < total; ++f)
      if (f != first) rest.push_back(f);
    std::vector<std::uint32_t> wiring(total);
    wiring[0] = static_cast<std::uint32_t>(first);
    do {
      std::copy(rest.begin(), rest.end(), wiring.begin() + 1);
      const Configuration cfg(params, wiring);
      const std::uint64_t z = count_solutions(cfg, params.n);
      ++acc.configurations;
      acc.sum_z += z;
      acc.sum_z2 += z * z;
      acc.sum_z_x1 += z * count_two_cycles(cfg);
      acc.sum_redundant += count_redundant_constraints(to_factor_graph(cfg));
    } while (std::next_permutation(rest.begin(), rest.end()));
  });
  EnumeratedMoments out;
  for (const auto& s : stripes) {
    out.configurations += s.configurations;
    out.sum_z += s.sum_z;
    out.sum_z2 += s.sum_z2;
    out.sum_z_x1 += s.sum_z_x1;
    out.sum_redundant += s.sum_redundant;
  }
  return out;
}

std::string sat_table_csv(std::span<const SatEstimate> rows) {
  std::ostringstream os;
  os << "n,trials,sat_count,sat_fraction,ci_low,ci_high,seed\n";
  for (const auto& row : rows) {
    os << row.n << ',' << row.trials << ',' << row.sat_count << ','
       << format_double(row.sat_fraction) << ',' << format_double(row.ci_low) << ','
       << format_double(row.ci_high) << ',' << row.seed << '\n';
  }
  return os.str();
}

}  // namespace occuthresh
