#include "occuthresh/sdpi.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "json.hpp"
#include "occuthresh/errors.hpp"
#include "occuthresh/parallel.hpp"

namespace occuthresh {

namespace {

constexpr double kExclusionTv = 1e-9;

// (1+u) ln(1+u) - u for u >= -1.
double g_term(double u) {
  if (u == -1.0) return 1.0;
  if (std::abs(u) < 1e-4) {
    const double u2 = u * u;
    return u2 * (0.5 - u / 6.0 + u2 / 12.0 - u2 * u / 20.0);
  }
  return (1.0 + u) * std::log1p(u) - u;
}

// KL(q + delta || q), summed termwise as q_i g(delta_i / q_i).
double kl_delta(std::span<const double> delta, std::span<const double> q) {
  double acc = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] <= 0.0) {
      if (delta[i] > 0.0) return kInf;
      continue;
    }
    acc += q[i] * g_term(std::max(-1.0, delta[i] / q[i]));
  }
  return acc;
}

// Ratio at P = p_star + delta_p, or nullopt when the point does not count.
std::optional<double> ratio_at(std::span<const double> delta_p, std::span<const double> p_star,
                               std::span<const double> q_star, const Channel& W) {
  double tv = 0.0;
  for (double x : delta_p) tv += std::abs(x);
  if (0.5 * tv <= kExclusionTv) return std::nullopt;
  const double den = kl_delta(delta_p, p_star);
  const auto delta_q = W.apply(delta_p);
  const double num = kl_delta(delta_q, q_star);
  if (std::isinf(den)) {
    if (std::isinf(num)) return std::nullopt;
    return 0.0;
  }
  if (!(den > 0.0)) return std::nullopt;
  return num / den;
}

struct GridBest {
  double value = -kInf;
  std::vector<std::uint32_t> composition;
};

// Lexicographic walk over compositions of `remaining` into the slots
// [pos, parts) of `comp`.
template <class Visit>
void for_each_composition(std::vector<std::uint32_t>& comp, std::size_t pos,
                          std::uint32_t remaining, Visit& visit) {
  if (pos + 1 == comp.size()) {
    comp[pos] = remaining;
    visit(comp);
    return;
  }
  for (std::uint32_t c = 0; c <= remaining; ++c) {
    comp[pos] = c;
    for_each_composition(comp, pos + 1, remaining - c, visit);
  }
}

}  // namespace

double kl_near(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ContractViolation("kl_near length mismatch");
  std::vector<double> delta(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) delta[i] = p[i] - q[i];
  return kl_delta(delta, q);
}

std::array<double, 3> occupation_p(double w1, double w2) {
  return {1.0 - 2.0 * w1 + w2, 2.0 * (w1 - w2), w2};
}

std::array<double, 3> occupation_q(double w1, std::uint32_t k) {
  const double a = 2.0 / k;
  return {1.0 - 2.0 * a + a * w1, 2.0 * a * (1.0 - w1), a * w1};
}

OccupationChannel OccupationChannel::make(std::uint32_t k) {
  if (k < 4) throw DomainError("occupation channel requires k >= 4");
  const double a = 2.0 / k;
  Channel W(3, 3,
            {1.0 - 2.0 * a, 1.0 - 1.5 * a, 1.0 - a,  //
             2.0 * a, a, 0.0,                       //
             0.0, 0.5 * a, a});
  const auto star = overlap_star(k);
  const auto ps = occupation_p(star.w1, star.w2);
  Pmf p_star(std::vector<double>(ps.begin(), ps.end()));
  Pmf q_star = W.apply(p_star);
  return {k, std::move(W), std::move(p_star), std::move(q_star)};
}

double ratio_R(const OverlapPoint& w, std::uint32_t k) {
  const OverlapPoint m = w.to_main();
  if (!m.in_domain(1e-12)) throw DomainError("ratio_R: overlap point outside its domain");
  if (k < 4) throw DomainError("ratio_R requires k >= 4");
  const auto star = overlap_star(k);
  const auto p = occupation_p(m.w1, m.w2);
  const auto ps = occupation_p(star.w1, star.w2);
  const auto q = occupation_q(m.w1, k);
  const auto qs = occupation_q(star.w1, k);
  const double den = kl_near(p, ps);
  if (!(den > 0.0)) throw DomainError("ratio_R is undefined at w = w*");
  return kl_near(q, qs) / den;
}

ContractionResult contraction_generic(const Pmf& p_star, const Channel& W, std::uint32_t grid_depth,
                                      double refine_tol, unsigned threads) {
  const std::size_t parts = p_star.size();
  if (W.n_in() != parts) throw ContractViolation("channel input size differs from |p_star|");
  if (parts < 2) throw ContractViolation("contraction_generic needs at least two outcomes");
  if (grid_depth < 2) throw ContractViolation("contraction_generic requires grid_depth >= 2");
  if (!(refine_tol > 0.0)) throw ContractViolation("contraction_generic requires refine_tol > 0");

  const auto ps = p_star.weights();
  const auto qs_vec = W.apply(ps);
  const std::span<const double> qs = qs_vec;
  const double depth = grid_depth;

  // One stripe per value of the first coordinate; stripes are reduced in
  // increasing order with strict comparison, which keeps the
  // lexicographically smallest maximiser.
  std::vector<GridBest> stripes(grid_depth + 1);
  parallel_for(stripes.size(), threads, [&](std::size_t c0) {
    GridBest& best = stripes[c0];
    std::vector<std::uint32_t> comp(parts, 0);
    std::vector<double> delta(parts);
    comp[0] = static_cast<std::uint32_t>(c0);
    auto visit = [&](const std::vector<std::uint32_t>& c) {
      for (std::size_t i = 0; i < parts; ++i) delta[i] = c[i] / depth - ps[i];
      const auto r = ratio_at(delta, ps, qs, W);
      if (r && *r > best.value) {
        best.value = *r;
        best.composition = c;
      }
    };
    for_each_composition(comp, 1, grid_depth - comp[0], visit);
  });

  GridBest best;
  for (auto& s : stripes)
    if (s.value > best.value) best = std::move(s);
  if (best.composition.empty()) throw ContractViolation("no admissible grid point");

  std::vector<double> p(parts);
  for (std::size_t i = 0; i < parts; ++i) p[i] = best.composition[i] / depth;
  double value = best.value;
  std::vector<double> cand(parts), delta(parts);
  auto score = [&](const std::vector<double>& x) {
    for (std::size_t i = 0; i < parts; ++i) delta[i] = x[i] - ps[i];
    return ratio_at(delta, ps, qs, W);
  };

  constexpr std::size_t kMaxMoves = 1000000;
  std::size_t moves = 0;
  for (double step = 1.0 / depth; step >= refine_tol && moves < kMaxMoves;) {
    bool improved = false;
    for (std::size_t i = 0; i < parts && !improved; ++i) {
      for (std::size_t j = 0; j < parts && !improved; ++j) {
        if (i == j || p[j] <= 0.0) continue;
        const double amount = std::min(step, p[j]);
        cand = p;
        cand[i] += amount;
        cand[j] = amount == p[j] ? 0.0 : p[j] - amount;
        const auto r = score(cand);
        if (r && *r > value) {
          value = *r;
          p = cand;
          improved = true;
          ++moves;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return {value, Pmf::normalized(p)};
}

double conjectured_contraction(std::uint32_t k) {
  if (k < 4) throw DomainError("conjectured_contraction requires k >= 4");
  const double kd = k;
  return binary_entropy(2.0 / kd) / std::log(kd * (kd - 1.0) / 2.0);
}

OccupationSup contraction_occupation(std::uint32_t k, std::uint32_t grid, double refine_tol,
                                     unsigned threads) {
  const OccupationChannel ch = OccupationChannel::make(k);
  const ContractionResult res = contraction_generic(ch.p_star, ch.W, grid, refine_tol, threads);
  OccupationSup out;
  out.sup = res.d_star;
  out.argmax = {0.5 * res.argmax[1] + res.argmax[2], res.argmax[2], Parametrization::main};
  out.conjectured = conjectured_contraction(k);
  out.gap = out.sup - out.conjectured;
  return out;
}

ChannelInput parse_channel_input(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what(), "byte " + std::to_string(e.byte));
  }
  if (!doc.is_object()) throw ParseError("channel document must be an object", "byte 0");
  auto size_field = [&](const char* key) -> std::size_t {
    if (!doc.contains(key) || !doc[key].is_number_unsigned() || doc[key].get<std::uint64_t>() == 0)
      throw ParseError(std::string("field '") + key + "' must be a positive integer", key);
    return doc[key].get<std::size_t>();
  };
  const std::size_t n_in = size_field("n_in");
  const std::size_t n_out = size_field("n_out");
  auto numbers = [&](const char* key, std::size_t expected) {
    if (!doc.contains(key) || !doc[key].is_array())
      throw ParseError(std::string("missing array '") + key + "'", key);
    const auto& arr = doc[key];
    if (arr.size() != expected)
      throw ParseError(std::string("array '") + key + "' has " + std::to_string(arr.size()) +
                           " entries, expected " + std::to_string(expected),
                       key);
    std::vector<double> out(expected);
    for (std::size_t i = 0; i < expected; ++i) {
      if (!arr[i].is_number())
        throw ParseError("entry is not a number", std::string(key) + "[" + std::to_string(i) + "]");
      out[i] = arr[i].get<double>();
    }
    return out;
  };
  const auto column_major = numbers("matrix", n_in * n_out);
  const auto reference = numbers("reference_pmf", n_in);

  std::vector<double> row_major(n_in * n_out);
  for (std::size_t x = 0; x < n_in; ++x)
    for (std::size_t y = 0; y < n_out; ++y) row_major[y * n_in + x] = column_major[x * n_out + y];
  try {
    Channel W(n_out, n_in, std::move(row_major));
    Pmf ref(reference);
    return {std::move(W), std::move(ref)};
  } catch (const ContractViolation& e) {
    throw ParseError(e.what(), "matrix/reference_pmf");
  }
}

}  // namespace occuthresh
