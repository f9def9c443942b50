#include "occuthresh/instances.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "json.hpp"
#include "occuthresh/errors.hpp"
#include "occuthresh/rng.hpp"

namespace occuthresh {

Params Params::make(std::uint32_t n, std::uint32_t d, std::uint32_t k, std::uint32_t r) {
  if (k == 0) throw DomainError("constraint arity k must be positive");
  const std::uint64_t dn = std::uint64_t{d} * n;
  if (dn % k != 0) {
    throw EmptyFamilyError("no configurations: k=" + std::to_string(k) +
                           " does not divide d*n=" + std::to_string(dn));
  }
  Params p{n, d, k, r, static_cast<std::uint32_t>(dn / k)};
  p.validate();
  return p;
}

void Params::validate_shape() const {
  if (n == 0 || d == 0 || k == 0 || m == 0) throw DomainError("n, d, k and m must be positive");
  if (std::uint64_t{d} * n != std::uint64_t{k} * m) {
    throw EmptyFamilyError("no configurations: d*n=" + std::to_string(std::uint64_t{d} * n) +
                           " differs from k*m=" + std::to_string(std::uint64_t{k} * m));
  }
  if (std::uint64_t{d} * n > UINT32_MAX) throw DomainError("too many half-edges");
}

void Params::validate() const {
  validate_shape();
  if (k < 2) throw DomainError("constraint arity k must be at least 2");
  if (d < 2) throw DomainError("variable degree d must be at least 2");
  if (r < 1 || r > k - 1) throw DomainError("occupation number r must lie in [1, k-1]");
}

Configuration::Configuration(Params params, std::vector<std::uint32_t> wiring)
    : params_(params), wiring_(std::move(wiring)) {
  params_.validate_shape();
  const std::size_t total = params_.edges();
  if (wiring_.size() != total) throw ContractViolation("wiring length differs from d*n");
  inverse_.assign(total, UINT32_MAX);
  for (std::size_t e = 0; e < total; ++e) {
    const std::uint32_t f = wiring_[e];
    if (f >= total || inverse_[f] != UINT32_MAX)
      throw ContractViolation("wiring is not a permutation (entry " + std::to_string(e) + ")");
    inverse_[f] = static_cast<std::uint32_t>(e);
  }
}

Configuration Configuration::identity(Params params) {
  params.validate_shape();
  std::vector<std::uint32_t> w(params.edges());
  for (std::uint32_t i = 0; i < w.size(); ++i) w[i] = i;
  return Configuration(params, std::move(w));
}

Configuration sample_configuration(const Params& params, std::uint64_t seed) {
  params.validate_shape();
  const std::size_t total = params.edges();
  std::vector<std::uint32_t> w(total);
  for (std::uint32_t i = 0; i < total; ++i) w[i] = i;
  Rng rng(seed);
  for (std::size_t i = total; i > 1; --i) {
    const std::size_t j = rng.below(i);
    std::swap(w[i - 1], w[j]);
  }
  return Configuration(params, std::move(w));
}

FactorGraph to_factor_graph(const Configuration& cfg) {
  const Params& p = cfg.params();
  FactorGraph fg{p, std::vector<std::vector<std::uint32_t>>(p.m)};
  for (std::uint32_t a = 0; a < p.m; ++a) {
    auto& nb = fg.neighbors[a];
    nb.reserve(p.k);
    for (std::uint32_t h = 0; h < p.k; ++h) nb.push_back(cfg.variable_at(a * p.k + h));
  }
  return fg;
}

std::uint64_t count_two_cycles(const Configuration& cfg) {
  const Params& p = cfg.params();
  std::uint64_t count = 0;
  for (std::uint32_t i = 0; i < p.n; ++i) {
    const std::uint32_t base = i * p.d;
    for (std::uint32_t h1 = 0; h1 < p.d; ++h1)
      for (std::uint32_t h2 = h1 + 1; h2 < p.d; ++h2)
        if (cfg.constraint_at(base + h1) == cfg.constraint_at(base + h2)) ++count;
  }
  return count;
}

Configuration sample_simple(const Params& params, std::uint64_t seed, std::uint64_t max_attempts) {
  if (max_attempts == 0) throw ContractViolation("sample_simple requires max_attempts >= 1");
  params.validate_shape();
  const std::size_t total = params.edges();
  Rng rng(seed);
  std::vector<std::uint32_t> w(total);
  for (std::uint64_t attempt = 0; attempt < max_attempts; ++attempt) {
    for (std::uint32_t i = 0; i < total; ++i) w[i] = i;
    for (std::size_t i = total; i > 1; --i) std::swap(w[i - 1], w[rng.below(i)]);
    Configuration cfg(params, w);
    if (count_two_cycles(cfg) == 0) return cfg;
  }
  throw RetryLimitError("no simple configuration after " + std::to_string(max_attempts) +
                            " attempts",
                        max_attempts);
}

std::uint64_t count_redundant_constraints(const FactorGraph& fg) {
  std::map<std::vector<std::uint32_t>, std::uint64_t> seen;
  for (const auto& nb : fg.neighbors) {
    std::vector<std::uint32_t> key = nb;
    std::sort(key.begin(), key.end());
    if (std::adjacent_find(key.begin(), key.end()) != key.end()) continue;
    ++seen[std::move(key)];
  }
  std::uint64_t pairs = 0;
  for (const auto& [key, c] : seen) pairs += c * (c - 1) / 2;
  return pairs;
}

LogReal expected_redundant_exact(const Params& params) {
  params.validate_shape();
  const std::uint64_t dn = params.edges();
  const std::uint64_t k = params.k;
  if (dn < 2 * k) throw DomainError("expected_redundant_exact requires d*n >= 2k");
  const std::uint64_t m = params.m;
  const std::uint64_t d = params.d;
  if (m < 2 || params.n < k || d < 2) return LogReal::zero();
  const double v = log_binomial(m, 2) + log_falling(params.n, k) + log_factorial(k) +
                   static_cast<double>(k) * std::log(static_cast<double>(d * (d - 1))) +
                   log_factorial(dn - 2 * k) - log_factorial(dn);
  return LogReal(v);
}

std::string serialize(const Configuration& cfg) {
  const Params& p = cfg.params();
  std::ostringstream os;
  os << "{\n"
     << "  \"n\": " << p.n << ",\n"
     << "  \"d\": " << p.d << ",\n"
     << "  \"k\": " << p.k << ",\n"
     << "  \"r\": " << p.r << ",\n"
     << "  \"m\": " << p.m << ",\n"
     << "  \"wiring\": [";
  const auto& w = cfg.wiring();
  for (std::size_t i = 0; i < w.size(); ++i) os << (i ? ", " : "") << w[i];
  os << "]\n}\n";
  return os.str();
}

namespace {

std::uint32_t read_count(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key)) throw ParseError(std::string("missing field '") + key + "'", key);
  const auto& v = doc.at(key);
  if (!v.is_number_unsigned() || v.get<std::uint64_t>() > UINT32_MAX)
    throw ParseError(std::string("field '") + key + "' is not a 32-bit unsigned integer", key);
  return v.get<std::uint32_t>();
}

}  // namespace

Configuration deserialize(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what(), "byte " + std::to_string(e.byte));
  }
  if (!doc.is_object()) throw ParseError("configuration document must be an object", "byte 0");

  Params p;
  p.n = read_count(doc, "n");
  p.d = read_count(doc, "d");
  p.k = read_count(doc, "k");
  p.r = read_count(doc, "r");
  p.m = read_count(doc, "m");
  try {
    p.validate_shape();
  } catch (const DomainError& e) {
    throw ParseError(std::string("parameter error: ") + e.what(), "m");
  }

  if (!doc.contains("wiring") || !doc["wiring"].is_array())
    throw ParseError("missing array 'wiring'", "wiring");
  const auto& arr = doc["wiring"];
  const std::size_t total = p.edges();
  if (arr.size() != total) {
    throw ParseError("wiring has " + std::to_string(arr.size()) + " entries, expected " +
                         std::to_string(total),
                     "wiring");
  }
  std::vector<std::uint32_t> wiring(total);
  std::vector<bool> used(total, false);
  for (std::size_t i = 0; i < total; ++i) {
    const std::string where = "wiring[" + std::to_string(i) + "]";
    if (!arr[i].is_number_unsigned()) throw ParseError("wiring entry is not an index", where);
    const std::uint64_t f = arr[i].get<std::uint64_t>();
    if (f >= total) throw ParseError("wiring entry out of range", where);
    if (used[f]) throw ParseError("duplicate wiring entry " + std::to_string(f), where);
    used[f] = true;
    wiring[i] = static_cast<std::uint32_t>(f);
  }
  return Configuration(p, std::move(wiring));
}

}  // namespace occuthresh
