#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "doctest.h"
#include "occuthresh/errors.hpp"
#include "occuthresh/instances.hpp"
#include "occuthresh/rng.hpp"
#include "support/oracle.hpp"

using namespace occuthresh;
using doctest::Approx;

namespace {

bool is_permutation_of_range(const std::vector<std::uint32_t>& w) {
  std::vector<std::uint32_t> sorted = w;
  std::sort(sorted.begin(), sorted.end());
  for (std::uint32_t i = 0; i < sorted.size(); ++i)
    if (sorted[i] != i) return false;
  return true;
}

// Wiring that realises the given constraint neighbour lists; each variable
// uses its half-edges in order of appearance.
Configuration from_constraint_lists(const Params& p,
                                    const std::vector<std::vector<std::uint32_t>>& lists) {
  std::vector<std::uint32_t> next(p.n, 0), w(p.edges());
  for (std::uint32_t a = 0; a < lists.size(); ++a)
    for (std::uint32_t s = 0; s < lists[a].size(); ++s) {
      const std::uint32_t v = lists[a][s];
      w[v * p.d + next[v]++] = a * p.k + s;
    }
  return Configuration(p, w);
}

}  // namespace

TEST_CASE("parameter validation") {
  const Params p = Params::make(4, 2, 4, 2);
  CHECK(p.m == 2);
  CHECK(p.edges() == 8);
  CHECK_THROWS_AS(Params::make(3, 2, 4, 2), EmptyFamilyError);
  CHECK_THROWS_AS(Params::make(4, 1, 4, 2), DomainError);
  CHECK_THROWS_AS(Params::make(4, 2, 4, 4), DomainError);
  CHECK_THROWS_AS(Params::make(4, 2, 4, 0), DomainError);
  CHECK_THROWS_AS(Configuration(p, {0, 1, 2, 3, 4, 5, 6, 6}), ContractViolation);
  CHECK_THROWS_AS(Configuration(p, {0, 1, 2}), ContractViolation);
}

TEST_CASE("seed splitting is fixed") {
  CHECK(split_seed(7, 0) == split_seed(7, 0));
  CHECK(split_seed(7, 0) != split_seed(7, 1));
  CHECK(split_seed(7, 0) != split_seed(8, 0));
  // Reference value of the SplitMix64 finalizer for input 0.
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
  Rng a(1), b(1);
  for (int i = 0; i < 100; ++i) CHECK(a.below(97) == b.below(97));
  Rng c(3);
  for (int i = 0; i < 1000; ++i) {
    const double u = c.unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("sampled configurations are deterministic permutations") {
  const Params p = Params::make(4, 2, 4, 2);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Configuration c = sample_configuration(p, seed);
    CHECK(c.wiring().size() == 8);
    CHECK(is_permutation_of_range(c.wiring()));
    CHECK(sample_configuration(p, seed) == c);
  }
  const Params big = Params::make(400, 3, 4, 2);
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    CHECK(is_permutation_of_range(sample_configuration(big, seed).wiring()));
}

TEST_CASE("sampling is uniform over the 24 wirings of n=2, d=2, k=4") {
  const Params p = Params::make(2, 2, 4, 2);
  constexpr int samples = 100000;
  std::map<std::vector<std::uint32_t>, int> freq;
  for (int s = 0; s < samples; ++s) ++freq[sample_configuration(p, split_seed(99, s)).wiring()];
  CHECK(freq.size() == 24);
  const double expected = samples / 24.0;
  const double sigma = std::sqrt(samples * (1.0 / 24.0) * (23.0 / 24.0));
  for (const auto& [w, count] : freq) CHECK(std::abs(count - expected) <= 5.0 * sigma);
}

TEST_CASE("factor graph of the identity wiring") {
  const Params p = Params::make(4, 2, 4, 2);
  const FactorGraph fg = to_factor_graph(Configuration::identity(p));
  REQUIRE(fg.neighbors.size() == 2);
  CHECK(fg.neighbors[0] == std::vector<std::uint32_t>{0, 0, 1, 1});
  CHECK(fg.neighbors[1] == std::vector<std::uint32_t>{2, 2, 3, 3});
}

TEST_CASE("factor graph reproduces hand-built constraint sets and degrees") {
  const Params p = Params::make(6, 2, 3, 2);
  const std::vector<std::vector<std::uint32_t>> lists{{0, 1, 2}, {3, 4, 5}, {0, 3, 1}, {2, 4, 5}};
  const FactorGraph fg = to_factor_graph(from_constraint_lists(p, lists));
  CHECK(fg.neighbors == lists);

  const Params q = Params::make(60, 3, 4, 2);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const FactorGraph g = to_factor_graph(sample_configuration(q, seed));
    std::vector<std::uint32_t> degree(q.n, 0);
    for (const auto& nb : g.neighbors) {
      CHECK(nb.size() == q.k);
      for (auto v : nb) ++degree[v];
    }
    CHECK(std::all_of(degree.begin(), degree.end(), [&](auto x) { return x == q.d; }));
  }
}

TEST_CASE("two-cycles") {
  CHECK(count_two_cycles(Configuration::identity(Params::make(4, 2, 4, 2))) == 4);

  Params ring;
  ring.n = 6, ring.d = 1, ring.k = 2, ring.m = 3;
  for (std::uint64_t seed = 0; seed < 10; ++seed)
    CHECK(count_two_cycles(sample_configuration(ring, seed)) == 0);

  const Params p = Params::make(12, 3, 4, 2);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Configuration c = sample_configuration(p, seed);
    CHECK(count_two_cycles(c) == oracle::two_cycles(c));
  }
}

TEST_CASE("mean number of two-cycles at n=400 is close to 3") {
  const Params p = Params::make(400, 3, 4, 2);
  constexpr int samples = 10000;
  double sum = 0.0;
  for (int s = 0; s < samples; ++s)
    sum += static_cast<double>(count_two_cycles(sample_configuration(p, split_seed(5, s))));
  const double mean = sum / samples;
  CHECK(std::abs(mean - 3.0) <= 3.0 * std::sqrt(3.0 / samples));
}

TEST_CASE("simple sampler") {
  const Params p = Params::make(400, 3, 4, 2);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Configuration c = sample_simple(p, seed, 10000);
    CHECK(count_two_cycles(c) == 0);
    CHECK(sample_simple(p, seed, 10000) == c);
  }
  bool saw_limit = false;
  for (std::uint64_t seed = 0; seed < 20 && !saw_limit; ++seed) {
    try {
      const Configuration c = sample_simple(p, seed, 1);
      CHECK(count_two_cycles(c) == 0);
    } catch (const RetryLimitError& e) {
      CHECK(e.attempts() == 1);
      saw_limit = true;
    }
  }
  CHECK(saw_limit);
  CHECK_THROWS_AS(sample_simple(p, 0, 0), ContractViolation);
}

TEST_CASE("the fraction of simple configurations approaches exp(-3)") {
  const Params p = Params::make(400, 3, 4, 2);
  constexpr int samples = 20000;
  int simple = 0;
  for (int s = 0; s < samples; ++s)
    simple += count_two_cycles(sample_configuration(p, split_seed(11, s))) == 0;
  const double rate = static_cast<double>(simple) / samples;
  const double target = std::exp(-3.0);
  CHECK(std::abs(rate - target) <= 5.0 * std::sqrt(target * (1.0 - target) / samples));
}

TEST_CASE("redundant constraints") {
  const Params p = Params::make(4, 2, 4, 2);
  FactorGraph fg{p, {{0, 1, 2, 3}, {3, 2, 1, 0}}};
  CHECK(count_redundant_constraints(fg) == 1);
  FactorGraph repeated{p, {{0, 0, 1, 1}, {0, 0, 1, 1}}};
  CHECK(count_redundant_constraints(repeated) == 0);
  CHECK(count_redundant_constraints(to_factor_graph(Configuration::identity(p))) == 0);

  const Params q = Params::make(8, 2, 4, 2);
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const Configuration c = sample_configuration(q, seed);
    CHECK(count_redundant_constraints(to_factor_graph(c)) == oracle::redundant_pairs(c));
  }
}

TEST_CASE("expected redundant pairs: exhaustive oracle and decay") {
  const Params p = Params::make(4, 2, 4, 2);
  std::uint64_t configurations = 0, redundant = 0;
  oracle::for_each_configuration(p, [&](const Configuration& c) {
    ++configurations;
    redundant += oracle::redundant_pairs(c);
  });
  CHECK(configurations == 40320);
  CHECK(redundant * 35 == 8 * configurations);
  const double exact = expected_redundant_exact(p).linear();
  CHECK(std::abs(exact - 8.0 / 35.0) <= 1e-12 * (8.0 / 35.0));
  CHECK(exact == Approx(0.228571).epsilon(1e-6));

  double prev = kInf;
  for (std::uint32_t n : {100u, 1000u, 10000u, 100000u, 1000000u}) {
    const double v = expected_redundant_exact(Params::make(n, 2, 4, 2)).log();
    CHECK(v < prev);
    prev = v;
  }
  CHECK(prev < -20.0);
  Params tiny;
  tiny.n = 2, tiny.d = 2, tiny.k = 4, tiny.r = 2, tiny.m = 1;
  CHECK_THROWS_AS(expected_redundant_exact(tiny), DomainError);
}

TEST_CASE("Monte Carlo redundant-pair mean at n=4") {
  const Params p = Params::make(4, 2, 4, 2);
  constexpr int samples = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double x = static_cast<double>(
        count_redundant_constraints(to_factor_graph(sample_configuration(p, split_seed(3, s)))));
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / samples;
  const double var = (sum_sq - samples * mean * mean) / (samples - 1);
  CHECK(std::abs(mean - 8.0 / 35.0) <= 3.0 * std::sqrt(var / samples));
}

TEST_CASE("serialization") {
  const Params p = Params::make(4, 2, 4, 2);
  const Configuration id = Configuration::identity(p);
  const std::string text = serialize(id);
  CHECK(text.find("\"n\"") < text.find("\"wiring\""));
  CHECK(deserialize(text) == id);
  const Configuration rnd = sample_configuration(Params::make(30, 3, 5, 2), 4);
  CHECK(deserialize(serialize(rnd)) == rnd);

  CHECK_THROWS_AS(deserialize(R"({"n":4,"d":2,"k":4,"r":2,"m":2,"wiring":[0,1,2,3,4,5,6,6]})"),
                  ParseError);
  CHECK_THROWS_AS(deserialize(R"({"n":4,"d":2,"k":4,"r":2,"m":3,"wiring":[0,1,2,3,4,5,6,7]})"),
                  ParseError);
  CHECK_THROWS_AS(deserialize(R"({"n":4,"d":2,"k":4,"r":2,"m":2,"wiring":[0,1,2]})"), ParseError);
  CHECK_THROWS_AS(deserialize(R"({"n":4,"d":2,)"), ParseError);
  try {
    deserialize(R"({"n":4,"d":2,"k":4,"r":2,"m":2,"wiring":[0,1,2,3,4,5,6,6]})");
  } catch (const ParseError& e) {
    CHECK(e.position() == "wiring[7]");
  }
}
