#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "fcs/errors.hpp"
#include "fcs/moment_cumulant.hpp"

using namespace fcs;

TEST_CASE("enumerate_partitions: counts follow the Bell recurrence") {
  CHECK(enumerate_partitions(1).size() == 1);
  CHECK(enumerate_partitions(3).size() == 5);
  CHECK(enumerate_partitions(8).size() == 4140);
  for (int k = 1; k <= 9; ++k) {
    CHECK(enumerate_partitions(k).size() == bell_number(k));
  }
  CHECK(bell_number(12) == 4213597);
}

TEST_CASE("enumerate_partitions: blocks are disjoint, covering, canonical, unique") {
  for (int k : {4, 6}) {
    std::set<std::vector<std::vector<int>>> seen;
    for (const SetPartition& p : enumerate_partitions(k)) {
      std::set<int> all;
      int prev_least = 0;
      for (const auto& block : p.blocks) {
        REQUIRE_FALSE(block.empty());
        CHECK(block.front() > prev_least);  // blocks ordered by least element
        prev_least = block.front();
        for (size_t i = 0; i + 1 < block.size(); ++i) CHECK(block[i] < block[i + 1]);
        for (int v : block) {
          CHECK(all.insert(v).second);  // disjoint
        }
      }
      CHECK(static_cast<int>(all.size()) == k);  // covering
      CHECK(*all.begin() == 1);
      CHECK(*all.rbegin() == k);
      CHECK(seen.insert(p.blocks).second);  // no duplicates
    }
  }
}

TEST_CASE("enumerate_partitions: order cap") {
  CHECK_THROWS_AS((void)enumerate_partitions(13), Error);
}

TEST_CASE("cumulants_to_moments: deterministic variable and Poisson") {
  CumulantVector point;
  point.values = {2.5, 0.0, 0.0};
  const MomentVector m = cumulants_to_moments(point);
  CHECK(m[1] == doctest::Approx(2.5));
  CHECK(m[2] == doctest::Approx(2.5 * 2.5));
  CHECK(m[3] == doctest::Approx(2.5 * 2.5 * 2.5));

  const double rate = 0.8;
  CumulantVector poisson;
  poisson.values = {rate, rate};
  CHECK(cumulants_to_moments(poisson)[2] == doctest::Approx(rate + rate * rate));
}

TEST_CASE("cumulants_to_moments: third moment identity") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    CumulantVector c;
    c.values = {dist(rng), dist(rng), dist(rng)};
    const MomentVector m = cumulants_to_moments(c);
    const double expected = c[3] + 3.0 * c[2] * c[1] + c[1] * c[1] * c[1];
    CHECK(m[3] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("moments_to_cumulants: point mass collapses to first order") {
  const double a = -1.3;
  MomentVector m;
  m.values = {a, a * a, a * a * a, a * a * a * a};
  const CumulantVector c = moments_to_cumulants(m);
  CHECK(c[1] == doctest::Approx(a));
  for (int k = 2; k <= 4; ++k) CHECK(std::abs(c[k]) <= 1e-12);
}

TEST_CASE("moments_to_cumulants: binomial from its pmf") {
  const int n = 6;
  const double p = 0.35;
  MomentVector m;
  m.values.resize(4, 0.0);
  for (int k = 1; k <= 4; ++k) {
    double acc = 0.0;
    for (int j = 0; j <= n; ++j) {
      double pmf = std::exp(std::lgamma(n + 1.0) - std::lgamma(j + 1.0) -
                            std::lgamma(n - j + 1.0)) *
                   std::pow(p, j) * std::pow(1 - p, n - j);
      acc += pmf * std::pow(j, k);
    }
    m.values[static_cast<size_t>(k) - 1] = acc;
  }
  const CumulantVector c = moments_to_cumulants(m);
  CHECK(c[1] == doctest::Approx(n * p).epsilon(1e-12));
  CHECK(c[2] == doctest::Approx(n * p * (1 - p)).epsilon(1e-12));
  CHECK(c[3] == doctest::Approx(n * p * (1 - p) * (1 - 2 * p)).epsilon(1e-10));
}

TEST_CASE("roundtrip: cumulants -> moments -> cumulants is the identity") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int k_max : {4, 8, 10}) {
    CumulantVector c;
    for (int k = 0; k < k_max; ++k) c.values.push_back(dist(rng));
    const CumulantVector back = moments_to_cumulants(cumulants_to_moments(c));
    for (int k = 1; k <= k_max; ++k) {
      CHECK(back[k] == doctest::Approx(c[k]).epsilon(1e-12));
    }
  }
}
