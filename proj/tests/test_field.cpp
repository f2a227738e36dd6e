#include <doctest.h>

#include "gosp/field.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <set>
#include <thread>

using namespace gosp;

TEST_CASE("extreme probabilities") {
  for (Coord x = -50; x < 50; ++x) {
    Site s{x, x * 7 + 3};
    CHECK_FALSE(site_open(FieldSpec{11, 0.0}, s));
    CHECK(site_open(FieldSpec{11, 1.0}, s));
  }
}

TEST_CASE("purity and schedule independence") {
  FieldSpec f{42, 0.5};
  std::vector<char> first(4096), second(4096);
  auto fill = [&](std::vector<char>& out, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Site s{static_cast<Coord>(i % 64) - 32, static_cast<Coord>(i / 64)};
      out[i] = site_open(f, s);
    }
  };
  fill(first, 0, first.size());
  std::thread a([&] { fill(second, 2048, 4096); });
  std::thread b([&] { fill(second, 0, 2048); });
  a.join();
  b.join();
  CHECK(first == second);
  // row-wise and cached access agree with the scalar query
  Field view(f);
  auto cached = view.with_cache(-40, 40, 0, 70);
  for (std::size_t i = 0; i < first.size(); ++i) {
    Coord x = static_cast<Coord>(i % 64) - 32, t = static_cast<Coord>(i / 64);
    CHECK(view.open_in_row1(view.row(t), x) == (first[i] != 0));
    CHECK(cached.open1(x, t) == (first[i] != 0));
  }
}

TEST_CASE("dimension mismatch and unset sprinkle") {
  FieldSpec f{1, 0.5};
  Site bad{1, 2, 3};
  CHECK_THROWS_AS(site_open(f, bad), std::invalid_argument);
  Site ok{1, 2};
  CHECK_THROWS_AS(sprinkled_open(f, ok), SprinkleUnset);
}

TEST_CASE("monotone in p on a shared seed") {
  for (Coord x = -200; x < 200; ++x) {
    Site s{x, 5};
    bool prev = false;
    for (double p : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      bool now = site_open(FieldSpec{9, p}, s);
      if (prev) CHECK(now);
      prev = now;
    }
  }
}

TEST_CASE("sprinkled field") {
  FieldSpec zero{5, 0.5, 0.0};
  FieldSpec f{5, 0.5, 0.2};
  long n = 1000000, hits = 0;
  for (long i = 0; i < n; ++i) {
    Site s{i % 1000, i / 1000};
    if (site_open(f, s)) CHECK(sprinkled_open(f, s));
    if (i < 20000) CHECK(sprinkled_open(zero, s) == site_open(zero, s));
    hits += sprinkled_open(f, s);
  }
  double freq = static_cast<double>(hits) / n;
  double se = std::sqrt(0.7 * 0.3 / n);
  CHECK(std::abs(freq - 0.7) <= 3 * se);
}

TEST_CASE("chi-square uniformity of the site hash") {
  FieldSpec f{2024, 0.5};
  const int bins = 100;
  std::vector<long> counts(bins, 0);
  const long n = 1000000;
  double corr = 0;
  double prev = 0;
  for (long i = 0; i < n; ++i) {
    Site s{i % 1000 - 500, i / 1000};
    double u = site_uniform(f, s);
    counts[static_cast<int>(u * bins)]++;
    if (i % 1000) corr += (u - 0.5) * (prev - 0.5);
    prev = u;
  }
  double expected = static_cast<double>(n) / bins, stat = 0;
  for (long c : counts) stat += (c - expected) * (c - expected) / expected;
  boost::math::chi_squared dist(bins - 1);
  double pvalue = 1 - boost::math::cdf(dist, stat);
  CHECK(pvalue > 1e-3);
  // neighbouring sites uncorrelated: var((u-1/2)(u'-1/2)) = 1/144
  double m = corr / (n - n / 1000);
  CHECK(std::abs(m) < 4 * std::sqrt(1.0 / 144 / n));
}

TEST_CASE("replica seeds are distinct") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(replica_seed(1, i));
  CHECK(seen.size() == 10000);
  CHECK(replica_seed(1, 0) != replica_seed(2, 0));
}
