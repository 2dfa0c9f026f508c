#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "mindriven/parallel.hpp"
#include "mindriven/rng.hpp"
#include "mindriven/stats.hpp"
#include "mindriven/text.hpp"

using namespace mindriven;

TEST_CASE("streams are reproducible and distinct") {
  RandomStream a(42, 7, StreamRole::Simulation), b(42, 7, StreamRole::Simulation);
  RandomStream c(42, 8, StreamRole::Simulation), d(42, 7, StreamRole::Coupling);
  std::set<std::uint64_t> firsts;
  for (int q = 0; q < 100; ++q) {
    const auto v = a();
    CHECK(v == b());
    firsts.insert(v);
  }
  CHECK(firsts.size() == 100);
  CHECK(RandomStream(42, 7, StreamRole::Simulation)() != c());
  CHECK(RandomStream(42, 7, StreamRole::Simulation)() != d());
  CHECK(a.split(3)() == b.split(3)());
  CHECK(a.split(3)() != a.split(4)());
}

TEST_CASE("uniform_int is unbiased on a small range") {
  RandomStream rng(1, 0, StreamRole::Simulation);
  const int draws = 120000;
  std::vector<int> hist(6, 0);
  for (int q = 0; q < draws; ++q) {
    const auto v = rng.uniform_int(2, 7);
    REQUIRE(v >= 2);
    REQUIRE(v <= 7);
    ++hist[v - 2];
  }
  double chi2 = 0.0;
  const double expect = draws / 6.0;
  for (int h : hist) chi2 += (h - expect) * (h - expect) / expect;
  CHECK(chi2 < 20.5);  // 0.1% point of chi-square with 5 dof
  CHECK(rng.uniform_int(5, 5) == 5);
}

TEST_CASE("exponential variates have unit mean") {
  RandomStream rng(2, 0, StreamRole::Simulation);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int q = 0; q < n; ++q) {
    const double e = rng.exponential();
    REQUIRE(e >= 0.0);
    REQUIRE(std::isfinite(e));
    sum += e;
    sq += e * e;
  }
  CHECK(std::abs(sum / n - 1.0) < 4.0 / std::sqrt(n));
  CHECK(std::abs(sq / n - 2.0) < 0.05);
}

TEST_CASE("parallel_for fills every index once") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS(parallel_for(10, 3, [](std::size_t i) {
    if (i == 5) throw std::runtime_error("boom");
  }));
}

TEST_CASE("quantiles and fits") {
  CHECK(stats::median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(stats::median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK(stats::quantile({0.0, 10.0}, 0.25) == 2.5);
  const auto fit = stats::least_squares({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(fit.intercept == doctest::Approx(1.0));
  CHECK(fit.slope_stderr == doctest::Approx(0.0));
  const auto w = stats::weighted_least_squares({0, 1, 2}, {0, 1, 5}, {1, 1, 1e-12});
  CHECK(w.slope == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(stats::standard_error({1.0, 3.0}) == doctest::Approx(1.0));
}

TEST_CASE("two-sample KS statistic") {
  CHECK(stats::ks_statistic({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(stats::ks_statistic({1, 2}, {3, 4}) == 1.0);
  CHECK(stats::ks_statistic({1, 3}, {2, 4}) == doctest::Approx(0.5));
  CHECK(stats::ks_critical_1pct(10000, 10000) == doctest::Approx(1.628 * std::sqrt(2e-4)));
}

TEST_CASE("text helpers") {
  CHECK(trim("  a b ") == "a b");
  CHECK(split("1, 2 ,3", ',') == std::vector<std::string>{"1", "2", "3"});
  CHECK(try_parse_double("+1.5e-3") == 1.5e-3);
  CHECK_FALSE(try_parse_double("1.5x").has_value());
  CHECK(try_parse_uint("42") == 42ULL);
  CHECK_FALSE(try_parse_uint("-1").has_value());
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
}
