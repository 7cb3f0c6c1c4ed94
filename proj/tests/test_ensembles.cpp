#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "doctest.h"

#include "difflab/ensembles.hpp"
#include "difflab/parallel.hpp"

using namespace difflab;

namespace {

// Independent oracle: enumerate every sign sequence of length n.
std::map<int, std::uint64_t> enumerate_signs(unsigned n) {
  std::map<int, std::uint64_t> ways;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    int sum = 0;
    for (unsigned b = 0; b < n; ++b) sum += ((mask >> b) & 1U) ? 1 : -1;
    ++ways[sum];
  }
  return ways;
}

}  // namespace

TEST_CASE("step distribution moments") {
  const auto r = StepDistribution::rademacher();
  CHECK(r.mean() == 0.0);
  CHECK(r.variance() == 1.0);

  const auto u = StepDistribution::uniform_symmetric(1.0);
  CHECK(u.mean() == 0.0);
  CHECK(u.variance() == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  const auto g = StepDistribution::gaussian(0.5, 2.0);
  CHECK(g.mean() == 0.5);
  CHECK(g.variance() == 4.0);
  CHECK(g.stddev() == 2.0);

  const auto t = StepDistribution::discrete_table({-1.0, 1.0}, {0.5, 0.5});
  CHECK(t.mean() == r.mean());
  CHECK(t.variance() == r.variance());

  const auto scaled = StepDistribution::discrete_table({0.0, 3.0}, {2.0, 6.0});
  CHECK(scaled.mean() == doctest::Approx(2.25));
  CHECK(scaled.variance() == doctest::Approx(0.25 * 0.75 * 9.0));
}

TEST_CASE("degenerate step laws are rejected") {
  CHECK_THROWS_AS(StepDistribution::uniform_symmetric(0.0), std::invalid_argument);
  CHECK_THROWS_AS(StepDistribution::uniform_symmetric(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(StepDistribution::gaussian(0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(StepDistribution::gaussian(NAN, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(StepDistribution::discrete_table({1.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(StepDistribution::discrete_table({1.0, 2.0}, {1.0, 0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(StepDistribution::discrete_table({1.0, 2.0}, {1.0, -1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(StepDistribution::discrete_table({1.0, 2.0}, {1.0}),
                  std::invalid_argument);
}

TEST_CASE("sampled steps follow their law") {
  for (const auto& dist : {StepDistribution::uniform_symmetric(2.0),
                           StepDistribution::gaussian(1.0, 0.5),
                           StepDistribution::discrete_table({-2.0, 0.0, 1.0}, {1, 2, 3})}) {
    double sum = 0.0;
    double sum_sq = 0.0;
    const int n = 100000;
    for (int k = 0; k < n; ++k) {
      CounterStream s(3, static_cast<std::uint64_t>(k), 1);
      const double x = dist.sample(s);
      sum += x;
      sum_sq += x * x;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(std::abs(mean - dist.mean()) < 5.0 * std::sqrt(dist.variance() / n));
    CHECK(std::abs(var / dist.variance() - 1.0) < 0.03);
  }
}

TEST_CASE("init_ensemble releases everything at the origin") {
  const auto e = init_ensemble(100000, StepDistribution::rademacher(), 42);
  CHECK(e.size() == 100000);
  CHECK(e.steps() == 0);
  for (double x : e.values()) REQUIRE(x == 0.0);
  const Moments m = sample_moments(e);
  CHECK(m.mean == 0.0);
  CHECK(m.variance == 0.0);

  const auto single = init_ensemble(1, StepDistribution::gaussian(0, 1), 7);
  CHECK(single.size() == 1);
  CHECK(single.values()[0] == 0.0);
  CHECK_THROWS_AS(init_ensemble(0, StepDistribution::rademacher(), 1),
                  std::invalid_argument);
}

TEST_CASE("advance by zero is forbidden") {
  auto e = init_ensemble(10, StepDistribution::rademacher(), 1);
  CHECK_THROWS_AS(e.advance(0), std::invalid_argument);
}

TEST_CASE("one step reproduces the step law") {
  const auto e = advance(init_ensemble(100000, StepDistribution::rademacher(), 5), 1);
  const auto d = histogram(e, {-1.5, -0.5, 0.5, 1.5});
  CHECK(d.counts[1] == 0);
  CHECK(d.counts[0] + d.counts[2] == 100000);
  CHECK(std::abs(static_cast<double>(d.counts[0]) - 50000.0) < 5.0 * std::sqrt(25000.0));
}

TEST_CASE("Rademacher variance grows as n") {
  const auto e = advance(init_ensemble(100000, StepDistribution::rademacher(), 42), 100);
  const Moments m = sample_moments(e);
  CHECK(std::abs(m.variance / 100.0 - 1.0) < 0.03);

  const auto e400 = advance(init_ensemble(100000, StepDistribution::rademacher(), 43), 400);
  const double ratio = sample_moments(e400).variance / 400.0;
  CHECK(ratio > 0.97);
  CHECK(ratio < 1.03);
}

TEST_CASE("Gaussian ensemble mean obeys the CLT bound") {
  const auto e = advance(init_ensemble(100000, StepDistribution::gaussian(0, 1), 11), 25);
  CHECK(std::abs(sample_moments(e).mean) < 5.0 * std::sqrt(25.0 / 100000.0));
}

TEST_CASE("ensemble values do not depend on advance splits or threads") {
  const auto dist = StepDistribution::uniform_symmetric(1.0);
  set_thread_count(1);
  auto a = init_ensemble(10000, dist, 99);
  a.advance(30);
  set_thread_count(4);
  auto b = init_ensemble(10000, dist, 99);
  b.advance(7);
  b.advance(1);
  b.advance(22);
  set_thread_count(0);
  REQUIRE(a.steps() == b.steps());
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a.values()[i] == b.values()[i]);
}

TEST_CASE("histogram accounting") {
  const std::vector<double> values{-3.0, -0.5, 0.0, 0.2, 0.5, 1.0, 7.0};
  const auto d = histogram(values, {-1.0, 0.0, 1.0});
  CHECK(d.n_total == 7);
  CHECK(d.counts == std::vector<std::uint64_t>{1, 3});
  CHECK(d.underflow == 1);
  CHECK(d.overflow == 2);
  CHECK(d.in_range() == 4);
  CHECK(d.mass(1) == doctest::Approx(3.0 / 7.0));
  CHECK(d.density(1) == doctest::Approx(3.0 / 7.0));
  CHECK(d.integral() == doctest::Approx(4.0 / 7.0));

  const auto zero = init_ensemble(1000, StepDistribution::rademacher(), 1);
  const auto dz = histogram(zero, {-1.5, -0.5, 0.5, 1.5});
  CHECK(dz.counts[1] == 1000);

  CHECK_THROWS_AS(histogram(values, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(histogram(values, {1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(histogram(values, {0.0, INFINITY}), std::invalid_argument);
}

TEST_CASE("densities integrate to one when everything is in range") {
  const auto e = advance(init_ensemble(20000, StepDistribution::gaussian(0, 1), 3), 10);
  const auto d = histogram(e);
  CHECK(d.in_range() == d.n_total);
  CHECK(d.integral() == doctest::Approx(1.0).epsilon(1e-12));
  double sum = 0.0;
  for (std::size_t i = 0; i < d.bins(); ++i) sum += d.density(i) * d.width(i);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Freedman-Diaconis edges cover the data") {
  std::vector<double> v;
  for (int i = 0; i < 1000; ++i) v.push_back(std::sin(i * 1.3) * 10.0);
  const auto edges = freedman_diaconis_edges(v);
  CHECK(edges.front() <= *std::min_element(v.begin(), v.end()));
  CHECK(edges.back() > *std::max_element(v.begin(), v.end()));
  CHECK(histogram(v, edges).in_range() == v.size());

  const std::vector<double> same(50, 3.0);
  const auto one = freedman_diaconis_edges(same);
  CHECK(histogram(same, one).in_range() == 50);
}

TEST_CASE("lattice and uniform edges") {
  CHECK(lattice_edges(0.0, 2.0, -1, 1) == std::vector<double>{-3, -1, 1, 3});
  CHECK(uniform_edges(0.0, 1.0, 4) == std::vector<double>{0, 0.25, 0.5, 0.75, 1});
  CHECK_THROWS(uniform_edges(1.0, 0.0, 4));
  CHECK_THROWS(uniform_edges(0.0, 1.0, 0));
}

TEST_CASE("sample moments") {
  const std::vector<double> pm{-1.0, 1.0};
  const Moments m = sample_moments(pm);
  CHECK(m.mean == 0.0);
  CHECK(m.variance == 2.0);
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(sample_moments(one), std::invalid_argument);
}

TEST_CASE("inject_realizations renormalizes exactly") {
  EmpiricalDensity d;
  d.edges = {0, 1, 2, 3};
  d.counts = {2, 3, 5};
  d.n_total = 10;
  const auto p = inject_realizations(d, 1, 5);
  CHECK(p.denominator == 15);
  CHECK(p.numerators == std::vector<std::uint64_t>{7, 3, 5});
  CHECK(p.numerator_sum() == p.denominator);
  CHECK(p.probability(0) == 7.0 / 15.0);

  const auto same = inject_realizations(d, 2, 0);
  CHECK(same.denominator == 10);
  CHECK(same.numerators == d.counts);

  CHECK_THROWS(inject_realizations(d, 0, 1));
  CHECK_THROWS(inject_realizations(d, 4, 1));
}

TEST_CASE("inject_realizations scales every other interval by one factor") {
  const auto e = advance(init_ensemble(777, StepDistribution::rademacher(), 4), 9);
  const auto d = histogram(e, lattice_edges(-9.0, 2.0, 0, 9));
  REQUIRE(d.in_range() == d.n_total);
  const std::uint64_t extra = 123;
  const auto p = inject_realizations(d, 4, extra);
  for (std::size_t i = 0; i < d.bins(); ++i) {
    if (i == 3) continue;
    // p_i * (N_Total + extra) == N_i, so p_i / (N_i / N_Total) is one factor.
    CHECK(p.numerators[i] == d.counts[i]);
    if (d.counts[i] > 0) {
      CHECK(p.probability(i) / d.mass(i) ==
            doctest::Approx(static_cast<double>(d.n_total) /
                            static_cast<double>(d.n_total + extra)));
    }
  }
  CHECK(p.denominator == d.n_total + extra);
  CHECK(p.numerators[3] == d.counts[3] + extra);
  CHECK(p.numerator_sum() == p.denominator);
}

TEST_CASE("exact Rademacher pmf matches enumeration") {
  const auto p1 = exact_pmf_rademacher(1);
  CHECK(p1.ways == std::vector<std::uint64_t>{1, 1});
  CHECK(p1.probability(0) == 0.5);
  const auto p2 = exact_pmf_rademacher(2);
  CHECK(p2.value(0) == -2);
  CHECK(p2.probability(1) == 0.5);
  CHECK(p2.probability(2) == 0.25);

  for (unsigned n : {3u, 7u, 12u, 16u}) {
    const auto pmf = exact_pmf_rademacher(n);
    const auto oracle = enumerate_signs(n);
    REQUIRE(pmf.ways.size() == n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
      CHECK(pmf.ways[k] == oracle.at(static_cast<int>(pmf.value(k))));
    }
  }

  // Second moment of X(12) by enumeration of all 4096 sequences.
  const auto oracle = enumerate_signs(12);
  std::uint64_t second = 0;
  for (const auto& [x, w] : oracle) second += static_cast<std::uint64_t>(x * x) * w;
  CHECK(second == 12 * 4096);
  const auto pmf = exact_pmf_rademacher(12);
  double var = 0.0;
  for (std::size_t k = 0; k <= 12; ++k) {
    var += pmf.probability(k) * static_cast<double>(pmf.value(k) * pmf.value(k));
  }
  CHECK(var == 12.0);

  CHECK_THROWS_AS(exact_pmf_rademacher(kMaxExactRademacherSteps + 1), std::invalid_argument);
}
