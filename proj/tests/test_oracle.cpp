#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "oracle.hpp"
#include "test_util.hpp"
#include "wsbm/numeric.hpp"
#include "wsbm/weight_likelihood.hpp"

using namespace wsbm;

TEST_CASE("partition enumeration counts Bell numbers") {
  CHECK(oracle::all_partitions(1).size() == 1);
  CHECK(oracle::all_partitions(3).size() == 5);
  CHECK(oracle::all_partitions(4).size() == 15);
  CHECK(oracle::all_partitions(6).size() == 203);
  // restricted growth: first label is always 0
  for (const auto& p : oracle::all_partitions(4)) CHECK(p[0] == 0);
}

TEST_CASE("posterior normalizes and flags the argmax") {
  Rng rng(3);
  WeightedGraph g = testutil::random_graph(5, 0.6, rng);
  auto post = oracle::posterior_flat(g, {{Family::ExponentialMicro, 1, {}}},
                                     oracle::Adjacency::DegreeCorrected);
  double total = std::accumulate(post.prob.begin(), post.prob.end(), 0.0);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  for (double p : post.prob) CHECK(post.prob[post.argmax] >= p);
}

TEST_CASE("constrained samplers respect their constraints") {
  Rng rng(17);
  auto xs = oracle::sample_fixed_sum_exponential(5, 12.0, rng);
  CHECK(std::accumulate(xs.begin(), xs.end(), 0.0) == doctest::Approx(12.0));
  for (double x : xs) CHECK(x >= 0.0);

  auto ns = oracle::sample_fixed_moments_normal(6, 3.0, 9.0, rng);
  double s = 0.0, s2 = 0.0;
  for (double x : ns) {
    s += x;
    s2 += x * x;
  }
  CHECK(s == doctest::Approx(3.0));
  CHECK(s2 == doctest::Approx(9.0));

  auto cs = oracle::sample_fixed_sum_composition(4, 9, rng);
  CHECK(std::accumulate(cs.begin(), cs.end(), std::int64_t(0)) == 9);

  auto bs = oracle::sample_fixed_sum_binomial(3, 4, 7, rng);
  CHECK(std::accumulate(bs.begin(), bs.end(), std::int64_t(0)) == 7);
  for (auto b : bs) CHECK(b <= 4);

  auto ms = oracle::sample_fixed_sum_multinomial(3, 11, rng);
  CHECK(std::accumulate(ms.begin(), ms.end(), std::int64_t(0)) == 11);
}

TEST_CASE("sampled coordinates reproduce the closed-form marginals") {
  Rng rng(23);
  const int draws = 100000;

  SUBCASE("exponential") {
    // CDF comparison on a fixed grid
    const int n = 4;
    const double mu = 8.0;
    std::vector<double> values;
    for (int i = 0; i < draws; ++i)
      values.push_back(oracle::sample_fixed_sum_exponential(n, mu, rng)[0]);
    std::sort(values.begin(), values.end());
    for (double q : {1.0, 2.0, 4.0, 6.0}) {
      double emp = double(std::lower_bound(values.begin(), values.end(), q) -
                          values.begin()) /
                   draws;
      double cdf = integrate_adaptive(
          [&](double x) {
            return micro_marginal_pdf(Family::ExponentialMicro, x, n, mu, 0.0);
          },
          0.0, q, 1e-10);
      CHECK(emp == doctest::Approx(cdf).epsilon(0.02));
    }
  }

  SUBCASE("geometric composition") {
    const int n = 2;
    const std::int64_t mu = 3;
    std::vector<int> hist(std::size_t(mu + 1), 0);
    for (int i = 0; i < draws; ++i)
      hist[std::size_t(oracle::sample_fixed_sum_composition(n, mu, rng)[0])] += 1;
    for (std::int64_t x = 0; x <= mu; ++x) {
      double expect =
          micro_marginal_pdf(Family::GeometricMicro, double(x), n, double(mu), 0.0);
      CHECK(double(hist[std::size_t(x)]) / draws ==
            doctest::Approx(expect).epsilon(0.05));
      CHECK(expect == doctest::Approx(0.25));  // 4 equiprobable compositions
    }
  }

  SUBCASE("binomial placement") {
    const int n = 3;
    const std::int64_t M = 2, mu = 3;
    std::vector<int> hist(std::size_t(M + 1), 0);
    for (int i = 0; i < draws; ++i)
      hist[std::size_t(oracle::sample_fixed_sum_binomial(n, M, mu, rng)[0])] += 1;
    for (std::int64_t x = 0; x <= M; ++x) {
      double expect = micro_marginal_pdf(Family::BinomialMicro, double(x), n,
                                         double(mu), 0.0, M);
      CHECK(double(hist[std::size_t(x)]) / draws ==
            doctest::Approx(expect).epsilon(0.05));
    }
  }

  SUBCASE("poisson allocation") {
    const int n = 3;
    const std::int64_t mu = 5;
    std::vector<int> hist(std::size_t(mu + 1), 0);
    for (int i = 0; i < draws; ++i)
      hist[std::size_t(oracle::sample_fixed_sum_multinomial(n, mu, rng)[0])] += 1;
    for (std::int64_t x = 0; x <= mu; ++x) {
      double expect =
          micro_marginal_pdf(Family::PoissonMicro, double(x), n, double(mu), 0.0);
      if (expect < 0.01) continue;
      CHECK(double(hist[std::size_t(x)]) / draws ==
            doctest::Approx(expect).epsilon(0.08));
    }
  }

  SUBCASE("normal sphere slice") {
    const int n = 5;
    const double mu = 2.0, nu = 6.0;
    std::vector<double> values;
    for (int i = 0; i < draws; ++i)
      values.push_back(oracle::sample_fixed_moments_normal(n, mu, nu, rng)[0]);
    std::sort(values.begin(), values.end());
    auto [lo, hi] = micro_marginal_support(Family::NormalMicro, n, mu, nu);
    for (double frac : {0.3, 0.5, 0.7}) {
      double q = lo + frac * (hi - lo);
      double emp = double(std::lower_bound(values.begin(), values.end(), q) -
                          values.begin()) /
                   draws;
      double mid = 0.5 * (lo + q), half = 0.5 * (q - lo);
      double cdf = integrate_adaptive(
          [&](double t) {
            double x = mid + half * std::sin(t);
            return micro_marginal_pdf(Family::NormalMicro, x, n, mu, nu) * half *
                   std::cos(t);
          },
          -M_PI / 2.0, M_PI / 2.0, 1e-10);
      CHECK(emp == doctest::Approx(cdf).epsilon(0.03));
    }
  }
}
