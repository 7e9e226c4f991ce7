#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "test_util.hpp"
#include "wsbm/numeric.hpp"
#include "wsbm/weight_likelihood.hpp"

using namespace wsbm;

namespace {

Cell make_cell(std::int64_t m, std::int64_t w, double mu, double nu) {
  Cell c;
  c.m = m;
  c.w = w;
  c.ch = {{mu, nu}};
  return c;
}

ChannelModel model(Family f, std::vector<double> hyper = {}, std::int64_t M = 1) {
  ChannelModel cm;
  cm.family = f;
  cm.hyper = std::move(hyper);
  cm.M = M;
  return cm;
}

// marginal of one value out of n, continuous part integrated numerically,
// atoms added exactly
double marginal_total_mass(Family f, std::int64_t n, double mu, double nu,
                           std::int64_t M) {
  double total = 0.0;
  if (family_is_discrete(f)) {
    for (std::int64_t x = 0; x <= std::llround(mu); ++x)
      total += micro_marginal_pdf(f, double(x), n, mu, nu, M);
  } else {
    auto [lo, hi] = micro_marginal_support(f, n, mu, nu);
    if (hi > lo)
      total += integrate_adaptive(
          [&](double x) { return micro_marginal_pdf(f, x, n, mu, nu, M); }, lo,
          hi, 1e-10);
    for (const auto& a : micro_marginal_atoms(f, n, mu, nu)) total += a.mass;
  }
  return total;
}

}  // namespace

TEST_CASE("exponential cell terms") {
  ChannelModel cm = model(Family::ExponentialMicro);
  CHECK(ll_cell(cm, 1, make_cell(1, 1, 5.0, 25.0), 0) == doctest::Approx(0.0));
  // three values summing to 6: 2!/6^2
  CHECK(ll_cell(cm, 1, make_cell(3, 3, 6.0, 14.0), 0) ==
        doctest::Approx(std::log(1.0 / 18.0)));
  // all-zero cell hits the guard
  CHECK(ll_cell(cm, 1, make_cell(2, 2, 0.0, 0.0), 0) == 0.0);
}

TEST_CASE("exponential hierarchy uses nonzero-cell counts upstairs") {
  // two level-1 cells (m=2, mu=4) and (m=1, mu=1) merging into one level-2
  // cell: total must be ln(1!/4) + 0 + ln(1!/5)
  WeightedGraph g = testutil::build_graph(4, false,
                                          {{0, 1, {1.0, 3.0}}, {2, 3, {1.0}}});
  HierarchicalPartition p;
  p.levels = {{0, 0, 1, 1}, {0, 0, 0, 0}};
  HierState st(g, p);
  ChannelModel cm = model(Family::ExponentialMicro);
  CHECK(ll_weights(cm, st, 0) ==
        doctest::Approx(-std::log(4.0) - std::log(5.0)).epsilon(1e-12));
}

TEST_CASE("normal pair with values -1 and 1") {
  ChannelModel cm = model(Family::NormalMicro);
  // per-pair factor Gamma(1/2) sqrt(2) / (pi^(1/2) 2^(-1/2)) = 2, but the
  // cell with w = 2 also counts in the per-level and global factors
  CHECK(ll_cell(cm, 1, make_cell(2, 2, 0.0, 2.0), 0) ==
        doctest::Approx(std::log(2.0)));
  WeightedGraph g = testutil::build_graph(2, false, {{0, 1, {-1.0, 1.0}}});
  HierState st(g, HierarchicalPartition::single_group(2));
  // level 1: cell ln 2, level term ln m_z + ln(0!) - 0 = ln 1 = 0, global
  // term with L = 1 populated level: ln(0!) - 0 = 0
  CHECK(ll_weights(cm, st, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("normal zero-variance cells hit the guard") {
  ChannelModel cm = model(Family::NormalMicro);
  CHECK(ll_cell(cm, 1, make_cell(3, 3, 6.0, 12.0), 0) == 0.0);  // all equal to 2
  CHECK(ll_cell(cm, 1, make_cell(1, 1, 4.0, 16.0), 0) == 0.0);
}

TEST_CASE("geometric cell terms") {
  ChannelModel cm = model(Family::GeometricMicro);
  // 4 compositions of 3 into 2 parts
  CHECK(ll_cell(cm, 1, make_cell(2, 2, 3.0, 5.0), 0) ==
        doctest::Approx(-std::log(4.0)));
  CHECK(ll_cell(cm, 1, make_cell(2, 2, 0.0, 0.0), 0) == 0.0);
  CHECK(ll_cell(cm, 1, make_cell(1, 1, 7.0, 49.0), 0) == doctest::Approx(0.0));
}

TEST_CASE("binomial cell terms") {
  ChannelModel cm = model(Family::BinomialMicro, {}, 2);
  // M=2, two values {1,1}: level-1 cell term is -ln C(4,2); with the edge
  // constant sum ln C(2,1)^2 the likelihood is 4/6
  double cell = ll_cell(cm, 1, make_cell(2, 2, 2.0, 2.0), 0);
  double edge_const = 2.0 * std::log(2.0);
  CHECK(cell + edge_const == doctest::Approx(std::log(2.0 / 3.0)));
  // M=1 collapses to -ln C(m, mu)
  ChannelModel cb = model(Family::BinomialMicro, {}, 1);
  CHECK(ll_cell(cb, 1, make_cell(3, 3, 2.0, 2.0), 0) ==
        doctest::Approx(-std::log(3.0)));
  CHECK(ll_cell(cm, 1, make_cell(2, 2, 0.0, 0.0), 0) == 0.0);
}

TEST_CASE("poisson cell terms") {
  ChannelModel cm = model(Family::PoissonMicro);
  // two values {1,1}: (1/(1!1!)) * 2!/2^2 = 1/2; the x! constants are zero
  CHECK(ll_cell(cm, 1, make_cell(2, 2, 2.0, 2.0), 0) ==
        doctest::Approx(std::log(0.5)));
  // single edge with value k is certain
  CHECK(ll_cell(cm, 1, make_cell(1, 1, 5.0, 25.0), 0) ==
        doctest::Approx(ln_factorial(5)));
  CHECK(ll_cell(cm, 1, make_cell(2, 2, 0.0, 0.0), 0) == 0.0);
}

TEST_CASE("single-edge poisson likelihood is one") {
  WeightedGraph g = testutil::build_graph(2, false, {{0, 1, {5.0}}});
  HierState st(g, HierarchicalPartition::single_group(2));
  PreparedGraph pg;
  GraphBundle bundle;
  bundle.graph = g;
  bundle.channels.resize(1);
  bundle.channels[0].family = Family::PoissonMicro;
  pg = prepare_graph(bundle);
  CHECK(ll_weights(pg.channels[0], st, 0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("conjugate closed forms match integration oracles") {
  // exponential: alpha=beta=1, one value x=1 -> 1/4
  CHECK(ll_cell(model(Family::ExponentialConjugate, {1.0, 1.0}), 1,
                make_cell(1, 1, 1.0, 1.0), 0) == doctest::Approx(std::log(0.25)));
  // geometric uninformative, one value x=2 -> 1/12
  CHECK(ll_cell(model(Family::GeometricConjugate, {1.0, 1.0}), 1,
                make_cell(1, 1, 2.0, 4.0), 0) ==
        doctest::Approx(std::log(1.0 / 12.0)));
  // poisson alpha=beta=1, one value x=2 -> 1/8 including the 1/x! constant
  double cell = ll_cell(model(Family::PoissonConjugate, {1.0, 1.0}), 1,
                        make_cell(1, 1, 2.0, 4.0), 0);
  CHECK(cell - ln_factorial(2) == doctest::Approx(std::log(0.125)));
}

TEST_CASE("conjugate cells only contribute at the bottom level") {
  for (Family f : {Family::ExponentialConjugate, Family::GeometricConjugate,
                   Family::PoissonConjugate})
    CHECK(ll_cell(model(f, {1.0, 1.0}), 2, make_cell(3, 2, 4.0, 10.0), 0) == 0.0);
}

TEST_CASE("normal conjugate equals sequential predictive factorization") {
  // independent route: p(x1, x2) = t(x1) * t(x2 | x1) with known posterior
  // predictive t-densities
  double mu0 = 0.4, k0 = 2.0, n0 = 3.0, s0 = 1.5;
  double x1 = 0.3, x2 = 1.1;

  auto t_density = [](double x, double dof, double loc, double scale2) {
    return std::exp(std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
                    0.5 * std::log(dof * M_PI * scale2) -
                    0.5 * (dof + 1.0) *
                        std::log1p((x - loc) * (x - loc) / (dof * scale2)));
  };
  double p1 = t_density(x1, n0, mu0, s0 * (k0 + 1.0) / k0);
  double k1 = k0 + 1.0, n1 = n0 + 1.0;
  double mu1 = (k0 * mu0 + x1) / k1;
  double s1 = (n0 * s0 + (k0 / k1) * (x1 - mu0) * (x1 - mu0)) / n1;
  double p2 = t_density(x2, n1, mu1, s1 * (k1 + 1.0) / k1);

  ChannelModel cm = model(Family::NormalConjugate, {mu0, k0, n0, s0});
  Cell cell = make_cell(2, 2, x1 + x2, x1 * x1 + x2 * x2);
  CHECK(ll_cell(cm, 1, cell, 0) ==
        doctest::Approx(std::log(p1) + std::log(p2)).epsilon(1e-10));
}

TEST_CASE("micro marginals match frozen enumeration values") {
  // uniform on [0, 2] for two exponentials summing to 2
  CHECK(micro_marginal_pdf(Family::ExponentialMicro, 0.7, 2, 2.0, 0.0) ==
        doctest::Approx(0.5));
  CHECK(micro_marginal_pdf(Family::GeometricMicro, 1.0, 2, 3.0, 0.0) ==
        doctest::Approx(0.25));
  CHECK(micro_marginal_pdf(Family::BinomialMicro, 1.0, 2, 2.0, 0.0, 2) ==
        doctest::Approx(2.0 / 3.0));
  // poisson marginal is Binomial(mu, 1/n)
  CHECK(micro_marginal_pdf(Family::PoissonMicro, 1.0, 2, 2.0, 0.0) ==
        doctest::Approx(0.5));
  CHECK(micro_marginal_pdf(Family::ExponentialMicro, 2.5, 2, 2.0, 0.0) == 0.0);
}

TEST_CASE("micro marginals normalize") {
  Rng rng(17);
  for (std::int64_t n : {2, 3, 5, 20}) {
    for (int trial = 0; trial < 5; ++trial) {
      double mu = 1.0 + 10.0 * rng.uniform();
      CHECK(marginal_total_mass(Family::ExponentialMicro, n, mu, 0.0, 1) ==
            doctest::Approx(1.0).epsilon(1e-8));
      std::int64_t mui = 1 + std::int64_t(rng.uniform_under(20));
      CHECK(marginal_total_mass(Family::GeometricMicro, n, double(mui), 0.0, 1) ==
            doctest::Approx(1.0).epsilon(1e-10));
      std::int64_t M = 1 + std::int64_t(rng.uniform_under(4));
      std::int64_t mub = std::int64_t(rng.uniform_under(std::uint64_t(M * n))) + 1;
      CHECK(marginal_total_mass(Family::BinomialMicro, n, double(mub), 0.0, M) ==
            doctest::Approx(1.0).epsilon(1e-10));
      CHECK(marginal_total_mass(Family::PoissonMicro, n, double(mui), 0.0, 1) ==
            doctest::Approx(1.0).epsilon(1e-10));
      if (n >= 3) {
        double m1 = 4.0 * rng.normal();
        double z = 1.0 + 3.0 * rng.uniform();
        double nu = z + m1 * m1 / double(n);
        // sqrt substitution from each endpoint tames the edge singularity;
        // the rectangle term covers the cancellation-corrupted cutoff zone
        auto [lo, hi] = micro_marginal_support(Family::NormalMicro, n, m1, nu);
        double mid = 0.5 * (lo + hi), mass = 0.0;
        for (int side = 0; side < 2; ++side) {
          double span = std::sqrt(side ? hi - mid : mid - lo), u0 = 1e-5 * span;
          auto g = [&](double u) {
            double x = side ? hi - u * u : lo + u * u;
            return micro_marginal_pdf(Family::NormalMicro, x, n, m1, nu) * 2.0 * u;
          };
          mass += integrate_adaptive(g, u0, span, 1e-9) + g(u0) * u0;
        }
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("atomic marginal cases") {
  auto a1 = micro_marginal_atoms(Family::ExponentialMicro, 1, 3.5, 0.0);
  REQUIRE(a1.size() == 1);
  CHECK(a1[0].x == doctest::Approx(3.5));
  CHECK(a1[0].mass == doctest::Approx(1.0));

  // two normal values with mean 1 and sum of squares 5: values are -1 and 3
  auto a2 = micro_marginal_atoms(Family::NormalMicro, 2, 2.0, 10.0);
  REQUIRE(a2.size() == 2);
  CHECK(a2[0].x == doctest::Approx(-1.0));
  CHECK(a2[1].x == doctest::Approx(3.0));
  CHECK(a2[0].mass + a2[1].mass == doctest::Approx(1.0));

  CHECK(micro_marginal_pdf(Family::GeometricMicro, 4.0, 1, 4.0, 0.0) ==
        doctest::Approx(1.0));
}

TEST_CASE("marginals converge to canonical distributions") {
  // exponential: mean fixed at 1
  auto sup_exp = [](std::int64_t n) {
    double mu = double(n);
    double worst = 0.0;
    for (int i = 1; i < 400; ++i) {
      double x = 8.0 * i / 400.0;
      double f = micro_marginal_pdf(Family::ExponentialMicro, x, n, mu, 0.0);
      worst = std::max(worst, std::abs(f - std::exp(-x)));
    }
    return worst;
  };
  CHECK(sup_exp(1000) < 0.01);
  CHECK(sup_exp(20) < sup_exp(2));
  CHECK(sup_exp(1000) < sup_exp(20));

  // poisson: mean 3
  auto sup_poi = [](std::int64_t n) {
    double mu = 3.0 * double(n);
    double worst = 0.0;
    for (std::int64_t x = 0; x <= 20; ++x) {
      double f = micro_marginal_pdf(Family::PoissonMicro, double(x), n, mu, 0.0);
      double target = std::exp(-3.0 + double(x) * std::log(3.0) -
                               std::lgamma(double(x) + 1.0));
      worst = std::max(worst, std::abs(f - target));
    }
    return worst;
  };
  CHECK(sup_poi(1000) < 0.01);
  CHECK(sup_poi(1000) < sup_poi(20));
}

TEST_CASE("overall weight distribution mixes cells by edge count") {
  WeightedGraph g = testutil::build_graph(
      4, false, {{0, 1, {1.0, 2.0}}, {2, 3, {4.0, 6.0}}});
  HierarchicalPartition p;
  p.levels = {{0, 0, 1, 1}, {0, 0, 0, 0}};
  HierState st(g, p);
  ChannelModel cm = model(Family::ExponentialMicro);
  double x = 1.5;
  double d0 = micro_marginal_pdf(Family::ExponentialMicro, x, 2, 3.0, 0.0);
  double d1 = micro_marginal_pdf(Family::ExponentialMicro, x, 2, 10.0, 0.0);
  CHECK(overall_weight_density(st, cm, 0, x) ==
        doctest::Approx(0.5 * d0 + 0.5 * d1));
}

TEST_CASE("prepare_graph accumulates jacobians and splits channels") {
  GraphBundle b;
  b.graph = testutil::build_graph(3, false, {{0, 1, {-2.0}}, {1, 2, {3.0}}});
  b.channels.resize(1);
  b.channels[0].family = Family::NormalMicro;
  b.channels[0].transform_chain = {{TransformStep::Kind::SignMagnitudeSplit}};
  PreparedGraph pg = prepare_graph(b);
  REQUIRE(pg.channels.size() == 2);
  CHECK(pg.graph.channel_names ==
        std::vector<std::string>{"w.sign", "w.mag"});
  CHECK(pg.channels[0].family == Family::BinomialMicro);
  CHECK(pg.channels[0].M == 1);
  CHECK(pg.channels[1].family == Family::NormalMicro);
  CHECK(pg.graph.values[0][0] == std::vector<double>{0.0});
  CHECK(pg.graph.values[1][0] == std::vector<double>{2.0});

  GraphBundle lb;
  lb.graph = testutil::build_graph(2, false, {{0, 1, {std::exp(1.0)}}});
  lb.channels.resize(1);
  lb.channels[0].family = Family::NormalMicro;
  lb.channels[0].transform_chain = {{TransformStep::Kind::Log}};
  PreparedGraph lpg = prepare_graph(lb);
  CHECK(lpg.channels[0].log_jacobian == doctest::Approx(-1.0));
  CHECK(lpg.graph.values[0][0][0] == doctest::Approx(1.0));
}

TEST_CASE("hyperparameter fitting improves the likelihood") {
  Rng rng(5);
  WeightedGraph g = testutil::random_graph(12, 0.5, rng);
  HierState st(g, HierarchicalPartition::flat(testutil::random_labels(12, 3, rng)));
  ChannelModel cm = model(Family::ExponentialConjugate, {1.0, 1.0});
  double before = ll_weights(cm, st, 0);
  fit_hyperparameters(cm, st, 0);
  double after = ll_weights(cm, st, 0);
  CHECK(after >= before - 1e-9);
  CHECK(cm.hyper[0] > 0.0);
  CHECK(cm.hyper[1] > 0.0);
}

TEST_CASE("two identical channels double the log-likelihood") {
  WeightedGraph g = testutil::build_graph(3, false, {{0, 1, {1.0, 2.0}}, {1, 2, {3.0}}});
  g.channel_names = {"a", "b"};
  g.values.push_back(g.values[0]);
  g.validate();
  HierState st(g, HierarchicalPartition::flat({0, 0, 1}));
  ChannelModel cm = model(Family::ExponentialMicro);
  CHECK(ll_weights(cm, st, 0) == doctest::Approx(ll_weights(cm, st, 1)));
}
