#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <map>

#include "doctest.h"
#include "oracle.hpp"
#include "test_util.hpp"
#include "wsbm/numeric.hpp"
#include "wsbm/sampler.hpp"

using namespace wsbm;

namespace {

std::vector<ChannelModel> exponential_channel() {
  ChannelModel cm;
  cm.family = Family::ExponentialMicro;
  return {cm};
}

}  // namespace

TEST_CASE("singleton partition shape") {
  HierarchicalPartition p = singleton_partition(5, 3);
  REQUIRE(p.depth() == 3);
  CHECK(p.levels[0] == std::vector<std::int32_t>{0, 1, 2, 3, 4});
  CHECK(p.levels[2] == std::vector<std::int32_t>(5, 0));
}

TEST_CASE("proposal probabilities normalize over candidates") {
  Rng rng(13);
  WeightedGraph g = testutil::random_graph(10, 0.4, rng);
  HierState st(g, HierarchicalPartition::flat(testutil::random_labels(10, 3, rng)));
  JointModel jm(st, exponential_channel(), AdjacencyModel::DegreeCorrected);
  Sampler sampler(jm, Rng(99));
  for (std::int32_t u = 0; u < 10; ++u) {
    double total = 0.0;
    for (std::int32_t r = 0; r < 10; ++r) {
      if (st.level(1).groups[r].size == 0 && r != sampler.fresh_label(1)) continue;
      total += std::exp(sampler.ln_propose(1, u, r));
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("sweeps preserve joint-model consistency") {
  Rng rng(29);
  WeightedGraph g = testutil::random_graph(16, 0.3, rng);
  HierState st(g, singleton_partition(16, 3));
  JointModel jm(st, exponential_channel(), AdjacencyModel::DegreeCorrected);
  Sampler sampler(jm, Rng(5));
  for (int s = 0; s < 30; ++s) {
    sampler.sweep(1.0);
    CHECK(jm.ln_joint() == doctest::Approx(jm.ln_joint_full()).epsilon(1e-7));
  }
  // states remain valid: top level single group, sizes conserved
  CHECK(st.occupied_count(st.depth()) == 1);
}

TEST_CASE("fit_map is deterministic for a fixed seed") {
  Rng rng(37);
  WeightedGraph g = testutil::random_graph(20, 0.3, rng);
  FitParams params;
  params.seed = 1234;
  params.sweeps = 40;
  FitResult a = fit_map(g, exponential_channel(), AdjacencyModel::DegreeCorrected, params);
  FitResult b = fit_map(g, exponential_channel(), AdjacencyModel::DegreeCorrected, params);
  CHECK(a.partition == b.partition);
  CHECK(a.ln_joint == doctest::Approx(b.ln_joint));
}

TEST_CASE("fit_map finds the exact mode of a tiny posterior") {
  Rng rng(43);
  for (int trial = 0; trial < 3; ++trial) {
    WeightedGraph g = testutil::random_graph(5, 0.7, rng);
    auto post = oracle::posterior_flat(g, {{Family::ExponentialMicro, 1, {}}},
                                       oracle::Adjacency::DegreeCorrected);
    FitParams params;
    params.seed = 7 + std::uint64_t(trial);
    params.sweeps = 150;
    params.chains = 2;
    params.max_depth = 2;
    FitResult fit = fit_map(g, exponential_channel(),
                            AdjacencyModel::DegreeCorrected, params);
    HierarchicalPartition best =
        compact_partition(HierarchicalPartition::flat(post.partitions[post.argmax]),
                          g.node_count);
    CHECK(fit.partition.levels[0] == best.levels[0]);
  }
}

TEST_CASE("posterior frequencies match the enumerated posterior") {
  Rng rng(47);
  WeightedGraph g = testutil::random_graph(4, 0.9, rng);
  auto post = oracle::posterior_flat(g, {{Family::ExponentialMicro, 1, {}}},
                                     oracle::Adjacency::DegreeCorrected);

  SampleParams sp;
  sp.seed = 11;
  sp.sweeps = 60000;
  sp.burnin = 4000;
  sp.thin = 4;
  sp.max_depth = 2;
  PosteriorSamples samples = sample_posterior(g, exponential_channel(),
                                              AdjacencyModel::DegreeCorrected, sp);
  REQUIRE(samples.partitions.size() > 5000);

  std::map<std::vector<std::int32_t>, int> counts;
  for (const auto& p : samples.partitions) counts[p.levels[0]] += 1;

  double n = double(samples.partitions.size());
  double chi2 = 0.0;
  int dof = 0;
  for (std::size_t i = 0; i < post.partitions.size(); ++i) {
    double expect = post.prob[i] * n;
    if (expect < 5.0) continue;
    auto it = counts.find(post.partitions[i]);
    double got = it == counts.end() ? 0.0 : double(it->second);
    chi2 += (got - expect) * (got - expect) / expect;
    ++dof;
  }
  REQUIRE(dof > 1);
  CHECK(chi2_sf(chi2, double(dof - 1)) > 0.001);
}

TEST_CASE("annealing concentrates on the mode") {
  Rng rng(53);
  WeightedGraph g = testutil::random_graph(12, 0.5, rng);
  HierState st(g, singleton_partition(12, 2));
  JointModel jm(st, exponential_channel(), AdjacencyModel::DegreeCorrected);
  Sampler sampler(jm, Rng(3));
  agglomerative_init(sampler);
  double after_init = jm.ln_joint();
  for (int s = 0; s < 50; ++s) sampler.sweep(1024.0);
  CHECK(jm.ln_joint() >= after_init - 1e-9);
}

TEST_CASE("sample_posterior records plausible group counts") {
  // two clear blocks: heavy within-block weights, light across
  std::vector<std::tuple<int, int, std::vector<double>>> edges;
  Rng rng(59);
  for (int i = 0; i < 8; ++i)
    for (int j = i + 1; j < 8; ++j) {
      bool same = (i < 4) == (j < 4);
      edges.push_back({i, j, {rng.exponential(same ? 0.1 : 10.0)}});
    }
  WeightedGraph g = testutil::build_graph(8, false, edges);
  SampleParams sp;
  sp.seed = 2;
  sp.sweeps = 4000;
  sp.max_depth = 2;
  PosteriorSamples samples = sample_posterior(g, exponential_channel(),
                                              AdjacencyModel::DegreeCorrected, sp);
  REQUIRE(!samples.partitions.empty());
  int two_block = 0;
  for (const auto& p : samples.partitions) {
    std::set<std::int32_t> groups(p.levels[0].begin(), p.levels[0].end());
    if (groups.size() == 2) ++two_block;
  }
  CHECK(double(two_block) / double(samples.partitions.size()) > 0.5);
}
