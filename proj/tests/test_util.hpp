#ifndef WSBM_TEST_UTIL_HPP
#define WSBM_TEST_UTIL_HPP

#include <tuple>
#include <vector>

#include "wsbm/graph.hpp"
#include "wsbm/rng.hpp"

namespace testutil {

// One-channel graph from (source, target, values-per-parallel-edge) triples.
inline wsbm::WeightedGraph build_graph(
    std::int32_t n, bool directed,
    const std::vector<std::tuple<int, int, std::vector<double>>>& edges) {
  wsbm::WeightedGraph g;
  g.node_count = n;
  g.directed = directed;
  g.channel_names = {"w"};
  g.values.resize(1);
  for (const auto& [s, t, vals] : edges) {
    g.edges.push_back({std::int32_t(s), std::int32_t(t), std::int32_t(vals.size())});
    g.values[0].push_back(vals);
  }
  g.validate();
  return g;
}

// Erdos-Renyi style multigraph with positive continuous weights.
inline wsbm::WeightedGraph random_graph(std::int32_t n, double p, wsbm::Rng& rng,
                                        bool directed = false,
                                        bool integer_weights = false) {
  std::vector<std::tuple<int, int, std::vector<double>>> edges;
  for (std::int32_t i = 0; i < n; ++i)
    for (std::int32_t j = directed ? 0 : i + 1; j < n; ++j) {
      if (i == j) continue;
      if (rng.uniform() >= p) continue;
      int mult = 1 + int(rng.uniform_under(3));
      std::vector<double> vals;
      for (int k = 0; k < mult; ++k)
        vals.push_back(integer_weights ? double(rng.uniform_under(6))
                                       : rng.exponential(0.7));
      edges.push_back({i, j, vals});
    }
  if (edges.empty()) edges.push_back({0, n > 1 ? 1 : 0, {1.0}});
  return build_graph(n, directed, edges);
}

inline std::vector<std::int32_t> random_labels(std::int32_t n, std::int32_t max_b,
                                               wsbm::Rng& rng) {
  std::vector<std::int32_t> b;
  for (std::int32_t i = 0; i < n; ++i)
    b.push_back(std::int32_t(rng.uniform_under(std::uint64_t(max_b))));
  return b;
}

}  // namespace testutil

#endif
