#ifndef WSBM_GRAPH_HPP
#define WSBM_GRAPH_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wsbm/transform.hpp"

namespace wsbm {

struct EdgeBundle {
  std::int32_t source = 0;
  std::int32_t target = 0;
  std::int32_t multiplicity = 1;  // number of parallel edges

  bool operator==(const EdgeBundle&) const = default;
};

// Weighted multigraph with per-edge covariate channels. Immutable after
// load/validation; safe for concurrent reads.
struct WeightedGraph {
  std::int32_t node_count = 0;
  bool directed = false;
  std::vector<EdgeBundle> edges;  // unique pairs; source <= target if undirected
  std::vector<std::string> channel_names;
  // values[channel][edge] holds exactly edges[edge].multiplicity covariates
  std::vector<std::vector<std::vector<double>>> values;

  std::int64_t total_edges() const {
    std::int64_t e = 0;
    for (const auto& b : edges) e += b.multiplicity;
    return e;
  }
  std::size_t channel_count() const { return channel_names.size(); }

  // Throws std::invalid_argument on any violated invariant.
  void validate() const;

  bool operator==(const WeightedGraph&) const = default;
};

struct GraphBundle {
  WeightedGraph graph;
  std::vector<CovariateSpec> channels;  // parallel to graph.channel_names
};

enum class GraphFormat { EdgeListTsv, Json };

// Loads a graph. For TSV, a JSON sidecar (same path with extension replaced
// by .json) provides directedness, node count and channel metadata when
// present. Parallel rows for the same pair are merged into multiplicity with
// covariates concatenated in row order.
GraphBundle load_graph(const std::string& path, GraphFormat format);

void save_graph(const GraphBundle& bundle, const std::string& path,
                GraphFormat format);

// Path of the TSV sidecar for a given TSV path.
std::string sidecar_path(const std::string& tsv_path);

}  // namespace wsbm

#endif
