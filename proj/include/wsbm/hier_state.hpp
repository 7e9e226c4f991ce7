#ifndef WSBM_HIER_STATE_HPP
#define WSBM_HIER_STATE_HPP

#include <cstdint>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "wsbm/graph.hpp"

namespace wsbm {

// Nested partition: levels[l-1][i] is the level-l group of item i, where the
// items of level 1 are the graph nodes and the items of level l > 1 are the
// occupied groups of level l-1. Every label vector has length node_count (a
// fixed label pool); entries for unoccupied items are ignored. The top level
// must place everything in a single group.
struct HierarchicalPartition {
  std::vector<std::vector<std::int32_t>> levels;

  int depth() const { return int(levels.size()); }

  static HierarchicalPartition single_group(std::int32_t n);
  // Flat model: b^1 = labels, plus a trivial top level.
  static HierarchicalPartition flat(std::vector<std::int32_t> labels);

  bool operator==(const HierarchicalPartition&) const = default;
};

// Relabels each level to consecutive labels in order of first appearance and
// drops trailing trivial levels (keeping one all-in-one top level).
HierarchicalPartition compact_partition(const HierarchicalPartition& p,
                                        std::int32_t node_count);

std::string partition_to_json(const HierarchicalPartition& p);
HierarchicalPartition partition_from_json(const std::string& text);

struct ChannelStat {
  double mu = 0.0;  // sum of values
  double nu = 0.0;  // sum of squared values

  bool operator==(const ChannelStat&) const = default;
};

struct Cell {
  std::int64_t m = 0;  // aggregated multigraph edge count (recursive, m^0 = A)
  std::int64_t w = 0;  // number of weight values: parallel edges at level 1,
                       // nonzero lower-level cells above
  std::vector<ChannelStat> ch;

  bool operator==(const Cell&) const = default;
};

struct GroupInfo {
  std::int64_t size = 0;   // occupied items of the level below
  std::int64_t e = 0;      // incident half-edges (out half-edges if directed)
  std::int64_t e_in = 0;   // directed only

  bool operator==(const GroupInfo&) const = default;
};

// Per-channel per-level bookkeeping for the signed (normal) family.
struct LevelAgg {
  std::int64_t m_z = 0;  // cells with more than one value
  double mu_z = 0.0;     // sum of their scaled variances

  bool operator==(const LevelAgg&) const = default;
};

using PairKey = std::uint64_t;

inline PairKey make_key(std::int32_t r, std::int32_t s) {
  return (PairKey(std::uint32_t(r)) << 32) | std::uint32_t(s);
}
inline std::int32_t key_row(PairKey k) { return std::int32_t(k >> 32); }
inline std::int32_t key_col(PairKey k) { return std::int32_t(k & 0xffffffffu); }

struct LevelState {
  std::unordered_map<PairKey, Cell> cells;
  // partner indices for row iteration; for undirected graphs a cell (r, s)
  // registers s in partners[r] and r in partners[s]
  std::vector<std::set<std::int32_t>> partners_out;
  std::vector<std::set<std::int32_t>> partners_in;  // directed only
  std::vector<GroupInfo> groups;
  std::vector<LevelAgg> agg;  // per channel
  std::int32_t occupied = 0;
};

struct CellDelta {
  int level;
  std::int32_t r, s;
  Cell before, after;
};
struct GroupDelta {
  int level;
  std::int32_t g;
  GroupInfo before, after;
};
struct LabelDelta {
  int level;
  std::int32_t item;
  std::int32_t before, after;
};
struct AggDelta {
  int level, channel;
  LevelAgg before, after;
};
struct OccupiedDelta {
  int level;
  std::int32_t before, after;
};

struct MoveRecord {
  int level = 0;
  std::int32_t item = 0, from = 0, to = 0;
  std::vector<CellDelta> cells;
  std::vector<GroupDelta> groups;
  std::vector<LabelDelta> labels;
  std::vector<AggDelta> aggs;
  std::vector<OccupiedDelta> occupied;

  bool no_op() const { return from == to; }
};

// Precomputed per-bundle aggregates of the graph adjacency.
struct GraphNbr {
  std::int32_t t = 0;
  std::int32_t mult = 0;
  bool outgoing = true;  // direction of the underlying bundle (directed only)
  std::vector<ChannelStat> ch;
};

class HierState {
 public:
  HierState(const WeightedGraph& graph, HierarchicalPartition partition);

  const WeightedGraph& graph() const { return *graph_; }
  const HierarchicalPartition& partition() const { return partition_; }
  int depth() const { return partition_.depth(); }
  bool directed() const { return graph_->directed; }
  std::size_t channels() const { return graph_->channel_count(); }
  std::int64_t total_edges() const { return total_edges_; }

  std::int32_t label(int level, std::int32_t item) const {
    return partition_.levels[level - 1][item];
  }
  const LevelState& level(int l) const { return levels_[l - 1]; }
  std::int32_t occupied_count(int l) const { return levels_[l - 1].occupied; }
  // Items that exist at level l (nodes for l = 1, occupied lower groups above).
  std::vector<std::int32_t> items(int l) const;
  std::int32_t item_count(int l) const {
    return l == 1 ? graph_->node_count : levels_[l - 2].occupied;
  }
  bool item_exists(int l, std::int32_t u) const {
    return l == 1 || levels_[l - 2].groups[u].size > 0;
  }

  const Cell* find_cell(int l, std::int32_t r, std::int32_t s) const;

  // Scaled variance of a cell, clamped to zero against cancellation noise.
  static double z_value(const Cell& cell, std::size_t channel);

  const std::vector<GraphNbr>& graph_row(std::int32_t u) const { return adj_[u]; }

  // Moves item u of level l (i.e. changes b^l_u) and updates every statistic
  // at levels l..L. Throws on invalid level/item/label.
  MoveRecord apply_move(int l, std::int32_t u, std::int32_t to);
  void revert(const MoveRecord& rec);

  // Full recomputation from the graph and the current partition.
  void rebuild();

  // Replaces the partition and rebuilds all statistics.
  void reset_partition(HierarchicalPartition p);

  // Degree of item u in the structure below level l (half-edge count).
  std::int64_t item_degree(int l, std::int32_t u) const;

  HierarchicalPartition compacted() const {
    return compact_partition(partition_, graph_->node_count);
  }

 private:
  void build_adjacency();
  void normalize_partition();

  const WeightedGraph* graph_;
  HierarchicalPartition partition_;
  std::vector<LevelState> levels_;
  std::vector<std::vector<GraphNbr>> adj_;
  std::int64_t total_edges_ = 0;
};

}  // namespace wsbm

#endif
