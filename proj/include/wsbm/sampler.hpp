#ifndef WSBM_SAMPLER_HPP
#define WSBM_SAMPLER_HPP

#include <cstdint>
#include <set>
#include <vector>

#include "wsbm/joint_model.hpp"
#include "wsbm/rng.hpp"

namespace wsbm {

// Single-chain Metropolis-Hastings sampler over hierarchical partitions.
// Proposals follow the neighbor-group scheme: a random incident half-edge
// selects a group s, then a target r with probability
// (e_sr + eps) / (e_s + eps * nC), where nC counts candidate groups
// (occupied ones plus one fresh label).
class Sampler {
 public:
  Sampler(JointModel& model, Rng rng, double eps = 1.0);

  JointModel& model() { return *model_; }
  Rng& rng() { return rng_; }

  // One MH attempt for item u at level l; true if the state changed.
  // min_delta additionally rejects moves improving by less than that amount.
  bool mh_step(int l, std::int32_t u, double beta, double min_delta = -1e300);

  // One attempt per occupied item per movable level. Returns accepted moves.
  int sweep(double beta, double min_delta = -1e300);

  // Rebuilds auxiliary structures after an external state change.
  void refresh();

  // Candidate labels at a level: occupied plus the lowest unused one.
  std::int32_t fresh_label(int l) const;
  int candidate_count(int l) const;

  // ln of the proposal probability of label r for item u (current state).
  double ln_propose(int l, std::int32_t u, std::int32_t r) const;

  // A random partner item across a random incident half-edge.
  std::int32_t random_partner(int l, std::int32_t u, std::int64_t deg);

 private:
  std::int32_t pick_uniform_candidate(int l);
  std::int32_t sample_adjacent_group(int l, std::int32_t s);
  std::int64_t group_edge_total(int l, std::int32_t s) const;
  std::int64_t edges_between(int l, std::int32_t s, std::int32_t r) const;
  void apply_occupied(const MoveRecord& rec, bool forward);
  void pool_move(std::int32_t u, std::int32_t from, std::int32_t to);

  void occupy(int l, std::int32_t g);
  void vacate(int l, std::int32_t g);

  JointModel* model_;
  Rng rng_;
  double eps_;
  // level-1 half-edge pools: pool_[group] lists (node, instance) entries
  std::vector<std::vector<std::pair<std::int32_t, std::int32_t>>> pool_;
  std::vector<std::vector<std::size_t>> pos_;       // pos_[node][instance]
  std::vector<std::vector<std::int32_t>> inst_adj_; // instance -> adjacency row
  // per level: occupied labels with O(1) sampling, plus free labels ordered
  // so the fresh candidate (lowest unused) is O(log n)
  std::vector<std::vector<std::int32_t>> occ_list_;
  std::vector<std::vector<std::int32_t>> occ_pos_;  // label -> index, -1 if free
  std::vector<std::set<std::int32_t>> free_;
};

struct FitParams {
  std::uint64_t seed = 1;
  int sweeps = 200;       // annealing sweeps after initialization
  int chains = 1;
  double eps = 1.0;
  int max_depth = 4;      // hierarchy levels (2 = flat model)
  double beta_max = 1048576.0;
  bool agglomerative = true;
};

struct FitResult {
  HierarchicalPartition partition;  // compacted
  double ln_joint = 0.0;
};

FitResult fit_map(const WeightedGraph& g, const std::vector<ChannelModel>& channels,
                  AdjacencyModel adjacency, const FitParams& params);

struct SampleParams {
  std::uint64_t seed = 1;
  int sweeps = 2000;
  int burnin = -1;  // defaults to sweeps / 2
  int thin = 10;
  double eps = 1.0;
  int max_depth = 4;
};

struct PosteriorSamples {
  std::vector<HierarchicalPartition> partitions;  // compacted
  std::vector<double> ln_joints;
};

PosteriorSamples sample_posterior(const WeightedGraph& g,
                                  const std::vector<ChannelModel>& channels,
                                  AdjacencyModel adjacency,
                                  const SampleParams& params);

// Merge-down initialization: starts from singletons and greedily merges
// groups level by level, keeping the best state seen.
void agglomerative_init(Sampler& sampler);

HierarchicalPartition singleton_partition(std::int32_t n, int depth);

}  // namespace wsbm

#endif
