#ifndef WSBM_JOINT_MODEL_HPP
#define WSBM_JOINT_MODEL_HPP

#include <vector>

#include "wsbm/adjacency_likelihood.hpp"
#include "wsbm/hier_state.hpp"
#include "wsbm/weight_likelihood.hpp"

namespace wsbm {

// Joint log-probability ln P(A, x, {b^l}) of a state, with O(changed keys)
// incremental updates under single-item moves.
class JointModel {
 public:
  JointModel(HierState& st, std::vector<ChannelModel> channels,
             AdjacencyModel adjacency);

  HierState& state() { return *st_; }
  const HierState& state() const { return *st_; }
  const std::vector<ChannelModel>& channels() const { return channels_; }
  const AdjacencyTerms& adjacency() const { return adjacency_; }

  // Running value, maintained incrementally.
  double ln_joint() const { return running_; }
  // Recomputed from scratch (reference for consistency checks).
  double ln_joint_full() const;
  // Recompute the running value from scratch.
  void resync() { running_ = ln_joint_full(); }

  // Applies the move, updates the running value, and returns the change.
  double apply_move_delta(int l, std::int32_t u, std::int32_t to,
                          MoveRecord* rec_out = nullptr);
  // Undoes a move previously applied with apply_move_delta.
  void revert(const MoveRecord& rec, double delta);

  // Change implied by an already-applied move record (post-state must be
  // current). Exposed for testing.
  double delta_from_record(const MoveRecord& rec) const;

 private:
  HierState* st_;
  std::vector<ChannelModel> channels_;
  AdjacencyTerms adjacency_;
  double running_ = 0.0;
};

}  // namespace wsbm

#endif
