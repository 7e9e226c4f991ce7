#ifndef WSBM_ANALYSIS_HPP
#define WSBM_ANALYSIS_HPP

#include <string>
#include <vector>

#include "wsbm/joint_model.hpp"

namespace wsbm {

// ln posterior odds of model 1 over model 2 fitted to the same network.
// Throws if the two graphs differ in topology (weights may differ, e.g.
// after different covariate transforms).
double posterior_odds(const WeightedGraph& g1, double ln_joint1,
                      const WeightedGraph& g2, double ln_joint2);

struct ModularityLevel {
  double Q = 0.0;
  std::vector<std::int32_t> groups;  // occupied labels
  std::vector<double> q;             // per-group contribution, aligned with groups
};

// Modularity of each hierarchy level against the bottom-level edge total.
std::vector<ModularityLevel> modularity_profile(const HierState& st);

// 2 I(a; b) / (H(a) + H(b)); 1 when both labelings are constant.
double normalized_mutual_information(const std::vector<std::int32_t>& a,
                                     const std::vector<std::int32_t>& b);

// Writes partition.json, levels.csv, modularity.csv, summary.json and one
// <channel>.distribution.csv per channel into dir (created if needed).
void export_fit_report(const std::string& dir, const HierState& st,
                       const std::vector<ChannelModel>& channels,
                       const std::vector<std::string>& channel_names,
                       AdjacencyModel adjacency);

}  // namespace wsbm

#endif
