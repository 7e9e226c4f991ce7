#ifndef WSBM_ADJACENCY_LIKELIHOOD_HPP
#define WSBM_ADJACENCY_LIKELIHOOD_HPP

#include <cstdint>
#include <string>

#include "wsbm/hier_state.hpp"

namespace wsbm {

enum class AdjacencyModel {
  DegreeCorrected,    // default
  Plain,
  FixedCompleteGraph  // adjacency treated as given; only partition priors remain
};

AdjacencyModel parse_adjacency_model(const std::string& name);
std::string adjacency_model_name(AdjacencyModel m);

// Term-level decomposition of the adjacency/partition part of the joint
// log-probability, so the sampler can evaluate deltas from changed keys only.
struct AdjacencyTerms {
  AdjacencyModel model = AdjacencyModel::DegreeCorrected;
  bool directed = false;
  double constant = 0.0;  // degree and multiplicity factorials (degree-corrected)

  // Per-cell term at a level; n_r/n_s are the level's group sizes.
  double cell_term(int level, std::int32_t r, std::int32_t s, std::int64_t m,
                   std::int64_t n_r, std::int64_t n_s) const;
  // Per-occupied-group term (partition prior ln n! plus, at the bottom,
  // degree-corrected degree bookkeeping).
  double group_term(int level, const GroupInfo& gi) const;
  // Per-level scalars of the partition prior over n items in B groups.
  double level_term(std::int64_t n_items, std::int32_t n_groups) const;
};

AdjacencyTerms make_adjacency_terms(const WeightedGraph& g, AdjacencyModel model);

double ln_adjacency_total(const AdjacencyTerms& terms, const HierState& st);

}  // namespace wsbm

#endif
