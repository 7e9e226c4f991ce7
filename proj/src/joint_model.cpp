#include "wsbm/joint_model.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "wsbm/numeric.hpp"

namespace wsbm {

JointModel::JointModel(HierState& st, std::vector<ChannelModel> channels,
                       AdjacencyModel adjacency)
    : st_(&st),
      channels_(std::move(channels)),
      adjacency_(make_adjacency_terms(st.graph(), adjacency)) {
  resync();
}

double JointModel::ln_joint_full() const {
  KahanSum sum;
  for (std::size_t c = 0; c < channels_.size(); ++c)
    sum.add(ll_weights(channels_[c], *st_, c));
  sum.add(ln_adjacency_total(adjacency_, *st_));
  return sum.value();
}

double JointModel::delta_from_record(const MoveRecord& rec) const {
  if (rec.no_op()) return 0.0;
  const HierState& st = *st_;
  KahanSum delta;

  auto size_old = [&](int lev, std::int32_t g) {
    for (const auto& gd : rec.groups)
      if (gd.level == lev && gd.g == g) return gd.before.size;
    return st.level(lev).groups[std::size_t(g)].size;
  };
  auto size_now = [&](int lev, std::int32_t g) {
    return st.level(lev).groups[std::size_t(g)].size;
  };

  // cells that changed content
  auto in_record = [&](int lev, std::int32_t r, std::int32_t s) {
    for (const auto& d : rec.cells)
      if (d.level == lev && d.r == r && d.s == s) return true;
    return false;
  };
  for (const auto& d : rec.cells) {
    for (std::size_t c = 0; c < channels_.size(); ++c)
      delta.add(ll_cell(channels_[c], d.level, d.after, c) -
                ll_cell(channels_[c], d.level, d.before, c));
    delta.add(adjacency_.cell_term(d.level, d.r, d.s, d.after.m,
                                   size_now(d.level, d.r), size_now(d.level, d.s)) -
              adjacency_.cell_term(d.level, d.r, d.s, d.before.m,
                                   size_old(d.level, d.r), size_old(d.level, d.s)));
  }

  // unchanged cells whose adjacency term depends on a changed group size
  bool plain_bottom = adjacency_.model == AdjacencyModel::Plain;
  if (adjacency_.model != AdjacencyModel::FixedCompleteGraph) {
    std::vector<std::tuple<int, std::int32_t, std::int32_t>> visited;
    for (const auto& g : rec.groups) {
      if (g.before.size == g.after.size) continue;
      if (g.level == 1 && !plain_bottom) continue;
      const LevelState& ls = st.level(g.level);
      auto consider = [&](std::int32_t r, std::int32_t s) {
        if (!st.directed() && r > s) std::swap(r, s);
        if (in_record(g.level, r, s)) return;
        std::tuple<int, std::int32_t, std::int32_t> key{g.level, r, s};
        if (std::find(visited.begin(), visited.end(), key) != visited.end()) return;
        visited.push_back(key);
        const Cell* cell = st.find_cell(g.level, r, s);
        if (!cell) return;
        delta.add(adjacency_.cell_term(g.level, r, s, cell->m, size_now(g.level, r),
                                       size_now(g.level, s)) -
                  adjacency_.cell_term(g.level, r, s, cell->m, size_old(g.level, r),
                                       size_old(g.level, s)));
      };
      for (std::int32_t t : ls.partners_out[std::size_t(g.g)]) consider(g.g, t);
      if (st.directed())
        for (std::int32_t t : ls.partners_in[std::size_t(g.g)]) consider(t, g.g);
    }
  }

  // per-group terms
  for (const auto& g : rec.groups)
    delta.add(adjacency_.group_term(g.level, g.after) -
              adjacency_.group_term(g.level, g.before));

  // partition-prior scalars at levels whose item or group count changed
  {
    std::map<int, std::int32_t> occ_old;
    for (const auto& o : rec.occupied) occ_old[o.level] = o.before;
    auto occupied_old = [&](int lev) {
      auto it = occ_old.find(lev);
      return it != occ_old.end() ? it->second : st.occupied_count(lev);
    };
    std::set<int> affected;
    for (const auto& o : rec.occupied) {
      affected.insert(o.level);
      if (o.level + 1 <= st.depth()) affected.insert(o.level + 1);
    }
    for (int lev : affected) {
      std::int64_t n_old = lev == 1 ? st.graph().node_count : occupied_old(lev - 1);
      std::int64_t n_now = st.item_count(lev);
      delta.add(adjacency_.level_term(n_now, st.occupied_count(lev)) -
                adjacency_.level_term(n_old, occupied_old(lev)));
    }
  }

  // per-level and cross-level weight terms (signed family)
  if (!rec.aggs.empty()) {
    for (std::size_t c = 0; c < channels_.size(); ++c) {
      if (channels_[c].family != Family::NormalMicro) continue;
      std::vector<LevelAgg> now, before;
      for (int l = 1; l <= st.depth(); ++l) now.push_back(st.level(l).agg[c]);
      before = now;
      bool touched = false;
      for (const auto& a : rec.aggs) {
        if (std::size_t(a.channel) != c) continue;
        before[std::size_t(a.level - 1)] = a.before;
        touched = true;
        delta.add(ll_level(channels_[c], a.after) - ll_level(channels_[c], a.before));
      }
      if (touched)
        delta.add(ll_global(channels_[c], now) - ll_global(channels_[c], before));
    }
  }

  return delta.value();
}

double JointModel::apply_move_delta(int l, std::int32_t u, std::int32_t to,
                                    MoveRecord* rec_out) {
  MoveRecord rec = st_->apply_move(l, u, to);
  double delta = delta_from_record(rec);
  running_ += delta;
  if (rec_out) *rec_out = std::move(rec);
  return delta;
}

void JointModel::revert(const MoveRecord& rec, double delta) {
  st_->revert(rec);
  running_ -= delta;
}

}  // namespace wsbm
