#include "wsbm/hier_state.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace wsbm {

HierarchicalPartition HierarchicalPartition::single_group(std::int32_t n) {
  HierarchicalPartition p;
  p.levels.push_back(std::vector<std::int32_t>(std::size_t(n), 0));
  return p;
}

HierarchicalPartition HierarchicalPartition::flat(std::vector<std::int32_t> labels) {
  HierarchicalPartition p;
  std::size_t n = labels.size();
  p.levels.push_back(std::move(labels));
  p.levels.push_back(std::vector<std::int32_t>(n, 0));
  return p;
}

HierarchicalPartition compact_partition(const HierarchicalPartition& p,
                                        std::int32_t node_count) {
  HierarchicalPartition out;
  // current items, listed as (old label at the previous level) in new-label order
  std::vector<std::int32_t> items{};
  items.resize(std::size_t(node_count));
  for (std::int32_t i = 0; i < node_count; ++i) items[std::size_t(i)] = i;

  for (const auto& lvl : p.levels) {
    std::map<std::int32_t, std::int32_t> relabel;
    std::vector<std::int32_t> labels;
    std::vector<std::int32_t> next_items;
    labels.reserve(items.size());
    for (std::int32_t it : items) {
      std::int32_t old = lvl.at(std::size_t(it));
      auto ins = relabel.emplace(old, std::int32_t(relabel.size()));
      if (ins.second) next_items.push_back(old);
      labels.push_back(ins.first->second);
    }
    out.levels.push_back(std::move(labels));
    items = std::move(next_items);
    if (items.size() == 1) break;
  }
  if (out.levels.empty() || items.size() != 1) {
    // ensure a single-group top level
    out.levels.push_back(std::vector<std::int32_t>(items.size(), 0));
  }
  return out;
}

std::string partition_to_json(const HierarchicalPartition& p) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& lvl : p.levels) j.push_back(lvl);
  return j.dump();
}

HierarchicalPartition partition_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (!j.is_array() || j.empty())
    throw std::invalid_argument("partition must be a non-empty list of label lists");
  HierarchicalPartition p;
  for (const auto& lvl : j)
    p.levels.push_back(lvl.get<std::vector<std::int32_t>>());
  return p;
}

double HierState::z_value(const Cell& cell, std::size_t channel) {
  if (cell.w <= 1) return 0.0;
  const auto& cs = cell.ch[channel];
  double z = cs.nu - cs.mu * cs.mu / double(cell.w);
  if (z <= 1e-12 * std::abs(cs.nu)) return 0.0;
  return z;
}

HierState::HierState(const WeightedGraph& graph, HierarchicalPartition partition)
    : graph_(&graph), partition_(std::move(partition)) {
  if (partition_.depth() < 1) throw std::invalid_argument("partition needs at least one level");
  normalize_partition();
  build_adjacency();
  rebuild();
  if (levels_.back().occupied != 1)
    throw std::invalid_argument("top level must have exactly one group");
}

void HierState::reset_partition(HierarchicalPartition p) {
  if (p.depth() < 1) throw std::invalid_argument("partition needs at least one level");
  partition_ = std::move(p);
  normalize_partition();
  rebuild();
  if (levels_.back().occupied != 1)
    throw std::invalid_argument("top level must have exactly one group");
}

void HierState::normalize_partition() {
  const std::size_t n = std::size_t(graph_->node_count);
  if (partition_.levels[0].size() != n)
    throw std::invalid_argument("level 1 must label every node");
  for (auto& lvl : partition_.levels) {
    if (lvl.size() > n)
      throw std::invalid_argument("level label vector longer than the label pool");
    for (std::int32_t b : lvl)
      if (b < 0 || std::size_t(b) >= n)
        throw std::invalid_argument("group label out of range");
    lvl.resize(n, 0);
  }
}

void HierState::build_adjacency() {
  const WeightedGraph& g = *graph_;
  const std::size_t C = g.channel_count();
  adj_.assign(std::size_t(g.node_count), {});
  total_edges_ = 0;
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& b = g.edges[e];
    total_edges_ += b.multiplicity;
    GraphNbr nbr;
    nbr.mult = b.multiplicity;
    nbr.ch.resize(C);
    for (std::size_t c = 0; c < C; ++c) {
      for (double x : g.values[c][e]) {
        nbr.ch[c].mu += x;
        nbr.ch[c].nu += x * x;
      }
    }
    nbr.t = b.target;
    nbr.outgoing = true;
    adj_[std::size_t(b.source)].push_back(nbr);
    nbr.t = b.source;
    nbr.outgoing = false;
    adj_[std::size_t(b.target)].push_back(nbr);
  }
}

namespace {

void register_partners(LevelState& ls, bool directed, std::int32_t r, std::int32_t s) {
  ls.partners_out[std::size_t(r)].insert(s);
  if (directed)
    ls.partners_in[std::size_t(s)].insert(r);
  else
    ls.partners_out[std::size_t(s)].insert(r);
}

void unregister_partners(LevelState& ls, bool directed, std::int32_t r, std::int32_t s) {
  ls.partners_out[std::size_t(r)].erase(s);
  if (directed)
    ls.partners_in[std::size_t(s)].erase(r);
  else
    ls.partners_out[std::size_t(s)].erase(r);
}

void add_cell_edges(GroupInfo* groups, bool directed, std::int32_t r, std::int32_t s,
                    std::int64_t dm) {
  if (directed) {
    groups[r].e += dm;
    groups[s].e_in += dm;
  } else if (r == s) {
    groups[r].e += 2 * dm;
  } else {
    groups[r].e += dm;
    groups[s].e += dm;
  }
}

}  // namespace

void HierState::rebuild() {
  const WeightedGraph& g = *graph_;
  const std::size_t n = std::size_t(g.node_count);
  const std::size_t C = g.channel_count();
  const int L = depth();
  const bool dir = g.directed;

  levels_.assign(std::size_t(L), LevelState{});
  for (auto& ls : levels_) {
    ls.partners_out.assign(n, {});
    if (dir) ls.partners_in.assign(n, {});
    ls.groups.assign(n, GroupInfo{});
    ls.agg.assign(C, LevelAgg{});
    ls.cells.max_load_factor(0.5f);
    ls.cells.reserve(std::size_t(2 * g.edges.size() + 16));
  }

  // level-1 cells from the graph
  {
    LevelState& ls = levels_[0];
    const auto& b1 = partition_.levels[0];
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      std::int32_t r = b1[std::size_t(g.edges[e].source)];
      std::int32_t s = b1[std::size_t(g.edges[e].target)];
      if (!dir && r > s) std::swap(r, s);
      Cell& cell = ls.cells[make_key(r, s)];
      if (cell.ch.empty()) cell.ch.resize(C);
      cell.m += g.edges[e].multiplicity;
      cell.w += g.edges[e].multiplicity;
      for (std::size_t c = 0; c < C; ++c)
        for (double x : g.values[c][e]) {
          cell.ch[c].mu += x;
          cell.ch[c].nu += x * x;
        }
    }
    for (std::int32_t b : b1) ls.groups[std::size_t(b)].size += 1;
  }

  // aggregate upward
  for (int l = 2; l <= L; ++l) {
    LevelState& ls = levels_[std::size_t(l - 1)];
    const LevelState& low = levels_[std::size_t(l - 2)];
    const auto& bl = partition_.levels[std::size_t(l - 1)];
    for (const auto& [key, cell] : low.cells) {
      std::int32_t r = bl[std::size_t(key_row(key))];
      std::int32_t s = bl[std::size_t(key_col(key))];
      if (!dir && r > s) std::swap(r, s);
      Cell& up = ls.cells[make_key(r, s)];
      if (up.ch.empty()) up.ch.resize(C);
      up.m += cell.m;
      up.w += 1;
      for (std::size_t c = 0; c < C; ++c) {
        up.ch[c].mu += cell.ch[c].mu;
        up.ch[c].nu += cell.ch[c].mu * cell.ch[c].mu;
      }
    }
    for (std::int32_t gidx = 0; gidx < std::int32_t(n); ++gidx)
      if (low.groups[std::size_t(gidx)].size > 0)
        ls.groups[std::size_t(bl[std::size_t(gidx)])].size += 1;
  }

  for (auto& ls : levels_) {
    for (const auto& [key, cell] : ls.cells) {
      std::int32_t r = key_row(key), s = key_col(key);
      register_partners(ls, dir, r, s);
      add_cell_edges(ls.groups.data(), dir, r, s, cell.m);
      for (std::size_t c = 0; c < C; ++c)
        if (cell.w > 1) {
          ls.agg[c].m_z += 1;
          ls.agg[c].mu_z += z_value(cell, c);
        }
    }
    ls.occupied = 0;
    for (const auto& gi : ls.groups)
      if (gi.size > 0) ls.occupied += 1;
  }
}

std::vector<std::int32_t> HierState::items(int l) const {
  std::vector<std::int32_t> out;
  if (l == 1) {
    out.resize(std::size_t(graph_->node_count));
    for (std::int32_t i = 0; i < graph_->node_count; ++i) out[std::size_t(i)] = i;
    return out;
  }
  const LevelState& low = levels_[std::size_t(l - 2)];
  for (std::int32_t g = 0; g < std::int32_t(low.groups.size()); ++g)
    if (low.groups[std::size_t(g)].size > 0) out.push_back(g);
  return out;
}

const Cell* HierState::find_cell(int l, std::int32_t r, std::int32_t s) const {
  if (!graph_->directed && r > s) std::swap(r, s);
  const auto& cells = levels_[std::size_t(l - 1)].cells;
  auto it = cells.find(make_key(r, s));
  return it == cells.end() ? nullptr : &it->second;
}

std::int64_t HierState::item_degree(int l, std::int32_t u) const {
  if (l == 1) {
    std::int64_t deg = 0;
    for (const auto& nbr : adj_[std::size_t(u)]) deg += nbr.mult;
    return deg;
  }
  const LevelState& low = levels_[std::size_t(l - 2)];
  std::int64_t deg = 0;
  for (std::int32_t t : low.partners_out[std::size_t(u)]) {
    const Cell* c = find_cell(l - 1, u, t);
    if (c) deg += (t == u ? 2 * c->m : c->m);
  }
  if (graph_->directed)
    for (std::int32_t t : low.partners_in[std::size_t(u)]) {
      if (t == u) continue;
      const Cell* c = find_cell(l - 1, t, u);
      if (c) deg += c->m;
    }
  return deg;
}

namespace {

struct Contrib {
  std::int64_t m = 0;
  std::int64_t w = 0;
  std::vector<ChannelStat> ch;
};

}  // namespace

MoveRecord HierState::apply_move(int l, std::int32_t u, std::int32_t to) {
  const int L = depth();
  const bool dir = graph_->directed;
  const std::size_t C = channels();
  const std::int32_t n = graph_->node_count;
  if (l < 1 || l >= L)
    throw std::invalid_argument("moves are allowed at levels 1.." + std::to_string(L - 1));
  if (u < 0 || u >= n || !item_exists(l, u))
    throw std::invalid_argument("item does not exist at this level");
  if (to < 0 || to >= n) throw std::invalid_argument("target label out of range");

  MoveRecord rec;
  rec.level = l;
  rec.item = u;
  rec.from = label(l, u);
  rec.to = to;
  if (rec.from == to) return rec;
  const std::int32_t from = rec.from;

  // gather u's incident contributions, keyed by the partner's level-l group
  std::map<std::int32_t, Contrib> out_c, in_c;
  Contrib self;
  self.ch.resize(C);
  auto bump = [&](Contrib& c, std::int64_t dm, std::int64_t dw,
                  const std::vector<ChannelStat>& ch, bool square) {
    if (c.ch.empty()) c.ch.resize(C);
    c.m += dm;
    c.w += dw;
    for (std::size_t i = 0; i < C; ++i) {
      c.ch[i].mu += ch[i].mu;
      c.ch[i].nu += square ? ch[i].mu * ch[i].mu : ch[i].nu;
    }
  };
  if (l == 1) {
    for (const auto& nbr : adj_[std::size_t(u)]) {
      std::int32_t s = label(1, nbr.t);
      Contrib& c = (dir && !nbr.outgoing) ? in_c[s] : out_c[s];
      bump(c, nbr.mult, nbr.mult, nbr.ch, false);
    }
  } else {
    const LevelState& low = levels_[std::size_t(l - 2)];
    for (std::int32_t t : low.partners_out[std::size_t(u)]) {
      const Cell* cell = find_cell(l - 1, u, t);
      if (!cell) continue;
      if (t == u)
        bump(self, cell->m, 1, cell->ch, true);
      else
        bump(out_c[label(l, t)], cell->m, 1, cell->ch, true);
    }
    if (dir)
      for (std::int32_t t : low.partners_in[std::size_t(u)]) {
        if (t == u) continue;
        const Cell* cell = find_cell(l - 1, t, u);
        if (cell) bump(in_c[label(l, t)], cell->m, 1, cell->ch, true);
      }
  }

  // per-level first-touch snapshots
  std::map<std::pair<int, std::pair<std::int32_t, std::int32_t>>, Cell> cell_before;
  std::map<std::pair<int, std::int32_t>, GroupInfo> group_before;
  std::map<std::pair<int, int>, LevelAgg> agg_before;
  std::map<int, std::int32_t> occupied_before;

  auto touch_cell = [&](int lev, std::int32_t r, std::int32_t s) -> Cell& {
    if (!dir && r > s) std::swap(r, s);
    LevelState& ls = levels_[std::size_t(lev - 1)];
    Cell& cell = ls.cells[make_key(r, s)];
    if (cell.ch.empty()) cell.ch.resize(C);
    cell_before.try_emplace({lev, {r, s}}, cell);
    return cell;
  };
  auto touch_group = [&](int lev, std::int32_t g) -> GroupInfo& {
    GroupInfo& gi = levels_[std::size_t(lev - 1)].groups[std::size_t(g)];
    group_before.try_emplace({lev, g}, gi);
    return gi;
  };
  auto touch_agg = [&](int lev, int c) -> LevelAgg& {
    LevelAgg& a = levels_[std::size_t(lev - 1)].agg[std::size_t(c)];
    agg_before.try_emplace({lev, c}, a);
    return a;
  };
  auto touch_occupied = [&](int lev) -> std::int32_t& {
    LevelState& ls = levels_[std::size_t(lev - 1)];
    occupied_before.try_emplace(lev, ls.occupied);
    return ls.occupied;
  };

  auto shift = [&](int lev, std::int32_t r0, std::int32_t s0, std::int32_t r1,
                   std::int32_t s1, const Contrib& c) {
    Cell& a = touch_cell(lev, r0, s0);
    a.m -= c.m;
    a.w -= c.w;
    for (std::size_t i = 0; i < C; ++i) {
      a.ch[i].mu -= c.ch[i].mu;
      a.ch[i].nu -= c.ch[i].nu;
    }
    Cell& b = touch_cell(lev, r1, s1);
    b.m += c.m;
    b.w += c.w;
    for (std::size_t i = 0; i < C; ++i) {
      b.ch[i].mu += c.ch[i].mu;
      b.ch[i].nu += c.ch[i].nu;
    }
  };

  for (const auto& [s, c] : out_c) shift(l, from, s, to, s, c);
  for (const auto& [s, c] : in_c) shift(l, s, from, s, to, c);
  if (self.m > 0 || self.w > 0) shift(l, from, from, to, to, self);

  // membership bookkeeping at level l
  {
    GroupInfo& gf = touch_group(l, from);
    GroupInfo& gt = touch_group(l, to);
    gf.size -= 1;
    bool born = (gt.size == 0);
    gt.size += 1;
    bool died = (gf.size == 0);
    partition_.levels[std::size_t(l - 1)][std::size_t(u)] = to;
    rec.labels.push_back({l, u, from, to});

    if (born || died) {
      std::int32_t& occ = touch_occupied(l);
      occ += (born ? 1 : 0) - (died ? 1 : 0);
    }
    if (born) {
      std::int32_t parent = label(l + 1, from);
      std::int32_t stale = label(l + 1, to);
      partition_.levels[std::size_t(l)][std::size_t(to)] = parent;
      rec.labels.push_back({l + 1, to, stale, parent});
      touch_group(l + 1, parent).size += 1;
    }
    if (died) {
      // cascade: the death of a group removes one item from its parent
      int lev = l;
      std::int32_t dead = from;
      while (lev < L) {
        std::int32_t parent = label(lev + 1, dead);
        GroupInfo& gp = touch_group(lev + 1, parent);
        gp.size -= 1;
        if (gp.size > 0) break;
        touch_occupied(lev + 1) -= 1;
        dead = parent;
        ++lev;
      }
    }
  }

  // propagate cell deltas upward and refresh derived per-level quantities
  struct PendingDelta {
    std::int32_t r, s;
    Cell before, after;
  };
  std::vector<PendingDelta> prev;
  for (int lev = l; lev <= L; ++lev) {
    std::vector<PendingDelta> cur;
    if (lev > l) {
      const auto& bl = partition_.levels[std::size_t(lev - 1)];
      for (const auto& d : prev) {
        std::int32_t pr = bl[std::size_t(d.r)];
        std::int32_t ps = bl[std::size_t(d.s)];
        Cell& cell = touch_cell(lev, pr, ps);
        cell.m += d.after.m - d.before.m;
        cell.w += std::int64_t(d.after.m > 0) - std::int64_t(d.before.m > 0);
        for (std::size_t c = 0; c < C; ++c) {
          cell.ch[c].mu += d.after.ch[c].mu - d.before.ch[c].mu;
          cell.ch[c].nu += d.after.ch[c].mu * d.after.ch[c].mu -
                           d.before.ch[c].mu * d.before.ch[c].mu;
        }
      }
    }
    // compile this level's deltas
    LevelState& ls = levels_[std::size_t(lev - 1)];
    bool any = false;
    for (auto it = cell_before.begin(); it != cell_before.end();) {
      if (it->first.first != lev) {
        ++it;
        continue;
      }
      std::int32_t r = it->first.second.first, s = it->first.second.second;
      const Cell& before = it->second;
      Cell& now = ls.cells[make_key(r, s)];
      if (now == before) {
        if (now.m == 0 && now.w == 0) ls.cells.erase(make_key(r, s));
        it = cell_before.erase(it);
        continue;
      }
      any = true;
      std::int64_t dm = now.m - before.m;
      if (dm != 0) {
        if (dir) {
          touch_group(lev, r).e += dm;
          touch_group(lev, s).e_in += dm;
        } else if (r == s) {
          touch_group(lev, r).e += 2 * dm;
        } else {
          touch_group(lev, r).e += dm;
          touch_group(lev, s).e += dm;
        }
      }
      for (std::size_t c = 0; c < C; ++c) {
        bool was = before.w > 1, is = now.w > 1;
        if (!was && !is) continue;
        double zb = was ? z_value(before, c) : 0.0;
        double za = is ? z_value(now, c) : 0.0;
        if (was != is || zb != za) {
          LevelAgg& a = touch_agg(lev, int(c));
          a.m_z += std::int64_t(is) - std::int64_t(was);
          a.mu_z += za - zb;
        }
      }
      cur.push_back({r, s, before, now});
      rec.cells.push_back({lev, r, s, before, now});
      if (before.m == 0 && now.m > 0) register_partners(ls, dir, r, s);
      if (before.m > 0 && now.m == 0) {
        unregister_partners(ls, dir, r, s);
        ls.cells.erase(make_key(r, s));
      }
      it = cell_before.erase(it);
    }
    prev = std::move(cur);
    if (lev > l && !any && prev.empty()) break;
  }

  for (const auto& [key, before] : group_before) {
    const GroupInfo& now = levels_[std::size_t(key.first - 1)].groups[std::size_t(key.second)];
    if (!(now == before)) rec.groups.push_back({key.first, key.second, before, now});
  }
  for (const auto& [key, before] : agg_before) {
    const LevelAgg& now = levels_[std::size_t(key.first - 1)].agg[std::size_t(key.second)];
    if (!(now == before)) rec.aggs.push_back({key.first, key.second, before, now});
  }
  for (const auto& [lev, before] : occupied_before) {
    std::int32_t now = levels_[std::size_t(lev - 1)].occupied;
    if (now != before) rec.occupied.push_back({lev, before, now});
  }
  return rec;
}

void HierState::revert(const MoveRecord& rec) {
  if (rec.no_op()) return;
  const bool dir = graph_->directed;
  for (auto it = rec.labels.rbegin(); it != rec.labels.rend(); ++it)
    partition_.levels[std::size_t(it->level - 1)][std::size_t(it->item)] = it->before;
  for (const auto& d : rec.cells) {
    LevelState& ls = levels_[std::size_t(d.level - 1)];
    PairKey key = make_key(d.r, d.s);
    if (d.before.m == 0 && d.before.w == 0) {
      if (ls.cells.erase(key) && d.after.m > 0) unregister_partners(ls, dir, d.r, d.s);
    } else {
      bool existed = ls.cells.count(key) > 0;
      ls.cells[key] = d.before;
      if (!existed && d.before.m > 0) register_partners(ls, dir, d.r, d.s);
    }
  }
  for (const auto& d : rec.groups)
    levels_[std::size_t(d.level - 1)].groups[std::size_t(d.g)] = d.before;
  for (const auto& d : rec.aggs)
    levels_[std::size_t(d.level - 1)].agg[std::size_t(d.channel)] = d.before;
  for (const auto& d : rec.occupied)
    levels_[std::size_t(d.level - 1)].occupied = d.before;
}

}  // namespace wsbm
