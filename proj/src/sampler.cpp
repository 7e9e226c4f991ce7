#include "wsbm/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <thread>

namespace wsbm {

HierarchicalPartition singleton_partition(std::int32_t n, int depth) {
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  HierarchicalPartition p;
  std::vector<std::int32_t> ident;
  ident.resize(std::size_t(n));
  for (std::int32_t i = 0; i < n; ++i) ident[std::size_t(i)] = i;
  for (int l = 1; l < depth; ++l) p.levels.push_back(ident);
  p.levels.push_back(std::vector<std::int32_t>(std::size_t(n), 0));
  return p;
}

Sampler::Sampler(JointModel& model, Rng rng, double eps)
    : model_(&model), rng_(rng), eps_(eps) {
  refresh();
}

void Sampler::refresh() {
  const HierState& st = model_->state();
  const std::int32_t n = st.graph().node_count;

  occ_list_.assign(std::size_t(st.depth()), {});
  occ_pos_.assign(std::size_t(st.depth()), std::vector<std::int32_t>(std::size_t(n), -1));
  free_.assign(std::size_t(st.depth()), {});
  for (int l = 1; l <= st.depth(); ++l) {
    const auto& groups = st.level(l).groups;
    for (std::int32_t g = 0; g < n; ++g) {
      if (groups[std::size_t(g)].size > 0) {
        occ_pos_[std::size_t(l - 1)][std::size_t(g)] =
            std::int32_t(occ_list_[std::size_t(l - 1)].size());
        occ_list_[std::size_t(l - 1)].push_back(g);
      } else {
        free_[std::size_t(l - 1)].insert(g);
      }
    }
  }

  if (inst_adj_.empty()) {
    inst_adj_.assign(std::size_t(n), {});
    for (std::int32_t v = 0; v < n; ++v) {
      const auto& row = st.graph_row(v);
      for (std::int32_t k = 0; k < std::int32_t(row.size()); ++k)
        for (std::int32_t c = 0; c < row[std::size_t(k)].mult; ++c)
          inst_adj_[std::size_t(v)].push_back(k);
    }
  }
  pool_.assign(std::size_t(n), {});
  pos_.assign(std::size_t(n), {});
  for (std::int32_t v = 0; v < n; ++v) {
    std::int32_t g = st.label(1, v);
    auto& pool = pool_[std::size_t(g)];
    for (std::int32_t j = 0; j < std::int32_t(inst_adj_[std::size_t(v)].size()); ++j) {
      pos_[std::size_t(v)].push_back(pool.size());
      pool.push_back({v, j});
    }
  }
}

std::int32_t Sampler::fresh_label(int l) const {
  const auto& free = free_[std::size_t(l - 1)];
  return free.empty() ? -1 : *free.begin();
}

int Sampler::candidate_count(int l) const {
  return int(occ_list_[std::size_t(l - 1)].size()) + (fresh_label(l) >= 0 ? 1 : 0);
}

std::int32_t Sampler::pick_uniform_candidate(int l) {
  const auto& occ = occ_list_[std::size_t(l - 1)];
  std::int32_t fresh = fresh_label(l);
  int n = int(occ.size()) + (fresh >= 0 ? 1 : 0);
  int k = int(rng_.uniform_under(std::uint64_t(n)));
  if (k == int(occ.size())) return fresh;
  return occ[std::size_t(k)];
}

void Sampler::occupy(int l, std::int32_t g) {
  auto& pos = occ_pos_[std::size_t(l - 1)];
  if (pos[std::size_t(g)] >= 0) return;
  pos[std::size_t(g)] = std::int32_t(occ_list_[std::size_t(l - 1)].size());
  occ_list_[std::size_t(l - 1)].push_back(g);
  free_[std::size_t(l - 1)].erase(g);
}

void Sampler::vacate(int l, std::int32_t g) {
  auto& pos = occ_pos_[std::size_t(l - 1)];
  std::int32_t at = pos[std::size_t(g)];
  if (at < 0) return;
  auto& list = occ_list_[std::size_t(l - 1)];
  std::int32_t moved = list.back();
  list[std::size_t(at)] = moved;
  list.pop_back();
  pos[std::size_t(moved)] = at;
  pos[std::size_t(g)] = -1;
  free_[std::size_t(l - 1)].insert(g);
}

std::int32_t Sampler::random_partner(int l, std::int32_t u, std::int64_t deg) {
  const HierState& st = model_->state();
  if (l == 1) {
    std::int32_t j = std::int32_t(rng_.uniform_under(std::uint64_t(deg)));
    return st.graph_row(u)[std::size_t(inst_adj_[std::size_t(u)][std::size_t(j)])].t;
  }
  const LevelState& low = st.level(l - 1);
  std::int64_t pick = std::int64_t(rng_.uniform_under(std::uint64_t(deg)));
  for (std::int32_t t : low.partners_out[std::size_t(u)]) {
    const Cell* c = st.find_cell(l - 1, u, t);
    if (!c) continue;
    pick -= (t == u ? 2 * c->m : c->m);
    if (pick < 0) return t;
  }
  if (st.directed())
    for (std::int32_t t : low.partners_in[std::size_t(u)]) {
      if (t == u) continue;
      const Cell* c = st.find_cell(l - 1, t, u);
      if (!c) continue;
      pick -= c->m;
      if (pick < 0) return t;
    }
  throw std::logic_error("half-edge sampling out of range");
}

std::int64_t Sampler::group_edge_total(int l, std::int32_t s) const {
  const GroupInfo& gi = model_->state().level(l).groups[std::size_t(s)];
  return model_->state().directed() ? gi.e + gi.e_in : gi.e;
}

std::int64_t Sampler::edges_between(int l, std::int32_t s, std::int32_t r) const {
  const HierState& st = model_->state();
  if (s == r) {
    const Cell* c = st.find_cell(l, s, s);
    return c ? 2 * c->m : 0;
  }
  const Cell* a = st.find_cell(l, s, r);
  if (!st.directed()) return a ? a->m : 0;
  const Cell* b = st.find_cell(l, r, s);
  return (a ? a->m : 0) + (b ? b->m : 0);
}

std::int32_t Sampler::sample_adjacent_group(int l, std::int32_t s) {
  const HierState& st = model_->state();
  if (l == 1) {
    const auto& pool = pool_[std::size_t(s)];
    auto [v, j] = pool[std::size_t(rng_.uniform_under(pool.size()))];
    std::int32_t t = st.graph_row(v)[std::size_t(inst_adj_[std::size_t(v)][std::size_t(j)])].t;
    return st.label(1, t);
  }
  std::int64_t total = group_edge_total(l, s);
  std::int64_t pick = std::int64_t(rng_.uniform_under(std::uint64_t(total)));
  const LevelState& ls = st.level(l);
  for (std::int32_t x : ls.partners_out[std::size_t(s)]) {
    pick -= edges_between(l, s, x);
    if (pick < 0) return x;
  }
  if (st.directed())
    for (std::int32_t x : ls.partners_in[std::size_t(s)]) {
      if (ls.partners_out[std::size_t(s)].count(x)) continue;  // already counted
      pick -= edges_between(l, s, x);
      if (pick < 0) return x;
    }
  throw std::logic_error("group edge sampling out of range");
}

double Sampler::ln_propose(int l, std::int32_t u, std::int32_t r) const {
  const HierState& st = model_->state();
  int nC = candidate_count(l);
  std::int64_t deg = st.item_degree(l, u);
  if (deg == 0) return -std::log(double(nC));

  // half-edge counts from u to each neighbor group (flat, few entries)
  std::vector<std::pair<std::int32_t, std::int64_t>> d_us;
  auto bump = [&](std::int32_t s, std::int64_t cnt) {
    for (auto& e : d_us)
      if (e.first == s) {
        e.second += cnt;
        return;
      }
    d_us.emplace_back(s, cnt);
  };
  if (l == 1) {
    for (const auto& nbr : st.graph_row(u)) bump(st.label(1, nbr.t), nbr.mult);
  } else {
    const LevelState& low = st.level(l - 1);
    for (std::int32_t t : low.partners_out[std::size_t(u)]) {
      const Cell* c = st.find_cell(l - 1, u, t);
      if (c) bump(st.label(l, t), t == u ? 2 * c->m : c->m);
    }
    if (st.directed())
      for (std::int32_t t : low.partners_in[std::size_t(u)]) {
        if (t == u) continue;
        const Cell* c = st.find_cell(l - 1, t, u);
        if (c) bump(st.label(l, t), c->m);
      }
  }
  double p = 0.0;
  for (const auto& [s, cnt] : d_us) {
    double e_s = double(group_edge_total(l, s));
    double e_sr = double(edges_between(l, s, r));
    p += (double(cnt) / double(deg)) * (e_sr + eps_) / (e_s + eps_ * double(nC));
  }
  return std::log(p);
}

void Sampler::apply_occupied(const MoveRecord& rec, bool forward) {
  for (const auto& g : rec.groups) {
    bool was = (forward ? g.before.size : g.after.size) > 0;
    bool is = (forward ? g.after.size : g.before.size) > 0;
    if (was == is) continue;
    if (is)
      occupy(g.level, g.g);
    else
      vacate(g.level, g.g);
  }
}

void Sampler::pool_move(std::int32_t u, std::int32_t from, std::int32_t to) {
  auto& src = pool_[std::size_t(from)];
  auto& dst = pool_[std::size_t(to)];
  auto& positions = pos_[std::size_t(u)];
  for (std::size_t j = 0; j < positions.size(); ++j) {
    std::size_t at = positions[j];
    auto moved = src.back();
    src[at] = moved;
    src.pop_back();
    if (moved.first != u || std::size_t(moved.second) != j)
      pos_[std::size_t(moved.first)][std::size_t(moved.second)] = at;
    positions[j] = dst.size();
    dst.push_back({u, std::int32_t(j)});
  }
}

bool Sampler::mh_step(int l, std::int32_t u, double beta, double min_delta) {
  HierState& st = model_->state();
  const std::int32_t from = st.label(l, u);
  std::int64_t deg = st.item_degree(l, u);

  std::int32_t r;
  if (deg == 0) {
    r = pick_uniform_candidate(l);
  } else {
    std::int32_t t = random_partner(l, u, deg);
    std::int32_t s = st.label(l, t);
    int nC = candidate_count(l);
    double e_s = double(group_edge_total(l, s));
    if (rng_.uniform() < eps_ * double(nC) / (e_s + eps_ * double(nC)))
      r = pick_uniform_candidate(l);
    else
      r = sample_adjacent_group(l, s);
  }
  if (r == from) return false;
  // moving a singleton to a fresh label leaves the partition unchanged
  bool from_singleton = st.level(l).groups[std::size_t(from)].size == 1;
  if (from_singleton && st.level(l).groups[std::size_t(r)].size == 0) return false;

  double ln_fwd = ln_propose(l, u, r);
  MoveRecord rec;
  double delta = model_->apply_move_delta(l, u, r, &rec);
  apply_occupied(rec, true);

  std::int32_t back = from;
  if (st.level(l).groups[std::size_t(from)].size == 0) back = fresh_label(l);
  double ln_rev = ln_propose(l, u, back);

  double ln_a = beta * delta + ln_rev - ln_fwd;
  bool accept = delta > min_delta && (ln_a >= 0.0 || std::log(rng_.uniform_pos()) < ln_a);
  if (!accept) {
    apply_occupied(rec, false);
    model_->revert(rec, delta);
    return false;
  }
  if (l == 1) pool_move(u, from, r);
  return true;
}

int Sampler::sweep(double beta, double min_delta) {
  HierState& st = model_->state();
  int accepted = 0;
  for (int l = 1; l < st.depth(); ++l) {
    std::vector<std::int32_t> items = st.items(l);
    for (std::int32_t u : items)
      if (st.item_exists(l, u) && mh_step(l, u, beta, min_delta)) ++accepted;
  }
  return accepted;
}

namespace {

struct BestTracker {
  double value;
  HierarchicalPartition partition;

  void offer(const JointModel& jm) {
    if (jm.ln_joint() > value) {
      value = jm.ln_joint();
      partition = jm.state().partition();
    }
  }
};

std::int32_t pick_member_partner(const HierState& st, Rng& rng, int l,
                                 std::int32_t u) {
  std::int64_t deg = st.item_degree(l, u);
  if (deg == 0) return -1;
  std::int64_t pick = std::int64_t(rng.uniform_under(std::uint64_t(deg)));
  if (l == 1) {
    for (const auto& nbr : st.graph_row(u)) {
      pick -= nbr.mult;
      if (pick < 0) return nbr.t;
    }
  } else {
    const LevelState& low = st.level(l - 1);
    for (std::int32_t t : low.partners_out[std::size_t(u)]) {
      const Cell* c = st.find_cell(l - 1, u, t);
      if (!c) continue;
      pick -= (t == u ? 2 * c->m : c->m);
      if (pick < 0) return t;
    }
    if (st.directed())
      for (std::int32_t t : low.partners_in[std::size_t(u)]) {
        if (t == u) continue;
        const Cell* c = st.find_cell(l - 1, t, u);
        if (!c) continue;
        pick -= c->m;
        if (pick < 0) return t;
      }
  }
  return -1;
}

// applies all moves of members into h; returns total delta and the records
double apply_merge(JointModel& jm, int l, const std::vector<std::int32_t>& members,
                   std::int32_t h, std::vector<MoveRecord>& recs,
                   std::vector<double>& deltas) {
  double total = 0.0;
  for (std::int32_t u : members) {
    MoveRecord rec;
    double d = jm.apply_move_delta(l, u, h, &rec);
    total += d;
    recs.push_back(std::move(rec));
    deltas.push_back(d);
  }
  return total;
}

void revert_merge(JointModel& jm, std::vector<MoveRecord>& recs,
                  std::vector<double>& deltas) {
  for (std::size_t i = recs.size(); i-- > 0;) jm.revert(recs[i], deltas[i]);
  recs.clear();
  deltas.clear();
}

// Attempts to merge whole groups into partner-derived candidates, keeping
// only strictly improving merges. Returns the number of merges applied.
int greedy_merge_pass(Sampler& sampler, int l) {
  JointModel& jm = sampler.model();
  HierState& st = jm.state();
  Rng& rng = sampler.rng();
  int applied = 0;

  std::map<std::int32_t, std::vector<std::int32_t>> members;
  for (std::int32_t u : st.items(l)) members[st.label(l, u)].push_back(u);
  std::vector<std::int32_t> order;
  for (const auto& [g, mem] : members) order.push_back(g);
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[std::size_t(rng.uniform_under(i))]);

  for (std::int32_t g : order) {
    if (st.level(l).groups[std::size_t(g)].size == 0) continue;
    std::int32_t best_h = -1;
    double best_delta = 0.0;
    std::vector<MoveRecord> recs;
    std::vector<double> deltas;
    std::set<std::int32_t> tried;
    for (int attempt = 0; attempt < 8; ++attempt) {
      const auto& mem = members[g];
      std::int32_t u = mem[std::size_t(rng.uniform_under(mem.size()))];
      std::int32_t t = pick_member_partner(st, rng, l, u);
      if (t < 0) continue;
      std::int32_t h = st.label(l, t);
      if (h == g || !tried.insert(h).second) continue;
      double d = apply_merge(jm, l, members[g], h, recs, deltas);
      revert_merge(jm, recs, deltas);
      if (d > best_delta) {
        best_h = h;
        best_delta = d;
      }
    }
    if (best_h >= 0) {
      apply_merge(jm, l, members[g], best_h, recs, deltas);
      auto& dst = members[best_h];
      dst.insert(dst.end(), members[g].begin(), members[g].end());
      members[g].clear();
      ++applied;
    }
  }
  if (applied > 0) sampler.refresh();
  return applied;
}

}  // namespace

void agglomerative_init(Sampler& sampler) {
  JointModel& jm = sampler.model();
  HierState& st = jm.state();
  Rng& rng = sampler.rng();
  const double greedy_beta = 1048576.0;

  for (int l = 1; l < st.depth(); ++l) {
    BestTracker best{jm.ln_joint(), st.partition()};
    while (st.occupied_count(l) > 1) {
      std::int32_t target =
          std::max<std::int32_t>(1, std::int32_t(double(st.occupied_count(l)) / 1.4));
      if (target == st.occupied_count(l)) --target;

      // members per occupied group
      std::map<std::int32_t, std::vector<std::int32_t>> members;
      for (std::int32_t u : st.items(l)) members[st.label(l, u)].push_back(u);

      std::vector<std::int32_t> order;
      for (const auto& [g, mem] : members) order.push_back(g);
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[std::size_t(rng.uniform_under(i))]);

      for (std::int32_t g : order) {
        if (st.occupied_count(l) <= target) break;
        if (st.level(l).groups[std::size_t(g)].size == 0) continue;

        std::int32_t best_h = -1;
        double best_delta = 0.0;
        std::vector<MoveRecord> recs;
        std::vector<double> deltas;
        std::set<std::int32_t> tried;
        for (int attempt = 0; attempt < 5; ++attempt) {
          const auto& mem = members[g];
          std::int32_t u = mem[std::size_t(rng.uniform_under(mem.size()))];
          std::int32_t t = pick_member_partner(st, rng, l, u);
          std::int32_t h;
          if (t >= 0) {
            h = st.label(l, t);
          } else {
            std::size_t k = std::size_t(rng.uniform_under(order.size()));
            h = order[k];
            if (st.level(l).groups[std::size_t(h)].size == 0) continue;
          }
          if (h == g || !tried.insert(h).second) continue;
          double d = apply_merge(jm, l, members[g], h, recs, deltas);
          revert_merge(jm, recs, deltas);
          if (best_h < 0 || d > best_delta) {
            best_h = h;
            best_delta = d;
          }
        }
        if (best_h >= 0) {
          apply_merge(jm, l, members[g], best_h, recs, deltas);
          auto& dst = members[best_h];
          dst.insert(dst.end(), members[g].begin(), members[g].end());
          members[g].clear();
        }
      }
      sampler.refresh();
      // refinement only takes clearly improving moves; unrestricted greedy
      // repair here piles up marginal weight-term gains that overfit
      for (int r = 0; r < 20; ++r)
        if (sampler.sweep(greedy_beta, 2.0) == 0) break;
      jm.resync();
      best.offer(jm);
    }
    st.reset_partition(best.partition);
    jm.resync();
    sampler.refresh();
  }
}

namespace {

FitResult run_fit_chain(const WeightedGraph& g,
                        const std::vector<ChannelModel>& channels,
                        AdjacencyModel adjacency, const FitParams& params,
                        int chain) {
  HierState st(g, singleton_partition(g.node_count, params.max_depth));
  JointModel jm(st, channels, adjacency);
  Sampler smp(jm, Rng(params.seed).fork(std::uint64_t(chain)), params.eps);
  if (params.agglomerative) agglomerative_init(smp);

  BestTracker best{jm.ln_joint(), st.partition()};
  int phases = 1;
  for (double b = 1.0; b < params.beta_max; b *= 2.0) ++phases;
  int per_phase = std::max(1, params.sweeps / phases);
  double beta = 1.0;
  for (;;) {
    for (int i = 0; i < per_phase; ++i) {
      smp.sweep(beta);
      best.offer(jm);
    }
    jm.resync();
    if (beta >= params.beta_max) break;
    beta = std::min(beta * 2.0, params.beta_max);
  }
  for (int i = 0; i < 100; ++i) {
    int accepted = smp.sweep(params.beta_max);
    best.offer(jm);
    if (accepted == 0) break;
  }
  // whole-group merges cross barriers single-item moves cannot
  for (int round = 0; round < 50; ++round) {
    int merged = 0;
    for (int l = 1; l < st.depth(); ++l) merged += greedy_merge_pass(smp, l);
    for (int i = 0; i < 20; ++i)
      if (smp.sweep(params.beta_max) == 0) break;
    jm.resync();
    best.offer(jm);
    if (merged == 0) break;
  }
  st.reset_partition(best.partition);
  jm.resync();
  FitResult out;
  out.partition = st.compacted();
  out.ln_joint = jm.ln_joint();
  return out;
}

}  // namespace

FitResult fit_map(const WeightedGraph& g, const std::vector<ChannelModel>& channels,
                  AdjacencyModel adjacency, const FitParams& params) {
  if (params.chains < 1) throw std::invalid_argument("need at least one chain");
  std::vector<FitResult> results(std::size_t(params.chains));
  if (params.chains == 1) {
    results[0] = run_fit_chain(g, channels, adjacency, params, 0);
  } else {
    std::vector<std::thread> threads;
    for (int c = 0; c < params.chains; ++c)
      threads.emplace_back([&, c] {
        results[std::size_t(c)] = run_fit_chain(g, channels, adjacency, params, c);
      });
    for (auto& t : threads) t.join();
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i)
    if (results[i].ln_joint > results[best].ln_joint) best = i;
  return results[best];
}

PosteriorSamples sample_posterior(const WeightedGraph& g,
                                  const std::vector<ChannelModel>& channels,
                                  AdjacencyModel adjacency,
                                  const SampleParams& params) {
  HierState st(g, singleton_partition(g.node_count, params.max_depth));
  JointModel jm(st, channels, adjacency);
  Sampler smp(jm, Rng(params.seed), params.eps);
  int burnin = params.burnin >= 0 ? params.burnin : params.sweeps / 2;

  PosteriorSamples out;
  for (int i = 0; i < params.sweeps; ++i) {
    smp.sweep(1.0);
    if ((i & 1023) == 1023) jm.resync();
    if (i >= burnin && (i - burnin) % params.thin == 0) {
      out.partitions.push_back(st.compacted());
      out.ln_joints.push_back(jm.ln_joint());
    }
  }
  return out;
}

}  // namespace wsbm
