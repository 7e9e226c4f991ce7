#include "wsbm/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

#include "json.hpp"
#include "wsbm/numeric.hpp"

namespace wsbm {

double posterior_odds(const WeightedGraph& g1, double ln_joint1,
                      const WeightedGraph& g2, double ln_joint2) {
  bool same = g1.node_count == g2.node_count && g1.directed == g2.directed &&
              g1.edges.size() == g2.edges.size();
  if (same)
    for (std::size_t e = 0; e < g1.edges.size(); ++e) {
      const auto &a = g1.edges[e], &b = g2.edges[e];
      if (a.source != b.source || a.target != b.target ||
          a.multiplicity != b.multiplicity) {
        same = false;
        break;
      }
    }
  if (!same)
    throw std::invalid_argument("posterior odds require fits of the same network");
  return ln_joint1 - ln_joint2;
}

std::vector<ModularityLevel> modularity_profile(const HierState& st) {
  std::vector<ModularityLevel> out;
  double two_e = 2.0 * double(st.total_edges());
  if (two_e <= 0.0) two_e = 1.0;
  for (int l = 1; l <= st.depth(); ++l) {
    const LevelState& ls = st.level(l);
    ModularityLevel lvl;
    for (std::int32_t g = 0; g < std::int32_t(ls.groups.size()); ++g) {
      const GroupInfo& gi = ls.groups[std::size_t(g)];
      if (gi.size == 0) continue;
      const Cell* diag = st.find_cell(l, g, g);
      double e_rr = diag ? 2.0 * double(diag->m) : 0.0;
      double e_r = double(st.directed() ? gi.e + gi.e_in : gi.e);
      double q = (e_rr - e_r * e_r / two_e) / two_e;
      lvl.groups.push_back(g);
      lvl.q.push_back(q);
      lvl.Q += q;
    }
    out.push_back(std::move(lvl));
  }
  return out;
}

double normalized_mutual_information(const std::vector<std::int32_t>& a,
                                     const std::vector<std::int32_t>& b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("labelings must have equal nonzero length");
  double n = double(a.size());
  std::map<std::int32_t, double> pa, pb;
  std::map<std::pair<std::int32_t, std::int32_t>, double> pab;
  for (std::size_t i = 0; i < a.size(); ++i) {
    pa[a[i]] += 1.0;
    pb[b[i]] += 1.0;
    pab[{a[i], b[i]}] += 1.0;
  }
  double ha = 0.0, hb = 0.0, mi = 0.0;
  for (const auto& [k, c] : pa) ha -= c / n * std::log(c / n);
  for (const auto& [k, c] : pb) hb -= c / n * std::log(c / n);
  for (const auto& [k, c] : pab) {
    double pj = c / n;
    mi += pj * std::log(pj * n * n / (pa[k.first] * pb[k.second]));
  }
  if (ha + hb <= 0.0) return 1.0;
  return 2.0 * mi / (ha + hb);
}

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_distribution_csv(const std::string& path, const HierState& st,
                            const ChannelModel& cm, std::size_t channel) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "kind,x,value\n";
  if (!family_is_micro(cm.family)) return;  // predictive mixture is microcanonical-only
  if (family_is_discrete(cm.family)) {
    double hi = 0.0;
    for (const auto& [key, cell] : st.level(1).cells)
      hi = std::max(hi, cell.ch[channel].mu);
    for (std::int64_t x = 0; x <= std::int64_t(hi); ++x)
      out << "mass," << x << ',' << fmt(overall_weight_density(st, cm, channel, double(x)))
          << '\n';
  } else {
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const auto& [key, cell] : st.level(1).cells) {
      const auto& cs = cell.ch[channel];
      auto [a, b] = micro_marginal_support(cm.family, cell.w, cs.mu, cs.nu);
      if (first) {
        lo = a;
        hi = b;
        first = false;
      } else {
        lo = std::min(lo, a);
        hi = std::max(hi, b);
      }
    }
    if (first || hi <= lo) return;
    const int grid = 512;
    for (int i = 0; i <= grid; ++i) {
      double x = lo + (hi - lo) * double(i) / grid;
      out << "density," << fmt(x) << ','
          << fmt(overall_weight_density(st, cm, channel, x)) << '\n';
    }
    for (const auto& atom : overall_weight_atoms(st, cm, channel))
      out << "atom," << fmt(atom.x) << ',' << fmt(atom.mass) << '\n';
  }
}

}  // namespace

void export_fit_report(const std::string& dir, const HierState& st,
                       const std::vector<ChannelModel>& channels,
                       const std::vector<std::string>& channel_names,
                       AdjacencyModel adjacency) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  HierarchicalPartition compact = st.compacted();

  {
    std::ofstream out(dir + "/partition.json");
    out << partition_to_json(compact) << '\n';
  }
  {
    std::ofstream out(dir + "/levels.csv");
    out << "node";
    for (int l = 1; l <= compact.depth(); ++l) out << ",level" << l;
    out << '\n';
    for (std::int32_t i = 0; i < st.graph().node_count; ++i) {
      out << i;
      std::int32_t g = i;
      for (int l = 1; l <= compact.depth(); ++l) {
        g = compact.levels[std::size_t(l - 1)][std::size_t(g)];
        out << ',' << g;
      }
      out << '\n';
    }
  }
  auto profile = modularity_profile(st);
  {
    std::ofstream out(dir + "/modularity.csv");
    out << "level,group,q\n";
    for (std::size_t l = 0; l < profile.size(); ++l)
      for (std::size_t i = 0; i < profile[l].groups.size(); ++i)
        out << (l + 1) << ',' << profile[l].groups[i] << ','
            << fmt(profile[l].q[i]) << '\n';
  }
  for (std::size_t c = 0; c < channels.size(); ++c)
    write_distribution_csv(dir + "/" + channel_names[c] + ".distribution.csv", st,
                           channels[c], c);
  {
    nlohmann::json j;
    KahanSum total;
    j["adjacency_model"] = adjacency_model_name(adjacency);
    AdjacencyTerms terms = make_adjacency_terms(st.graph(), adjacency);
    double adj_total = ln_adjacency_total(terms, st);
    total.add(adj_total);
    j["ln_adjacency"] = adj_total;
    j["depth"] = compact.depth();
    j["group_counts"] = nlohmann::json::array();
    for (int l = 1; l <= st.depth(); ++l) j["group_counts"].push_back(st.occupied_count(l));
    j["modularity"] = nlohmann::json::array();
    for (const auto& lvl : profile) j["modularity"].push_back(lvl.Q);
    j["channels"] = nlohmann::json::array();
    for (std::size_t c = 0; c < channels.size(); ++c) {
      EvidenceBreakdown br = evidence_breakdown(channels[c], st, c);
      nlohmann::json jc;
      jc["name"] = channel_names[c];
      jc["family"] = family_name(channels[c].family);
      jc["log_jacobian"] = br.log_jacobian;
      jc["edge_constant"] = br.edge_constant;
      jc["level_terms"] = br.level_terms;
      jc["global_term"] = br.global_term;
      jc["total"] = br.total;
      if (family_is_binomial(channels[c].family)) jc["M"] = channels[c].M;
      if (!channels[c].hyper.empty()) jc["hyperparameters"] = channels[c].hyper;
      j["channels"].push_back(jc);
      total.add(br.total);
    }
    j["ln_joint"] = total.value();
    std::ofstream out(dir + "/summary.json");
    out << j.dump(2) << '\n';
  }
}

}  // namespace wsbm
