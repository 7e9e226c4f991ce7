#include "wsbm/adjacency_likelihood.hpp"

#include <stdexcept>
#include <vector>

#include "wsbm/numeric.hpp"

namespace wsbm {

AdjacencyModel parse_adjacency_model(const std::string& name) {
  if (name == "degree-corrected") return AdjacencyModel::DegreeCorrected;
  if (name == "plain") return AdjacencyModel::Plain;
  if (name == "fixed") return AdjacencyModel::FixedCompleteGraph;
  throw std::invalid_argument("unknown adjacency model: " + name);
}

std::string adjacency_model_name(AdjacencyModel m) {
  switch (m) {
    case AdjacencyModel::DegreeCorrected: return "degree-corrected";
    case AdjacencyModel::Plain: return "plain";
    case AdjacencyModel::FixedCompleteGraph: return "fixed";
  }
  throw std::logic_error("bad adjacency model");
}

double AdjacencyTerms::cell_term(int level, std::int32_t r, std::int32_t s,
                                 std::int64_t m, std::int64_t n_r,
                                 std::int64_t n_s) const {
  if (m == 0 || model == AdjacencyModel::FixedCompleteGraph) return 0.0;
  if (level == 1) {
    switch (model) {
      case AdjacencyModel::DegreeCorrected:
        if (directed) return ln_factorial(m);
        return r == s ? ln_double_factorial_even(m) : ln_factorial(m);
      case AdjacencyModel::Plain: {
        std::int64_t cells;
        if (directed)
          cells = r == s ? n_r * (n_r - 1) : n_r * n_s;
        else
          cells = r == s ? n_r * (n_r - 1) / 2 : n_r * n_s;
        return -ln_multiset(cells, m);
      }
      default:
        return 0.0;
    }
  }
  // aggregation of the lower-level multigraph into group cells; diagonal
  // cells include lower-level self-pairs
  std::int64_t cells;
  if (directed)
    cells = n_r * n_s;
  else
    cells = r == s ? n_r * (n_r + 1) / 2 : n_r * n_s;
  return -ln_multiset(cells, m);
}

double AdjacencyTerms::group_term(int level, const GroupInfo& gi) const {
  if (gi.size == 0) return 0.0;
  double t = ln_factorial(gi.size);  // partition prior numerator
  if (level == 1 && model == AdjacencyModel::DegreeCorrected) {
    if (directed) {
      t -= ln_factorial(gi.e) + ln_factorial(gi.e_in);
      t -= ln_multiset(gi.size, gi.e) + ln_multiset(gi.size, gi.e_in);
    } else {
      t -= ln_factorial(gi.e);
      t -= ln_multiset(gi.size, gi.e);
    }
  }
  return t;
}

double AdjacencyTerms::level_term(std::int64_t n_items, std::int32_t n_groups) const {
  if (n_items <= 0) return 0.0;
  return -ln_factorial(n_items) - ln_binomial(n_items - 1, n_groups - 1) -
         std::log(double(n_items));
}

AdjacencyTerms make_adjacency_terms(const WeightedGraph& g, AdjacencyModel model) {
  AdjacencyTerms terms;
  terms.model = model;
  terms.directed = g.directed;
  if (model == AdjacencyModel::DegreeCorrected) {
    std::vector<std::int64_t> k_out(std::size_t(g.node_count), 0);
    std::vector<std::int64_t> k_in(std::size_t(g.node_count), 0);
    double c = 0.0;
    for (const auto& b : g.edges) {
      k_out[std::size_t(b.source)] += b.multiplicity;
      k_in[std::size_t(b.target)] += b.multiplicity;
      c -= ln_factorial(b.multiplicity);
    }
    for (std::int32_t i = 0; i < g.node_count; ++i) {
      if (g.directed) {
        c += ln_factorial(k_out[std::size_t(i)]) + ln_factorial(k_in[std::size_t(i)]);
      } else {
        c += ln_factorial(k_out[std::size_t(i)] + k_in[std::size_t(i)]);
      }
    }
    terms.constant = c;
  }
  return terms;
}

double ln_adjacency_total(const AdjacencyTerms& terms, const HierState& st) {
  KahanSum sum;
  sum.add(terms.constant);
  for (int l = 1; l <= st.depth(); ++l) {
    const LevelState& ls = st.level(l);
    for (const auto& [key, cell] : ls.cells) {
      std::int32_t r = key_row(key), s = key_col(key);
      sum.add(terms.cell_term(l, r, s, cell.m, ls.groups[std::size_t(r)].size,
                              ls.groups[std::size_t(s)].size));
    }
    for (const auto& gi : ls.groups) sum.add(terms.group_term(l, gi));
    sum.add(terms.level_term(st.item_count(l), ls.occupied));
  }
  return sum.value();
}

}  // namespace wsbm
