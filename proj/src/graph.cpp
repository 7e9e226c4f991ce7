#include "wsbm/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace wsbm {

namespace {

using nlohmann::json;

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

json spec_to_json(const std::string& name, const CovariateSpec& spec) {
  json j;
  j["name"] = name;
  j["family"] = family_name(spec.family);
  j["transforms"] = json::array();
  for (const auto& t : spec.transform_chain) {
    json s;
    s["type"] = transform_kind_name(t.kind);
    if (t.kind == TransformStep::Kind::Affine) {
      s["a"] = t.a;
      s["b"] = t.b;
    }
    j["transforms"].push_back(s);
  }
  if (spec.bound_M) j["M"] = *spec.bound_M;
  return j;
}

CovariateSpec spec_from_json(const json& j) {
  CovariateSpec spec;
  spec.family = parse_family(j.at("family").get<std::string>());
  if (j.contains("transforms")) {
    for (const auto& s : j.at("transforms")) {
      TransformStep t;
      t.kind = parse_transform_kind(s.at("type").get<std::string>());
      if (t.kind == TransformStep::Kind::Affine) {
        t.a = s.at("a").get<double>();
        t.b = s.at("b").get<double>();
      }
      spec.transform_chain.push_back(t);
    }
  }
  if (j.contains("M")) spec.bound_M = j.at("M").get<std::int64_t>();
  return spec;
}

struct PairKey {
  std::int32_t a, b;
  bool operator<(const PairKey& o) const {
    return a != o.a ? a < o.a : b < o.b;
  }
};

}  // namespace

void WeightedGraph::validate() const {
  if (node_count < 1) throw std::invalid_argument("graph must have at least one node");
  if (values.size() != channel_names.size())
    throw std::invalid_argument("channel value arrays do not match channel names");
  for (const auto& ch : values)
    if (ch.size() != edges.size())
      throw std::invalid_argument("channel values do not cover all edges");
  std::map<PairKey, int> seen;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& b = edges[e];
    if (b.source < 0 || b.source >= node_count || b.target < 0 || b.target >= node_count)
      throw std::invalid_argument("edge " + std::to_string(e) + ": endpoint out of range");
    if (b.source == b.target)
      throw std::invalid_argument("edge " + std::to_string(e) + ": self-loops are not supported");
    if (!directed && b.source > b.target)
      throw std::invalid_argument("edge " + std::to_string(e) +
                                  ": undirected edges must have source <= target");
    if (b.multiplicity < 1)
      throw std::invalid_argument("edge " + std::to_string(e) + ": multiplicity must be >= 1");
    if (++seen[{b.source, b.target}] > 1)
      throw std::invalid_argument("edge " + std::to_string(e) + ": duplicate pair");
    for (std::size_t c = 0; c < values.size(); ++c)
      if (values[c][e].size() != std::size_t(b.multiplicity))
        throw std::invalid_argument("edge " + std::to_string(e) + ", channel " +
                                    channel_names[c] + ": covariate count mismatch");
  }
}

std::string sidecar_path(const std::string& tsv_path) {
  auto dot = tsv_path.find_last_of('.');
  auto slash = tsv_path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return tsv_path + ".json";
  return tsv_path.substr(0, dot) + ".json";
}

namespace {

GraphBundle load_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file: " + path);

  GraphBundle bundle;
  WeightedGraph& g = bundle.graph;
  std::int64_t declared_nodes = -1;

  // sidecar (optional)
  {
    std::ifstream side(sidecar_path(path));
    if (side) {
      json j = json::parse(side);
      if (j.contains("directed")) g.directed = j.at("directed").get<bool>();
      if (j.contains("node_count")) declared_nodes = j.at("node_count").get<std::int64_t>();
      if (j.contains("channels")) {
        for (const auto& c : j.at("channels")) {
          g.channel_names.push_back(c.at("name").get<std::string>());
          bundle.channels.push_back(spec_from_json(c));
        }
      }
    }
  }

  std::map<PairKey, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;
  std::size_t n_channels = g.channel_names.size();
  bool channels_known = !g.channel_names.empty();

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::int64_t src, dst;
    if (!(ss >> src >> dst))
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed row");
    std::vector<double> row_vals;
    double v;
    while (ss >> v) row_vals.push_back(v);
    if (!ss.eof())
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed row");
    if (!channels_known) {
      n_channels = row_vals.size();
      for (std::size_t c = 0; c < n_channels; ++c) {
        g.channel_names.push_back("c" + std::to_string(c));
        bundle.channels.emplace_back();
      }
      channels_known = true;
    }
    if (row_vals.size() != n_channels)
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected " + std::to_string(n_channels) +
                               " covariate column(s), got " + std::to_string(row_vals.size()));
    if (src < 0 || dst < 0)
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": negative node id");
    if (!g.directed && src > dst) std::swap(src, dst);
    PairKey key{std::int32_t(src), std::int32_t(dst)};
    auto it = index.find(key);
    std::size_t e;
    if (it == index.end()) {
      e = g.edges.size();
      index.emplace(key, e);
      g.edges.push_back({key.a, key.b, 0});
      if (g.values.empty()) g.values.resize(n_channels);
      for (auto& ch : g.values) ch.emplace_back();
    } else {
      e = it->second;
    }
    g.edges[e].multiplicity += 1;
    if (g.values.empty()) g.values.resize(n_channels);
    for (std::size_t c = 0; c < n_channels; ++c) g.values[c][e].push_back(row_vals[c]);
  }
  if (g.values.empty()) g.values.resize(n_channels);

  std::int64_t max_id = -1;
  for (const auto& b : g.edges) max_id = std::max<std::int64_t>(max_id, std::max(b.source, b.target));
  g.node_count = std::int32_t(declared_nodes >= 0 ? declared_nodes : max_id + 1);
  if (g.node_count < 1) g.node_count = 1;
  if (declared_nodes >= 0 && max_id >= declared_nodes)
    throw std::invalid_argument(path + ": endpoint out of range (node id " +
                                std::to_string(max_id) + " with node_count " +
                                std::to_string(declared_nodes) + ")");
  g.validate();
  return bundle;
}

GraphBundle load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file: " + path);
  json j = json::parse(in);

  GraphBundle bundle;
  WeightedGraph& g = bundle.graph;
  g.node_count = j.at("node_count").get<std::int32_t>();
  g.directed = j.at("directed").get<bool>();
  for (const auto& c : j.at("channels")) {
    g.channel_names.push_back(c.at("name").get<std::string>());
    bundle.channels.push_back(spec_from_json(c));
  }
  g.values.resize(g.channel_names.size());
  for (const auto& e : j.at("edges")) {
    EdgeBundle b;
    b.source = e.at("source").get<std::int32_t>();
    b.target = e.at("target").get<std::int32_t>();
    b.multiplicity = e.at("multiplicity").get<std::int32_t>();
    g.edges.push_back(b);
    const auto& vals = e.at("values");
    for (std::size_t c = 0; c < g.channel_names.size(); ++c)
      g.values[c].push_back(vals.at(g.channel_names[c]).get<std::vector<double>>());
  }
  g.validate();
  return bundle;
}

void save_tsv(const GraphBundle& bundle, const std::string& path) {
  const WeightedGraph& g = bundle.graph;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write graph file: " + path);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& b = g.edges[e];
    for (int k = 0; k < b.multiplicity; ++k) {
      out << b.source << '\t' << b.target;
      for (std::size_t c = 0; c < g.channel_count(); ++c)
        out << '\t' << fmt_double(g.values[c][e][k]);
      out << '\n';
    }
  }
  json side;
  side["directed"] = g.directed;
  side["node_count"] = g.node_count;
  side["channels"] = json::array();
  for (std::size_t c = 0; c < g.channel_count(); ++c)
    side["channels"].push_back(spec_to_json(g.channel_names[c], bundle.channels[c]));
  std::ofstream sout(sidecar_path(path));
  sout << side.dump(2) << '\n';
}

void save_json(const GraphBundle& bundle, const std::string& path) {
  const WeightedGraph& g = bundle.graph;
  json j;
  j["node_count"] = g.node_count;
  j["directed"] = g.directed;
  j["channels"] = json::array();
  for (std::size_t c = 0; c < g.channel_count(); ++c)
    j["channels"].push_back(spec_to_json(g.channel_names[c], bundle.channels[c]));
  j["edges"] = json::array();
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    json je;
    je["source"] = g.edges[e].source;
    je["target"] = g.edges[e].target;
    je["multiplicity"] = g.edges[e].multiplicity;
    je["values"] = json::object();
    for (std::size_t c = 0; c < g.channel_count(); ++c)
      je["values"][g.channel_names[c]] = g.values[c][e];
    j["edges"].push_back(je);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write graph file: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace

GraphBundle load_graph(const std::string& path, GraphFormat format) {
  return format == GraphFormat::EdgeListTsv ? load_tsv(path) : load_json(path);
}

void save_graph(const GraphBundle& bundle, const std::string& path,
                GraphFormat format) {
  bundle.graph.validate();
  if (format == GraphFormat::EdgeListTsv)
    save_tsv(bundle, path);
  else
    save_json(bundle, path);
}

}  // namespace wsbm
