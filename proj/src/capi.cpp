#include "wsbm.h"

#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <string>

#include "json.hpp"
#include "wsbm/analysis.hpp"
#include "wsbm/graph.hpp"
#include "wsbm/sampler.hpp"
#include "wsbm/synth.hpp"

using nlohmann::json;

struct wsbm_graph {
  wsbm::GraphBundle bundle;
};

struct wsbm_result {
  std::string text;
  double ln_joint = 0.0;
};

namespace {

thread_local std::string g_last_error;

int fail(int code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

int classify(const std::exception& e) {
  if (dynamic_cast<const std::invalid_argument*>(&e) ||
      dynamic_cast<const std::domain_error*>(&e) ||
      dynamic_cast<const json::exception*>(&e))
    return WSBM_ERR_INVALID;
  std::string what = e.what();
  if (what.find("cannot open") != std::string::npos ||
      what.find("cannot write") != std::string::npos)
    return WSBM_ERR_IO;
  return WSBM_ERR_RUNTIME;
}

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw std::invalid_argument(where + ": unknown key \"" + it.key() + "\"");
}

wsbm::GraphFormat parse_format(const char* format) {
  std::string f = format ? format : "";
  if (f == "tsv") return wsbm::GraphFormat::EdgeListTsv;
  if (f == "json") return wsbm::GraphFormat::Json;
  throw std::invalid_argument("unknown graph format: " + f);
}

struct InferenceConfig {
  wsbm::AdjacencyModel adjacency = wsbm::AdjacencyModel::DegreeCorrected;
  int depth = 4;
  int sweeps = 200;
  int chains = 1;
  std::uint64_t seed = 1;
  double eps = 1.0;
  double beta_max = 1048576.0;
  int burnin = -1;
  int thin = 10;
  std::vector<std::optional<std::vector<double>>> hyper_override;
  std::vector<bool> fit_hyper;
  wsbm::GraphBundle merged;  // graph with channel specs after config overrides
};

std::size_t channel_index(const wsbm::WeightedGraph& g, const json& jc,
                          std::size_t position) {
  if (jc.contains("name")) {
    std::string name = jc.at("name").get<std::string>();
    for (std::size_t c = 0; c < g.channel_names.size(); ++c)
      if (g.channel_names[c] == name) return c;
    throw std::invalid_argument("config channel \"" + name + "\" not in graph");
  }
  if (position >= g.channel_count())
    throw std::invalid_argument("more channel configs than graph channels");
  return position;
}

InferenceConfig parse_inference_config(const wsbm::GraphBundle& bundle,
                                       const char* config_json, bool sampling) {
  InferenceConfig cfg;
  cfg.merged = bundle;
  cfg.hyper_override.assign(bundle.graph.channel_count(), std::nullopt);
  cfg.fit_hyper.assign(bundle.graph.channel_count(), true);
  if (!config_json || !*config_json) return cfg;

  json j = json::parse(config_json);
  std::set<std::string> allowed = {"channels", "adjacency_model", "depth",
                                   "sweeps",   "chains",          "seed",
                                   "eps",      "beta_max"};
  if (sampling) {
    allowed.insert("burnin");
    allowed.insert("thin");
  }
  check_keys(j, allowed, "config");

  if (j.contains("adjacency_model"))
    cfg.adjacency = wsbm::parse_adjacency_model(j.at("adjacency_model").get<std::string>());
  if (j.contains("depth")) cfg.depth = j.at("depth").get<int>();
  if (cfg.depth < 2) throw std::invalid_argument("config: depth must be >= 2");
  if (j.contains("sweeps")) cfg.sweeps = j.at("sweeps").get<int>();
  if (j.contains("chains")) cfg.chains = j.at("chains").get<int>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("eps")) cfg.eps = j.at("eps").get<double>();
  if (j.contains("beta_max")) cfg.beta_max = j.at("beta_max").get<double>();
  if (j.contains("burnin")) cfg.burnin = j.at("burnin").get<int>();
  if (j.contains("thin")) cfg.thin = j.at("thin").get<int>();

  if (j.contains("channels")) {
    const json& chans = j.at("channels");
    if (!chans.is_array()) throw std::invalid_argument("config: channels must be an array");
    for (std::size_t k = 0; k < chans.size(); ++k) {
      const json& jc = chans[k];
      check_keys(jc, {"name", "family", "transforms", "M", "hyper", "fit_hyper"},
                 "config channel");
      std::size_t c = channel_index(bundle.graph, jc, k);
      wsbm::CovariateSpec& spec = cfg.merged.channels[c];
      if (jc.contains("family"))
        spec.family = wsbm::parse_family(jc.at("family").get<std::string>());
      if (jc.contains("transforms")) {
        spec.transform_chain.clear();
        for (const json& js : jc.at("transforms")) {
          check_keys(js, {"type", "a", "b"}, "transform");
          wsbm::TransformStep step;
          step.kind = wsbm::parse_transform_kind(js.at("type").get<std::string>());
          if (js.contains("a")) step.a = js.at("a").get<double>();
          if (js.contains("b")) step.b = js.at("b").get<double>();
          spec.transform_chain.push_back(step);
        }
      }
      if (jc.contains("M")) spec.bound_M = jc.at("M").get<std::int64_t>();
      if (jc.contains("hyper"))
        cfg.hyper_override[c] = jc.at("hyper").get<std::vector<double>>();
      if (jc.contains("fit_hyper")) cfg.fit_hyper[c] = jc.at("fit_hyper").get<bool>();
    }
  }
  return cfg;
}

// channel layout can change under a split transform; track origin indices
struct PreparedSetup {
  wsbm::PreparedGraph pg;
  std::vector<std::size_t> origin;  // prepared channel -> source channel
};

PreparedSetup prepare(const InferenceConfig& cfg) {
  PreparedSetup setup;
  setup.pg = wsbm::prepare_graph(cfg.merged);
  std::size_t src = 0;
  for (std::size_t c = 0; c < setup.pg.channels.size(); ++c) {
    const std::string& name = setup.pg.graph.channel_names[c];
    if (src + 1 < cfg.merged.graph.channel_count() &&
        name == cfg.merged.graph.channel_names[src + 1])
      ++src;
    setup.origin.push_back(src);
  }
  for (std::size_t c = 0; c < setup.pg.channels.size(); ++c) {
    const auto& ov = cfg.hyper_override[setup.origin[c]];
    if (!ov) continue;
    if (ov->size() != setup.pg.channels[c].hyper.size())
      throw std::invalid_argument("config: wrong hyperparameter count for channel " +
                                  setup.pg.graph.channel_names[c]);
    setup.pg.channels[c].hyper = *ov;
  }
  return setup;
}

bool any_conjugate(const std::vector<wsbm::ChannelModel>& channels) {
  for (const auto& cm : channels)
    if (!wsbm::family_is_micro(cm.family)) return true;
  return false;
}

json channels_json(const PreparedSetup& setup) {
  json out = json::array();
  for (std::size_t c = 0; c < setup.pg.channels.size(); ++c) {
    json jc;
    jc["name"] = setup.pg.graph.channel_names[c];
    jc["family"] = wsbm::family_name(setup.pg.channels[c].family);
    if (!setup.pg.channels[c].hyper.empty())
      jc["hyper"] = setup.pg.channels[c].hyper;
    if (wsbm::family_is_binomial(setup.pg.channels[c].family))
      jc["M"] = setup.pg.channels[c].M;
    out.push_back(jc);
  }
  return out;
}

wsbm_result* fit_impl(const wsbm_graph* g, const char* config_json,
                      const char* out_dir) {
  InferenceConfig cfg = parse_inference_config(g->bundle, config_json, false);
  PreparedSetup setup = prepare(cfg);

  wsbm::FitParams fp;
  fp.seed = cfg.seed;
  fp.sweeps = cfg.sweeps;
  fp.chains = cfg.chains;
  fp.eps = cfg.eps;
  fp.max_depth = cfg.depth;
  fp.beta_max = cfg.beta_max;

  wsbm::FitResult fr = wsbm::fit_map(setup.pg.graph, setup.pg.channels,
                                     cfg.adjacency, fp);
  wsbm::HierState st(setup.pg.graph, fr.partition);
  if (any_conjugate(setup.pg.channels)) {
    // alternate hyperparameter and partition optimization once
    for (std::size_t c = 0; c < setup.pg.channels.size(); ++c)
      if (cfg.fit_hyper[setup.origin[c]])
        wsbm::fit_hyperparameters(setup.pg.channels[c], st, c);
    fr = wsbm::fit_map(setup.pg.graph, setup.pg.channels, cfg.adjacency, fp);
    st.reset_partition(fr.partition);
    for (std::size_t c = 0; c < setup.pg.channels.size(); ++c)
      if (cfg.fit_hyper[setup.origin[c]])
        wsbm::fit_hyperparameters(setup.pg.channels[c], st, c);
  }
  wsbm::JointModel jm(st, setup.pg.channels, cfg.adjacency);

  if (out_dir && *out_dir)
    wsbm::export_fit_report(out_dir, st, setup.pg.channels,
                            setup.pg.graph.channel_names, cfg.adjacency);

  auto* res = new wsbm_result;
  res->ln_joint = jm.ln_joint();
  json out;
  out["ln_joint"] = jm.ln_joint();
  out["partition"] = json::parse(wsbm::partition_to_json(st.compacted()));
  out["group_counts"] = json::array();
  for (int l = 1; l <= st.depth(); ++l) out["group_counts"].push_back(st.occupied_count(l));
  out["adjacency_model"] = wsbm::adjacency_model_name(cfg.adjacency);
  out["channels"] = channels_json(setup);
  res->text = out.dump(2);
  return res;
}

wsbm_result* sample_impl(const wsbm_graph* g, const char* config_json,
                         const char* out_dir) {
  InferenceConfig cfg = parse_inference_config(g->bundle, config_json, true);
  PreparedSetup setup = prepare(cfg);

  wsbm::SampleParams sp;
  sp.seed = cfg.seed;
  sp.sweeps = cfg.sweeps;
  sp.burnin = cfg.burnin;
  sp.thin = cfg.thin;
  sp.eps = cfg.eps;
  sp.max_depth = cfg.depth;
  wsbm::PosteriorSamples samples =
      wsbm::sample_posterior(setup.pg.graph, setup.pg.channels, cfg.adjacency, sp);

  if (out_dir && *out_dir) {
    std::filesystem::create_directories(out_dir);
    std::ofstream parts(std::string(out_dir) + "/samples.jsonl");
    for (const auto& p : samples.partitions)
      parts << wsbm::partition_to_json(p) << '\n';
    std::ofstream lj(std::string(out_dir) + "/ln_joints.csv");
    lj << "sample,ln_joint\n";
    for (std::size_t i = 0; i < samples.ln_joints.size(); ++i)
      lj << i << ',' << samples.ln_joints[i] << '\n';
  }

  std::map<std::size_t, int> b_hist;
  double mean_lj = 0.0;
  for (std::size_t i = 0; i < samples.partitions.size(); ++i) {
    std::set<std::int32_t> groups(samples.partitions[i].levels[0].begin(),
                                  samples.partitions[i].levels[0].end());
    b_hist[groups.size()] += 1;
    mean_lj += samples.ln_joints[i];
  }
  if (!samples.ln_joints.empty()) mean_lj /= double(samples.ln_joints.size());

  auto* res = new wsbm_result;
  res->ln_joint = mean_lj;
  json out;
  out["samples"] = samples.partitions.size();
  out["mean_ln_joint"] = mean_lj;
  json hist = json::object();
  for (const auto& [b, n] : b_hist) hist[std::to_string(b)] = n;
  out["group_count_histogram"] = hist;
  out["channels"] = channels_json(setup);
  res->text = out.dump(2);
  return res;
}

wsbm_result* select_impl(const wsbm_graph* g, const char* config_json) {
  if (!config_json || !*config_json)
    throw std::invalid_argument("select requires a config with candidates");
  json j = json::parse(config_json);
  check_keys(j, {"candidates"}, "config");
  const json& cands = j.at("candidates");
  if (!cands.is_array() || cands.size() < 2)
    throw std::invalid_argument("config: need at least two candidates");

  std::vector<wsbm_result*> fits;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    std::string sub = cands[i].dump();
    fits.push_back(fit_impl(g, sub.c_str(), nullptr));
    labels.push_back("candidate " + std::to_string(i));
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < fits.size(); ++i)
    if (fits[i]->ln_joint > fits[best]->ln_joint) best = i;

  auto* res = new wsbm_result;
  res->ln_joint = fits[best]->ln_joint;
  json out;
  out["best"] = best;
  out["candidates"] = json::array();
  for (std::size_t i = 0; i < fits.size(); ++i) {
    json jc = json::parse(fits[i]->text);
    jc["ln_odds_vs_best"] = wsbm::posterior_odds(
        g->bundle.graph, fits[i]->ln_joint, g->bundle.graph, fits[best]->ln_joint);
    out["candidates"].push_back(jc);
    delete fits[i];
  }
  res->text = out.dump(2);
  return res;
}

wsbm_result* analyze_impl(const wsbm_graph* g, const char* config_json,
                          const char* partition_json, const char* out_dir) {
  if (!partition_json || !*partition_json)
    throw std::invalid_argument("analyze requires a partition");
  InferenceConfig cfg = parse_inference_config(g->bundle, config_json, false);
  PreparedSetup setup = prepare(cfg);
  wsbm::HierarchicalPartition part = wsbm::partition_from_json(partition_json);
  wsbm::HierState st(setup.pg.graph, part);
  wsbm::JointModel jm(st, setup.pg.channels, cfg.adjacency);
  if (out_dir && *out_dir)
    wsbm::export_fit_report(out_dir, st, setup.pg.channels,
                            setup.pg.graph.channel_names, cfg.adjacency);

  auto* res = new wsbm_result;
  res->ln_joint = jm.ln_joint();
  json out;
  out["ln_joint"] = jm.ln_joint();
  out["group_counts"] = json::array();
  for (int l = 1; l <= st.depth(); ++l) out["group_counts"].push_back(st.occupied_count(l));
  auto profile = wsbm::modularity_profile(st);
  out["modularity"] = json::array();
  for (const auto& lvl : profile) out["modularity"].push_back(lvl.Q);
  out["channels"] = channels_json(setup);
  res->text = out.dump(2);
  return res;
}

wsbm_graph* synth_impl(const char* config_json) {
  if (!config_json || !*config_json)
    throw std::invalid_argument("synth requires a config");
  json j = json::parse(config_json);
  check_keys(j, {"partition", "directed", "edge_probabilities", "channels", "seed"},
             "config");
  std::vector<std::int32_t> partition =
      j.at("partition").get<std::vector<std::int32_t>>();
  bool directed = j.value("directed", false);
  auto probs = j.at("edge_probabilities").get<std::vector<std::vector<double>>>();
  std::uint64_t seed = j.value("seed", std::uint64_t(1));

  std::vector<wsbm::SynthChannel> channels;
  if (j.contains("channels")) {
    for (const json& jc : j.at("channels")) {
      check_keys(jc, {"name", "family", "params"}, "synth channel");
      wsbm::SynthChannel ch;
      ch.name = jc.value("name", "w");
      wsbm::Family fam = wsbm::parse_family(jc.at("family").get<std::string>());
      for (const json& row : jc.at("params")) {
        std::vector<wsbm::WeightParams> out_row;
        for (const json& p : row) {
          check_keys(p, {"p1", "p2", "M"}, "weight params");
          wsbm::WeightParams wp;
          wp.family = fam;
          wp.p1 = p.value("p1", 1.0);
          wp.p2 = p.value("p2", 1.0);
          wp.M = p.value("M", std::int64_t(1));
          out_row.push_back(wp);
        }
        ch.params.push_back(std::move(out_row));
      }
      channels.push_back(std::move(ch));
    }
  }
  auto* out = new wsbm_graph;
  out->bundle = wsbm::synth_generate(partition, probs, channels, seed, directed);
  return out;
}

}  // namespace

extern "C" {

const char* wsbm_last_error(void) { return g_last_error.c_str(); }

int wsbm_graph_load(const char* path, const char* format, wsbm_graph** out) {
  if (!path || !out) return fail(WSBM_ERR_INVALID, "null argument");
  try {
    auto* g = new wsbm_graph;
    g->bundle = wsbm::load_graph(path, parse_format(format));
    *out = g;
    return WSBM_OK;
  } catch (const std::exception& e) {
    return fail(classify(e), e.what());
  }
}

int wsbm_graph_save(const wsbm_graph* g, const char* path, const char* format) {
  if (!g || !path) return fail(WSBM_ERR_INVALID, "null argument");
  try {
    wsbm::save_graph(g->bundle, path, parse_format(format));
    return WSBM_OK;
  } catch (const std::exception& e) {
    return fail(classify(e), e.what());
  }
}

void wsbm_graph_free(wsbm_graph* g) { delete g; }

int wsbm_graph_node_count(const wsbm_graph* g) {
  return g ? g->bundle.graph.node_count : 0;
}

long long wsbm_graph_edge_count(const wsbm_graph* g) {
  return g ? g->bundle.graph.total_edges() : 0;
}

int wsbm_graph_directed(const wsbm_graph* g) {
  return g && g->bundle.graph.directed ? 1 : 0;
}

int wsbm_synth(const char* config_json, wsbm_graph** out) {
  if (!out) return fail(WSBM_ERR_INVALID, "null argument");
  try {
    *out = synth_impl(config_json);
    return WSBM_OK;
  } catch (const std::exception& e) {
    return fail(classify(e), e.what());
  }
}

int wsbm_fit(const wsbm_graph* g, const char* config_json, const char* out_dir,
             wsbm_result** out) {
  if (!g || !out) return fail(WSBM_ERR_INVALID, "null argument");
  try {
    *out = fit_impl(g, config_json, out_dir);
    return WSBM_OK;
  } catch (const std::exception& e) {
    return fail(classify(e), e.what());
  }
}

int wsbm_sample(const wsbm_graph* g, const char* config_json,
                const char* out_dir, wsbm_result** out) {
  if (!g || !out) return fail(WSBM_ERR_INVALID, "null argument");
  try {
    *out = sample_impl(g, config_json, out_dir);
    return WSBM_OK;
  } catch (const std::exception& e) {
    return fail(classify(e), e.what());
  }
}

int wsbm_select(const wsbm_graph* g, const char* config_json, wsbm_result** out) {
  if (!g || !out) return fail(WSBM_ERR_INVALID, "null argument");
  try {
    *out = select_impl(g, config_json);
    return WSBM_OK;
  } catch (const std::exception& e) {
    return fail(classify(e), e.what());
  }
}

int wsbm_analyze(const wsbm_graph* g, const char* config_json,
                 const char* partition_json, const char* out_dir,
                 wsbm_result** out) {
  if (!g || !out) return fail(WSBM_ERR_INVALID, "null argument");
  try {
    *out = analyze_impl(g, config_json, partition_json, out_dir);
    return WSBM_OK;
  } catch (const std::exception& e) {
    return fail(classify(e), e.what());
  }
}

const char* wsbm_result_json(const wsbm_result* r) {
  return r ? r->text.c_str() : "";
}

double wsbm_result_ln_joint(const wsbm_result* r) {
  return r ? r->ln_joint : 0.0;
}

void wsbm_result_free(wsbm_result* r) { delete r; }

}  // extern "C"
