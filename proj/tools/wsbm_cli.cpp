#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "wsbm.h"

using nlohmann::json;

namespace {

struct CommonOpts {
  std::string graph_path;
  std::string format = "tsv";
  std::string config_path;
  std::string out_dir;
  // command-line overrides applied on top of the config file
  std::optional<std::uint64_t> seed;
  std::optional<int> sweeps;
  std::optional<int> chains;
  std::optional<int> depth;
  std::optional<double> eps;
  std::optional<double> beta_max;
  std::string adjacency;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_graph) {
  if (needs_graph)
    cmd->add_option("-g,--graph", o.graph_path, "input graph path")->required();
  cmd->add_option("-f,--format", o.format, "graph format: tsv or json");
  cmd->add_option("-c,--config", o.config_path, "JSON config file");
  cmd->add_option("-o,--out", o.out_dir, "report output directory");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--sweeps", o.sweeps, "MCMC sweeps");
  cmd->add_option("--chains", o.chains, "independent chains");
  cmd->add_option("--depth", o.depth, "maximum hierarchy depth");
  cmd->add_option("--eps", o.eps, "proposal mixing parameter");
  cmd->add_option("--beta-max", o.beta_max, "final annealing inverse temperature");
  cmd->add_option("--adjacency-model", o.adjacency,
                  "degree-corrected, plain, or fixed");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string build_config(const CommonOpts& o) {
  json j = json::object();
  if (!o.config_path.empty()) j = json::parse(read_file(o.config_path));
  if (o.seed) j["seed"] = *o.seed;
  if (o.sweeps) j["sweeps"] = *o.sweeps;
  if (o.chains) j["chains"] = *o.chains;
  if (o.depth) j["depth"] = *o.depth;
  if (o.eps) j["eps"] = *o.eps;
  if (o.beta_max) j["beta_max"] = *o.beta_max;
  if (!o.adjacency.empty()) j["adjacency_model"] = o.adjacency;
  return j.dump();
}

int die(int code) {
  std::cerr << "error: " << wsbm_last_error() << '\n';
  return code;
}

wsbm_graph* load_or_die(const CommonOpts& o) {
  wsbm_graph* g = nullptr;
  if (wsbm_graph_load(o.graph_path.c_str(), o.format.c_str(), &g) != WSBM_OK)
    return nullptr;
  return g;
}

int print_result(wsbm_result* r) {
  std::cout << wsbm_result_json(r) << '\n';
  wsbm_result_free(r);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weighted stochastic block model inference"};
  app.require_subcommand(1);

  CommonOpts fit_o, sample_o, select_o, analyze_o;
  std::string synth_config, synth_out, synth_format = "tsv";
  std::string partition_path;

  CLI::App* fit = app.add_subcommand("fit", "MAP fit of a hierarchical partition");
  add_common(fit, fit_o, true);

  CLI::App* sample = app.add_subcommand("sample", "sample partitions from the posterior");
  add_common(sample, sample_o, true);

  CLI::App* select = app.add_subcommand("select", "compare candidate models by posterior odds");
  add_common(select, select_o, true);
  select->get_option("-c")->required();

  CLI::App* analyze = app.add_subcommand("analyze", "evaluate a fixed partition");
  add_common(analyze, analyze_o, true);
  analyze->add_option("-p,--partition", partition_path, "partition JSON file")
      ->required();

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic benchmark graph");
  synth->add_option("-c,--config", synth_config, "JSON generator config")->required();
  synth->add_option("-o,--out", synth_out, "output graph path")->required();
  synth->add_option("-f,--format", synth_format, "graph format: tsv or json");

  CLI11_PARSE(app, argc, argv);

  if (fit->parsed()) {
    wsbm_graph* g = load_or_die(fit_o);
    if (!g) return die(1);
    wsbm_result* r = nullptr;
    int rc = wsbm_fit(g, build_config(fit_o).c_str(),
                      fit_o.out_dir.empty() ? nullptr : fit_o.out_dir.c_str(), &r);
    wsbm_graph_free(g);
    return rc == WSBM_OK ? print_result(r) : die(rc);
  }
  if (sample->parsed()) {
    wsbm_graph* g = load_or_die(sample_o);
    if (!g) return die(1);
    wsbm_result* r = nullptr;
    int rc = wsbm_sample(g, build_config(sample_o).c_str(),
                         sample_o.out_dir.empty() ? nullptr : sample_o.out_dir.c_str(),
                         &r);
    wsbm_graph_free(g);
    return rc == WSBM_OK ? print_result(r) : die(rc);
  }
  if (select->parsed()) {
    wsbm_graph* g = load_or_die(select_o);
    if (!g) return die(1);
    json cfg = json::parse(read_file(select_o.config_path));
    wsbm_result* r = nullptr;
    int rc = wsbm_select(g, cfg.dump().c_str(), &r);
    wsbm_graph_free(g);
    return rc == WSBM_OK ? print_result(r) : die(rc);
  }
  if (analyze->parsed()) {
    wsbm_graph* g = load_or_die(analyze_o);
    if (!g) return die(1);
    std::string part = read_file(partition_path);
    wsbm_result* r = nullptr;
    int rc = wsbm_analyze(g, build_config(analyze_o).c_str(), part.c_str(),
                          analyze_o.out_dir.empty() ? nullptr
                                                    : analyze_o.out_dir.c_str(),
                          &r);
    wsbm_graph_free(g);
    return rc == WSBM_OK ? print_result(r) : die(rc);
  }
  if (synth->parsed()) {
    wsbm_graph* g = nullptr;
    int rc = wsbm_synth(read_file(synth_config).c_str(), &g);
    if (rc != WSBM_OK) return die(rc);
    rc = wsbm_graph_save(g, synth_out.c_str(), synth_format.c_str());
    if (rc != WSBM_OK) {
      wsbm_graph_free(g);
      return die(rc);
    }
    std::cout << "wrote " << synth_out << " (" << wsbm_graph_node_count(g)
              << " nodes, " << wsbm_graph_edge_count(g) << " edges)\n";
    wsbm_graph_free(g);
    return 0;
  }
  return 0;
}
