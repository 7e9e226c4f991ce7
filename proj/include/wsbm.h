#ifndef WSBM_H
#define WSBM_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Error codes returned by all functions that can fail. */
#define WSBM_OK 0
#define WSBM_ERR_IO 1
#define WSBM_ERR_INVALID 2
#define WSBM_ERR_RUNTIME 3

/* Message for the most recent failure on this thread. */
const char* wsbm_last_error(void);

typedef struct wsbm_graph wsbm_graph;
typedef struct wsbm_result wsbm_result;

/* format: "tsv" (edge list with JSON sidecar) or "json". */
int wsbm_graph_load(const char* path, const char* format, wsbm_graph** out);
int wsbm_graph_save(const wsbm_graph* g, const char* path, const char* format);
void wsbm_graph_free(wsbm_graph* g);

int wsbm_graph_node_count(const wsbm_graph* g);
long long wsbm_graph_edge_count(const wsbm_graph* g);
int wsbm_graph_directed(const wsbm_graph* g);

/* Generates a synthetic block-model graph from a JSON description. */
int wsbm_synth(const char* config_json, wsbm_graph** out);

/* MAP fit. config_json selects channels/families, adjacency model, depth,
 * sweeps, chains, seed. If out_dir is non-NULL a report directory is
 * written. */
int wsbm_fit(const wsbm_graph* g, const char* config_json, const char* out_dir,
             wsbm_result** out);

/* Posterior sampling at unit inverse temperature; writes samples.jsonl and
 * ln_joints.csv into out_dir when non-NULL. */
int wsbm_sample(const wsbm_graph* g, const char* config_json,
                const char* out_dir, wsbm_result** out);

/* Fits every candidate model in the config and reports log posterior odds
 * against the best one. */
int wsbm_select(const wsbm_graph* g, const char* config_json,
                wsbm_result** out);

/* Evaluates a fixed hierarchical partition (JSON list of label lists) and
 * writes a report into out_dir when non-NULL. */
int wsbm_analyze(const wsbm_graph* g, const char* config_json,
                 const char* partition_json, const char* out_dir,
                 wsbm_result** out);

/* JSON document describing the result; owned by the result handle. */
const char* wsbm_result_json(const wsbm_result* r);
double wsbm_result_ln_joint(const wsbm_result* r);
void wsbm_result_free(wsbm_result* r);

#ifdef __cplusplus
}
#endif

#endif
