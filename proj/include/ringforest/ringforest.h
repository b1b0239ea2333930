/*
 * Copyright (c) 2026 The ringforest Authors. All Rights Reserved
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


/* Stable C interface to the ringforest library. All handles are opaque.
 * Every call returns an rf_status; on failure rf_last_error() holds a
 * message for the calling thread. Strings and arrays returned through
 * out-parameters are owned by the caller and released with rf_free(). */

#ifndef RINGFOREST_H
#define RINGFOREST_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rf_status
{
  RF_OK = 0,
  RF_E_RANGE = 1,
  RF_E_CONFIG = 2,
  RF_E_MEMBERSHIP = 3,
  RF_E_BOOTSTRAP = 4,
  RF_E_BLOCKED = 5,
  RF_E_INVARIANT = 6,
  RF_E_ALREADY_EXISTS = 7,
  RF_E_REJECTED = 8,
  RF_E_AUTHORITY = 9,
  RF_E_SCHEMA = 10,
  RF_E_CONDITIONING = 11,
  RF_E_UNRECOVERABLE = 12,
  RF_E_ORACLE_UNAVAILABLE = 13,
  RF_E_UNSUPPORTED = 14,
  RF_E_NOT_FOUND = 15,
  RF_E_IO = 16,
  RF_E_ARGUMENT = 98,
  RF_E_INTERNAL = 99
} rf_status;

typedef struct rf_scenario rf_scenario;
typedef struct rf_result rf_result;
typedef struct rf_net rf_net;

const char *rf_version(void);
const char *rf_status_name(rf_status s);
const char *rf_last_error(void);
void rf_free(void *p);

/* Scenarios */
rf_status rf_scenario_load(const char *path, rf_scenario **out);
rf_status rf_scenario_parse(const char *yaml_text, rf_scenario **out);
/* Sets a dotted key (for example "game.policy") to a YAML scalar or list. */
rf_status rf_scenario_set(rf_scenario *s, const char *key, const char *value);
rf_status rf_scenario_serialize(const rf_scenario *s, char **yaml_text);
void rf_scenario_free(rf_scenario *s);

/* Runs */
rf_status rf_run(const rf_scenario *s, rf_result **out);
rf_status rf_result_emit(const rf_result *r, const rf_scenario *s, const char *dir);
rf_status rf_result_summary(const rf_result *r, char **json_text);
void rf_result_free(rf_result *r);

/* Re-runs a manifest into dir. Mismatching file names are written to
 * *mismatches, newline separated, and counted in *count. */
rf_status rf_replay(const char *manifest_path, const char *dir, char **mismatches, size_t *count);
/* values is a comma-separated list; each run lands in dir/key=value.
 * *report holds one "value<TAB>dir<TAB>error" line per run. *failures counts
 * runs whose error is non-empty. */
rf_status rf_sweep(const rf_scenario *base, const char *key, const char *values, const char *dir,
                   int threads, char **report, size_t *failures);
/* Violations are newline separated; RF_OK with *count == 0 means the dump is consistent. */
rf_status rf_overlay_check(const char *dump_path, char **violations, size_t *count);
/* Cumulative Nash-regret series recomputed from a policy history and its model.json. */
rf_status rf_regret_eval(const char *history_path, const char *model_path, double **series,
                         size_t *len);

/* Live overlay and forest */
typedef struct rf_net_config
{
  uint32_t nodes;
  int b;
  int leaf_size;
  int m;
  uint64_t seed;
} rf_net_config;

void rf_net_config_default(rf_net_config *c);
rf_status rf_net_create(const rf_net_config *c, rf_net **out);
void rf_net_free(rf_net *n);
rf_status rf_net_size(const rf_net *n, size_t *live);
rf_status rf_net_node_id(const rf_net *n, int node, char hex[33]);
rf_status rf_net_route(const rf_net *n, const char *key_hex, int from, int *owner, int *hops);
rf_status rf_net_fail(rf_net *n, int node);

rf_status rf_app_id(const char *name, const char *creator_key, const char *salt, char hex[33]);
rf_status rf_tree_create(rf_net *n, const char *app_hex, int replicas, int *root);
rf_status rf_tree_subscribe(rf_net *n, const char *app_hex, int node);
rf_status rf_tree_unsubscribe(rf_net *n, const char *app_hex, int node);
rf_status rf_tree_root(const rf_net *n, const char *app_hex, int *root);
rf_status rf_tree_size(const rf_net *n, const char *app_hex, size_t *members);
rf_status rf_tree_broadcast(const rf_net *n, const char *app_hex, int caller, const double *payload,
                            size_t dim, size_t *deliveries, int *max_depth);
/* Weighted-mean aggregation; row i of payloads (dim values) comes from nodes[i]. */
rf_status rf_tree_aggregate(const rf_net *n, const char *app_hex, const int *nodes,
                            const double *payloads, size_t count, size_t dim, double *out);
rf_status rf_tree_commit(rf_net *n, const char *app_hex, uint64_t round, const double *model,
                         size_t dim);
rf_status rf_tree_round(const rf_net *n, const char *app_hex, uint64_t *round);
/* Repairs the tree after rf_net_fail; *repaired counts re-grafted orphans. */
rf_status rf_tree_recover(rf_net *n, const char *app_hex, size_t *repaired);
rf_status rf_tree_validate(const rf_net *n, const char *app_hex, char **violations, size_t *count);

#ifdef __cplusplus
}
#endif

#endif
