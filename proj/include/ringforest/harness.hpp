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

#ifndef RINGFOREST_HARNESS_HPP
#define RINGFOREST_HARNESS_HPP

#include "ringforest/forest.hpp"
#include "ringforest/gamesim.hpp"
#include "ringforest/scenario.hpp"

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace ringforest
{

struct FlRound
{
  std::vector<double> model;
  BroadcastReport broadcast;
  AggregateReport aggregate;
  std::vector<int> workers;
  std::map<int, Partial> payloads;
};

// Broadcast `model`, let every worker return model + noise * N(0, 1) per
// coordinate with unit weight, then aggregate with the tree's combine.
FlRound synth_fl_round(const Forest &f, u128 app, const std::vector<double> &model, double noise,
                       std::mt19937_64 &rng);

struct RoundRecord
{
  int app = 0;
  std::uint64_t round = 0;
  int members = 0;
  int workers = 0;
  int bcast_hops = 0;
  double bcast_ms = 0.0;
  int agg_hops = 0;
  double agg_ms = 0.0;
  // Partials that reached an aggregator after it had forwarded.
  int late = 0;
  double model_mean = 0.0;
};

struct TimedRound
{
  double bcast_ms = 0.0;
  double agg_ms = 0.0;
  Partial root;
  int late = 0;
};

// Runs one broadcast and one aggregation of `bytes` per edge over the flow
// network. An aggregator forwards when all children reported or when
// `timeout_ms` (0 = never) has passed since aggregation began. Partials
// arriving after their aggregator forwarded are parked in `carry` and merged
// into that aggregator's next round. Per-node bytes sent plus received are
// added to `traffic`.
TimedRound timed_round(Simulator &sim, FlowNetwork &net, const Overlay &ov, const Tree &t,
                       const std::map<int, Partial> &payloads, double bytes, double timeout_ms,
                       std::map<int, Partial> &carry, std::vector<double> &traffic);

// One row per re-grafted orphan; an event that orphans nobody still gets a row with node = -1.
struct RecoveryRow
{
  double time_ms = 0.0;
  int app = 0;
  std::string event;
  int failed = -1;
  int node = -1;
  int new_parent = -1;
  double detect_ms = 0.0;
  double done_ms = 0.0;
  int contacts = 0;
  bool master = false;
  bool restored = false;
  std::uint64_t round_before = 0;
  std::uint64_t round_after = 0;
};

struct MetricsBundle
{
  int logical_nodes = 0;
  int zones = 0;
  double zone_compliance = 0.0;
  std::vector<u128> apps;
  std::vector<RoundRecord> rounds;
  std::vector<RecoveryRow> recovery;
  std::vector<double> traffic_bytes;
  std::map<int, int> masters_histogram;
  std::optional<GameRun> game;
  std::string game_model_json;
  std::vector<std::string> learner_hex;
  std::string overlay_dump;
  std::string tree_edges;
  std::vector<std::string> violations;
  std::vector<std::string> trace;
};

MetricsBundle run(const Scenario &s);
GameParams game_params(const Scenario &s, int learners);

// Writes every metrics file plus manifest.json; returns file name -> SHA-1 hex.
std::map<std::string, std::string> emit(const MetricsBundle &b, const Scenario &s,
                                        const std::string &dir);

// Re-runs the manifest's scenario into `dir`; returns the names of files whose bytes differ.
std::vector<std::string> replay(const std::string &manifest_path, const std::string &dir);

struct SweepResult
{
  std::string value;
  std::string dir;
  std::string error;
};
std::vector<SweepResult> sweep(const std::string &scenario_text, const std::string &key,
                               const std::vector<std::string> &values, const std::string &dir,
                               int threads);

// Recomputes the cumulative Nash regret from policy_history.csv and model.json.
std::vector<double> regret_eval(const std::string &history_path, const std::string &model_path);

std::string file_sha1(const std::string &path);

} // namespace ringforest

#endif
