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

#ifndef RINGFOREST_GAMESIM_HPP
#define RINGFOREST_GAMESIM_HPP

#include "ringforest/netsim.hpp"
#include "ringforest/overlay.hpp"
#include "ringforest/regret.hpp"

#include <memory>
#include <random>
#include <string>
#include <vector>

namespace ringforest
{

enum class RoutingPolicy
{
  Algorithm1,
  Bandit,
  Opt,
  Multicast,
};

const char *routing_policy_name(RoutingPolicy p);
RoutingPolicy routing_policy_from(const std::string &s);

struct GameParams
{
  int min_hops = 2;
  int max_hops = 4;
  double theta_lo = 0.5;
  double theta_hi = 1.0;
  double rate_max_mbps = 25.0;
  double payload_bytes = 125000.0;
  // Packets sent by each learner over the run.
  long packets = 10000;
  int grid = 10;
  int multicast_grid = 4;
  int multicast_max_subset = 2;
  GameConfig cfg;
  double bandit_epsilon = 0.05;
  // Relay bandwidths are redrawn every this many episodes; 0 disables.
  int perturb_every = 0;
  double bandwidth_lo = 20.0;
  double bandwidth_hi = 100.0;
  int heat_bins = 20;
  bool trace = false;
  // Reward from delivery latency instead of the bandwidth share.
  bool latency_reward = false;
  double l_max_cap_ms = 2000.0;

  void validate() const;
};

// Learners are overlay nodes with at least min_hops known live nodes closer
// to the key; their candidate hops are the proximity-nearest of those.
struct GameSetup
{
  std::vector<int> learners;
  std::vector<int> relays;
  // Per learner, indices into `relays`.
  std::vector<std::vector<int>> hops;
  std::vector<double> theta;
  std::vector<double> bandwidth;
  std::vector<CandidateSet> hop_cands;
};

GameSetup build_game(const Overlay &ov, u128 key, const GameParams &p, std::mt19937_64 &rng);
std::shared_ptr<const JointGame> joint_game(const GameSetup &s, const GameParams &p,
                                            RoutingPolicy policy,
                                            const std::vector<double> &bandwidth);
std::vector<CandidateSet> action_candidates(const GameSetup &s, const GameParams &p,
                                            RoutingPolicy policy);

struct EpisodeLog
{
  long episode = 0;
  JointPolicy joint;
  std::vector<std::size_t> modal;
  std::vector<double> mean_reward;
  double gap = 0.0;
};

struct GameRun
{
  RoutingPolicy policy = RoutingPolicy::Algorithm1;
  long episodes = 0;
  int tau = 0;
  std::vector<EpisodeLog> log;
  // Cumulative Nash regret after each episode, in packets times gap.
  std::vector<double> regret;
  // Per learner, count of packets sent on each candidate hop.
  std::vector<std::vector<long>> hop_counts;
  // Rows are packet-index bins, columns are hop indices.
  std::vector<std::vector<long>> heat;
  // Per delivered packet flow, send to delivery.
  std::vector<std::int64_t> latency_us;
  // Cumulative packet latency at the end of each episode.
  std::vector<double> cum_latency_ms;
  std::vector<TraceRecord> trace;
  // (first episode, relay bandwidths) for every bandwidth epoch.
  std::vector<std::pair<long, std::vector<double>>> bandwidth_epochs;
  double mean_reward = 0.0;
  long flows_started = 0;
  long flows_delivered = 0;
  long rewards_mapped = 0;
  long rewards_clipped = 0;

  double regret_per_packet(std::size_t episode) const;
  // Mean over learners of the variance of per-hop selection fractions.
  double selection_variance() const;
  double clip_fraction() const
  {
    return rewards_mapped ? static_cast<double>(rewards_clipped) / rewards_mapped : 0.0;
  }
};

GameRun play_game(const GameSetup &s, const GameParams &p, RoutingPolicy policy,
                  std::mt19937_64 &rng);

} // namespace ringforest

#endif
