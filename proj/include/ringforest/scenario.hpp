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

#ifndef RINGFOREST_SCENARIO_HPP
#define RINGFOREST_SCENARIO_HPP

#include "ringforest/topology.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ringforest
{

struct ChurnSpec
{
  double time_ms = 0.0;
  // Logical node index, or "master" / "master:<app>" for the current master.
  std::string node;
  std::string kind = "fail";
  double value = 0.0;

  bool operator==(const ChurnSpec &o) const = default;
};

// All scenario defaults; the README table mirrors them.
struct Scenario
{
  std::uint64_t seed = 1;
  int nodes = 10;

  std::string topology_csv;
  int regions = 4;
  double region_spread_km = 120.0;
  double diameter_ms = 40.0;
  std::vector<GeoPoint> landmarks = {{47.6, -122.3}, {40.7, -74.0}, {29.8, -95.4}};
  std::vector<double> thresholds_ms = {100.0, 400.0};
  std::map<std::string, double> instance_mix;

  int m = 8;
  int b = 4;
  int leaf_size = 24;
  int neighborhood = 8;

  int apps = 1;
  std::vector<std::string> salts;
  int replicas = 2;
  std::string combine = "weighted_mean";
  double participation = 1.0;

  int rounds = 3;
  int dimension = 16;
  double noise = 0.01;
  double round_gap_ms = 1000.0;
  // An aggregator forwards once every child reported or this long after the
  // aggregation phase began; 0 waits for every child.
  double aggregation_timeout_ms = 0.0;

  bool game = false;
  std::string policy = "algorithm1";
  double alpha = 0.5;
  double beta = 0.5;
  int tau = 10;
  double epsilon = 0.01;
  std::string design = "min";
  bool theory = false;
  int grid = 10;
  long packets = 10000;
  int min_hops = 2;
  int max_hops = 4;
  double theta_lo = 0.5;
  double theta_hi = 1.0;
  double rate_max_mbps = 25.0;
  double packet_bytes = 125000.0;
  double bandit_epsilon = 0.05;
  int perturb_every = 0;
  int multicast_max_subset = 2;
  int multicast_grid = 4;
  int heat_bins = 20;
  std::string reward = "share";
  double l_max_cap_ms = 2000.0;
  int max_staleness = 0;

  double keepalive_ms = 1000.0;
  int missed_beats = 3;
  double rto_ms = 200.0;

  std::vector<ChurnSpec> churn;
  bool trace = false;

  bool operator==(const Scenario &o) const = default;
  void validate() const;
};

Scenario load_scenario(const std::string &path);
Scenario parse_scenario(const std::string &text);
std::string serialize_scenario(const Scenario &s);
// Sets a dotted key (e.g. "game.policy") in the scenario text to a scalar value.
std::string override_scenario(const std::string &text, const std::string &key,
                              const std::string &value);

} // namespace ringforest

#endif
