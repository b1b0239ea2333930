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

#ifndef RINGFOREST_TOPOLOGY_HPP
#define RINGFOREST_TOPOLOGY_HPP

#include "ringforest/id.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace ringforest
{

struct GeoPoint
{
  double lat = 0.0;
  double lon = 0.0;
  bool operator==(const GeoPoint &o) const = default;
};

double haversine_km(const GeoPoint &a, const GeoPoint &b);

struct TopologyConfig
{
  int regions = 4;
  double region_spread_km = 120.0;
  // Maximum intra-zone round-trip time.
  double diameter_ms = 40.0;
  std::vector<GeoPoint> landmarks = {{47.6, -122.3}, {40.7, -74.0}, {29.8, -95.4}};
  std::vector<double> thresholds_ms = {100.0, 400.0};
  double landmark_base_ms = 10.0;
  double ms_per_km = 0.05;
  double bandwidth_min_mbps = 20.0;
  double bandwidth_max_mbps = 100.0;
  // Area the region centres are drawn from.
  GeoPoint area_min = {25.0, -125.0};
  GeoPoint area_max = {50.0, -70.0};
};

struct Host
{
  GeoPoint pos;
  int region = 0;
  double bandwidth_mbps = 50.0;
  double capacity_units = 1.0;
};

class Topology
{
public:
  static Topology generate(const TopologyConfig &cfg, int hosts, std::mt19937_64 &rng);
  // CSV rows of id,latitude,longitude; hosts are grouped into regions by
  // greedy clustering within region_spread_km.
  static Topology import_csv(const std::string &path, const TopologyConfig &cfg,
                             std::mt19937_64 &rng);

  std::size_t size() const { return hosts.size(); }
  double rtt_ms(int a, int b) const;
  std::vector<double> landmark_rtts(int host) const;

  TopologyConfig cfg;
  std::vector<Host> hosts;
  std::vector<GeoPoint> region_centres;
  std::uint64_t salt = 0;

private:
  std::vector<double> pair_rtt_;
  void finish();
};

struct BinLabel
{
  std::vector<int> order;
  std::vector<int> levels;
  std::string text() const;
  bool operator==(const BinLabel &o) const { return order == o.order && levels == o.levels; }
};

BinLabel bin_node(const std::vector<double> &rtts_ms, const std::vector<double> &thresholds_ms);
u128 zone_for_bin(const BinLabel &b, const ZoneConfig &cfg);

// Fraction of same-zone host pairs with RTT below the diameter.
double zone_diameter_compliance(const Topology &t, const std::vector<u128> &zone_of_host);

int logical_count(double capacity_units, double unit);
std::vector<NodeId> multiplex_logical_nodes(double capacity_units, double unit, u128 zone,
                                            const ZoneConfig &cfg, std::mt19937_64 &rng);
// Capacity units per instance class used by the heterogeneity scenario.
const std::map<std::string, double> &instance_capacity_units();

} // namespace ringforest

#endif
