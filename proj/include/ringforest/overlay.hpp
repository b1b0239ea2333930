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

#ifndef RINGFOREST_OVERLAY_HPP
#define RINGFOREST_OVERLAY_HPP

#include "ringforest/id.hpp"

#include <functional>
#include <istream>
#include <map>
#include <string>
#include <vector>

namespace ringforest
{

struct OverlayConfig
{
  ZoneConfig zone;
  int b = 4;
  int leaf_size = 24;
  int neighborhood = 8;
  void validate() const;
};

struct ZonePolicy
{
  bool allow_egress = true;
  bool allow_ingress = true;
};

using ZonePolicyMap = std::map<u128, ZonePolicy>;

struct RoutingState
{
  std::vector<int> level1;
  std::vector<std::vector<int>> level2;
  // Nearest first on each side.
  std::vector<int> leaf_ccw;
  std::vector<int> leaf_cw;
  std::vector<int> neighborhood;
  // The leaf set holds every other live node.
  bool full = false;

  bool operator==(const RoutingState &o) const = default;
  bool references(int node) const;
  std::vector<int> known() const;
};

enum class StepKind
{
  Forward,
  Deliver,
  Blocked,
};

struct Step
{
  StepKind kind = StepKind::Deliver;
  int next = -1;
  std::vector<int> dead;
};

enum class RouteStatus
{
  Delivered,
  Blocked,
};

struct RoutePath
{
  std::vector<int> nodes;
  RouteStatus status = RouteStatus::Delivered;
  int blocking = -1;
  int dead_probes = 0;

  int hops() const { return static_cast<int>(nodes.size()) - 1; }
  int terminal() const { return nodes.back(); }
};

std::vector<u128> level1_targets(u128 prefix, const ZoneConfig &cfg);
std::vector<u128> level2_finger_targets(u128 suffix, const ZoneConfig &cfg);

class Overlay
{
public:
  // RTT in milliseconds between two hosts.
  using RttFn = std::function<double(int, int)>;

  Overlay(OverlayConfig cfg, RttFn rtt);

  int add_node(NodeId id, int host);
  // Every registered node becomes a live member with a freshly built state.
  void bootstrap_all();
  void join(int node, int bootstrap, RoutePath *join_path = nullptr);
  void leave(int node);
  // Crash: the node stops, nobody is told.
  void fail(int node);
  // Rebuilds `node`'s state if it still references `failed`.
  bool repair(int node, int failed);
  std::size_t repair_all();

  RoutingState compute_state(int node) const;
  const RoutingState &state(int node) const { return nodes_.at(node).st; }

  Step next_hop(int cur, u128 key, u128 origin_zone, const ZonePolicyMap *policy) const;
  RoutePath route(u128 key, int from, const ZonePolicyMap *policy = nullptr,
                  bool repair_dead = false);

  int owner(u128 key) const;
  int owner_in_zone(u128 key, u128 zone) const;

  bool live(int node) const { return nodes_.at(node).alive && nodes_[node].member; }
  NodeId id(int node) const { return nodes_.at(node).id; }
  int host(int node) const { return nodes_.at(node).host; }
  u128 zone(int node) const { return zone_of(nodes_.at(node).id, cfg_.zone); }
  std::size_t size() const { return nodes_.size(); }
  std::size_t live_count() const { return ring_.size(); }
  const std::vector<int> &ring() const { return ring_; }
  int find(NodeId id) const;
  double rtt(int a, int b) const;
  const OverlayConfig &config() const { return cfg_; }

  int digits() const;
  int digit(u128 suffix, int l) const;
  int shared_digits(u128 a, u128 b) const;

  std::string dump() const;

private:
  struct Rec
  {
    NodeId id = 0;
    int host = -1;
    bool alive = true;
    bool member = false;
    RoutingState st;
  };

  void insert_live(int node);
  void erase_live(int node);
  std::pair<std::size_t, std::size_t> id_range(u128 lo, u128 count) const;
  std::pair<std::size_t, std::size_t> zone_range(u128 zone) const;
  int best_in_range(int self, std::size_t lo, std::size_t hi) const;
  void compute_leaves(int node, RoutingState &st) const;
  int rows_for(int node) const;
  bool better(int self, int cand, int cur) const;
  void recompute_leaves_near(std::size_t pos);

  OverlayConfig cfg_;
  RttFn rtt_;
  std::vector<Rec> nodes_;
  std::vector<int> ring_;
  std::vector<u128> ring_ids_;
  std::map<u128, int> zone_count_;
  std::map<u128, int> by_id_;
};

// Checks a dump produced by Overlay::dump; returns the violations found.
std::vector<std::string> check_overlay_dump(std::istream &in);

} // namespace ringforest

#endif
