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

#ifndef RINGFOREST_FOREST_HPP
#define RINGFOREST_FOREST_HPP

#include "ringforest/overlay.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace ringforest
{

enum class Combine
{
  WeightedMean,
  Sum,
  Max,
};

const char *combine_name(Combine c);
Combine combine_from(const std::string &s);

// Weighted mean travels as (sum of weight * value, sum of weight).
struct Partial
{
  std::vector<double> value;
  double weight = 0.0;
  int count = 0;
};

Partial lift(Combine c, const std::vector<double> &value, double weight);
void merge(Combine c, Partial &acc, const Partial &in);
std::vector<double> finish(Combine c, const Partial &p);

enum class TreeRole
{
  Master,
  Forwarder,
  Worker,
};

struct MasterState
{
  std::uint64_t round = 0;
  std::vector<double> model;
  std::vector<int> roster;
  Combine combine = Combine::WeightedMean;

  bool operator==(const MasterState &o) const = default;
};

struct AdEntry
{
  u128 app = 0;
  std::string metadata;
  int master = -1;
  std::uint64_t version = 0;
};

struct Member
{
  int parent = -1;
  std::vector<int> children;
  bool subscribed = false;

  bool operator==(const Member &o) const = default;
};

struct TreeOptions
{
  Combine combine = Combine::WeightedMean;
  int replicas = 2;
  bool advertise = true;
};

struct Tree
{
  u128 app = 0;
  int root = -1;
  bool root_dead = false;
  std::map<int, Member> members;
  TreeOptions opts;
  MasterState state;
  std::map<int, MasterState> replicas;

  bool has(int node) const { return members.count(node) != 0; }
  TreeRole role(int node) const;
  int depth(int node) const;
  bool in_subtree(int node, int ancestor) const;
  std::vector<int> subscribers() const;
  std::size_t size() const { return members.size(); }
};

// Payload transform applied per edge: encode at the sender, decode at the receiver.
struct Transform
{
  std::function<std::vector<double>(const std::vector<double> &)> encode;
  std::function<std::vector<double>(const std::vector<double> &)> decode;
};

struct Edge
{
  int parent = -1;
  int child = -1;
  int depth = 0;
};

struct BroadcastReport
{
  std::map<int, int> hops;
  std::vector<Edge> edges;
  int max_depth = 0;
  std::size_t deliveries() const { return hops.size(); }
};

struct AggregateReport
{
  std::vector<double> value;
  Partial partial;
  std::vector<Edge> edges;
  int max_depth = 0;
};

// Returns a rejection reason, or nothing to accept.
using SelectFn = std::function<std::optional<std::string>(int graft, int joiner)>;
using OnBroadcast = std::function<void(int node, int hops, const std::vector<double> &)>;

struct MasterRecovery
{
  int master = -1;
  int source = -1;
  std::uint64_t round = 0;
  bool restored = false;
};

struct RecoveryParams
{
  double keepalive_ms = 1000.0;
  int missed_beats = 3;
  double rto_ms = 200.0;
  double hop_processing_ms = 0.5;
};

struct RecoveryRecord
{
  int node = -1;
  int new_parent = -1;
  double detect_ms = 0.0;
  double done_ms = 0.0;
  int contacts = 0;
  int attempts = 0;
};

struct RecoveryReport
{
  std::vector<RecoveryRecord> records;
  double makespan_ms = 0.0;
  bool master_failed = false;
  std::optional<MasterRecovery> master;
};

class Forest
{
public:
  explicit Forest(Overlay &ov, const ZonePolicyMap *policy = nullptr);

  static u128 ad_key();

  Tree &create_tree(u128 app, const std::string &metadata = {}, TreeOptions opts = {});
  bool has_tree(u128 app) const { return trees_.count(app) != 0; }
  Tree &tree(u128 app);
  const Tree &tree(u128 app) const;
  const std::map<u128, Tree> &trees() const { return trees_; }

  RoutePath subscribe(u128 app, int node, const SelectFn *select = nullptr);
  void unsubscribe(u128 app, int node);

  BroadcastReport broadcast(u128 app, int caller, const std::vector<double> &payload,
                            const OnBroadcast &on_broadcast = {},
                            const Transform *xf = nullptr) const;
  // Re-sends a round's payload into the subtree of a regrafted `node`,
  // reaching only members missing from `rep`. Dead members are skipped by
  // both calls.
  void retransmit(u128 app, int node, const std::vector<double> &payload, BroadcastReport &rep,
                  const OnBroadcast &on_broadcast = {}, const Transform *xf = nullptr) const;
  // Payloads keyed by subscriber; absent subscribers contribute nothing.
  AggregateReport aggregate(u128 app, const std::map<int, Partial> &payloads) const;

  void advertise(u128 app, int caller, const std::string &metadata);
  std::vector<AdEntry> discover(int node);
  const std::map<u128, AdEntry> &directory() const { return directory_; }

  // Stores the master state and copies it to the k proximity-nearest live neighbours.
  void commit_round(u128 app, const MasterState &state);
  std::vector<int> replica_holders(u128 app) const;

  // Removes dead members and returns the live orphans in ascending index order.
  std::vector<int> drop_failed(u128 app);
  int recover_worker(u128 app, int orphan, int *contacts = nullptr);
  // On Unrecoverable the tree is re-rooted with a round-0 state before the error propagates.
  MasterRecovery recover_master(u128 app, int via, int *contacts = nullptr);
  // Simultaneous failure of `failed` (nodes already down are accepted), then
  // event-driven keep-alive detection and re-JOIN.
  RecoveryReport recover_timed(u128 app, const std::vector<int> &failed,
                               const RecoveryParams &p, std::mt19937_64 &rng);

  std::vector<std::string> validate(u128 app) const;
  std::string edge_list(u128 app) const;
  std::map<int, int> roots_per_node() const;
  Overlay &overlay() { return ov_; }
  const Overlay &overlay() const { return ov_; }

private:
  Tree &ensure_ad_tree();
  void attach(Tree &t, int parent, int child);
  void detach(Tree &t, int child);
  void prune(Tree &t, int node);
  // Grafts `orphan` at the first member of `path` outside its subtree.
  int graft_path(Tree &t, int orphan, const std::vector<int> &path);
  int graft_index(const Tree &t, int orphan, const std::vector<int> &path) const;
  MasterRecovery take_over(Tree &t, int node);

  Overlay &ov_;
  const ZonePolicyMap *policy_;
  std::map<u128, Tree> trees_;
  std::map<u128, AdEntry> directory_;
  std::uint64_t ad_version_ = 0;
};

} // namespace ringforest

#endif
