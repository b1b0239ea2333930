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

#ifndef RINGFOREST_NETSIM_HPP
#define RINGFOREST_NETSIM_HPP

#include <cstdint>
#include <functional>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

namespace ringforest
{

using TimeUs = std::int64_t;

constexpr TimeUs kUsPerMs = 1000;
constexpr TimeUs kUsPerSec = 1000000;

inline TimeUs ms_to_us(double ms) { return static_cast<TimeUs>(ms * 1000.0 + 0.5); }

struct TraceRecord
{
  TimeUs time = 0;
  std::string kind;
  std::string node;
  std::string detail;
};

std::string format_trace(const TraceRecord &r);

class Simulator
{
public:
  using Handler = std::function<void()>;

  std::uint64_t schedule(TimeUs at, std::string kind, std::string node, std::string detail,
                         Handler h);
  std::uint64_t schedule_in(TimeUs delay, std::string kind, std::string node,
                            std::string detail, Handler h);
  void cancel(std::uint64_t id);

  // Processes every event with time <= until; returns the count.
  std::size_t advance(TimeUs until);
  std::size_t run();

  TimeUs now() const { return now_; }
  std::size_t pending() const { return events_.size(); }
  std::uint64_t processed() const { return processed_; }

  void set_trace(bool on) { tracing_ = on; }
  bool tracing() const { return tracing_; }
  const std::vector<TraceRecord> &trace() const { return trace_; }
  void note(std::string kind, std::string node, std::string detail);

private:
  struct Event
  {
    TimeUs time;
    std::string kind;
    std::string node;
    std::string detail;
    Handler h;
  };
  struct Key
  {
    TimeUs time;
    std::uint64_t ord;
    bool operator>(const Key &o) const { return time != o.time ? time > o.time : ord > o.ord; }
  };
  bool step(TimeUs until);

  TimeUs now_ = 0;
  std::uint64_t next_ord_ = 0;
  std::uint64_t processed_ = 0;
  std::priority_queue<Key, std::vector<Key>, std::greater<Key>> queue_;
  std::unordered_map<std::uint64_t, Event> events_;
  bool tracing_ = false;
  std::vector<TraceRecord> trace_;
};

enum class FlowStatus
{
  Active,
  Propagating,
  Delivered,
  Aborted,
};

struct FlowRecord
{
  std::uint64_t id = 0;
  int src = -1;
  int dst = -1;
  double bits = 0.0;
  double remaining = 0.0;
  TimeUs prop = 0;
  TimeUs start = 0;
  TimeUs end = 0;
  FlowStatus status = FlowStatus::Active;
};

// Flow-level network: every transfer drains the destination node's
// bandwidth, shared equally among the flows it is receiving.
class FlowNetwork
{
public:
  using Callback = std::function<void(const FlowRecord &)>;

  explicit FlowNetwork(Simulator &sim) : sim_(sim) {}

  int add_node(double bandwidth_mbps);
  std::size_t size() const { return nodes_.size(); }
  void set_bandwidth(int node, double mbps);
  double bandwidth(int node) const { return nodes_.at(node).mbps; }
  bool alive(int node) const { return nodes_.at(node).alive; }
  void fail_node(int node);
  void revive_node(int node);

  std::uint64_t transmit(int src, int dst, double bytes, TimeUs prop, Callback on_done,
                         Callback on_abort = nullptr);

  std::size_t active_at(int node) const { return nodes_.at(node).flows.size(); }
  // Current per-flow rate at a node in bits per second.
  double rate_bps(int node) const;
  const FlowRecord &flow(std::uint64_t id) const { return flows_.at(id).rec; }

  std::uint64_t started() const { return started_; }
  std::uint64_t delivered() const { return delivered_; }
  std::uint64_t aborted() const { return aborted_; }

private:
  struct Node
  {
    double mbps = 0.0;
    bool alive = true;
    std::vector<std::uint64_t> flows;
    TimeUs settled = 0;
    std::uint64_t wake = 0;
    bool has_wake = false;
  };
  struct Flow
  {
    FlowRecord rec;
    Callback done;
    Callback abort;
  };
  void settle(int node);
  void reschedule(int node);
  void on_wake(int node);
  void abort_flow(std::uint64_t id);

  Simulator &sim_;
  std::vector<Node> nodes_;
  std::unordered_map<std::uint64_t, Flow> flows_;
  std::uint64_t next_id_ = 1;
  std::uint64_t started_ = 0, delivered_ = 0, aborted_ = 0;
};

double reward_from_latency(double l_ms, double l_max_ms, bool *clipped = nullptr);

// l_max is the larger of the configured cap and the previous episode's
// maximum observed latency.
class LatencyRewardMapper
{
public:
  explicit LatencyRewardMapper(double cap_ms) : cap_(cap_ms), l_max_(cap_ms) {}
  double map(double l_ms);
  void end_episode();
  double l_max() const { return l_max_; }
  long clipped() const { return clipped_; }
  long total() const { return total_; }
  double clip_fraction() const { return total_ ? static_cast<double>(clipped_) / total_ : 0.0; }

private:
  double cap_;
  double l_max_;
  double window_max_ = 0.0;
  long clipped_ = 0;
  long total_ = 0;
};

enum class ChurnKind
{
  Fail,
  Leave,
  Join,
  BandwidthSet,
};

const char *churn_kind_name(ChurnKind k);
ChurnKind churn_kind_from(const std::string &s);

struct ChurnEvent
{
  TimeUs time = 0;
  int node = 0;
  ChurnKind kind = ChurnKind::Fail;
  double value = 0.0;
};

struct ChurnSchedule
{
  std::vector<ChurnEvent> events;
  void validate(std::size_t nodes) const;
};

// Validates the schedule and queues one event per entry.
void inject(Simulator &sim, const ChurnSchedule &s, std::size_t nodes,
            std::function<void(const ChurnEvent &)> handler);

} // namespace ringforest

#endif
