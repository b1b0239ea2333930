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

#include "ringforest/netsim.hpp"
#include "ringforest/error.hpp"

#include <algorithm>
#include <cmath>

namespace ringforest
{

namespace
{

constexpr double kBitsEps = 1e-6;

} // namespace

std::string format_trace(const TraceRecord &r)
{
  return std::to_string(r.time) + "\t" + r.kind + "\t" + r.node + "\t" + r.detail;
}

std::uint64_t Simulator::schedule(TimeUs at, std::string kind, std::string node,
                                  std::string detail, Handler h)
{
  if (at < now_)
    fail(Errc::Invariant, "event scheduled in the past");
  const std::uint64_t ord = next_ord_++;
  queue_.push({at, ord});
  events_.emplace(ord, Event{at, std::move(kind), std::move(node), std::move(detail), std::move(h)});
  return ord;
}

std::uint64_t Simulator::schedule_in(TimeUs delay, std::string kind, std::string node,
                                     std::string detail, Handler h)
{
  return schedule(now_ + std::max<TimeUs>(0, delay), std::move(kind), std::move(node),
                  std::move(detail), std::move(h));
}

void Simulator::cancel(std::uint64_t id) { events_.erase(id); }

bool Simulator::step(TimeUs until)
{
  while (!queue_.empty())
  {
    const Key k = queue_.top();
    auto it = events_.find(k.ord);
    if (it == events_.end())
    {
      queue_.pop();
      continue;
    }
    if (k.time > until)
      return false;
    queue_.pop();
    Event ev = std::move(it->second);
    events_.erase(it);
    now_ = k.time;
    ++processed_;
    if (tracing_)
      trace_.push_back({now_, ev.kind, ev.node, ev.detail});
    if (ev.h)
      ev.h();
    return true;
  }
  return false;
}

std::size_t Simulator::advance(TimeUs until)
{
  std::size_t n = 0;
  while (step(until))
    ++n;
  if (until > now_ && until != INT64_MAX)
    now_ = until;
  return n;
}

std::size_t Simulator::run() { return advance(INT64_MAX); }

void Simulator::note(std::string kind, std::string node, std::string detail)
{
  if (tracing_)
    trace_.push_back({now_, std::move(kind), std::move(node), std::move(detail)});
}

int FlowNetwork::add_node(double bandwidth_mbps)
{
  if (!(bandwidth_mbps > 0.0))
    fail(Errc::Config, "bandwidth must be positive");
  Node n;
  n.mbps = bandwidth_mbps;
  n.settled = sim_.now();
  nodes_.push_back(n);
  return static_cast<int>(nodes_.size()) - 1;
}

double FlowNetwork::rate_bps(int node) const
{
  const Node &n = nodes_.at(node);
  if (n.flows.empty())
    return n.mbps * 1e6;
  return n.mbps * 1e6 / static_cast<double>(n.flows.size());
}

void FlowNetwork::settle(int node)
{
  Node &n = nodes_[node];
  const TimeUs now = sim_.now();
  if (!n.flows.empty() && now > n.settled)
  {
    const double drained = rate_bps(node) * static_cast<double>(now - n.settled) / 1e6;
    for (auto id : n.flows)
      flows_[id].rec.remaining -= drained;
  }
  n.settled = now;
}

void FlowNetwork::reschedule(int node)
{
  Node &n = nodes_[node];
  if (n.has_wake)
  {
    sim_.cancel(n.wake);
    n.has_wake = false;
  }
  if (n.flows.empty())
    return;
  double least = 1e300;
  for (auto id : n.flows)
    least = std::min(least, flows_[id].rec.remaining);
  const double secs = std::max(0.0, least) / rate_bps(node);
  const TimeUs dt = static_cast<TimeUs>(std::ceil(secs * 1e6 - 1e-9));
  n.wake = sim_.schedule_in(dt, "flow-drain", std::to_string(node), "", [this, node] {
    nodes_[node].has_wake = false;
    on_wake(node);
  });
  n.has_wake = true;
}

void FlowNetwork::on_wake(int node)
{
  settle(node);
  Node &n = nodes_[node];
  const double rate = rate_bps(node);
  std::vector<std::uint64_t> finished;
  for (auto id : n.flows)
    if (flows_[id].rec.remaining <= kBitsEps * std::max(1.0, rate))
      finished.push_back(id);
  if (finished.empty())
  {
    // Rounding left a few bits; finish them on the next microsecond.
    reschedule(node);
    return;
  }
  for (auto id : finished)
  {
    n.flows.erase(std::find(n.flows.begin(), n.flows.end(), id));
    Flow &f = flows_[id];
    f.rec.remaining = 0.0;
    f.rec.status = FlowStatus::Propagating;
    sim_.schedule_in(f.rec.prop, "flow-deliver", std::to_string(f.rec.dst), std::to_string(id),
                     [this, id] {
                       auto it = flows_.find(id);
                       if (it == flows_.end() || it->second.rec.status != FlowStatus::Propagating)
                         return;
                       if (!nodes_[it->second.rec.dst].alive)
                       {
                         abort_flow(id);
                         return;
                       }
                       Flow fl = std::move(it->second);
                       flows_.erase(it);
                       fl.rec.status = FlowStatus::Delivered;
                       fl.rec.end = sim_.now();
                       ++delivered_;
                       if (fl.done)
                         fl.done(fl.rec);
                     });
  }
  reschedule(node);
}

std::uint64_t FlowNetwork::transmit(int src, int dst, double bytes, TimeUs prop, Callback on_done,
                                    Callback on_abort)
{
  if (src < 0 || dst < 0 || static_cast<std::size_t>(src) >= nodes_.size() ||
      static_cast<std::size_t>(dst) >= nodes_.size())
    fail(Errc::Config, "flow endpoint out of range");
  if (bytes < 0.0 || prop < 0)
    fail(Errc::Config, "negative payload or propagation delay");
  const std::uint64_t id = next_id_++;
  Flow f;
  f.rec.id = id;
  f.rec.src = src;
  f.rec.dst = dst;
  f.rec.bits = bytes * 8.0;
  f.rec.remaining = f.rec.bits;
  f.rec.prop = prop;
  f.rec.start = sim_.now();
  f.done = std::move(on_done);
  f.abort = std::move(on_abort);
  ++started_;
  flows_.emplace(id, std::move(f));
  if (!nodes_[src].alive || !nodes_[dst].alive)
  {
    sim_.schedule_in(0, "flow-abort", std::to_string(src), std::to_string(id),
                     [this, id] { abort_flow(id); });
    return id;
  }
  settle(dst);
  nodes_[dst].flows.push_back(id);
  reschedule(dst);
  return id;
}

void FlowNetwork::abort_flow(std::uint64_t id)
{
  auto it = flows_.find(id);
  if (it == flows_.end())
    return;
  Flow fl = std::move(it->second);
  flows_.erase(it);
  if (fl.rec.status == FlowStatus::Active)
  {
    auto &v = nodes_[fl.rec.dst].flows;
    auto pos = std::find(v.begin(), v.end(), id);
    if (pos != v.end())
    {
      settle(fl.rec.dst);
      v.erase(pos);
      reschedule(fl.rec.dst);
    }
  }
  fl.rec.status = FlowStatus::Aborted;
  fl.rec.end = sim_.now();
  ++aborted_;
  if (fl.abort)
    fl.abort(fl.rec);
}

void FlowNetwork::set_bandwidth(int node, double mbps)
{
  if (!(mbps > 0.0))
    fail(Errc::Config, "bandwidth must be positive");
  settle(node);
  nodes_.at(node).mbps = mbps;
  reschedule(node);
}

void FlowNetwork::fail_node(int node)
{
  nodes_.at(node).alive = false;
  std::vector<std::uint64_t> victims;
  for (const auto &[id, f] : flows_)
    if ((f.rec.status == FlowStatus::Active && (f.rec.src == node || f.rec.dst == node)))
      victims.push_back(id);
  std::sort(victims.begin(), victims.end());
  for (auto id : victims)
    abort_flow(id);
}

void FlowNetwork::revive_node(int node)
{
  nodes_.at(node).alive = true;
  nodes_[node].settled = sim_.now();
}

double reward_from_latency(double l_ms, double l_max_ms, bool *clipped)
{
  if (!(l_max_ms > 0.0) || l_ms < 0.0)
    fail(Errc::Config, "latency must be >= 0 and l_max > 0");
  double r = 1.0 - l_ms / l_max_ms;
  bool c = false;
  if (r < 0.0)
  {
    r = 0.0;
    c = true;
  }
  else if (r > 1.0)
  {
    r = 1.0;
    c = true;
  }
  if (clipped)
    *clipped = c;
  return r;
}

double LatencyRewardMapper::map(double l_ms)
{
  bool c = false;
  const double r = reward_from_latency(l_ms, l_max_, &c);
  window_max_ = std::max(window_max_, l_ms);
  ++total_;
  if (c && l_ms > l_max_)
    ++clipped_;
  return r;
}

void LatencyRewardMapper::end_episode()
{
  l_max_ = std::max(cap_, window_max_);
  window_max_ = 0.0;
}

const char *churn_kind_name(ChurnKind k)
{
  switch (k)
  {
    case ChurnKind::Fail: return "fail";
    case ChurnKind::Leave: return "leave";
    case ChurnKind::Join: return "join";
    case ChurnKind::BandwidthSet: return "bandwidth-set";
  }
  return "unknown";
}

ChurnKind churn_kind_from(const std::string &s)
{
  if (s == "fail")
    return ChurnKind::Fail;
  if (s == "leave")
    return ChurnKind::Leave;
  if (s == "join")
    return ChurnKind::Join;
  if (s == "bandwidth-set")
    return ChurnKind::BandwidthSet;
  fail(Errc::Schema, "unknown churn event kind '" + s + "'");
}

void ChurnSchedule::validate(std::size_t nodes) const
{
  TimeUs last = 0;
  for (const auto &e : events)
  {
    if (e.time < last)
      fail(Errc::Config, "churn schedule times must be non-decreasing");
    last = e.time;
    if (e.node < 0 || static_cast<std::size_t>(e.node) >= nodes)
      fail(Errc::Config, "churn schedule references unknown node " + std::to_string(e.node));
    if (e.kind == ChurnKind::BandwidthSet && !(e.value > 0.0))
      fail(Errc::Config, "bandwidth-set needs a positive value");
  }
}

void inject(Simulator &sim, const ChurnSchedule &s, std::size_t nodes,
            std::function<void(const ChurnEvent &)> handler)
{
  s.validate(nodes);
  for (const auto &e : s.events)
    sim.schedule(e.time, std::string("churn-") + churn_kind_name(e.kind), std::to_string(e.node),
                 e.kind == ChurnKind::BandwidthSet ? std::to_string(e.value) : "",
                 [handler, e] { handler(e); });
}

} // namespace ringforest
