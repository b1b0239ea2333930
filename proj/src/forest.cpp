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

#include "ringforest/forest.hpp"
#include "ringforest/error.hpp"
#include "ringforest/netsim.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

namespace ringforest
{

const char *combine_name(Combine c)
{
  switch (c)
  {
  case Combine::WeightedMean:
    return "weighted_mean";
  case Combine::Sum:
    return "sum";
  case Combine::Max:
    return "max";
  }
  return "?";
}

Combine combine_from(const std::string &s)
{
  if (s == "weighted_mean")
    return Combine::WeightedMean;
  if (s == "sum")
    return Combine::Sum;
  if (s == "max")
    return Combine::Max;
  fail(Errc::Config, "unknown combine function '" + s + "'");
}

Partial lift(Combine c, const std::vector<double> &value, double weight)
{
  Partial p;
  p.value = value;
  p.weight = weight;
  p.count = 1;
  if (c == Combine::WeightedMean)
    for (double &v : p.value)
      v *= weight;
  return p;
}

void merge(Combine c, Partial &acc, const Partial &in)
{
  if (in.count == 0)
    return;
  if (acc.count == 0)
  {
    acc = in;
    return;
  }
  if (acc.value.size() != in.value.size())
    fail(Errc::Schema, "payload dimension " + std::to_string(in.value.size()) + " != " +
                           std::to_string(acc.value.size()));
  for (std::size_t i = 0; i < acc.value.size(); ++i)
    acc.value[i] = c == Combine::Max ? std::max(acc.value[i], in.value[i]) : acc.value[i] + in.value[i];
  acc.weight += in.weight;
  acc.count += in.count;
}

std::vector<double> finish(Combine c, const Partial &p)
{
  std::vector<double> out = p.value;
  if (c == Combine::WeightedMean && p.count > 0)
  {
    if (!(p.weight > 0.0))
      fail(Errc::Schema, "weighted mean with non-positive total weight");
    for (double &v : out)
      v /= p.weight;
  }
  return out;
}

TreeRole Tree::role(int node) const
{
  if (node == root)
    return TreeRole::Master;
  return members.at(node).children.empty() ? TreeRole::Worker : TreeRole::Forwarder;
}

int Tree::depth(int node) const
{
  int d = 0;
  for (int cur = node; cur != root; cur = members.at(cur).parent)
  {
    if (cur < 0 || ++d > static_cast<int>(members.size()))
      fail(Errc::Invariant, "member is not connected to the root");
  }
  return d;
}

bool Tree::in_subtree(int node, int ancestor) const
{
  std::size_t guard = 0;
  for (int cur = node; cur >= 0; cur = members.at(cur).parent)
  {
    if (cur == ancestor)
      return true;
    if (++guard > members.size())
      fail(Errc::Invariant, "cycle in tree links");
  }
  return false;
}

std::vector<int> Tree::subscribers() const
{
  std::vector<int> out;
  for (const auto &[n, m] : members)
    if (m.subscribed)
      out.push_back(n);
  return out;
}

Forest::Forest(Overlay &ov, const ZonePolicyMap *policy) : ov_(ov), policy_(policy) {}

u128 Forest::ad_key() { return app_id("AD application"); }

Tree &Forest::tree(u128 app)
{
  auto it = trees_.find(app);
  if (it == trees_.end())
    fail(Errc::NotFound, "no tree for AppId " + to_hex(app));
  return it->second;
}

const Tree &Forest::tree(u128 app) const
{
  auto it = trees_.find(app);
  if (it == trees_.end())
    fail(Errc::NotFound, "no tree for AppId " + to_hex(app));
  return it->second;
}

Tree &Forest::create_tree(u128 app, const std::string &metadata, TreeOptions opts)
{
  if (trees_.count(app))
    fail(Errc::AlreadyExists, "tree already exists for AppId " + to_hex(app));
  if (opts.replicas < 0)
    fail(Errc::Config, "replica count must be >= 0");
  Tree t;
  t.app = app;
  t.root = ov_.owner(app);
  t.members[t.root] = Member{};
  t.opts = opts;
  t.state.combine = opts.combine;
  Tree &ref = trees_.emplace(app, std::move(t)).first->second;
  if (opts.advertise && app != ad_key())
    advertise(app, ref.root, metadata);
  return ref;
}

Tree &Forest::ensure_ad_tree()
{
  if (!has_tree(ad_key()))
  {
    TreeOptions o;
    o.advertise = false;
    return create_tree(ad_key(), {}, o);
  }
  return tree(ad_key());
}

void Forest::attach(Tree &t, int parent, int child)
{
  t.members[child].parent = parent;
  t.members[parent].children.push_back(child);
}

void Forest::detach(Tree &t, int child)
{
  Member &m = t.members.at(child);
  if (m.parent >= 0)
  {
    auto it = t.members.find(m.parent);
    if (it != t.members.end())
    {
      auto &ch = it->second.children;
      ch.erase(std::remove(ch.begin(), ch.end(), child), ch.end());
    }
  }
  m.parent = -1;
}

void Forest::prune(Tree &t, int node)
{
  while (node >= 0 && node != t.root)
  {
    auto it = t.members.find(node);
    if (it == t.members.end() || it->second.subscribed || !it->second.children.empty())
      return;
    const int parent = it->second.parent;
    detach(t, node);
    t.members.erase(node);
    node = parent;
  }
}

RoutePath Forest::subscribe(u128 app, int node, const SelectFn *select)
{
  Tree &t = tree(app);
  if (!ov_.live(node))
    fail(Errc::Membership, "subscriber is not a live member");
  if (t.has(node))
  {
    Member &m = t.members[node];
    if (m.subscribed)
      fail(Errc::AlreadyExists, "node already subscribed");
    m.subscribed = true;
    RoutePath p;
    p.nodes = {node};
    return p;
  }
  RoutePath p = ov_.route(app, node, policy_);
  if (p.status == RouteStatus::Blocked)
    fail(Errc::Blocked, "JOIN blocked by zone policy at " + to_hex(ov_.id(p.blocking)));
  std::size_t g = 1;
  while (g < p.nodes.size() && !t.has(p.nodes[g]))
    ++g;
  if (g == p.nodes.size())
    fail(Errc::Invariant, "JOIN for " + to_hex(app) + " terminated outside the tree");
  if (select)
    if (auto why = (*select)(p.nodes[g], node))
      fail(Errc::Rejected, *why);
  for (std::size_t i = g; i-- > 0;)
    attach(t, p.nodes[i + 1], p.nodes[i]);
  t.members[node].subscribed = true;
  return p;
}

void Forest::unsubscribe(u128 app, int node)
{
  Tree &t = tree(app);
  auto it = t.members.find(node);
  if (it == t.members.end() || !it->second.subscribed)
    fail(Errc::NotFound, "node is not subscribed");
  it->second.subscribed = false;
  prune(t, node);
}

BroadcastReport Forest::broadcast(u128 app, int caller, const std::vector<double> &payload,
                                  const OnBroadcast &on_broadcast, const Transform *xf) const
{
  const Tree &t = tree(app);
  if (t.root_dead || caller != t.root)
    fail(Errc::Authority, "only the master may broadcast");
  BroadcastReport rep;
  std::deque<std::pair<int, std::vector<double>>> q;
  q.push_back({t.root, payload});
  std::set<int> seen{t.root};
  while (!q.empty())
  {
    auto [node, data] = std::move(q.front());
    q.pop_front();
    const int d = node == t.root ? 0 : rep.hops[node];
    for (int c : t.members.at(node).children)
    {
      if (!seen.insert(c).second)
        fail(Errc::Invariant, "node reached twice during broadcast");
      if (!ov_.live(c))
        continue;
      std::vector<double> out = data;
      if (xf && xf->encode)
        out = xf->encode(out);
      if (xf && xf->decode)
        out = xf->decode(out);
      rep.hops[c] = d + 1;
      rep.edges.push_back({node, c, d + 1});
      rep.max_depth = std::max(rep.max_depth, d + 1);
      if (on_broadcast)
        on_broadcast(c, d + 1, out);
      q.push_back({c, std::move(out)});
    }
  }
  return rep;
}

void Forest::retransmit(u128 app, int node, const std::vector<double> &payload,
                        BroadcastReport &rep, const OnBroadcast &on_broadcast,
                        const Transform *xf) const
{
  const Tree &t = tree(app);
  if (!t.has(node) || !ov_.live(node))
    fail(Errc::NotFound, "retransmit target is not a live tree member");
  if (node == t.root)
    return;
  std::deque<int> q{node};
  while (!q.empty())
  {
    const int c = q.front();
    q.pop_front();
    if (!rep.hops.count(c))
    {
      std::vector<double> out = payload;
      if (xf && xf->encode)
        out = xf->encode(out);
      if (xf && xf->decode)
        out = xf->decode(out);
      const int d = t.depth(c);
      rep.hops[c] = d;
      rep.edges.push_back({t.members.at(c).parent, c, d});
      rep.max_depth = std::max(rep.max_depth, d);
      if (on_broadcast)
        on_broadcast(c, d, out);
    }
    for (int g : t.members.at(c).children)
      if (ov_.live(g))
        q.push_back(g);
  }
}

AggregateReport Forest::aggregate(u128 app, const std::map<int, Partial> &payloads) const
{
  const Tree &t = tree(app);
  if (t.root_dead)
    fail(Errc::Authority, "tree has no live master");
  std::size_t dim = 0;
  bool have_dim = false;
  for (const auto &[n, p] : payloads)
  {
    if (!t.has(n))
      fail(Errc::NotFound, "payload from a node outside the tree");
    if (p.count == 0)
      continue;
    if (have_dim && p.value.size() != dim)
      fail(Errc::Schema, "payload dimension " + std::to_string(p.value.size()) + " != " +
                             std::to_string(dim));
    dim = p.value.size();
    have_dim = true;
  }
  AggregateReport rep;
  // Iterative post-order so deep trees do not exhaust the stack.
  std::vector<std::pair<int, int>> order;
  std::vector<std::pair<int, int>> stack{{t.root, 0}};
  while (!stack.empty())
  {
    auto [n, d] = stack.back();
    stack.pop_back();
    order.push_back({n, d});
    for (int c : t.members.at(n).children)
      stack.push_back({c, d + 1});
  }
  std::map<int, Partial> acc;
  for (auto it = order.rbegin(); it != order.rend(); ++it)
  {
    const auto [n, d] = *it;
    Partial mine;
    if (auto p = payloads.find(n); p != payloads.end())
      merge(t.state.combine, mine, p->second);
    for (int c : t.members.at(n).children)
    {
      merge(t.state.combine, mine, acc[c]);
      acc.erase(c);
      rep.edges.push_back({n, c, d + 1});
      rep.max_depth = std::max(rep.max_depth, d + 1);
    }
    acc[n] = std::move(mine);
  }
  rep.partial = acc[t.root];
  rep.value = finish(t.state.combine, rep.partial);
  return rep;
}

void Forest::advertise(u128 app, int caller, const std::string &metadata)
{
  Tree &t = tree(app);
  if (t.root_dead || caller != t.root)
    fail(Errc::Authority, "only the master may advertise");
  Tree &ad = ensure_ad_tree();
  if (!(ad.has(caller) && ad.members[caller].subscribed))
    subscribe(ad_key(), caller);
  directory_[app] = AdEntry{app, metadata, caller, ++ad_version_};
}

std::vector<AdEntry> Forest::discover(int node)
{
  if (!ov_.live(node))
    fail(Errc::Membership, "discover from a node that is not a live member");
  Tree &ad = ensure_ad_tree();
  const bool was = ad.has(node) && ad.members[node].subscribed;
  if (!was)
    subscribe(ad_key(), node);
  std::vector<AdEntry> out;
  for (const auto &[k, e] : directory_)
    out.push_back(e);
  if (!was)
    unsubscribe(ad_key(), node);
  return out;
}

std::vector<int> Forest::replica_holders(u128 app) const
{
  const Tree &t = tree(app);
  std::vector<int> out;
  if (t.root_dead)
    return out;
  for (int y : ov_.state(t.root).neighborhood)
  {
    if (static_cast<int>(out.size()) >= t.opts.replicas)
      break;
    if (ov_.live(y))
      out.push_back(y);
  }
  return out;
}

void Forest::commit_round(u128 app, const MasterState &state)
{
  Tree &t = tree(app);
  if (t.root_dead)
    fail(Errc::Authority, "tree has no live master");
  t.state = state;
  t.replicas.clear();
  for (int h : replica_holders(app))
    t.replicas[h] = state;
}

std::vector<int> Forest::drop_failed(u128 app)
{
  Tree &t = tree(app);
  std::vector<int> dead;
  for (const auto &[n, m] : t.members)
    if (!ov_.live(n))
      dead.push_back(n);
  for (int d : dead)
  {
    for (int c : t.members[d].children)
      if (t.members.count(c))
        t.members[c].parent = -1;
    t.members[d].children.clear();
    if (d == t.root)
      t.root_dead = true;
    const int parent = t.members[d].parent;
    detach(t, d);
    t.members.erase(d);
    if (parent >= 0 && t.members.count(parent))
      prune(t, parent);
  }
  for (auto it = t.replicas.begin(); it != t.replicas.end();)
    it = ov_.live(it->first) ? std::next(it) : t.replicas.erase(it);
  std::vector<int> orphans;
  for (const auto &[n, m] : t.members)
    if (m.parent < 0 && (n != t.root || t.root_dead))
      orphans.push_back(n);
  // Parentless pure forwarders with nothing below them are gone.
  std::vector<int> keep;
  for (int o : orphans)
  {
    prune(t, o);
    if (t.has(o))
      keep.push_back(o);
  }
  return keep;
}

int Forest::graft_index(const Tree &t, int orphan, const std::vector<int> &path) const
{
  for (std::size_t i = 1; i < path.size(); ++i)
    if (t.has(path[i]) && !t.in_subtree(path[i], orphan))
      return static_cast<int>(i);
  return -1;
}

int Forest::graft_path(Tree &t, int orphan, const std::vector<int> &path)
{
  const int g = graft_index(t, orphan, path);
  if (g < 0)
    fail(Errc::Invariant, "re-JOIN found no graft point outside the orphan's subtree");
  if (t.members.at(orphan).parent >= 0)
    detach(t, orphan);
  bool chain_clear = true;
  for (int i = 1; i < g; ++i)
    chain_clear = chain_clear && !t.has(path[i]);
  if (!chain_clear)
  {
    attach(t, path[g], orphan);
    return path[g];
  }
  for (int i = g; i-- > 0;)
    attach(t, path[i + 1], path[i]);
  return path[1];
}

MasterRecovery Forest::take_over(Tree &t, int node)
{
  if (t.has(node))
  {
    const int old_parent = t.members[node].parent;
    detach(t, node);
    if (old_parent >= 0)
      prune(t, old_parent);
  }
  else
    t.members[node] = Member{};
  t.root = node;
  t.root_dead = false;
  MasterRecovery mr;
  mr.master = node;
  for (const auto &[h, s] : t.replicas)
  {
    if (!ov_.live(h))
      continue;
    if (mr.source < 0 || ov_.rtt(node, h) < ov_.rtt(node, mr.source))
      mr.source = h;
  }
  if (mr.source >= 0)
  {
    t.state = t.replicas.at(mr.source);
    mr.restored = true;
  }
  else
  {
    const Combine c = t.state.combine;
    t.state = MasterState{};
    t.state.combine = c;
    t.replicas.clear();
  }
  mr.round = t.state.round;
  return mr;
}

int Forest::recover_worker(u128 app, int orphan, int *contacts)
{
  Tree &t = tree(app);
  if (t.root_dead)
    fail(Errc::Invariant, "master recovery must precede worker recovery");
  if (!t.has(orphan) || !ov_.live(orphan))
    fail(Errc::NotFound, "orphan is not a live tree member");
  RoutePath p = ov_.route(app, orphan, policy_, true);
  if (p.status == RouteStatus::Blocked)
    fail(Errc::Blocked, "re-JOIN blocked by zone policy");
  if (contacts)
    *contacts = static_cast<int>(p.nodes.size()) + p.dead_probes;
  return graft_path(t, orphan, p.nodes);
}

MasterRecovery Forest::recover_master(u128 app, int via, int *contacts)
{
  Tree &t = tree(app);
  if (!t.root_dead)
    fail(Errc::Invariant, "master is still alive");
  RoutePath p = ov_.route(app, via, policy_, true);
  if (p.status == RouteStatus::Blocked)
    fail(Errc::Blocked, "re-JOIN blocked by zone policy");
  MasterRecovery mr = take_over(t, p.terminal());
  if (via != p.terminal() && t.has(via))
    graft_path(t, via, p.nodes);
  if (contacts)
    *contacts = static_cast<int>(p.nodes.size()) + p.dead_probes + (mr.source >= 0 ? 1 : 0);
  if (!mr.restored)
    fail(Errc::Unrecoverable, "no live replica of the master state; training restarts from round 0");
  return mr;
}

RecoveryReport Forest::recover_timed(u128 app, const std::vector<int> &failed,
                                     const RecoveryParams &prm, std::mt19937_64 &rng)
{
  Tree &t = tree(app);
  if (prm.keepalive_ms <= 0.0 || prm.missed_beats < 1)
    fail(Errc::Config, "keep-alive period and missed-beat count must be positive");
  RecoveryReport rep;
  std::uniform_real_distribution<double> phase_dist(0.0, prm.keepalive_ms);
  std::map<int, double> phase;
  for (int x : failed)
  {
    rep.master_failed = rep.master_failed || x == t.root;
    phase[x] = phase_dist(rng);
  }
  std::map<int, int> lost_parent;
  for (int x : failed)
    if (ov_.live(x))
      ov_.fail(x);
  for (const auto &[n, m] : t.members)
    if (ov_.live(n) && m.parent >= 0 && !ov_.live(m.parent))
      lost_parent[n] = m.parent;
  if (rep.master_failed)
    for (int c : t.members[t.root].children)
      if (ov_.live(c))
        lost_parent[c] = t.root;
  const std::vector<int> orphans = drop_failed(app);

  struct Walk
  {
    int cur = -1;
    std::vector<int> path;
    int probes = 0;
    TimeUs penalty = 0;
    RecoveryRecord rec;
  };
  std::vector<Walk> walks(orphans.size());
  Simulator sim;
  std::function<void(std::size_t)> step = [&](std::size_t w) {
    Walk &W = walks[w];
    const int orphan = W.rec.node;
    auto done = [&](int parent, TimeUs extra) {
      W.rec.new_parent = parent;
      W.rec.contacts = static_cast<int>(W.path.size()) + W.probes;
      W.rec.done_ms = static_cast<double>(sim.now() + extra) / 1000.0;
    };
    if (!t.has(orphan) || t.members[orphan].parent >= 0 || (orphan == t.root && !t.root_dead))
    {
      done(t.has(orphan) ? t.members[orphan].parent : -1, 0);
      return;
    }
    const int cur = W.cur;
    if (cur != orphan && t.has(cur) && !t.in_subtree(cur, orphan))
    {
      done(graft_path(t, orphan, W.path), 0);
      return;
    }
    Step s = ov_.next_hop(cur, app, ov_.zone(orphan), policy_);
    for (int d : s.dead)
      ov_.repair(cur, d);
    W.probes += static_cast<int>(s.dead.size());
    const TimeUs rto = ms_to_us(prm.rto_ms) * static_cast<TimeUs>(s.dead.size());
    if (s.kind == StepKind::Deliver)
    {
      if (!t.root_dead)
        fail(Errc::Invariant, "re-JOIN ended at a non-member while the master is alive");
      MasterRecovery mr = take_over(t, cur);
      rep.master = mr;
      TimeUs fetch = 0;
      if (mr.source >= 0)
      {
        fetch = ms_to_us(ov_.rtt(cur, mr.source));
        ++W.probes;
      }
      const int parent = cur == orphan ? -1 : graft_path(t, orphan, W.path);
      done(parent, rto + fetch);
      return;
    }
    if (s.kind == StepKind::Blocked)
    {
      if (++W.rec.attempts >= 3)
      {
        done(-1, 0);
        return;
      }
      W.cur = orphan;
      W.path = {orphan};
      sim.schedule_in(ms_to_us(prm.keepalive_ms) + rto, "rejoin", to_hex(ov_.id(orphan)), "retry",
                      [&, w] { step(w); });
      return;
    }
    const TimeUs delay = ms_to_us(ov_.rtt(cur, s.next) / 2.0 + prm.hop_processing_ms) + rto;
    W.cur = s.next;
    W.path.push_back(s.next);
    sim.schedule_in(delay, "join-hop", to_hex(ov_.id(s.next)), to_hex(app), [&, w] { step(w); });
  };
  for (std::size_t i = 0; i < orphans.size(); ++i)
  {
    const int o = orphans[i];
    Walk &W = walks[i];
    W.cur = o;
    W.path = {o};
    W.rec.node = o;
    W.rec.attempts = 1;
    auto lp = lost_parent.find(o);
    const double ph = lp != lost_parent.end() && phase.count(lp->second) ? phase[lp->second] : phase_dist(rng);
    W.rec.detect_ms = ph + (prm.missed_beats - 1) * prm.keepalive_ms;
    sim.schedule(ms_to_us(W.rec.detect_ms), "detect", to_hex(ov_.id(o)), to_hex(app),
                 [&, i] { step(i); });
  }
  sim.run();
  for (const Walk &W : walks)
  {
    rep.records.push_back(W.rec);
    rep.makespan_ms = std::max(rep.makespan_ms, W.rec.done_ms);
  }
  if (rep.master_failed && !rep.master && t.root_dead)
  {
    // Every orphan grafted elsewhere or none survived; the owner takes over directly.
    if (ov_.live_count() > 0)
      rep.master = take_over(t, ov_.owner(app));
  }
  return rep;
}

std::vector<std::string> Forest::validate(u128 app) const
{
  std::vector<std::string> bad;
  const Tree &t = tree(app);
  const std::string who = to_hex(app) + ": ";
  if (t.root_dead)
  {
    bad.push_back(who + "master missing");
    return bad;
  }
  if (!ov_.live(t.root))
    bad.push_back(who + "master is not live");
  else if (ov_.owner(app) != t.root)
    bad.push_back(who + "master is not the live ring-distance minimizer");
  if (!t.has(t.root))
    bad.push_back(who + "root is not a member");
  for (const auto &[n, m] : t.members)
  {
    const std::string h = to_hex(ov_.id(n));
    if (!ov_.live(n))
      bad.push_back(who + h + " is not live");
    if (n == t.root)
    {
      if (m.parent >= 0)
        bad.push_back(who + "root has a parent");
    }
    else if (m.parent < 0 || !t.has(m.parent))
      bad.push_back(who + h + " has no parent in the tree");
    else
    {
      const auto &pc = t.members.at(m.parent).children;
      if (std::count(pc.begin(), pc.end(), n) != 1)
        bad.push_back(who + h + " missing from its parent's children table");
    }
    std::set<int> uniq(m.children.begin(), m.children.end());
    if (uniq.size() != m.children.size())
      bad.push_back(who + h + " lists a child twice");
    for (int c : m.children)
      if (!t.has(c) || t.members.at(c).parent != n)
        bad.push_back(who + h + " lists a child that does not point back");
  }
  if (t.has(t.root))
  {
    std::set<int> seen{t.root};
    std::vector<int> stack{t.root};
    while (!stack.empty())
    {
      const int n = stack.back();
      stack.pop_back();
      for (int c : t.members.at(n).children)
      {
        if (!t.has(c))
          continue;
        if (!seen.insert(c).second)
          bad.push_back(who + "cycle or shared child at " + to_hex(ov_.id(c)));
        else
          stack.push_back(c);
      }
    }
    if (seen.size() != t.members.size())
      bad.push_back(who + std::to_string(t.members.size() - seen.size()) +
                    " members unreachable from the root");
  }
  return bad;
}

std::string Forest::edge_list(u128 app) const
{
  const Tree &t = tree(app);
  std::vector<std::string> lines;
  for (const auto &[n, m] : t.members)
    if (m.parent >= 0)
      lines.push_back(to_hex(ov_.id(m.parent)) + "," + to_hex(ov_.id(n)) + "," + to_hex(app));
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto &l : lines)
    out += l + "\n";
  return out;
}

std::map<int, int> Forest::roots_per_node() const
{
  std::map<int, int> out;
  for (const auto &[app, t] : trees_)
    if (app != ad_key() && !t.root_dead)
      ++out[t.root];
  return out;
}

} // namespace ringforest
