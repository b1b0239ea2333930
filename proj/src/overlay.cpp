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

#include "ringforest/overlay.hpp"
#include "ringforest/error.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace ringforest
{

namespace
{

int clz128(u128 x)
{
  const auto hi = static_cast<std::uint64_t>(x >> 64);
  if (hi)
    return __builtin_clzll(hi);
  const auto lo = static_cast<std::uint64_t>(x);
  if (lo)
    return 64 + __builtin_clzll(lo);
  return 128;
}

u128 zone_mask(const ZoneConfig &c) { return (u128(1) << c.m) - 1; }

u128 suffix_mask(const ZoneConfig &c) { return (u128(1) << c.n()) - 1; }

template <typename T> void push_unique(std::vector<T> &v, T x)
{
  if (std::find(v.begin(), v.end(), x) == v.end())
    v.push_back(x);
}

} // namespace

void OverlayConfig::validate() const
{
  zone.validate();
  if (b < 1 || b > 8)
    ringforest::fail(Errc::Config, "digit bits b must be in [1, 8]");
  if (leaf_size < 2 || leaf_size % 2)
    ringforest::fail(Errc::Config, "leaf set size must be even and >= 2");
  if (neighborhood < 1)
    ringforest::fail(Errc::Config, "neighborhood size must be >= 1");
}

bool RoutingState::references(int node) const
{
  auto has = [node](const std::vector<int> &v) { return std::find(v.begin(), v.end(), node) != v.end(); };
  if (has(level1) || has(leaf_ccw) || has(leaf_cw) || has(neighborhood))
    return true;
  for (const auto &row : level2)
    if (has(row))
      return true;
  return false;
}

std::vector<int> RoutingState::known() const
{
  std::vector<int> out;
  auto add = [&out](const std::vector<int> &v) {
    for (int x : v)
      if (x >= 0)
        push_unique(out, x);
  };
  add(leaf_ccw);
  add(leaf_cw);
  for (const auto &row : level2)
    add(row);
  add(level1);
  add(neighborhood);
  return out;
}

std::vector<u128> level1_targets(u128 prefix, const ZoneConfig &cfg)
{
  cfg.validate();
  std::vector<u128> out;
  for (int i = 1; i <= cfg.m; ++i)
    out.push_back(((prefix + (u128(1) << (i - 1))) & zone_mask(cfg)) << cfg.n());
  return out;
}

std::vector<u128> level2_finger_targets(u128 suffix, const ZoneConfig &cfg)
{
  cfg.validate();
  std::vector<u128> out;
  for (int i = 1; i <= cfg.n(); ++i)
    out.push_back((suffix + (u128(1) << (i - 1))) & suffix_mask(cfg));
  return out;
}

Overlay::Overlay(OverlayConfig cfg, RttFn rtt) : cfg_(cfg), rtt_(std::move(rtt))
{
  cfg_.validate();
  if (!rtt_)
    ringforest::fail(Errc::Config, "overlay needs an RTT oracle");
}

int Overlay::add_node(NodeId id, int host)
{
  if (by_id_.count(id))
    ringforest::fail(Errc::AlreadyExists, "duplicate NodeId " + to_hex(id));
  Rec r;
  r.id = id;
  r.host = host;
  nodes_.push_back(r);
  const int idx = static_cast<int>(nodes_.size()) - 1;
  by_id_[id] = idx;
  return idx;
}

int Overlay::find(NodeId id) const
{
  auto it = by_id_.find(id);
  return it == by_id_.end() ? -1 : it->second;
}

double Overlay::rtt(int a, int b) const { return rtt_(nodes_[a].host, nodes_[b].host); }

int Overlay::digits() const { return (cfg_.zone.n() + cfg_.b - 1) / cfg_.b; }

int Overlay::digit(u128 suffix, int l) const
{
  const int hi = cfg_.zone.n() - l * cfg_.b;
  const int w = std::min(cfg_.b, hi);
  return static_cast<int>((suffix >> (hi - w)) & ((u128(1) << w) - 1));
}

int Overlay::shared_digits(u128 a, u128 b) const
{
  const u128 x = (a ^ b) & suffix_mask(cfg_.zone);
  if (!x)
    return digits();
  return (clz128(x) - cfg_.zone.m) / cfg_.b;
}

void Overlay::insert_live(int node)
{
  const u128 id = nodes_[node].id;
  const auto pos = std::lower_bound(ring_ids_.begin(), ring_ids_.end(), id) - ring_ids_.begin();
  ring_ids_.insert(ring_ids_.begin() + pos, id);
  ring_.insert(ring_.begin() + pos, node);
  ++zone_count_[zone(node)];
}

void Overlay::erase_live(int node)
{
  const u128 id = nodes_[node].id;
  const auto it = std::lower_bound(ring_ids_.begin(), ring_ids_.end(), id);
  if (it == ring_ids_.end() || *it != id)
    ringforest::fail(Errc::Invariant, "live ring lost node " + to_hex(id));
  const auto pos = it - ring_ids_.begin();
  ring_ids_.erase(it);
  ring_.erase(ring_.begin() + pos);
  auto z = zone_count_.find(zone(node));
  if (--z->second == 0)
    zone_count_.erase(z);
}

std::pair<std::size_t, std::size_t> Overlay::id_range(u128 lo, u128 count) const
{
  const auto a = std::lower_bound(ring_ids_.begin(), ring_ids_.end(), lo) - ring_ids_.begin();
  const u128 end = lo + count;
  const std::size_t b = end == 0 ? ring_ids_.size()
                                 : static_cast<std::size_t>(
                                       std::lower_bound(ring_ids_.begin(), ring_ids_.end(), end) -
                                       ring_ids_.begin());
  return {static_cast<std::size_t>(a), b};
}

std::pair<std::size_t, std::size_t> Overlay::zone_range(u128 zone) const
{
  return id_range(zone_base(zone, cfg_.zone), u128(1) << cfg_.zone.n());
}

bool Overlay::better(int self, int cand, int cur) const
{
  if (cur < 0)
    return true;
  const double a = rtt(self, cand), b = rtt(self, cur);
  if (a != b)
    return a < b;
  return nodes_[cand].id < nodes_[cur].id;
}

int Overlay::best_in_range(int self, std::size_t lo, std::size_t hi) const
{
  int best = -1;
  double best_rtt = 0.0;
  for (std::size_t i = lo; i < hi; ++i)
  {
    const int y = ring_[i];
    if (y == self)
      continue;
    const double r = rtt(self, y);
    if (best < 0 || r < best_rtt || (r == best_rtt && nodes_[y].id < nodes_[best].id))
    {
      best = y;
      best_rtt = r;
    }
  }
  return best;
}

void Overlay::compute_leaves(int node, RoutingState &st) const
{
  const std::size_t n = ring_.size();
  const auto pos = static_cast<std::size_t>(
      std::lower_bound(ring_ids_.begin(), ring_ids_.end(), nodes_[node].id) - ring_ids_.begin());
  const std::size_t others = n - 1;
  const std::size_t half = static_cast<std::size_t>(cfg_.leaf_size / 2);
  std::size_t ncw = half, nccw = half;
  st.full = others <= static_cast<std::size_t>(cfg_.leaf_size);
  if (st.full)
  {
    nccw = others / 2;
    ncw = others - nccw;
  }
  st.leaf_cw.clear();
  st.leaf_ccw.clear();
  for (std::size_t k = 1; k <= ncw; ++k)
    st.leaf_cw.push_back(ring_[(pos + k) % n]);
  for (std::size_t k = 1; k <= nccw; ++k)
    st.leaf_ccw.push_back(ring_[(pos + n - k) % n]);
}

int Overlay::rows_for(int node) const
{
  const auto [lo, hi] = zone_range(zone(node));
  const auto pos = static_cast<std::size_t>(
      std::lower_bound(ring_ids_.begin(), ring_ids_.end(), nodes_[node].id) - ring_ids_.begin());
  const u128 s = suffix_of(nodes_[node].id, cfg_.zone);
  int best = -1;
  if (pos > lo)
    best = std::max(best, shared_digits(s, suffix_of(ring_ids_[pos - 1], cfg_.zone)));
  if (pos + 1 < hi)
    best = std::max(best, shared_digits(s, suffix_of(ring_ids_[pos + 1], cfg_.zone)));
  return best < 0 ? 0 : std::min(best + 1, digits());
}

RoutingState Overlay::compute_state(int node) const
{
  if (!live(node))
    ringforest::fail(Errc::Membership, "routing state requested for a node that is not a live member");
  RoutingState st;
  compute_leaves(node, st);

  const u128 z = zone(node);
  const u128 s = suffix_of(nodes_[node].id, cfg_.zone);
  const u128 base = zone_base(z, cfg_.zone);
  const int rows = rows_for(node);
  const int n = cfg_.zone.n();
  st.level2.assign(static_cast<std::size_t>(rows), std::vector<int>(std::size_t(1) << cfg_.b, -1));
  for (int l = 0; l < rows; ++l)
  {
    const int hi = n - l * cfg_.b;
    const int w = std::min(cfg_.b, hi);
    const u128 prefix = hi >= 128 ? 0 : (s >> hi) << hi;
    const int own = digit(s, l);
    for (int d = 0; d < (1 << w); ++d)
    {
      if (d == own)
        continue;
      const u128 lo = base + prefix + (u128(static_cast<unsigned>(d)) << (hi - w));
      const auto [a, b] = id_range(lo, u128(1) << (hi - w));
      st.level2[l][d] = best_in_range(node, a, b);
    }
  }

  std::map<u128, int> zone_best;
  const auto targets = level1_targets(z, cfg_.zone);
  for (const u128 t : targets)
  {
    auto it = zone_count_.lower_bound(zone_of(t, cfg_.zone));
    if (it == zone_count_.end())
      it = zone_count_.begin();
    const u128 sz = it->first;
    if (sz == z)
    {
      st.level1.push_back(-1);
      continue;
    }
    auto c = zone_best.find(sz);
    if (c == zone_best.end())
    {
      const auto [a, b] = zone_range(sz);
      c = zone_best.emplace(sz, best_in_range(node, a, b)).first;
    }
    st.level1.push_back(c->second);
  }

  std::vector<std::pair<std::pair<double, u128>, int>> cand;
  cand.reserve(ring_.size());
  for (int y : ring_)
    if (y != node)
      cand.push_back({{rtt(node, y), nodes_[y].id}, y});
  const std::size_t k = std::min(cand.size(), static_cast<std::size_t>(cfg_.neighborhood));
  std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
  for (std::size_t i = 0; i < k; ++i)
    st.neighborhood.push_back(cand[i].second);
  return st;
}

void Overlay::bootstrap_all()
{
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].alive && !nodes_[i].member)
    {
      nodes_[i].member = true;
      insert_live(static_cast<int>(i));
    }
  for (int y : ring_)
    nodes_[y].st = compute_state(y);
}

void Overlay::recompute_leaves_near(std::size_t pos)
{
  const std::size_t n = ring_.size();
  const std::size_t half = static_cast<std::size_t>(cfg_.leaf_size / 2);
  for (std::size_t k = 1; k <= half && k < n; ++k)
  {
    compute_leaves(ring_[(pos + k) % n], nodes_[ring_[(pos + k) % n]].st);
    compute_leaves(ring_[(pos + n - k) % n], nodes_[ring_[(pos + n - k) % n]].st);
  }
}

void Overlay::join(int node, int bootstrap, RoutePath *join_path)
{
  if (node < 0 || static_cast<std::size_t>(node) >= nodes_.size())
    ringforest::fail(Errc::Membership, "unknown node");
  if (live(node))
    ringforest::fail(Errc::Membership, "node is already a live member");
  if (!ring_.empty())
  {
    if (bootstrap < 0 || static_cast<std::size_t>(bootstrap) >= nodes_.size() || !live(bootstrap))
      ringforest::fail(Errc::Bootstrap, "bootstrap node is not live");
    RoutePath p = route(nodes_[node].id, bootstrap);
    if (join_path)
      *join_path = p;
  }
  else if (join_path)
  {
    *join_path = RoutePath{};
    join_path->nodes = {node};
  }
  Rec &x = nodes_[node];
  x.alive = true;
  x.member = true;
  insert_live(node);
  x.st = compute_state(node);

  const std::size_t n = ring_.size();
  if (n <= static_cast<std::size_t>(cfg_.leaf_size) + 2)
  {
    for (int y : ring_)
      if (y != node)
        compute_leaves(y, nodes_[y].st);
  }
  else
  {
    const auto pos = static_cast<std::size_t>(
        std::lower_bound(ring_ids_.begin(), ring_ids_.end(), x.id) - ring_ids_.begin());
    recompute_leaves_near(pos);
  }

  const u128 zx = zone(node);
  const u128 sx = suffix_of(x.id, cfg_.zone);
  const std::size_t want = std::min(n - 1, static_cast<std::size_t>(cfg_.neighborhood));
  for (int y : ring_)
  {
    if (y == node)
      continue;
    RoutingState &st = nodes_[y].st;
    const u128 zy = zone(y);
    if (zy == zx)
    {
      const int l = shared_digits(suffix_of(nodes_[y].id, cfg_.zone), sx);
      if (static_cast<int>(st.level2.size()) <= l)
        st.level2.resize(static_cast<std::size_t>(l) + 1,
                         std::vector<int>(std::size_t(1) << cfg_.b, -1));
      int &slot = st.level2[l][digit(sx, l)];
      if (better(y, node, slot))
        slot = node;
    }
    else
    {
      const auto targets = level1_targets(zy, cfg_.zone);
      for (std::size_t i = 0; i < targets.size(); ++i)
      {
        auto it = zone_count_.lower_bound(zone_of(targets[i], cfg_.zone));
        if (it == zone_count_.end())
          it = zone_count_.begin();
        if (it->first != zx)
          continue;
        int &e = st.level1[i];
        if (e < 0 || zone(e) != zx || better(y, node, e))
          e = node;
      }
    }
    auto &nb = st.neighborhood;
    auto key = [&](int v) { return std::make_pair(rtt(y, v), nodes_[v].id); };
    auto at = std::lower_bound(nb.begin(), nb.end(), node,
                               [&](int a, int b) { return key(a) < key(b); });
    nb.insert(at, node);
    if (nb.size() > want)
      nb.resize(want);
  }
}

void Overlay::leave(int node)
{
  if (!live(node))
    ringforest::fail(Errc::Membership, "leave from a node that is not a live member");
  nodes_[node].member = false;
  nodes_[node].st = RoutingState{};
  erase_live(node);
  const bool small = ring_.size() <= static_cast<std::size_t>(cfg_.leaf_size) + 1;
  for (int y : ring_)
  {
    if (nodes_[y].st.references(node))
      nodes_[y].st = compute_state(y);
    else if (small)
      compute_leaves(y, nodes_[y].st);
  }
}

void Overlay::fail(int node)
{
  if (!live(node))
    ringforest::fail(Errc::Membership, "fail on a node that is not a live member");
  nodes_[node].alive = false;
  erase_live(node);
}

bool Overlay::repair(int node, int failed)
{
  if (!live(node) || live(failed) || !nodes_[node].st.references(failed))
    return false;
  nodes_[node].st = compute_state(node);
  return true;
}

std::size_t Overlay::repair_all()
{
  std::size_t fixed = 0;
  const bool full = ring_.size() - 1 <= static_cast<std::size_t>(cfg_.leaf_size);
  for (int y : ring_)
  {
    RoutingState &st = nodes_[y].st;
    bool stale = st.full != full;
    for (int k : st.known())
      stale = stale || !live(k);
    if (stale)
    {
      st = compute_state(y);
      ++fixed;
    }
  }
  return fixed;
}

int Overlay::owner(u128 key) const
{
  if (ring_.empty())
    ringforest::fail(Errc::Membership, "overlay has no live nodes");
  const std::size_t n = ring_.size();
  const auto pos = static_cast<std::size_t>(
      std::lower_bound(ring_ids_.begin(), ring_ids_.end(), key) - ring_ids_.begin());
  const int succ = ring_[pos % n];
  const int pred = ring_[(pos + n - 1) % n];
  return closer_to(key, nodes_[pred].id, nodes_[succ].id) ? pred : succ;
}

int Overlay::owner_in_zone(u128 key, u128 z) const
{
  const auto [lo, hi] = zone_range(z);
  if (lo >= hi)
    return -1;
  const auto pos = static_cast<std::size_t>(
      std::lower_bound(ring_ids_.begin(), ring_ids_.end(), key) - ring_ids_.begin());
  int best = -1;
  for (std::size_t c : {pos, pos - 1, lo, hi - 1})
  {
    if (c < lo || c >= hi)
      continue;
    const int y = ring_[c];
    if (best < 0 || closer_to(key, nodes_[y].id, nodes_[best].id))
      best = y;
  }
  return best;
}

Step Overlay::next_hop(int cur, u128 key, u128 origin_zone, const ZonePolicyMap *policy) const
{
  Step out;
  const RoutingState &st = nodes_.at(cur).st;
  const u128 zc = zone(cur);
  const u128 zk = zone_of(key, cfg_.zone);
  const u128 cur_id = nodes_[cur].id;
  auto pol = [&](u128 z) {
    if (!policy)
      return ZonePolicy{};
    auto it = policy->find(z);
    return it == policy->end() ? ZonePolicy{} : it->second;
  };
  const bool restrict_zone = !pol(origin_zone).allow_egress && zk == origin_zone && zc == origin_zone;
  auto allowed = [&](int y) { return !restrict_zone || zone(y) == zc; };
  auto excluded = [&](int y) { return std::find(out.dead.begin(), out.dead.end(), y) != out.dead.end(); };

  // Best live entry under `prefer`; dead winners count as probes and are skipped.
  auto choose = [&](const std::vector<int> &cands, auto admit, auto prefer) {
    while (true)
    {
      int best = -1;
      for (int y : cands)
      {
        if (y < 0 || y == cur || excluded(y) || !allowed(y) || !admit(y))
          continue;
        if (best < 0 || prefer(y, best))
          best = y;
      }
      if (best < 0 || live(best))
        return best;
      out.dead.push_back(best);
    }
  };
  auto forward = [&](int y) {
    const u128 zy = zone(y);
    if (zy != zc && zy != origin_zone &&
        (!pol(origin_zone).allow_egress || !pol(zy).allow_ingress))
    {
      out.kind = StepKind::Blocked;
      out.next = -1;
      return out;
    }
    out.kind = StepKind::Forward;
    out.next = y;
    return out;
  };
  auto closer = [&](int a, int b) { return closer_to(key, nodes_[a].id, nodes_[b].id); };
  auto any = [](int) { return true; };

  // Leaf set covers the key.
  std::vector<int> leaves = st.leaf_ccw;
  leaves.insert(leaves.end(), st.leaf_cw.begin(), st.leaf_cw.end());
  bool covered = st.full;
  if (!covered)
  {
    int ccw_far = -1, cw_far = -1;
    for (int y : st.leaf_ccw)
      if (live(y))
        ccw_far = y;
    for (int y : st.leaf_cw)
      if (live(y))
        cw_far = y;
    if (ccw_far >= 0 && cw_far >= 0)
      covered = cw_distance(nodes_[ccw_far].id, key) <=
                cw_distance(nodes_[ccw_far].id, nodes_[cw_far].id);
  }
  if (covered)
  {
    const int best = choose(leaves, any, closer);
    if (best < 0 || closer_to(key, cur_id, nodes_[best].id))
    {
      out.kind = StepKind::Deliver;
      return out;
    }
    return forward(best);
  }

  const std::vector<int> known = st.known();
  auto in_zone = [&](u128 target) -> bool {
    const u128 sk = suffix_of(target, cfg_.zone);
    const int l = shared_digits(suffix_of(cur_id, cfg_.zone), sk);
    if (l < static_cast<int>(st.level2.size()))
    {
      const int e = st.level2[l][digit(sk, l)];
      if (e >= 0 && !excluded(e) && allowed(e))
      {
        if (live(e))
        {
          forward(e);
          return true;
        }
        out.dead.push_back(e);
      }
    }
    auto closer_t = [&](int a, int b) { return closer_to(target, nodes_[a].id, nodes_[b].id); };
    int best = choose(
        known,
        [&](int y) {
          return zone(y) == zone_of(target, cfg_.zone) &&
                 shared_digits(suffix_of(nodes_[y].id, cfg_.zone), sk) >= l &&
                 closer_to(target, nodes_[y].id, cur_id);
        },
        closer_t);
    if (best < 0)
      best = choose(known, [&](int y) { return closer_to(target, nodes_[y].id, cur_id); }, closer_t);
    if (best < 0)
      return false;
    forward(best);
    return true;
  };

  if (zk == zc || restrict_zone)
  {
    if (!in_zone(key))
      out.kind = StepKind::Deliver;
    return out;
  }

  const u128 mask = zone_mask(cfg_.zone);
  const u128 dz = (zk - zc) & mask;
  auto cz = [&](int y) { return (zone(y) - zc) & mask; };
  const int hop = choose(
      known, [&](int y) { return cz(y) > 0 && cz(y) <= dz; },
      [&](int a, int b) { return cz(a) != cz(b) ? cz(a) > cz(b) : closer(a, b); });
  if (hop >= 0)
    return forward(hop);
  if (in_zone(zone_base(zc, cfg_.zone) | suffix_mask(cfg_.zone)))
    return out;
  const int far = choose(st.leaf_cw, any, [&](int a, int b) {
    return cw_distance(cur_id, nodes_[a].id) > cw_distance(cur_id, nodes_[b].id);
  });
  if (far < 0)
  {
    out.kind = StepKind::Deliver;
    return out;
  }
  return forward(far);
}

RoutePath Overlay::route(u128 key, int from, const ZonePolicyMap *policy, bool repair_dead)
{
  if (from < 0 || static_cast<std::size_t>(from) >= nodes_.size() || !live(from))
    ringforest::fail(Errc::Membership, "route source is not a live member");
  RoutePath p;
  p.nodes.push_back(from);
  const u128 origin = zone(from);
  const int cap = 8 * (digits() + cfg_.zone.m) + 4 * cfg_.leaf_size;
  int cur = from;
  for (int h = 0;; ++h)
  {
    if (h > cap)
      ringforest::fail(Errc::Invariant, "routing loop toward key " + to_hex(key));
    Step s = next_hop(cur, key, origin, policy);
    p.dead_probes += static_cast<int>(s.dead.size());
    if (repair_dead)
      for (int d : s.dead)
        repair(cur, d);
    if (s.kind == StepKind::Deliver)
      return p;
    if (s.kind == StepKind::Blocked)
    {
      p.status = RouteStatus::Blocked;
      p.blocking = cur;
      return p;
    }
    cur = s.next;
    p.nodes.push_back(cur);
  }
}

std::string Overlay::dump() const
{
  std::ostringstream os;
  os << "# ringforest-overlay m=" << cfg_.zone.m << " b=" << cfg_.b << " leaf=" << cfg_.leaf_size
     << "\n";
  auto list = [&](const std::vector<int> &v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
      s += (i ? "," : "") + (v[i] < 0 ? std::string("-") : to_hex(nodes_[v[i]].id));
    return s.empty() ? std::string("-") : s;
  };
  for (int y : ring_)
  {
    const RoutingState &st = nodes_[y].st;
    std::vector<int> leaves = st.leaf_ccw;
    leaves.insert(leaves.end(), st.leaf_cw.begin(), st.leaf_cw.end());
    std::string targets;
    for (u128 t : level1_targets(zone(y), cfg_.zone))
      targets += (targets.empty() ? "" : ",") + to_hex(t);
    os << to_hex(nodes_[y].id) << '\t' << static_cast<unsigned>(zone(y)) << '\t' << list(leaves)
       << '\t' << targets << '\t' << list(st.level1) << '\n';
  }
  return os.str();
}

std::vector<std::string> check_overlay_dump(std::istream &in)
{
  std::vector<std::string> bad;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ringforest-overlay", 0) != 0)
  {
    bad.push_back("missing '# ringforest-overlay' header");
    return bad;
  }
  ZoneConfig zc;
  int leaf = 24;
  {
    std::istringstream hs(line.substr(20));
    std::string kv;
    while (hs >> kv)
    {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        continue;
      const std::string k = kv.substr(0, eq);
      const int v = std::stoi(kv.substr(eq + 1));
      if (k == "m")
        zc.m = v;
      else if (k == "leaf")
        leaf = v;
    }
  }
  struct Row
  {
    u128 id;
    unsigned zone;
    std::vector<std::string> leaves, targets, entries;
  };
  auto split = [](const std::string &s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(s);
    while (std::getline(ss, cur, sep))
      out.push_back(cur);
    return out;
  };
  std::vector<Row> rows;
  int ln = 1;
  while (std::getline(in, line))
  {
    ++ln;
    if (line.empty() || line[0] == '#')
      continue;
    const auto f = split(line, '\t');
    if (f.size() != 5)
    {
      bad.push_back("line " + std::to_string(ln) + ": expected 5 tab-separated fields");
      continue;
    }
    try
    {
      Row r;
      r.id = from_hex(f[0]);
      r.zone = static_cast<unsigned>(std::stoul(f[1]));
      if (f[2] != "-")
        r.leaves = split(f[2], ',');
      r.targets = split(f[3], ',');
      r.entries = split(f[4], ',');
      rows.push_back(r);
    }
    catch (const std::exception &e)
    {
      bad.push_back("line " + std::to_string(ln) + ": " + e.what());
    }
  }
  std::vector<u128> ids;
  for (const auto &r : rows)
    ids.push_back(r.id);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    bad.push_back("duplicate NodeIds in dump");
  std::set<u128> zones;
  for (u128 id : ids)
    zones.insert(zone_of(id, zc));
  const std::size_t n = ids.size();
  for (const auto &r : rows)
  {
    const std::string who = to_hex(r.id);
    if (zone_of(r.id, zc) != r.zone)
      bad.push_back(who + ": zone field does not match the id prefix");
    const auto pos = static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), r.id) - ids.begin());
    const std::size_t others = n - 1;
    std::size_t ncw = static_cast<std::size_t>(leaf / 2), nccw = ncw;
    if (others <= static_cast<std::size_t>(leaf))
    {
      nccw = others / 2;
      ncw = others - nccw;
    }
    std::vector<std::string> expect;
    for (std::size_t k = 1; k <= nccw; ++k)
      expect.push_back(to_hex(ids[(pos + n - k) % n]));
    for (std::size_t k = 1; k <= ncw; ++k)
      expect.push_back(to_hex(ids[(pos + k) % n]));
    if (expect != r.leaves)
      bad.push_back(who + ": leaf set differs from the numerically nearest nodes");
    std::vector<std::string> targets;
    for (u128 t : level1_targets(r.zone, zc))
      targets.push_back(to_hex(t));
    if (targets != r.targets)
      bad.push_back(who + ": level-1 finger targets do not follow the zone formula");
    if (r.entries.size() != targets.size())
    {
      bad.push_back(who + ": level-1 entry count differs from m");
      continue;
    }
    for (std::size_t i = 0; i < targets.size(); ++i)
    {
      auto it = zones.lower_bound(zone_of(from_hex(targets[i]), zc));
      if (it == zones.end())
        it = zones.begin();
      const bool expect_empty = *it == r.zone;
      if (r.entries[i] == "-")
      {
        if (!expect_empty)
          bad.push_back(who + ": level-1 entry " + std::to_string(i + 1) + " empty but zone populated");
        continue;
      }
      const u128 e = from_hex(r.entries[i]);
      if (!std::binary_search(ids.begin(), ids.end(), e))
        bad.push_back(who + ": level-1 entry " + std::to_string(i + 1) + " is not a listed node");
      else if (expect_empty || zone_of(e, zc) != *it)
        bad.push_back(who + ": level-1 entry " + std::to_string(i + 1) + " in the wrong zone");
    }
  }
  return bad;
}

} // namespace ringforest
