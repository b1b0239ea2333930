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

#include "ringforest/regret.hpp"
#include "ringforest/error.hpp"

#include <algorithm>
#include <cmath>

namespace ringforest
{

namespace
{

double clip01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

double at(const std::vector<double> &v, int i, const char *what)
{
  if (i < 0 || static_cast<std::size_t>(i) >= v.size())
    fail(Errc::OracleUnavailable, std::string("reward model has no ") + what + " for relay " +
                                    std::to_string(i));
  return v[static_cast<std::size_t>(i)];
}

// Removes one Bernoulli(q) factor from a Poisson-binomial pmf. The recursion
// direction is chosen so that the error does not grow.
std::vector<double> deconvolve(const std::vector<double> &f, double q)
{
  const std::size_t K = f.size() - 1;
  std::vector<double> g(K > 0 ? K : 1, 0.0);
  if (K == 0)
  {
    g[0] = 1.0;
    return g;
  }
  if (q <= 0.5)
  {
    const double s = 1.0 - q;
    g[0] = f[0] / s;
    for (std::size_t k = 1; k < K; ++k)
      g[k] = (f[k] - q * g[k - 1]) / s;
  }
  else
  {
    g[K - 1] = f[K] / q;
    for (std::size_t k = K - 1; k > 0; --k)
      g[k - 1] = (f[k] - (1.0 - q) * g[k]) / q;
  }
  for (auto &x : g)
    x = std::max(0.0, x);
  return g;
}

struct RelayUse
{
  std::size_t node;
  std::size_t local;
  double q;
};

} // namespace

double InverseLoadModel::mean(std::size_t, int relay, int k) const
{
  return at(theta, relay, "theta") / static_cast<double>(std::max(1, k));
}

double CongestionModel::mean(std::size_t, int relay, int k) const
{
  const double b = at(bandwidth, relay, "bandwidth");
  return at(theta, relay, "theta") * std::min(1.0, b / (std::max(1, k) * rate_max));
}

double LatencyModel::mean(std::size_t node, int relay, int k) const
{
  const double b = at(bandwidth, relay, "bandwidth");
  auto it = prop_ms.find({node, relay});
  const double prop = it == prop_ms.end() ? 0.0 : it->second;
  const double transfer_ms = payload_bits * std::max(1, k) / (b * 1e6) * 1e3;
  return at(theta, relay, "theta") * clip01(1.0 - (prop + transfer_ms) / l_max_ms);
}

ActionSpace ActionSpace::unicast(std::vector<int> relays)
{
  ActionSpace s;
  s.relays = std::move(relays);
  for (std::size_t i = 0; i < s.relays.size(); ++i)
    s.masks.push_back(1u << i);
  return s;
}

ActionSpace ActionSpace::multicast(std::vector<int> relays, std::size_t max_subset)
{
  MulticastSpace m = multicast_space(relays.size(), max_subset);
  ActionSpace s;
  s.relays = std::move(relays);
  s.masks = m.masks;
  return s;
}

Vec inclusion_probabilities(const ActionSpace &space, const Policy &pi)
{
  if (pi.size() != space.size())
    fail(Errc::Schema, "policy length does not match the action space");
  Vec q(space.relays.size(), 0.0);
  for (std::size_t a = 0; a < space.size(); ++a)
    for (std::size_t i = 0; i < space.relays.size(); ++i)
      if (space.masks[a] & (1u << i))
        q[i] += pi[a];
  for (auto &x : q)
    x = clip01(x);
  return q;
}

std::vector<Vec> action_values(const JointGame &g, const JointPolicy &pi)
{
  if (!g.model)
    fail(Errc::OracleUnavailable, "no reward model attached to the game");
  if (pi.size() != g.spaces.size())
    fail(Errc::Schema, "joint policy does not match the node count");
  std::map<int, std::vector<RelayUse>> users;
  for (std::size_t n = 0; n < g.spaces.size(); ++n)
  {
    const Vec q = inclusion_probabilities(g.spaces[n], pi[n]);
    for (std::size_t i = 0; i < q.size(); ++i)
      users[g.spaces[n].relays[i]].push_back({n, i, q[i]});
  }
  // expected[n][i]: expected reward on node n's i-th relay if it uses it.
  std::vector<Vec> expected(g.spaces.size());
  for (std::size_t n = 0; n < g.spaces.size(); ++n)
    expected[n].assign(g.spaces[n].relays.size(), 0.0);
  for (const auto &[relay, us] : users)
  {
    std::vector<double> f{1.0};
    for (const auto &u : us)
    {
      std::vector<double> h(f.size() + 1, 0.0);
      for (std::size_t k = 0; k < f.size(); ++k)
      {
        h[k] += f[k] * (1.0 - u.q);
        h[k + 1] += f[k] * u.q;
      }
      f.swap(h);
    }
    for (const auto &u : us)
    {
      const std::vector<double> others = deconvolve(f, u.q);
      double e = 0.0;
      for (std::size_t k = 0; k < others.size(); ++k)
        if (others[k] > 0.0)
          e += others[k] * g.model->mean(u.node, relay, static_cast<int>(k) + 1);
      expected[u.node][u.local] = e;
    }
  }
  std::vector<Vec> out(g.spaces.size());
  for (std::size_t n = 0; n < g.spaces.size(); ++n)
  {
    const auto &sp = g.spaces[n];
    out[n].assign(sp.size(), 0.0);
    for (std::size_t a = 0; a < sp.size(); ++a)
      for (std::size_t i = 0; i < sp.relays.size(); ++i)
        if (sp.masks[a] & (1u << i))
          out[n][a] += expected[n][i];
    for (auto &x : out[n])
      x /= g.scale;
  }
  return out;
}

Vec action_values(const JointGame &g, const JointPolicy &pi, std::size_t node)
{
  return action_values(g, pi).at(node);
}

McEstimate mc_action_values(const JointGame &g, const JointPolicy &pi, std::size_t node,
                            long draws, std::mt19937_64 &rng)
{
  if (!g.model)
    fail(Errc::OracleUnavailable, "no reward model attached to the game");
  if (draws < 2)
    fail(Errc::Config, "Monte Carlo needs at least 2 draws");
  const auto &sp = g.spaces.at(node);
  Vec sum(sp.size(), 0.0), sq(sp.size(), 0.0);
  std::map<int, int> load;
  for (long d = 0; d < draws; ++d)
  {
    load.clear();
    for (std::size_t m = 0; m < g.spaces.size(); ++m)
    {
      if (m == node)
        continue;
      const auto &o = g.spaces[m];
      const std::size_t a = select_hop(pi[m], rng);
      for (std::size_t i = 0; i < o.relays.size(); ++i)
        if (o.masks[a] & (1u << i))
          ++load[o.relays[i]];
    }
    for (std::size_t a = 0; a < sp.size(); ++a)
    {
      double r = 0.0;
      for (std::size_t i = 0; i < sp.relays.size(); ++i)
        if (sp.masks[a] & (1u << i))
        {
          auto it = load.find(sp.relays[i]);
          const int k = 1 + (it == load.end() ? 0 : it->second);
          r += g.model->mean(node, sp.relays[i], k);
        }
      r /= g.scale;
      sum[a] += r;
      sq[a] += r * r;
    }
  }
  McEstimate e;
  const double n = static_cast<double>(draws);
  for (std::size_t a = 0; a < sp.size(); ++a)
  {
    const double m = sum[a] / n;
    const double var = std::max(0.0, (sq[a] - n * m * m) / (n - 1.0));
    e.mean.push_back(m);
    e.stderr_.push_back(std::sqrt(var / n));
  }
  return e;
}

GapReport nash_gap(const JointGame &g, const JointPolicy &pi,
                   const std::vector<CandidateSet> &cands)
{
  if (cands.size() != g.spaces.size())
    fail(Errc::Schema, "candidate sets do not match the node count");
  const std::vector<Vec> q = action_values(g, pi);
  GapReport rep;
  rep.gains.assign(g.spaces.size(), 0.0);
  rep.values.assign(g.spaces.size(), 0.0);
  rep.best_response.assign(g.spaces.size(), -1);
  for (std::size_t n = 0; n < g.spaces.size(); ++n)
  {
    double cur = 0.0;
    for (std::size_t a = 0; a < q[n].size(); ++a)
      cur += pi[n][a] * q[n][a];
    rep.values[n] = cur;
    double best = cur;
    for (std::size_t c = 0; c < cands[n].size(); ++c)
    {
      const auto &lam = cands[n][c];
      if (lam.size() != q[n].size())
        fail(Errc::Schema, "candidate length does not match the action space");
      double v = 0.0;
      for (std::size_t a = 0; a < lam.size(); ++a)
        v += lam[a] * q[n][a];
      if (v > best)
      {
        best = v;
        rep.best_response[n] = static_cast<long>(c);
      }
    }
    rep.gains[n] = best - cur;
    if (rep.gains[n] > rep.gap)
    {
      rep.gap = rep.gains[n];
      rep.node = n;
    }
  }
  return rep;
}

std::vector<double> nash_regret(const std::vector<HistoryStep> &history,
                                const std::vector<CandidateSet> &cands)
{
  std::vector<double> out;
  out.reserve(history.size());
  double acc = 0.0;
  for (const auto &h : history)
  {
    if (!h.game)
      fail(Errc::OracleUnavailable, "history step without a reward model");
    acc += static_cast<double>(h.packets) * nash_gap(*h.game, h.joint, cands).gap;
    out.push_back(acc);
  }
  return out;
}

double welfare(const JointGame &g, const std::vector<std::size_t> &assignment)
{
  std::map<int, int> load;
  for (std::size_t n = 0; n < assignment.size(); ++n)
  {
    const auto &sp = g.spaces[n];
    for (std::size_t i = 0; i < sp.relays.size(); ++i)
      if (sp.masks.at(assignment[n]) & (1u << i))
        ++load[sp.relays[i]];
  }
  double w = 0.0;
  for (std::size_t n = 0; n < assignment.size(); ++n)
  {
    const auto &sp = g.spaces[n];
    for (std::size_t i = 0; i < sp.relays.size(); ++i)
      if (sp.masks[assignment[n]] & (1u << i))
        w += g.model->mean(n, sp.relays[i], load[sp.relays[i]]) / g.scale;
  }
  return w;
}

std::vector<std::size_t> opt_greedy(const JointGame &g)
{
  if (!g.model)
    fail(Errc::OracleUnavailable, "no reward model attached to the game");
  std::map<int, std::vector<std::size_t>> on;
  std::vector<std::size_t> asg(g.spaces.size(), 0);
  for (std::size_t n = 0; n < g.spaces.size(); ++n)
  {
    const auto &sp = g.spaces[n];
    double best = -1e300;
    std::size_t ba = 0;
    for (std::size_t a = 0; a < sp.size(); ++a)
    {
      double delta = 0.0;
      for (std::size_t i = 0; i < sp.relays.size(); ++i)
      {
        if (!(sp.masks[a] & (1u << i)))
          continue;
        const int p = sp.relays[i];
        const auto &users = on[p];
        const int k = static_cast<int>(users.size());
        delta += g.model->mean(n, p, k + 1);
        for (std::size_t m : users)
          delta += g.model->mean(m, p, k + 1) - g.model->mean(m, p, k);
      }
      if (delta > best + 1e-15)
      {
        best = delta;
        ba = a;
      }
    }
    asg[n] = ba;
    for (std::size_t i = 0; i < sp.relays.size(); ++i)
      if (sp.masks[ba] & (1u << i))
        on[sp.relays[i]].push_back(n);
  }
  return asg;
}

std::vector<std::size_t> opt_exhaustive(const JointGame &g)
{
  if (!g.model)
    fail(Errc::OracleUnavailable, "no reward model attached to the game");
  const std::size_t N = g.spaces.size();
  std::vector<std::size_t> cur(N, 0), best(N, 0);
  double bw = -1e300;
  while (true)
  {
    const double w = welfare(g, cur);
    if (w > bw + 1e-12)
    {
      bw = w;
      best = cur;
    }
    std::size_t i = N;
    // Odometer with the last node varying fastest keeps lexicographic order,
    // so ties resolve to the lowest hop indices.
    while (i > 0)
    {
      --i;
      if (++cur[i] < g.spaces[i].size())
        break;
      cur[i] = 0;
      if (i == 0)
        return best;
    }
    if (N == 0)
      return best;
  }
}

std::vector<std::size_t> opt_assignment(const JointGame &g, bool *exhaustive)
{
  double joint = 1.0;
  for (const auto &s : g.spaces)
    joint *= static_cast<double>(s.size());
  const bool ex = joint <= 1e4;
  if (exhaustive)
    *exhaustive = ex;
  return ex ? opt_exhaustive(g) : opt_greedy(g);
}

JointPolicy deterministic_joint(const JointGame &g, const std::vector<std::size_t> &assignment)
{
  JointPolicy j;
  for (std::size_t n = 0; n < g.spaces.size(); ++n)
  {
    Policy p(g.spaces[n].size(), 0.0);
    p.at(assignment.at(n)) = 1.0;
    j.push_back(std::move(p));
  }
  return j;
}

} // namespace ringforest
