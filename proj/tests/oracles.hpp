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

// Independent reference computations used to derive and freeze expected
// values. Nothing here calls into the code under test except for plain data
// accessors.

#ifndef RINGFOREST_TESTS_ORACLES_HPP
#define RINGFOREST_TESTS_ORACLES_HPP

#include "ringforest/forest.hpp"
#include "ringforest/regret.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <queue>
#include <vector>

namespace oracle
{

using big = boost::multiprecision::cpp_int;
using ringforest::u128;

inline big to_big(u128 v)
{
  big hi = static_cast<std::uint64_t>(v >> 64);
  return (hi << 64) + static_cast<std::uint64_t>(v);
}

inline big two_pow(int k) { return big(1) << k; }

inline big ring_distance(const big &a, const big &b)
{
  const big d = a > b ? a - b : b - a;
  const big w = two_pow(128) - d;
  return d < w ? d : w;
}

// Owner of `key` by linear scan: smallest ring distance, ties to the
// clockwise side of the key.
inline int owner(const std::vector<u128> &ids, const std::vector<bool> &live, u128 key)
{
  int best = -1;
  big bd;
  for (std::size_t i = 0; i < ids.size(); ++i)
  {
    if (!live[i])
      continue;
    const big d = ring_distance(to_big(ids[i]), to_big(key));
    const bool cw = ids[i] - key < key - ids[i];
    if (best < 0 || d < bd ||
        (d == bd && cw && !(ids[static_cast<std::size_t>(best)] - key < key - ids[static_cast<std::size_t>(best)])))
    {
      best = static_cast<int>(i);
      bd = d;
    }
  }
  return best;
}

// Leibniz expansion.
inline double determinant(const std::vector<std::vector<double>> &a)
{
  const std::size_t n = a.size();
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i)
    perm[i] = i;
  double det = 0.0;
  do
  {
    int inv = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        inv += perm[i] > perm[j];
    double p = inv % 2 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i)
      p *= a[i][perm[i]];
    det += p;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return det;
}

// q_n(a) by enumerating every joint action of the other nodes.
inline std::vector<double> action_values(const ringforest::JointGame &g,
                                         const ringforest::JointPolicy &pi, std::size_t node)
{
  const std::size_t n = g.spaces.size();
  const auto &mine = g.spaces[node];
  std::vector<double> out(mine.size(), 0.0);
  std::vector<std::size_t> idx(n, 0);
  while (true)
  {
    double prob = 1.0;
    std::map<int, int> load;
    for (std::size_t m = 0; m < n; ++m)
    {
      if (m == node)
        continue;
      prob *= pi[m][idx[m]];
      const auto &sp = g.spaces[m];
      for (std::size_t i = 0; i < sp.relays.size(); ++i)
        if (sp.masks[idx[m]] >> i & 1u)
          ++load[sp.relays[i]];
    }
    if (prob > 0.0)
      for (std::size_t a = 0; a < mine.size(); ++a)
      {
        double r = 0.0;
        for (std::size_t i = 0; i < mine.relays.size(); ++i)
          if (mine.masks[a] >> i & 1u)
            r += g.model->mean(node, mine.relays[i], 1 + load[mine.relays[i]]);
        out[a] += prob * r / g.scale;
      }
    std::size_t m = 0;
    for (; m < n; ++m)
    {
      if (m == node)
        continue;
      if (++idx[m] < g.spaces[m].size())
        break;
      idx[m] = 0;
    }
    if (m == n)
      break;
  }
  return out;
}

struct BestResponse
{
  double gain = 0.0;
  long index = -1;
};

inline BestResponse best_response(const ringforest::JointGame &g, const ringforest::JointPolicy &pi,
                                  std::size_t node, const ringforest::CandidateSet &cands)
{
  const auto q = oracle::action_values(g, pi, node);
  auto value = [&](const ringforest::Policy &p) {
    double v = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a)
      v += p[a] * q[a];
    return v;
  };
  const double cur = value(pi[node]);
  BestResponse br;
  double best = cur;
  for (std::size_t c = 0; c < cands.size(); ++c)
    if (value(cands[c]) > best)
    {
      best = value(cands[c]);
      br.index = static_cast<long>(c);
    }
  br.gain = best - cur;
  return br;
}

struct FluidFlow
{
  int dst = 0;
  double start_s = 0.0;
  double bits = 0.0;
  double prop_s = 0.0;
};

// Fixed-step integration of equal sharing of each destination's bandwidth.
// Returns delivery times in seconds.
inline std::vector<double> fluid_delivery(const std::vector<FluidFlow> &flows,
                                          const std::map<int, double> &bandwidth_bps, double dt)
{
  std::vector<double> left(flows.size()), done(flows.size(), -1.0);
  for (std::size_t i = 0; i < flows.size(); ++i)
    left[i] = flows[i].bits;
  double t = 0.0;
  std::size_t finished = 0;
  while (finished < flows.size())
  {
    std::map<int, int> users;
    for (std::size_t i = 0; i < flows.size(); ++i)
      if (done[i] < 0 && flows[i].start_s <= t)
        ++users[flows[i].dst];
    for (std::size_t i = 0; i < flows.size(); ++i)
      if (done[i] < 0 && flows[i].start_s <= t)
      {
        const double rate = bandwidth_bps.at(flows[i].dst) / users[flows[i].dst];
        if (left[i] <= rate * dt)
        {
          done[i] = t + left[i] / rate;
          ++finished;
        }
        left[i] -= rate * dt;
      }
    t += dt;
  }
  for (std::size_t i = 0; i < flows.size(); ++i)
    done[i] += flows[i].prop_s;
  return done;
}

// Depth of every member by BFS from the root over child links.
inline std::map<int, int> depths(const ringforest::Tree &t)
{
  std::map<int, int> d;
  std::queue<int> q;
  d[t.root] = 0;
  q.push(t.root);
  while (!q.empty())
  {
    const int x = q.front();
    q.pop();
    for (int c : t.members.at(x).children)
    {
      d[c] = d[x] + 1;
      q.push(c);
    }
  }
  return d;
}

inline std::vector<double> flat_mean(const std::vector<std::vector<double>> &rows)
{
  std::vector<double> m(rows.front().size(), 0.0);
  for (const auto &r : rows)
    for (std::size_t i = 0; i < r.size(); ++i)
      m[i] += r[i];
  for (double &x : m)
    x /= static_cast<double>(rows.size());
  return m;
}

} // namespace oracle

#endif
