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

#include "ringforest/game.hpp"
#include "ringforest/error.hpp"

#include <cmath>
#include <functional>
#include <string>

namespace ringforest
{

namespace
{

constexpr double kPivotTol = 1e-12;

double uniform01(std::mt19937_64 &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void check_same_length(const Policy &a, const Policy &b, const char *what)
{
  if (a.size() != b.size())
    fail(Errc::Schema, std::string(what) + ": length mismatch " + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()));
}

} // namespace

double determinant(const Matrix &m)
{
  const std::size_t n = m.size();
  Matrix a = m;
  double det = 1.0;
  for (std::size_t c = 0; c < n; ++c)
  {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::fabs(a(r, c)) > std::fabs(a(p, c)))
        p = r;
    if (std::fabs(a(p, c)) < kPivotTol)
      fail(Errc::Conditioning, "matrix is ill-conditioned (pivot below 1e-12)");
    if (p != c)
    {
      for (std::size_t k = 0; k < n; ++k)
        std::swap(a(p, k), a(c, k));
      det = -det;
    }
    det *= a(c, c);
    for (std::size_t r = c + 1; r < n; ++r)
    {
      const double f = a(r, c) / a(c, c);
      if (f == 0.0)
        continue;
      for (std::size_t k = c; k < n; ++k)
        a(r, k) -= f * a(c, k);
    }
  }
  return det;
}

Matrix inverse(const Matrix &m)
{
  const std::size_t n = m.size();
  Matrix a = m;
  Matrix inv(n);
  for (std::size_t i = 0; i < n; ++i)
    inv(i, i) = 1.0;
  for (std::size_t c = 0; c < n; ++c)
  {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::fabs(a(r, c)) > std::fabs(a(p, c)))
        p = r;
    if (std::fabs(a(p, c)) < kPivotTol)
      fail(Errc::Conditioning, "matrix is ill-conditioned (pivot below 1e-12)");
    if (p != c)
      for (std::size_t k = 0; k < n; ++k)
      {
        std::swap(a(p, k), a(c, k));
        std::swap(inv(p, k), inv(c, k));
      }
    const double d = a(c, c);
    for (std::size_t k = 0; k < n; ++k)
    {
      a(c, k) /= d;
      inv(c, k) /= d;
    }
    for (std::size_t r = 0; r < n; ++r)
    {
      if (r == c)
        continue;
      const double f = a(r, c);
      if (f == 0.0)
        continue;
      for (std::size_t k = 0; k < n; ++k)
      {
        a(r, k) -= f * a(c, k);
        inv(r, k) -= f * inv(c, k);
      }
    }
  }
  return inv;
}

void validate_policy(const Policy &p, double tol)
{
  if (p.empty())
    fail(Errc::Schema, "empty policy");
  double s = 0.0;
  for (double x : p)
  {
    if (!(x >= -tol && x <= 1.0 + tol))
      fail(Errc::Schema, "policy entry outside [0,1]");
    s += x;
  }
  if (std::fabs(s - 1.0) > tol)
    fail(Errc::Schema, "policy does not sum to 1 (sum " + std::to_string(s) + ")");
}

void validate_candidates(const CandidateSet &c, double floor)
{
  if (c.empty())
    fail(Errc::Schema, "empty candidate set");
  for (const auto &p : c)
  {
    check_same_length(p, c.front(), "candidate set");
    validate_policy(p);
    for (double x : p)
      if (x < floor * (1.0 - 1e-9))
        fail(Errc::Schema, "candidate entry below the policy floor");
  }
}

Policy uniform_policy(std::size_t d)
{
  if (d == 0)
    fail(Errc::Schema, "policy over zero hops");
  return Policy(d, 1.0 / static_cast<double>(d));
}

Policy floor_policy(const Policy &x, double floor)
{
  const double d = static_cast<double>(x.size());
  if (floor * d > 1.0)
    fail(Errc::Config, "policy floor too large for the action count");
  Policy y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    y[i] = (1.0 - d * floor) * x[i] + floor;
  return y;
}

CandidateSet simplex_grid(std::size_t d, int g, double floor)
{
  if (d == 0 || g < 1)
    fail(Errc::Config, "simplex grid needs d >= 1 and g >= 1");
  CandidateSet out;
  std::vector<int> c(d, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i + 1 == d)
    {
      c[i] = left;
      Policy p(d);
      for (std::size_t k = 0; k < d; ++k)
        p[k] = static_cast<double>(c[k]) / g;
      out.push_back(floor_policy(p, floor));
      return;
    }
    for (int v = left; v >= 0; --v)
    {
      c[i] = v;
      rec(i + 1, left - v);
    }
  };
  rec(0, g);
  const Policy u = uniform_policy(d);
  bool has_uniform = false;
  for (const auto &p : out)
  {
    bool eq = true;
    for (std::size_t k = 0; k < d && eq; ++k)
      eq = std::fabs(p[k] - u[k]) < 1e-12;
    has_uniform = has_uniform || eq;
  }
  if (!has_uniform)
    out.push_back(u);
  return out;
}

Matrix correlation_matrix(const Policy &lambda)
{
  const std::size_t d = lambda.size();
  Matrix m(d);
  for (std::size_t p = 0; p < d; ++p)
  {
    // psi(p) psi(p)^T has a single one at (p, p); the loop keeps the outer
    // product general.
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        m(i, j) += lambda[p] * ((i == p) * (j == p));
  }
  return m;
}

void GameConfig::validate() const
{
  if (!(alpha >= 0.0 && alpha <= 1.0) || !(beta >= 0.0 && beta <= 1.0))
    fail(Errc::Config, "alpha and beta must lie in [0,1]");
  if (tau < 1)
    fail(Errc::Config, "tau must be >= 1");
  if (!(floor > 0.0 && floor < 1.0))
    fail(Errc::Config, "policy floor must lie in (0,1)");
}

GameConfig GameConfig::theory(int nodes, int episodes)
{
  if (nodes < 1 || episodes < 1)
    fail(Errc::Config, "theory schedule needs N >= 1 and K >= 1");
  GameConfig c;
  const double n = nodes, k = episodes;
  c.alpha = 1.0 - 1.0 / (n * k);
  c.beta = 1.0 / (n * std::sqrt(k));
  c.tau = episodes * episodes;
  return c;
}

Vec candidate_determinants(const CandidateSet &c, bool general)
{
  Vec dets;
  dets.reserve(c.size());
  for (const auto &p : c)
  {
    if (general)
      dets.push_back(determinant(correlation_matrix(p)));
    else
    {
      double d = 1.0;
      for (double x : p)
        d *= x;
      dets.push_back(d);
    }
  }
  return dets;
}

std::size_t exploratory_index(const CandidateSet &c, DesignRule rule, bool general)
{
  if (c.empty())
    fail(Errc::Schema, "empty candidate set");
  const Vec dets = candidate_determinants(c, general);
  std::size_t best = 0;
  for (std::size_t i = 1; i < dets.size(); ++i)
  {
    const bool better = rule == DesignRule::MinDet ? dets[i] < dets[best] : dets[i] > dets[best];
    if (better)
      best = i;
  }
  return best;
}

const Policy &exploratory_policy(const CandidateSet &c, DesignRule rule, bool general)
{
  return c[exploratory_index(c, rule, general)];
}

Vec estimate_gradient(const Policy &pi, const std::vector<RewardSample> &samples, bool general,
                      double floor)
{
  const std::size_t d = pi.size();
  for (double x : pi)
    if (x < floor * (1.0 - 1e-9))
      fail(Errc::Conditioning, "policy entry below the floor; floor and renormalize first");
  Vec g(d, 0.0);
  if (samples.empty())
    return g;
  const double tau = static_cast<double>(samples.size());
  if (general)
  {
    const Matrix inv = inverse(correlation_matrix(pi));
    for (const auto &s : samples)
    {
      if (s.hop >= d)
        fail(Errc::Schema, "sample hop outside the action set");
      for (std::size_t p = 0; p < d; ++p)
        g[p] += inv(p, s.hop) * s.reward;
    }
    for (auto &x : g)
      x /= tau;
    return g;
  }
  for (const auto &s : samples)
  {
    if (s.hop >= d)
      fail(Errc::Schema, "sample hop outside the action set");
    g[s.hop] += s.reward / pi[s.hop];
  }
  for (auto &x : g)
    x /= tau;
  return g;
}

Vec inner_products(const Vec &grad, const CandidateSet &c)
{
  Vec out;
  out.reserve(c.size());
  for (const auto &p : c)
  {
    check_same_length(p, grad, "inner product");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
      s += p[i] * grad[i];
    out.push_back(s);
  }
  return out;
}

std::size_t best_candidate_index(const Vec &grad, const CandidateSet &c)
{
  if (c.empty())
    fail(Errc::Schema, "empty candidate set");
  const Vec ip = inner_products(grad, c);
  std::size_t best = 0;
  for (std::size_t i = 1; i < ip.size(); ++i)
    if (ip[i] > ip[best])
      best = i;
  return best;
}

const Policy &best_candidate_policy(const Vec &grad, const CandidateSet &c)
{
  return c[best_candidate_index(grad, c)];
}

Policy update_policy(const Policy &pi, const Policy &tilde, const Policy &rho, double alpha,
                     double beta)
{
  check_same_length(pi, tilde, "update_policy");
  check_same_length(pi, rho, "update_policy");
  Policy out(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i)
    out[i] = alpha * (pi[i] + beta * (tilde[i] - pi[i])) + (1.0 - alpha) * rho[i];
  return out;
}

std::size_t select_hop(const Policy &pi, std::mt19937_64 &rng)
{
  const double u = uniform01(rng);
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < pi.size(); ++i)
  {
    if (pi[i] <= 0.0)
      continue;
    acc += pi[i];
    last = i;
    if (u < acc)
      return i;
  }
  return last;
}

EpisodeResult episode_update(const Policy &pi, const CandidateSet &cands, const GameConfig &cfg,
                             const std::vector<RewardSample> &samples)
{
  EpisodeResult r;
  r.samples = samples.size();
  for (const auto &s : samples)
    r.mean_reward += s.reward;
  if (!samples.empty())
    r.mean_reward /= static_cast<double>(samples.size());
  r.dets = candidate_determinants(cands, cfg.general_matrix);
  r.rho = exploratory_index(cands, cfg.design, cfg.general_matrix);
  r.grad = estimate_gradient(pi, samples, cfg.general_matrix, cfg.floor);
  r.inner = inner_products(r.grad, cands);
  r.tilde = best_candidate_index(r.grad, cands);
  r.next = update_policy(pi, cands[r.tilde], cands[r.rho], cfg.alpha, cfg.beta);
  return r;
}

EpisodeResult run_episode(Learner &node, const GameConfig &cfg, Environment &env,
                          std::mt19937_64 &rng)
{
  std::vector<RewardSample> samples;
  samples.reserve(static_cast<std::size_t>(cfg.tau));
  for (int t = 0; t < cfg.tau; ++t)
  {
    const std::size_t hop = select_hop(node.pi, rng);
    auto r = env.reward(hop, node.packet);
    if (!r)
    {
      EpisodeResult partial;
      partial.next = node.pi;
      partial.partial = true;
      partial.samples = samples.size();
      for (const auto &s : samples)
        partial.mean_reward += s.reward;
      if (!samples.empty())
        partial.mean_reward /= static_cast<double>(samples.size());
      ++node.episode;
      return partial;
    }
    samples.push_back({hop, *r, node.packet, node.episode});
    ++node.packet;
  }
  EpisodeResult res = episode_update(node.pi, node.cands, cfg, samples);
  node.pi = res.next;
  ++node.episode;
  return res;
}

bool BanditState::warming() const
{
  for (long c : count)
    if (c == 0)
      return true;
  return false;
}

double BanditState::eps_now() const
{
  return epsilon / std::sqrt(static_cast<double>(episode < 1 ? 1 : episode));
}

std::size_t BanditState::greedy() const
{
  std::size_t best = 0;
  double bm = -1.0;
  for (std::size_t i = 0; i < sum.size(); ++i)
  {
    const double m = count[i] ? sum[i] / static_cast<double>(count[i]) : 0.0;
    if (m > bm)
    {
      bm = m;
      best = i;
    }
  }
  return best;
}

Policy BanditState::policy() const
{
  const std::size_t d = sum.size();
  if (warming())
    return uniform_policy(d);
  Policy p(d, eps_now() / static_cast<double>(d));
  p[greedy()] += 1.0 - eps_now();
  return p;
}

std::size_t bandit_choose(BanditState &s, std::mt19937_64 &rng)
{
  const std::size_t d = s.sum.size();
  if (d == 0)
    fail(Errc::Schema, "bandit over zero hops");
  if (s.warming())
  {
    for (std::size_t k = 0; k < d; ++k)
    {
      const std::size_t i = (s.rr + k) % d;
      if (s.count[i] == 0)
      {
        s.rr = (i + 1) % d;
        return i;
      }
    }
  }
  if (uniform01(rng) < s.eps_now())
    return static_cast<std::size_t>(rng() % d);
  return s.greedy();
}

void bandit_observe(BanditState &s, std::size_t hop, double reward)
{
  if (hop >= s.sum.size())
    fail(Errc::Schema, "bandit hop outside the action set");
  s.sum[hop] += reward;
  ++s.count[hop];
}

std::size_t bandit_baseline_step(BanditState &s, const std::vector<RewardSample> &samples)
{
  for (const auto &x : samples)
    bandit_observe(s, x.hop, x.reward);
  ++s.episode;
  return s.greedy();
}

MulticastSpace multicast_space(std::size_t hops, std::size_t max_subset)
{
  if (hops == 0)
    fail(Errc::Schema, "multicast over zero hops");
  if (hops > 5)
    fail(Errc::Unsupported, "multicast lifting supports at most 5 hops, got " + std::to_string(hops));
  if (max_subset == 0 || max_subset > hops)
    max_subset = hops;
  MulticastSpace s;
  s.hops = hops;
  // Singletons first so that the embedding keeps hop order.
  for (std::size_t k = 1; k <= max_subset; ++k)
    for (std::uint32_t m = 1; m < (1u << hops); ++m)
      if (static_cast<std::size_t>(__builtin_popcount(m)) == k)
        s.masks.push_back(m);
  return s;
}

CandidateSet lift_to_multicast(const CandidateSet &hop_cands, const MulticastSpace &space)
{
  CandidateSet out;
  for (const auto &p : hop_cands)
  {
    if (p.size() != space.hops)
      fail(Errc::Schema, "candidate length does not match the hop count");
    Policy q(space.masks.size(), 0.0);
    for (std::size_t i = 0; i < space.hops; ++i)
      q[i] = p[i];
    bool low = false;
    for (double x : q)
      low = low || x < kPolicyFloor * (1.0 - 1e-9);
    out.push_back(low ? floor_policy(q, kPolicyFloor) : q);
  }
  return out;
}

double normalize_multicast_reward(double r, std::size_t max_subset)
{
  if (max_subset == 0)
    fail(Errc::Schema, "zero subset size");
  return r / static_cast<double>(max_subset);
}

} // namespace ringforest
