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

#include "ringforest/gamesim.hpp"
#include "ringforest/error.hpp"
#include "ringforest/netsim.hpp"

#include <algorithm>
#include <cmath>

namespace ringforest
{

const char *routing_policy_name(RoutingPolicy p)
{
  switch (p)
  {
  case RoutingPolicy::Algorithm1:
    return "algorithm1";
  case RoutingPolicy::Bandit:
    return "bandit";
  case RoutingPolicy::Opt:
    return "opt";
  case RoutingPolicy::Multicast:
    return "multicast";
  }
  return "?";
}

RoutingPolicy routing_policy_from(const std::string &s)
{
  for (auto p : {RoutingPolicy::Algorithm1, RoutingPolicy::Bandit, RoutingPolicy::Opt,
                 RoutingPolicy::Multicast})
    if (s == routing_policy_name(p))
      return p;
  fail(Errc::Config, "unknown routing policy '" + s + "' (algorithm1|bandit|opt|multicast)");
}

void GameParams::validate() const
{
  cfg.validate();
  if (min_hops < 1 || max_hops < min_hops || max_hops > 5)
    fail(Errc::Config, "hop range must satisfy 1 <= min_hops <= max_hops <= 5");
  if (!(theta_lo >= 0.0 && theta_lo <= theta_hi && theta_hi <= 1.0))
    fail(Errc::Config, "theta range must lie in [0,1]");
  if (!(rate_max_mbps > 0.0) || !(payload_bytes > 0.0))
    fail(Errc::Config, "rate_max and payload size must be positive");
  if (packets < cfg.tau)
    fail(Errc::Config, "packets must cover at least one episode of tau samples");
  if (grid < 1 || multicast_grid < 1)
    fail(Errc::Config, "candidate grid resolution must be >= 1");
  if (multicast_max_subset < 1)
    fail(Errc::Config, "multicast subset size must be >= 1");
  if (perturb_every < 0 || !(bandwidth_lo > 0.0) || bandwidth_hi < bandwidth_lo)
    fail(Errc::Config, "invalid bandwidth perturbation settings");
  if (heat_bins < 1)
    fail(Errc::Config, "heat_bins must be >= 1");
  if (!(l_max_cap_ms > 0.0))
    fail(Errc::Config, "l_max cap must be positive");
}

GameSetup build_game(const Overlay &ov, u128 key, const GameParams &p, std::mt19937_64 &rng)
{
  p.validate();
  GameSetup s;
  std::map<int, int> relay_index;
  std::uniform_int_distribution<int> width(p.min_hops, p.max_hops);
  for (int n : ov.ring())
  {
    const u128 me = ov.id(n);
    std::vector<int> closer;
    for (int y : ov.state(n).known())
      if (ov.live(y) && ring_distance(ov.id(y), key) < ring_distance(me, key))
        closer.push_back(y);
    const int want = width(rng);
    if (static_cast<int>(closer.size()) < p.min_hops)
      continue;
    std::sort(closer.begin(), closer.end(), [&](int a, int b) {
      const double ra = ov.rtt(n, a), rb = ov.rtt(n, b);
      return ra != rb ? ra < rb : ov.id(a) < ov.id(b);
    });
    closer.resize(std::min<std::size_t>(closer.size(), static_cast<std::size_t>(want)));
    std::vector<int> hops;
    for (int y : closer)
    {
      auto [it, fresh] = relay_index.emplace(y, static_cast<int>(s.relays.size()));
      if (fresh)
        s.relays.push_back(y);
      hops.push_back(it->second);
    }
    s.learners.push_back(n);
    s.hops.push_back(hops);
  }
  if (s.learners.empty())
    fail(Errc::Config, "no node has enough candidate hops toward the key");
  std::uniform_real_distribution<double> th(p.theta_lo, p.theta_hi);
  std::uniform_real_distribution<double> bw(p.bandwidth_lo, p.bandwidth_hi);
  for (std::size_t r = 0; r < s.relays.size(); ++r)
  {
    s.theta.push_back(th(rng));
    s.bandwidth.push_back(bw(rng));
  }
  for (const auto &h : s.hops)
    s.hop_cands.push_back(simplex_grid(h.size(), p.grid, p.cfg.floor));
  return s;
}

std::shared_ptr<const JointGame> joint_game(const GameSetup &s, const GameParams &p,
                                            RoutingPolicy policy,
                                            const std::vector<double> &bandwidth)
{
  auto g = std::make_shared<JointGame>();
  if (p.latency_reward)
    g->model = std::make_shared<LatencyModel>(s.theta, bandwidth, p.payload_bytes * 8.0,
                                              p.l_max_cap_ms);
  else
    g->model = std::make_shared<CongestionModel>(s.theta, bandwidth, p.rate_max_mbps);
  for (const auto &h : s.hops)
    g->spaces.push_back(policy == RoutingPolicy::Multicast
                            ? ActionSpace::multicast(h, static_cast<std::size_t>(p.multicast_max_subset))
                            : ActionSpace::unicast(h));
  if (policy == RoutingPolicy::Multicast)
    g->scale = p.multicast_max_subset;
  return g;
}

std::vector<CandidateSet> action_candidates(const GameSetup &s, const GameParams &p,
                                            RoutingPolicy policy)
{
  if (policy != RoutingPolicy::Multicast)
    return s.hop_cands;
  std::vector<CandidateSet> out;
  for (const auto &h : s.hops)
  {
    const auto space = multicast_space(h.size(), static_cast<std::size_t>(p.multicast_max_subset));
    out.push_back(simplex_grid(space.masks.size(), p.multicast_grid, p.cfg.floor));
  }
  return out;
}

double GameRun::regret_per_packet(std::size_t episode) const
{
  return regret.at(episode) / (static_cast<double>(episode + 1) * tau);
}

double GameRun::selection_variance() const
{
  double acc = 0.0;
  for (const auto &c : hop_counts)
  {
    double total = 0.0;
    for (long x : c)
      total += static_cast<double>(x);
    Vec f;
    for (long x : c)
      f.push_back(total > 0 ? static_cast<double>(x) / total : 0.0);
    const double mu = 1.0 / static_cast<double>(f.size());
    double v = 0.0;
    for (double x : f)
      v += (x - mu) * (x - mu);
    acc += v / static_cast<double>(f.size());
  }
  return hop_counts.empty() ? 0.0 : acc / static_cast<double>(hop_counts.size());
}

GameRun play_game(const GameSetup &s, const GameParams &p, RoutingPolicy policy,
                  std::mt19937_64 &rng)
{
  p.validate();
  const std::size_t L = s.learners.size();
  const int tau = p.cfg.tau;
  GameRun run;
  run.policy = policy;
  run.tau = tau;
  run.episodes = p.packets / tau;
  const long total_packets = run.episodes * tau;

  std::vector<double> bandwidth = s.bandwidth;
  auto game = joint_game(s, p, policy, bandwidth);
  run.bandwidth_epochs.push_back({0, bandwidth});
  const auto cands = action_candidates(s, p, policy);

  Simulator sim;
  sim.set_trace(p.trace);
  FlowNetwork net(sim);
  std::int64_t latency_total = 0;
  for (double b : bandwidth)
    net.add_node(b);
  std::vector<int> sender;
  for (std::size_t n = 0; n < L; ++n)
    sender.push_back(net.add_node(p.bandwidth_hi));

  std::vector<std::mt19937_64> streams;
  for (std::size_t n = 0; n < L; ++n)
    streams.emplace_back(rng());

  JointPolicy pis;
  std::vector<BanditState> bandits;
  std::vector<std::size_t> assignment;
  for (std::size_t n = 0; n < L; ++n)
  {
    pis.push_back(uniform_policy(game->spaces[n].size()));
    bandits.emplace_back(s.hops[n].size(), p.bandit_epsilon);
  }
  if (policy == RoutingPolicy::Opt)
    assignment = opt_assignment(*game);

  run.hop_counts.resize(L);
  for (std::size_t n = 0; n < L; ++n)
    run.hop_counts[n].assign(s.hops[n].size(), 0);
  std::size_t width = 0;
  for (const auto &h : s.hops)
    width = std::max(width, h.size());
  run.heat.assign(static_cast<std::size_t>(p.heat_bins), std::vector<long>(width, 0));

  std::uniform_real_distribution<double> bw(p.bandwidth_lo, p.bandwidth_hi);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double reward_sum = 0.0;
  long reward_count = 0;
  std::vector<std::vector<RewardSample>> samples(L);
  std::vector<std::size_t> action(L);
  std::vector<LatencyRewardMapper> mappers(L, LatencyRewardMapper(p.l_max_cap_ms));
  // Per learner and relay slot: success draw and delivery latency of the current packet.
  std::vector<std::vector<char>> ok_now(L);
  std::vector<std::vector<double>> lat_now(L);

  for (long k = 0; k < run.episodes; ++k)
  {
    if (p.perturb_every > 0 && k > 0 && k % p.perturb_every == 0)
    {
      for (std::size_t r = 0; r < bandwidth.size(); ++r)
      {
        bandwidth[r] = bw(rng);
        net.set_bandwidth(static_cast<int>(r), bandwidth[r]);
      }
      game = joint_game(s, p, policy, bandwidth);
      run.bandwidth_epochs.push_back({k, bandwidth});
      if (policy == RoutingPolicy::Opt)
        assignment = opt_assignment(*game);
    }
    JointPolicy joint;
    if (policy == RoutingPolicy::Bandit)
      for (auto &b : bandits)
        joint.push_back(b.policy());
    else if (policy == RoutingPolicy::Opt)
      joint = deterministic_joint(*game, assignment);
    else
      joint = pis;

    EpisodeLog log;
    log.episode = k;
    log.joint = joint;
    log.gap = nash_gap(*game, joint, cands).gap;
    run.regret.push_back((run.regret.empty() ? 0.0 : run.regret.back()) + tau * log.gap);

    std::vector<std::vector<long>> ep_counts(L);
    for (std::size_t n = 0; n < L; ++n)
    {
      samples[n].clear();
      ep_counts[n].assign(game->spaces[n].size(), 0);
    }
    std::vector<double> ep_reward(L, 0.0);
    for (int t = 0; t < tau; ++t)
    {
      const long packet = k * tau + t;
      for (std::size_t n = 0; n < L; ++n)
      {
        switch (policy)
        {
        case RoutingPolicy::Algorithm1:
        case RoutingPolicy::Multicast:
          action[n] = select_hop(pis[n], streams[n]);
          break;
        case RoutingPolicy::Bandit:
          action[n] = bandit_choose(bandits[n], streams[n]);
          break;
        case RoutingPolicy::Opt:
          action[n] = assignment[n];
          break;
        }
      }
      const TimeUs start = sim.now();
      for (std::size_t n = 0; n < L; ++n)
      {
        const auto &sp = game->spaces[n];
        for (std::size_t i = 0; i < sp.relays.size(); ++i)
          if (sp.masks[action[n]] & (1u << i))
            net.transmit(sender[n], sp.relays[i], p.payload_bytes, 0,
                         [&run, &sim, &latency_total, &lat_now, start, n, i](const FlowRecord &f) {
                           lat_now[n][i] = static_cast<double>(f.end - start) / 1000.0;
                           run.latency_us.push_back(f.end - start);
                           latency_total += f.end - start;
                           if (sim.tracing())
                             sim.note("packet-latency", std::to_string(n), std::to_string(f.end - start));
                         });
      }
      const std::size_t bin = static_cast<std::size_t>(packet * p.heat_bins / total_packets);
      for (std::size_t n = 0; n < L; ++n)
      {
        const auto &sp = game->spaces[n];
        double r = 0.0;
        bool success = false;
        ok_now[n].assign(sp.relays.size(), 0);
        lat_now[n].assign(sp.relays.size(), -1.0);
        for (std::size_t i = 0; i < sp.relays.size(); ++i)
          if (sp.masks[action[n]] & (1u << i))
          {
            const double rate_mbps = net.rate_bps(sp.relays[i]) / 1e6;
            const double share = std::min(1.0, rate_mbps / p.rate_max_mbps);
            const bool ok = u01(streams[n]) < s.theta[static_cast<std::size_t>(sp.relays[i])];
            ok_now[n][i] = ok;
            r += ok ? share : 0.0;
            success = ok;
            ++run.hop_counts[n][i];
            ++run.heat[bin][i];
          }
        if (p.latency_reward)
          continue;
        r /= game->scale;
        samples[n].push_back({action[n], r, packet, k});
        ++ep_counts[n][action[n]];
        ep_reward[n] += r;
        reward_sum += r;
        ++reward_count;
        // The bandit model learns link quality only; congestion is invisible to it.
        if (policy == RoutingPolicy::Bandit)
          bandit_observe(bandits[n], action[n], success ? 1.0 : 0.0);
      }
      sim.run();
      if (p.latency_reward)
        for (std::size_t n = 0; n < L; ++n)
        {
          double r = 0.0;
          bool success = false;
          for (std::size_t i = 0; i < lat_now[n].size(); ++i)
            if (lat_now[n][i] >= 0.0)
            {
              const double m = mappers[n].map(lat_now[n][i]);
              r += ok_now[n][i] ? m : 0.0;
              success = ok_now[n][i];
            }
          r /= game->scale;
          samples[n].push_back({action[n], r, packet, k});
          ++ep_counts[n][action[n]];
          ep_reward[n] += r;
          reward_sum += r;
          ++reward_count;
          if (policy == RoutingPolicy::Bandit)
            bandit_observe(bandits[n], action[n], success ? 1.0 : 0.0);
        }
    }
    for (std::size_t n = 0; n < L; ++n)
    {
      log.modal.push_back(static_cast<std::size_t>(
          std::max_element(ep_counts[n].begin(), ep_counts[n].end()) - ep_counts[n].begin()));
      log.mean_reward.push_back(ep_reward[n] / tau);
      if (policy == RoutingPolicy::Algorithm1 || policy == RoutingPolicy::Multicast)
        pis[n] = episode_update(pis[n], cands[n], p.cfg, samples[n]).next;
      else if (policy == RoutingPolicy::Bandit)
        ++bandits[n].episode;
      mappers[n].end_episode();
    }
    run.cum_latency_ms.push_back(static_cast<double>(latency_total) / 1000.0);
    run.log.push_back(std::move(log));
  }
  run.mean_reward = reward_count ? reward_sum / static_cast<double>(reward_count) : 0.0;
  run.flows_started = static_cast<long>(net.started());
  run.flows_delivered = static_cast<long>(net.delivered());
  for (const auto &m : mappers)
  {
    run.rewards_mapped += m.total();
    run.rewards_clipped += m.clipped();
  }
  run.trace = sim.trace();
  return run;
}

} // namespace ringforest
