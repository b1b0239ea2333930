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

#include "oracles.hpp"

#include "ringforest/error.hpp"
#include "ringforest/game.hpp"
#include "ringforest/harness.hpp"
#include "ringforest/netsim.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>

using namespace ringforest;

namespace
{

Errc code_of(const std::function<void()> &f)
{
  try
  {
    f();
  }
  catch (const Error &e)
  {
    return e.code();
  }
  return Errc{};
}

std::vector<std::string> traced_run(std::uint64_t seed)
{
  Simulator sim;
  sim.set_trace(true);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> t(0, 50);
  for (int i = 0; i < 200; ++i)
    sim.schedule(t(rng), "tick", std::to_string(i), "", [] {});
  sim.run();
  std::vector<std::string> out;
  for (const auto &r : sim.trace())
    out.push_back(format_trace(r));
  return out;
}

} // namespace

TEST_SUITE("netsim")
{
  TEST_CASE("events run in time then insertion order")
  {
    Simulator sim;
    std::vector<int> seen;
    sim.schedule(20, "e", "a", "", [&] { seen.push_back(3); });
    sim.schedule(10, "e", "b", "", [&] { seen.push_back(1); });
    sim.schedule(10, "e", "c", "", [&] { seen.push_back(2); });
    const auto gone = sim.schedule(15, "e", "d", "", [&] { seen.push_back(99); });
    sim.cancel(gone);
    sim.schedule(30, "e", "e", "", [&] {
      seen.push_back(4);
      sim.schedule_in(0, "e", "f", "", [&] { seen.push_back(5); });
    });
    CHECK(sim.advance(15) == 2);
    CHECK(sim.now() == 15);
    CHECK(sim.run() == 3);
    CHECK(seen == std::vector<int>{1, 2, 3, 4, 5});
    CHECK(sim.pending() == 0);
  }

  TEST_CASE("time never runs backwards and traces repeat")
  {
    Simulator sim;
    std::mt19937_64 rng(2);
    std::vector<TimeUs> times;
    std::function<void()> spawn = [&] {
      times.push_back(sim.now());
      if (times.size() < 500)
        sim.schedule_in(static_cast<TimeUs>(rng() % 7), "x", "", "", spawn);
    };
    for (int i = 0; i < 5; ++i)
      sim.schedule(static_cast<TimeUs>(rng() % 20), "x", "", "", spawn);
    sim.run();
    CHECK(std::is_sorted(times.begin(), times.end()));
    CHECK(traced_run(4) == traced_run(4));
  }

  TEST_CASE("four equal flows share a node at a quarter rate each")
  {
    Simulator sim;
    FlowNetwork net(sim);
    const int dst = net.add_node(100.0);
    for (int i = 0; i < 4; ++i)
      net.add_node(100.0);
    std::vector<TimeUs> done;
    for (int i = 1; i <= 4; ++i)
      net.transmit(i, dst, 1e6, 0, [&](const FlowRecord &f) { done.push_back(f.end); });
    CHECK(net.active_at(dst) == 4);
    CHECK(net.rate_bps(dst) == doctest::Approx(25e6));
    sim.run();
    // 8 Mb at 25 Mbps.
    for (auto t : done)
      CHECK(t == 320000);
  }

  TEST_CASE("single flow takes payload over bandwidth plus propagation")
  {
    Simulator sim;
    FlowNetwork net(sim);
    net.add_node(100.0);
    net.add_node(100.0);
    TimeUs end = -1;
    net.transmit(0, 1, 25e6 / 8.0, 0, [&](const FlowRecord &f) { end = f.end; });
    sim.run();
    CHECK(end == 250000);

    net.transmit(0, 1, 25e6 / 8.0, ms_to_us(12.5), [&](const FlowRecord &f) { end = f.end; });
    sim.run();
    CHECK(end == 250000 + 250000 + 12500);
  }

  TEST_CASE("staggered flows match a fluid integration")
  {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> start(0.0, 0.5), size(0.1e6, 2e6), bw(20.0, 100.0),
        prop(0.0, 0.02);
    for (int rep = 0; rep < 30; ++rep)
    {
      Simulator sim;
      FlowNetwork net(sim);
      std::map<int, double> bps;
      const int nodes = 4;
      for (int i = 0; i < nodes; ++i)
      {
        const double b = bw(rng);
        net.add_node(b);
        bps[i] = b * 1e6;
      }
      std::vector<oracle::FluidFlow> flows;
      std::vector<double> got;
      const int count = 2 + rep % 6;
      for (int i = 0; i < count; ++i)
      {
        oracle::FluidFlow f;
        f.dst = static_cast<int>(rng() % nodes);
        f.start_s = std::round(start(rng) * 1000.0) / 1000.0;
        f.bits = size(rng) * 8.0;
        f.prop_s = std::round(prop(rng) * 1e6) / 1e6;
        flows.push_back(f);
        got.push_back(-1.0);
      }
      for (int i = 0; i < count; ++i)
      {
        const auto f = flows[static_cast<std::size_t>(i)];
        const int src = (f.dst + 1) % nodes;
        sim.schedule(static_cast<TimeUs>(std::llround(f.start_s * 1e6)), "start", "", "",
                     [&net, &got, f, src, i] {
                       net.transmit(src, f.dst, f.bits / 8.0,
                                    static_cast<TimeUs>(std::llround(f.prop_s * 1e6)),
                                    [&got, i](const FlowRecord &r) {
                                      got[static_cast<std::size_t>(i)] =
                                          static_cast<double>(r.end) / 1e6;
                                    });
                     });
      }
      sim.run();
      const auto want = oracle::fluid_delivery(flows, bps, 1e-3);
      for (int i = 0; i < count; ++i)
      {
        const auto k = static_cast<std::size_t>(i);
        const double dur = want[k] - flows[k].start_s;
        CHECK(std::abs(got[k] - want[k]) <= 0.01 * dur);
      }
    }
  }

  TEST_CASE("rates at a node are equal and sum to at most its bandwidth")
  {
    Simulator sim;
    FlowNetwork net(sim);
    for (int i = 0; i < 6; ++i)
      net.add_node(20.0 + 10.0 * i);
    std::mt19937_64 rng(23);
    for (int i = 0; i < 60; ++i)
    {
      const int src = static_cast<int>(rng() % 6), dst = static_cast<int>((src + 1 + rng() % 5) % 6);
      sim.schedule(static_cast<TimeUs>(rng() % 400000), "start", "", "",
                   [&net, src, dst] { net.transmit(src, dst, 5e4, 0, nullptr); });
    }
    for (TimeUs t = 0; t < 2000000; t += 7919)
    {
      sim.advance(t);
      for (int n = 0; n < 6; ++n)
        if (net.active_at(n) > 0)
          CHECK(net.rate_bps(n) * static_cast<double>(net.active_at(n)) <=
                net.bandwidth(n) * 1e6 * (1.0 + 1e-12));
    }
    sim.run();
    CHECK(net.started() == 60);
    CHECK(net.delivered() == 60);
  }

  TEST_CASE("bandwidth change applies to the remaining bits")
  {
    Simulator sim;
    FlowNetwork net(sim);
    net.add_node(100.0);
    net.add_node(100.0);
    TimeUs end = 0;
    net.transmit(0, 1, 25e6 / 8.0, 0, [&](const FlowRecord &f) { end = f.end; });
    sim.schedule(100000, "bw", "1", "", [&] { net.set_bandwidth(1, 50.0); });
    sim.run();
    // 10 Mb at 100 Mbps, then 15 Mb at 50 Mbps.
    CHECK(end == 100000 + 300000);
  }

  TEST_CASE("failed endpoints abort flows and counts reconcile")
  {
    Simulator sim;
    FlowNetwork net(sim);
    for (int i = 0; i < 5; ++i)
      net.add_node(50.0);
    int done = 0, aborted = 0;
    std::mt19937_64 rng(29);
    for (int i = 0; i < 200; ++i)
    {
      const int src = static_cast<int>(rng() % 5), dst = static_cast<int>((src + 1 + rng() % 4) % 5);
      sim.schedule(static_cast<TimeUs>(rng() % 1000000), "start", "", "", [&, src, dst] {
        net.transmit(src, dst, 2e5, 1000, [&](const FlowRecord &) { ++done; },
                     [&](const FlowRecord &) { ++aborted; });
      });
    }
    sim.schedule(300000, "fail", "2", "", [&] { net.fail_node(2); });
    sim.schedule(700000, "revive", "2", "", [&] { net.revive_node(2); });
    sim.run();
    CHECK(aborted > 0);
    CHECK(net.started() == 200);
    CHECK(net.delivered() + net.aborted() == net.started());
    CHECK(static_cast<std::uint64_t>(done) == net.delivered());
    CHECK(static_cast<std::uint64_t>(aborted) == net.aborted());
    CHECK(code_of([&] { net.transmit(0, 9, 1.0, 0, nullptr); }) == Errc::Config);
  }

  TEST_CASE("latency maps linearly onto rewards")
  {
    CHECK(reward_from_latency(0.0, 2000.0) == 1.0);
    CHECK(reward_from_latency(2000.0, 2000.0) == 0.0);
    CHECK(reward_from_latency(500.0, 2000.0) == doctest::Approx(0.75));
    bool clipped = false;
    CHECK(reward_from_latency(2500.0, 2000.0, &clipped) == 0.0);
    CHECK(clipped);
    CHECK(code_of([] { reward_from_latency(1.0, 0.0); }) == Errc::Config);

    LatencyRewardMapper m(100.0);
    CHECK(m.map(50.0) == doctest::Approx(0.5));
    CHECK(m.map(300.0) == 0.0);
    CHECK(m.clipped() == 1);
    m.end_episode();
    CHECK(m.l_max() == 300.0);
    CHECK(m.map(150.0) == doctest::Approx(0.5));
    m.end_episode();
    CHECK(m.l_max() == 150.0);
    m.end_episode();
    CHECK(m.l_max() == 100.0);
  }

  TEST_CASE("rolling latency window rarely clips")
  {
    Scenario s = parse_scenario(R"(
nodes: 100
seed: 5
workload:
  rounds: 1
game:
  enabled: true
  reward: latency
  alpha: 0.99
  beta: 0.05
  tau: 100
  packets: 3000
  perturb_every: 10
)");
    const MetricsBundle b = run(s);
    REQUIRE(b.game.has_value());
    const GameRun &g = *b.game;
    CHECK(g.rewards_mapped == static_cast<long>(g.hop_counts.size()) * g.episodes * g.tau);
    MESSAGE("clip fraction " << g.clip_fraction());
    CHECK(g.clip_fraction() < 0.01);

    s.l_max_cap_ms = 1.0;
    CHECK(code_of([&] { run(s); }) == Errc::Invariant);
  }

  TEST_CASE("churn schedules are validated and queued")
  {
    ChurnSchedule s;
    s.events = {{1000, 3, ChurnKind::Fail, 0.0}, {1000, 4, ChurnKind::Leave, 0.0},
                {2000, 3, ChurnKind::Join, 0.0}, {3000, 1, ChurnKind::BandwidthSet, 10.0}};
    Simulator sim;
    std::vector<ChurnKind> seen;
    inject(sim, s, 5, [&](const ChurnEvent &e) { seen.push_back(e.kind); });
    CHECK(sim.advance(1500) == 2);
    CHECK(sim.run() == 2);
    CHECK(seen == std::vector<ChurnKind>{ChurnKind::Fail, ChurnKind::Leave, ChurnKind::Join,
                                         ChurnKind::BandwidthSet});

    Simulator empty;
    inject(empty, ChurnSchedule{}, 5, [](const ChurnEvent &) {});
    CHECK(empty.run() == 0);

    ChurnSchedule unknown;
    unknown.events = {{0, 5, ChurnKind::Fail, 0.0}};
    CHECK(code_of([&] { inject(sim, unknown, 5, [](const ChurnEvent &) {}); }) == Errc::Config);
    ChurnSchedule back;
    back.events = {{10, 0, ChurnKind::Fail, 0.0}, {5, 1, ChurnKind::Fail, 0.0}};
    CHECK(code_of([&] { back.validate(5); }) == Errc::Config);
    CHECK(churn_kind_from("bandwidth-set") == ChurnKind::BandwidthSet);
    CHECK(code_of([] { churn_kind_from("explode"); }) == Errc::Schema);
  }

  TEST_CASE("master failure mid-run keeps the round counter")
  {
    Scenario s = parse_scenario(R"(
nodes: 10
seed: 3
workload:
  rounds: 8
  round_gap_ms: 1000
churn:
  - {time_ms: 5000, node: "master:0", kind: fail}
)");
    const MetricsBundle b = run(s);
    bool master_row = false;
    for (const auto &r : b.recovery)
      if (r.master && r.app == 0)
      {
        master_row = true;
        CHECK(r.restored);
        CHECK(r.round_after == r.round_before);
        CHECK(r.round_before == 5);
      }
    CHECK(master_row);
    REQUIRE(b.rounds.size() == 8);
    for (std::size_t i = 0; i < b.rounds.size(); ++i)
      CHECK(b.rounds[i].round == i + 1);
    CHECK(b.violations.empty());
  }

  TEST_CASE("halving bandwidth raises latency in the next episode")
  {
    const int senders = 8, relays = 2, tau = 50;
    Simulator sim;
    FlowNetwork net(sim);
    for (int i = 0; i < senders; ++i)
      net.add_node(100.0);
    for (int r = 0; r < relays; ++r)
      net.add_node(60.0 + 20.0 * r);
    GameConfig cfg;
    cfg.tau = tau;
    const CandidateSet grid = simplex_grid(relays, 10);
    std::vector<Policy> pi(senders, uniform_policy(relays));
    std::vector<std::mt19937_64> streams;
    for (int n = 0; n < senders; ++n)
      streams.emplace_back(100 + n);
    std::vector<double> ep_latency;
    for (int k = 0; k < 12; ++k)
    {
      if (k == 10)
        for (int r = 0; r < relays; ++r)
          net.set_bandwidth(senders + r, net.bandwidth(senders + r) / 2.0);
      double total = 0.0;
      std::vector<std::vector<RewardSample>> s(senders);
      for (int t = 0; t < tau; ++t)
      {
        const TimeUs start = sim.now();
        std::vector<std::size_t> h(senders);
        for (int n = 0; n < senders; ++n)
        {
          h[static_cast<std::size_t>(n)] = select_hop(pi[static_cast<std::size_t>(n)],
                                                      streams[static_cast<std::size_t>(n)]);
          net.transmit(n, senders + static_cast<int>(h[static_cast<std::size_t>(n)]), 125000.0, 0,
                       [&](const FlowRecord &f) { total += static_cast<double>(f.end - start); });
        }
        for (int n = 0; n < senders; ++n)
        {
          const int relay = senders + static_cast<int>(h[static_cast<std::size_t>(n)]);
          const double share = std::min(1.0, net.rate_bps(relay) / 25e6);
          s[static_cast<std::size_t>(n)].push_back({h[static_cast<std::size_t>(n)], share, t, k});
        }
        sim.run();
      }
      for (int n = 0; n < senders; ++n)
        pi[static_cast<std::size_t>(n)] =
            episode_update(pi[static_cast<std::size_t>(n)], grid, cfg, s[static_cast<std::size_t>(n)])
                .next;
      ep_latency.push_back(total / (senders * tau));
    }
    CHECK(ep_latency[10] > ep_latency[9]);
    MESSAGE("mean latency us, episode 10: " << ep_latency[9] << ", episode 11: " << ep_latency[10]);
  }
}
