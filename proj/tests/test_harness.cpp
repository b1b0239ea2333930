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

#include "fixtures.hpp"
#include "oracles.hpp"

#include "ringforest/error.hpp"
#include "ringforest/harness.hpp"
#include "ringforest/scenario.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

using namespace ringforest;
namespace fs = std::filesystem;

namespace
{

Errc code_of(const std::function<void()> &f, std::string *what = nullptr)
{
  try
  {
    f();
  }
  catch (const Error &e)
  {
    if (what)
      *what = e.what();
    return e.code();
  }
  return Errc{};
}

fs::path scratch(const std::string &name)
{
  const fs::path p = fs::temp_directory_path() / ("ringforest-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path &p)
{
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Tree64
{
  std::unique_ptr<fixture::Net> net;
  std::unique_ptr<Forest> f;
  u128 app = 0;
};

Tree64 subscribed_tree(int nodes, std::uint64_t seed)
{
  Tree64 t;
  t.net = fixture::make_net(nodes, 4, seed);
  t.f = std::make_unique<Forest>(*t.net->ov);
  t.app = app_id("fl");
  TreeOptions o;
  o.advertise = false;
  t.f->create_tree(t.app, "", o);
  for (int n : std::vector<int>(t.net->ov->ring()))
    if (n != t.f->tree(t.app).root)
      t.f->subscribe(t.app, n);
  return t;
}

} // namespace

TEST_SUITE("harness")
{
  TEST_CASE("minimal scenario fills the documented defaults")
  {
    const Scenario s = parse_scenario("nodes: 10\nseed: 1\n");
    Scenario d;
    CHECK(s == d);
    CHECK(s.b == 4);
    CHECK(s.leaf_size == 24);
    CHECK(s.m == 8);
    CHECK(s.tau == 10);
    CHECK(s.alpha == 0.5);
    CHECK(s.beta == 0.5);
    CHECK(s.rounds == 3);
    CHECK(s.policy == "algorithm1");
  }

  TEST_CASE("scenario constraints name the offending key")
  {
    std::string what;
    CHECK(code_of([] { parse_scenario("nodes: 10\ngame:\n  tau: 0\n"); }, &what) == Errc::Schema);
    CHECK(what.find("game.tau") != std::string::npos);
    CHECK(code_of([] { parse_scenario("nodes: 10\nbogus: 3\n"); }, &what) == Errc::Schema);
    CHECK(what.find("bogus") != std::string::npos);
    CHECK(code_of([] { parse_scenario("nodes: 10\ngame:\n  policy: fastest\n"); }, &what) ==
          Errc::Schema);
    CHECK(what.find("game.policy") != std::string::npos);
    CHECK(code_of([] { parse_scenario("nodes: [1, 2\n"); }) == Errc::Schema);
    CHECK(code_of([] { load_scenario("/nonexistent/scenario.yaml"); }) == Errc::Io);
  }

  TEST_CASE("scenarios survive a serialization round trip")
  {
    for (const char *name : {"minimal", "regret", "churn", "hetero", "multicast"})
    {
      const Scenario s = load_scenario(std::string(RINGFOREST_SCENARIOS) + "/" + name + ".yaml");
      CHECK(parse_scenario(serialize_scenario(s)) == s);
    }
    Scenario odd;
    odd.apps = 2;
    odd.salts = {"a", "b"};
    odd.alpha = 0.1 + 0.2;
    odd.churn = {{1234.5, "master:0", "fail", 0.0}, {2000.0, "3", "bandwidth-set", 12.5}};
    odd.instance_mix = {{"t2.small", 0.25}, {"t2.large", 0.75}};
    CHECK(parse_scenario(serialize_scenario(odd)) == odd);

    const std::string t = override_scenario("nodes: 10\n", "game.tau", "7");
    CHECK(parse_scenario(t).tau == 7);
  }

  TEST_CASE("synthetic round with zero noise returns the model")
  {
    auto t = subscribed_tree(40, 3);
    std::mt19937_64 rng(1);
    const std::vector<double> model = {0.5, -1.25, 3.0, 0.0};
    const FlRound r = synth_fl_round(*t.f, t.app, model, 0.0, rng);
    CHECK(r.workers.size() == 39);
    CHECK(r.model == model);
  }

  TEST_CASE("opposite perturbations cancel")
  {
    auto net = fixture::make_net(10, 4, 8);
    Forest f(*net->ov);
    const u128 app = app_id("pair");
    TreeOptions o;
    o.advertise = false;
    const int root = f.create_tree(app, "", o).root;
    std::vector<int> w;
    for (int n : net->ov->ring())
      if (n != root && w.size() < 2)
        w.push_back(n);
    for (int n : w)
      f.subscribe(app, n);
    const std::vector<double> model = {1.0, 2.0, -3.0};
    std::map<int, Partial> payloads;
    std::vector<double> up = model, down = model;
    for (std::size_t i = 0; i < model.size(); ++i)
    {
      up[i] += 1.0;
      down[i] -= 1.0;
    }
    payloads[w[0]] = lift(Combine::WeightedMean, up, 1.0);
    payloads[w[1]] = lift(Combine::WeightedMean, down, 1.0);
    const AggregateReport a = f.aggregate(app, payloads);
    for (std::size_t i = 0; i < model.size(); ++i)
      CHECK(a.value[i] == doctest::Approx(model[i]).epsilon(1e-15));
  }

  TEST_CASE("64 workers aggregate to the flat mean")
  {
    auto t = subscribed_tree(65, 12);
    std::mt19937_64 rng(2);
    const std::vector<double> model(16, 0.25);
    const FlRound r = synth_fl_round(*t.f, t.app, model, 0.3, rng);
    REQUIRE(r.workers.size() == 64);
    std::vector<std::vector<double>> rows;
    for (const auto &[w, p] : r.payloads)
      rows.push_back(p.value);
    const auto want = oracle::flat_mean(rows);
    for (std::size_t i = 0; i < want.size(); ++i)
      CHECK(std::abs(r.model[i] - want[i]) <= 1e-12);
    CHECK(code_of([&] {
            std::map<int, Partial> bad = r.payloads;
            bad.begin()->second.value.push_back(1.0);
            t.f->aggregate(t.app, bad);
          }) == Errc::Schema);
  }

  TEST_CASE("timed aggregation without a deadline equals the tree aggregate")
  {
    auto t = subscribed_tree(120, 5);
    std::mt19937_64 rng(9);
    const FlRound r = synth_fl_round(*t.f, t.app, std::vector<double>(8, 1.0), 0.1, rng);
    Simulator sim;
    FlowNetwork net(sim);
    for (std::size_t i = 0; i < t.net->ov->size(); ++i)
      net.add_node(50.0);
    std::map<int, Partial> carry;
    std::vector<double> traffic(t.net->ov->size(), 0.0);
    const TimedRound tm =
        timed_round(sim, net, *t.net->ov, t.f->tree(t.app), r.payloads, 64.0, 0.0, carry, traffic);
    CHECK(tm.late == 0);
    CHECK(carry.empty());
    CHECK(tm.root.count == 119);
    const auto got = finish(Combine::WeightedMean, tm.root);
    for (std::size_t i = 0; i < got.size(); ++i)
      CHECK(std::abs(got[i] - r.model[i]) <= 1e-12);
    CHECK(tm.bcast_ms > 0.0);
    CHECK(tm.agg_ms > 0.0);

    // A deadline shorter than one hop parks every partial for the next round.
    Simulator sim2;
    FlowNetwork net2(sim2);
    for (std::size_t i = 0; i < t.net->ov->size(); ++i)
      net2.add_node(50.0);
    std::map<int, Partial> carry2;
    const TimedRound early = timed_round(sim2, net2, *t.net->ov, t.f->tree(t.app), r.payloads,
                                         64.0, 1e-3, carry2, traffic);
    CHECK(early.late > 0);
    int parked = early.root.count;
    for (const auto &[n, p] : carry2)
      parked += p.count;
    CHECK(parked == 119);
  }

  TEST_CASE("a ten-node run records every round")
  {
    const Scenario s = parse_scenario("nodes: 10\nseed: 1\n");
    const MetricsBundle a = run(s);
    REQUIRE(a.rounds.size() == 3);
    for (const auto &r : a.rounds)
    {
      CHECK(r.members == 10);
      CHECK(r.workers == 9);
      CHECK(r.bcast_hops >= 1);
      CHECK(r.agg_hops >= 1);
    }
    CHECK(a.recovery.empty());
    CHECK(a.violations.empty());
    int masters = 0;
    for (const auto &[k, v] : a.masters_histogram)
      masters += k * v;
    CHECK(masters >= 1);

    const MetricsBundle b = run(s);
    CHECK(a.overlay_dump == b.overlay_dump);
    CHECK(a.tree_edges == b.tree_edges);
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(a.rounds[i].model_mean == b.rounds[i].model_mean);
  }

  TEST_CASE("cumulative latency is recoverable from the trace")
  {
    Scenario s = load_scenario(std::string(RINGFOREST_SCENARIOS) + "/regret.yaml");
    s.packets = 2000;
    s.trace = true;
    const MetricsBundle b = run(s);
    REQUIRE(b.game.has_value());
    std::int64_t total = 0;
    long packets = 0;
    for (const auto &line : b.trace)
    {
      std::istringstream in(line);
      std::string time, kind, node, detail;
      std::getline(in, time, '\t');
      std::getline(in, kind, '\t');
      std::getline(in, node, '\t');
      std::getline(in, detail, '\t');
      if (kind == "packet-latency")
      {
        total += std::stoll(detail);
        ++packets;
      }
    }
    CHECK(packets == static_cast<long>(b.game->latency_us.size()));
    CHECK(static_cast<double>(total) / 1000.0 == b.game->cum_latency_ms.back());
  }

  TEST_CASE("emitted bundles replay byte for byte")
  {
    Scenario s = load_scenario(std::string(RINGFOREST_SCENARIOS) + "/churn.yaml");
    s.nodes = 120;
    s.rounds = 4;
    s.churn = {{2500.0, "17", "fail", 0.0}, {4500.0, "master:0", "fail", 0.0}};
    const fs::path a = scratch("emit-a"), b = scratch("emit-b");
    const auto files = emit(run(s), s, a.string());
    CHECK(files.count("rounds.csv") == 1);
    CHECK(files.count("recovery.csv") == 1);
    CHECK(files.count("manifest.json") == 0);
    for (const auto &[name, sha] : files)
      CHECK(file_sha1((a / name).string()) == sha);
    CHECK(replay((a / "manifest.json").string(), b.string()).empty());
    for (const auto &[name, sha] : files)
      CHECK(slurp(a / name) == slurp(b / name));
  }

  TEST_CASE("regret series re-evaluates from the emitted history")
  {
    Scenario s = load_scenario(std::string(RINGFOREST_SCENARIOS) + "/regret.yaml");
    s.packets = 1500;
    s.perturb_every = 5;
    const fs::path d = scratch("regret");
    const MetricsBundle b = run(s);
    emit(b, s, d.string());
    const auto series =
        regret_eval((d / "policy_history.csv").string(), (d / "model.json").string());
    REQUIRE(series.size() == b.game->regret.size());
    for (std::size_t i = 0; i < series.size(); ++i)
      CHECK(series[i] == doctest::Approx(b.game->regret[i]).epsilon(1e-12));
  }

  TEST_CASE("sweeps report per-value failures")
  {
    const fs::path d = scratch("sweep");
    const auto res = sweep("nodes: 10\nseed: 2\n", "game.tau", {"3", "0"}, d.string(), 2);
    REQUIRE(res.size() == 2);
    CHECK(res[0].error.empty());
    CHECK(res[1].error.find("game.tau") != std::string::npos);
    CHECK(fs::exists(fs::path(res[0].dir) / "manifest.json"));
  }

  TEST_CASE("imported topologies drive a run")
  {
    const fs::path d = scratch("topo");
    std::ofstream out(d / "hosts.csv");
    out << "id,latitude,longitude\n";
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> lat(-38.0, -27.0), lon(138.0, 153.0);
    for (int i = 0; i < 30; ++i)
      out << "h" << i << "," << lat(rng) << "," << lon(rng) << "\n";
    out.close();
    Scenario s;
    s.nodes = 30;
    s.topology_csv = (d / "hosts.csv").string();
    s.landmarks = {{-33.9, 151.2}, {-37.8, 145.0}, {-27.5, 153.0}};
    const MetricsBundle b = run(s);
    CHECK(b.logical_nodes == 30);
    CHECK(b.rounds.size() == 3);

    std::ofstream bad(d / "bad.csv");
    bad << "id,latitude,longitude\nh0,1.0,2.0\nh1,north,3.0\n";
    bad.close();
    s.topology_csv = (d / "bad.csv").string();
    CHECK(code_of([&] { run(s); }) == Errc::Schema);
  }
}
