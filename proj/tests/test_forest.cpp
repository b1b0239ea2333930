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
#include "ringforest/forest.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

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

TreeOptions quiet(int replicas = 2)
{
  TreeOptions o;
  o.advertise = false;
  o.replicas = replicas;
  return o;
}

void subscribe_all(Forest &f, u128 app)
{
  for (int n : std::vector<int>(f.overlay().ring()))
    if (n != f.tree(app).root && !(f.tree(app).has(n) && f.tree(app).members.at(n).subscribed))
      f.subscribe(app, n);
}

} // namespace

TEST_SUITE("forest")
{
  TEST_CASE("the rendezvous node becomes master")
  {
    OverlayConfig c;
    Overlay ov(c, [](int, int) { return 1.0; });
    ov.add_node(u128{0x10} << 120, 0);
    ov.add_node(u128{0x40} << 120, 1);
    ov.add_node(u128{0x90} << 120, 2);
    ov.bootstrap_all();
    Forest f(ov);
    const u128 app = u128{0x45} << 120;
    CHECK(f.create_tree(app, "", quiet()).root == 1);
    CHECK(f.tree(app).role(1) == TreeRole::Master);
    CHECK(code_of([&] { f.create_tree(app); }) == Errc::AlreadyExists);
  }

  TEST_CASE("creating a tree advertises it through the AD tree")
  {
    auto net = fixture::make_net(200, 4, 1);
    Forest f(*net->ov);
    const u128 app = app_id("FL application");
    const Tree &t = f.create_tree(app, "name=fl");
    REQUIRE(f.directory().count(app) == 1);
    CHECK(f.directory().at(app).master == t.root);
    CHECK(f.directory().at(app).metadata == "name=fl");
    const Tree &ad = f.tree(Forest::ad_key());
    CHECK(ad.has(t.root));
    CHECK(ad.members.at(t.root).subscribed);
    CHECK(ad.root == net->ov->owner(Forest::ad_key()));
  }

  TEST_CASE("first subscriber in a small overlay is a direct child of the master")
  {
    auto net = fixture::make_net(10, 4, 2);
    Forest f(*net->ov);
    const u128 app = app_id("x");
    const int root = f.create_tree(app, "", quiet()).root;
    const int joiner = root == 0 ? 1 : 0;
    f.subscribe(app, joiner);
    CHECK(f.tree(app).members.at(joiner).parent == root);
    CHECK(f.tree(app).size() == 2);
    CHECK(code_of([&] { f.subscribe(app, joiner); }) == Errc::AlreadyExists);
  }

  TEST_CASE("nearby joiners share forwarders below the root")
  {
    auto net = fixture::make_net(3000, 4, 3);
    const Overlay &ov = *net->ov;
    Forest f(*net->ov);
    const u128 app = app_id("shared");
    const int root = f.create_tree(app, "", quiet()).root;
    // Ring neighbours far from the key share long prefixes.
    int shared = 0, pairs = 0;
    for (std::size_t i = 0; i + 1 < ov.ring().size() && pairs < 40; i += 70)
    {
      const int a = ov.ring()[i], b = ov.ring()[i + 1];
      if (a == root || b == root || f.tree(app).has(a) || f.tree(app).has(b))
        continue;
      f.subscribe(app, a);
      f.subscribe(app, b);
      std::set<int> up;
      for (int x = a; x >= 0; x = f.tree(app).members.at(x).parent)
        up.insert(x);
      int lca = b;
      while (!up.count(lca))
        lca = f.tree(app).members.at(lca).parent;
      shared += lca != root;
      ++pairs;
    }
    CHECK(pairs == 40);
    INFO("pairs merging below the root: " << shared);
    CHECK(shared > 0);
  }

  TEST_CASE("subscribe then unsubscribe restores the tree")
  {
    auto net = fixture::make_net(500, 4, 4);
    Forest f(*net->ov);
    const u128 app = app_id("undo");
    f.create_tree(app, "", quiet());
    for (int n = 0; n < 100; ++n)
      if (n != f.tree(app).root && !f.tree(app).has(n))
        f.subscribe(app, n);
    const auto before = f.tree(app).members;
    for (int n = 400; n < 420; ++n)
    {
      if (f.tree(app).has(n))
        continue;
      f.subscribe(app, n);
      f.unsubscribe(app, n);
      CHECK(f.tree(app).members == before);
    }
    CHECK(code_of([&] { f.unsubscribe(app, 499); }) == Errc::NotFound);
  }

  TEST_CASE("selection predicate can reject a joiner")
  {
    auto net = fixture::make_net(50, 4, 5);
    Forest f(*net->ov);
    const u128 app = app_id("picky");
    const int root = f.create_tree(app, "", quiet()).root;
    const SelectFn deny = [](int, int joiner) -> std::optional<std::string> {
      if (joiner % 2)
        return "odd nodes are not selected";
      return std::nullopt;
    };
    const int odd = root % 2 ? (root + 2) % 50 : (root + 1) % 50;
    const int even = root % 2 ? (root + 1) % 50 : (root + 2) % 50;
    CHECK(code_of([&] { f.subscribe(app, odd, &deny); }) == Errc::Rejected);
    CHECK_FALSE(f.tree(app).has(odd));
    f.subscribe(app, even, &deny);
    CHECK(f.tree(app).has(even));
  }

  TEST_CASE("zone policy blocks a JOIN at the boundary")
  {
    auto net = fixture::make_net(200, 4, 6, 4);
    ZonePolicyMap pol;
    Forest f(*net->ov, &pol);
    const u128 app = make_node_id(1, 12345, ZoneConfig{});
    f.create_tree(app, "", quiet());
    const int root = f.tree(app).root;
    const u128 rz = net->ov->zone(root);
    int outsider = -1;
    for (int n : net->ov->ring())
      if (net->ov->zone(n) != rz)
        outsider = n;
    REQUIRE(outsider >= 0);
    pol[net->ov->zone(outsider)].allow_egress = false;
    CHECK(code_of([&] { f.subscribe(app, outsider); }) == Errc::Blocked);
  }

  TEST_CASE("broadcast reaches every member once at its tree depth")
  {
    auto net = fixture::make_net(800, 4, 7);
    Forest f(*net->ov);
    const u128 app = app_id("bcast");
    const int root = f.create_tree(app, "", quiet()).root;
    subscribe_all(f, app);
    std::map<int, int> calls;
    const auto rep = f.broadcast(app, root, {1.0, 2.0}, [&](int n, int, const std::vector<double> &v) {
      ++calls[n];
      CHECK(v == std::vector<double>{1.0, 2.0});
    });
    const auto depth = oracle::depths(f.tree(app));
    CHECK(rep.deliveries() == f.tree(app).size() - 1);
    for (const auto &[n, d] : depth)
      if (n != root)
      {
        CHECK(calls[n] == 1);
        CHECK(rep.hops.at(n) == d);
      }
    const int other = root == 0 ? 1 : 0;
    CHECK(code_of([&] { f.broadcast(app, other, {1.0}); }) == Errc::Authority);
  }

  TEST_CASE("two-member tree broadcast")
  {
    auto net = fixture::make_net(5, 4, 8);
    Forest f(*net->ov);
    const u128 app = app_id("tiny");
    const int root = f.create_tree(app, "", quiet()).root;
    f.subscribe(app, (root + 1) % 5);
    const auto rep = f.broadcast(app, root, {3.0});
    CHECK(rep.deliveries() == 1);
    CHECK(rep.max_depth == 1);
  }

  TEST_CASE("broadcast depth bound on a 5120-node tree with b = 5")
  {
    auto net = fixture::make_net(5120, 5, 9);
    Forest f(*net->ov);
    const u128 app = app_id("wide");
    const int root = f.create_tree(app, "", quiet()).root;
    subscribe_all(f, app);
    CHECK(f.broadcast(app, root, {1.0}).max_depth <= fixture::log_bound(5120, 5) + 1);
  }

  TEST_CASE("transform hooks run per edge")
  {
    auto net = fixture::make_net(60, 4, 10);
    Forest f(*net->ov);
    const u128 app = app_id("xf");
    const int root = f.create_tree(app, "", quiet()).root;
    subscribe_all(f, app);
    Transform xf;
    xf.encode = [](const std::vector<double> &v) {
      std::vector<double> o = v;
      for (double &x : o)
        x *= 0.5;
      return o;
    };
    xf.decode = [](const std::vector<double> &v) {
      std::vector<double> o = v;
      for (double &x : o)
        x *= 2.0;
      return o;
    };
    bool same = true;
    f.broadcast(app, root, {1.5, -2.0},
                [&](int, int, const std::vector<double> &v) { same = same && v == std::vector<double>{1.5, -2.0}; },
                &xf);
    CHECK(same);
  }

  TEST_CASE("weighted mean arithmetic and identity")
  {
    Partial p = lift(Combine::WeightedMean, {2.0}, 1.0);
    merge(Combine::WeightedMean, p, lift(Combine::WeightedMean, {4.0}, 3.0));
    CHECK(finish(Combine::WeightedMean, p)[0] == doctest::Approx(3.5).epsilon(1e-15));
    CHECK(finish(Combine::Sum, lift(Combine::Sum, {7.25}, 1.0))[0] == 7.25);
    Partial q = lift(Combine::WeightedMean, {1.0, 2.0}, 1.0);
    CHECK(code_of([&] { merge(Combine::WeightedMean, q, lift(Combine::WeightedMean, {1.0}, 1.0)); }) ==
          Errc::Schema);
  }

  TEST_CASE("single-leaf aggregation returns the leaf value")
  {
    auto net = fixture::make_net(8, 4, 11);
    Forest f(*net->ov);
    const u128 app = app_id("one");
    const int root = f.create_tree(app, "", quiet()).root;
    const int leaf = (root + 3) % 8;
    f.subscribe(app, leaf);
    const auto rep = f.aggregate(app, {{leaf, lift(Combine::WeightedMean, {0.125, 9.0}, 2.0)}});
    CHECK(rep.value == std::vector<double>{0.125, 9.0});
  }

  TEST_CASE("aggregation equals the flat combine over random tree shapes")
  {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> nd(0.0, 1.0);
    int cases = 0;
    for (int shape = 0; shape < 20; ++shape)
    {
      auto net = fixture::make_net(200 + 40 * shape, 3 + shape % 3, 500 + static_cast<std::uint64_t>(shape),
                                   1 + shape % 3, 8);
      Forest f(*net->ov);
      for (Combine comb : {Combine::WeightedMean, Combine::Sum, Combine::Max})
      {
        TreeOptions o = quiet();
        o.combine = comb;
        const u128 app = app_id("agg", "", std::to_string(shape) + combine_name(comb));
        f.create_tree(app, "", o);
        std::vector<int> ring = f.overlay().ring();
        std::shuffle(ring.begin(), ring.end(), rng);
        std::vector<int> leaves;
        for (int n : ring)
          if (leaves.size() < 64 && n != f.tree(app).root)
          {
            f.subscribe(app, n);
            leaves.push_back(n);
          }
        for (int rep = 0; rep < 17; ++rep, ++cases)
        {
          std::map<int, Partial> in;
          std::vector<std::vector<double>> rows;
          double wsum = 0.0;
          std::vector<double> wmean(3, 0.0), sum(3, 0.0), mx(3, -1e300);
          for (int n : leaves)
          {
            std::vector<double> v{nd(rng), nd(rng), nd(rng)};
            const double w = 0.5 + static_cast<double>(rng() % 4);
            in[n] = lift(comb, v, w);
            wsum += w;
            for (int i = 0; i < 3; ++i)
            {
              wmean[static_cast<std::size_t>(i)] += w * v[static_cast<std::size_t>(i)];
              sum[static_cast<std::size_t>(i)] += v[static_cast<std::size_t>(i)];
              mx[static_cast<std::size_t>(i)] = std::max(mx[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(i)]);
            }
          }
          const auto got = f.aggregate(app, in).value;
          for (std::size_t i = 0; i < 3; ++i)
          {
            const double want = comb == Combine::WeightedMean ? wmean[i] / wsum
                                : comb == Combine::Sum        ? sum[i]
                                                              : mx[i];
            CHECK(std::abs(got[i] - want) <= 1e-12 * std::max(1.0, std::abs(want)));
          }
        }
      }
    }
    CHECK(cases >= 1000);
  }

  TEST_CASE("aggregation rejects mismatched dimensions")
  {
    auto net = fixture::make_net(30, 4, 12);
    Forest f(*net->ov);
    const u128 app = app_id("dims");
    const int root = f.create_tree(app, "", quiet()).root;
    const int a = (root + 1) % 30, b = (root + 2) % 30;
    f.subscribe(app, a);
    f.subscribe(app, b);
    CHECK(code_of([&] {
            f.aggregate(app, {{a, lift(Combine::WeightedMean, {1.0}, 1.0)},
                              {b, lift(Combine::WeightedMean, {1.0, 2.0}, 1.0)}});
          }) == Errc::Schema);
  }

  TEST_CASE("advertise and discover")
  {
    auto net = fixture::make_net(400, 4, 13);
    Forest f(*net->ov);
    std::vector<u128> apps;
    for (int i = 0; i < 3; ++i)
    {
      apps.push_back(app_id("app-" + std::to_string(i)));
      f.create_tree(apps.back(), "v1");
    }
    std::set<int> masters;
    for (u128 a : apps)
      masters.insert(f.tree(a).root);
    int fresh = 0;
    while (masters.count(fresh) || f.tree(Forest::ad_key()).has(fresh))
      ++fresh;
    const auto entries = f.discover(fresh);
    CHECK(entries.size() == 3);
    CHECK_FALSE(f.tree(Forest::ad_key()).has(fresh));

    const int m0 = f.tree(apps[0]).root;
    f.advertise(apps[0], m0, "v2");
    f.advertise(apps[0], m0, "v3");
    const auto again = f.discover(fresh);
    CHECK(again.size() == 3);
    int seen = 0;
    for (const auto &e : again)
      if (e.app == apps[0])
      {
        ++seen;
        CHECK(e.metadata == "v3");
      }
    CHECK(seen == 1);
    const int notmaster = m0 == 0 ? 1 : 0;
    CHECK(code_of([&] { f.advertise(apps[0], notmaster, "x"); }) == Errc::Authority);

    for (int n = 0; n < 400; n += 3)
      f.discover(n);
    const Tree &ad = f.tree(Forest::ad_key());
    CHECK(ad.subscribers().size() <= masters.size() + 1);
    CHECK(ad.size() <= masters.size() * (fixture::log_bound(400, 4) + 1) + 1);
  }

  TEST_CASE("17 trees over 1946 multi-zone nodes spread internal nodes across zones")
  {
    auto net = fixture::make_net(1946, 4, 14, 6);
    Forest f(*net->ov);
    for (int i = 0; i < 17; ++i)
    {
      const u128 app = app_id("fig-" + std::to_string(i));
      f.create_tree(app, "", quiet());
      subscribe_all(f, app);
      std::set<u128> zones;
      for (const auto &[n, m] : f.tree(app).members)
        if (!m.children.empty())
          zones.insert(net->ov->zone(n));
      CHECK(zones.size() > 1);
      CHECK(f.validate(app).empty());
    }
  }

  TEST_CASE("replicas mirror the master state after a commit")
  {
    auto net = fixture::make_net(100, 4, 15);
    Forest f(*net->ov);
    const u128 app = app_id("rep");
    f.create_tree(app, "", quiet(3));
    MasterState st;
    st.round = 7;
    st.model = {1, 2, 3};
    f.commit_round(app, st);
    const auto holders = f.replica_holders(app);
    CHECK(holders.size() == 3);
    for (int h : holders)
      CHECK(f.tree(app).replicas.at(h) == st);
    CHECK(f.tree(app).state == st);
  }

  TEST_CASE("worker recovery regrafts the orphan with its subtree")
  {
    auto net = fixture::make_net(1500, 4, 16);
    Forest f(*net->ov);
    const u128 app = app_id("worker");
    const int root = f.create_tree(app, "", quiet()).root;
    subscribe_all(f, app);
    const Tree &t = f.tree(app);
    int victim = -1;
    for (const auto &[n, m] : t.members)
      if (n != root && !m.children.empty())
      {
        bool grand = false;
        for (int c : m.children)
          grand = grand || !t.members.at(c).children.empty();
        if (victim < 0 || grand)
          victim = n;
        if (grand)
          break;
      }
    REQUIRE(victim >= 0);
    const std::vector<int> kids = t.members.at(victim).children;
    std::map<int, std::vector<int>> below;
    for (int c : kids)
      below[c] = t.members.at(c).children;
    net->ov->fail(victim);
    const auto orphans = f.drop_failed(app);
    CHECK(std::set<int>(orphans.begin(), orphans.end()) == std::set<int>(kids.begin(), kids.end()));
    for (int o : orphans)
    {
      int contacts = 0;
      const int parent = f.recover_worker(app, o, &contacts);
      CHECK(net->ov->live(parent));
      CHECK(f.tree(app).members.at(o).parent == parent);
      const auto &now = f.tree(app).members.at(o).children;
      for (int g : below[o])
        CHECK(std::find(now.begin(), now.end(), g) != now.end());
      CHECK(contacts <= 4 * fixture::log_bound(1500, 4));
    }
    CHECK(f.validate(app).empty());
  }

  TEST_CASE("a regrafted leaf still receives the round's payload")
  {
    auto net = fixture::make_net(600, 4, 17);
    Forest f(*net->ov);
    const u128 app = app_id("alo");
    const int root = f.create_tree(app, "", quiet()).root;
    subscribe_all(f, app);
    int parent = -1;
    for (const auto &[n, m] : f.tree(app).members)
      if (n != root && !m.children.empty())
        parent = n;
    REQUIRE(parent >= 0);
    net->ov->fail(parent);
    std::map<int, int> got;
    auto count = [&](int n, int, const std::vector<double> &) { ++got[n]; };
    auto rep = f.broadcast(app, root, {4.0}, count);
    const auto orphans = f.drop_failed(app);
    for (int o : orphans)
      CHECK(got[o] == 0);
    for (int o : orphans)
      f.recover_worker(app, o);
    for (int o : orphans)
      f.retransmit(app, o, {4.0}, rep, count);
    for (const auto &[n, m] : f.tree(app).members)
      if (n != root)
        CHECK(got[n] == 1);
  }

  TEST_CASE("no recovery when no parent failed")
  {
    auto net = fixture::make_net(300, 4, 18);
    Forest f(*net->ov);
    const u128 app = app_id("calm");
    const int root = f.create_tree(app, "", quiet()).root;
    subscribe_all(f, app);
    int leaf = -1;
    for (const auto &[n, m] : f.tree(app).members)
      if (n != root && m.children.empty())
        leaf = n;
    std::mt19937_64 rng(1);
    const auto rep = f.recover_timed(app, {leaf}, RecoveryParams{}, rng);
    CHECK(rep.records.empty());
    CHECK(f.validate(app).empty());
  }

  TEST_CASE("master recovery from a surviving replica keeps the round")
  {
    for (std::uint64_t seed = 0; seed < 10; ++seed)
    {
      auto net = fixture::make_net(400, 4, 40 + seed);
      Forest f(*net->ov);
      const u128 app = app_id("master", "", std::to_string(seed));
      const int root = f.create_tree(app, "", quiet(2)).root;
      subscribe_all(f, app);
      MasterState st;
      st.round = 12;
      st.model = {0.5};
      f.commit_round(app, st);
      const auto holders = f.replica_holders(app);
      REQUIRE(holders.size() == 2);
      std::mt19937_64 rng(seed);
      const auto rep = f.recover_timed(app, {root, holders[0]}, RecoveryParams{}, rng);
      REQUIRE(rep.master);
      CHECK(rep.master->restored);
      CHECK(rep.master->source == holders[1]);
      CHECK(f.tree(app).state.round == 12);
      CHECK(f.tree(app).root == net->ov->owner(app));
      CHECK(f.validate(app).empty());
    }
  }

  TEST_CASE("master failure without replicas is unrecoverable")
  {
    auto net = fixture::make_net(200, 4, 19);
    Forest f(*net->ov);
    const u128 app = app_id("norep");
    const int root = f.create_tree(app, "", quiet(0)).root;
    subscribe_all(f, app);
    MasterState st;
    st.round = 5;
    f.commit_round(app, st);
    net->ov->fail(root);
    const auto orphans = f.drop_failed(app);
    REQUIRE_FALSE(orphans.empty());
    CHECK(code_of([&] { f.recover_master(app, orphans.front()); }) == Errc::Unrecoverable);
    CHECK(f.tree(app).state.round == 0);
    CHECK_FALSE(f.tree(app).root_dead);
    for (int o : orphans)
      if (o != f.tree(app).root && f.tree(app).members.at(o).parent < 0)
        f.recover_worker(app, o);
    CHECK(f.validate(app).empty());
  }

  TEST_CASE("tree validity holds across random event sequences")
  {
    std::mt19937_64 rng(2024);
    for (int run = 0; run < 5; ++run)
    {
      auto net = fixture::make_net(400, 4, 900 + static_cast<std::uint64_t>(run), 2);
      Forest f(*net->ov);
      std::vector<u128> apps;
      for (int a = 0; a < 3; ++a)
      {
        apps.push_back(app_id("seq", "", std::to_string(run * 10 + a)));
        f.create_tree(apps.back());
      }
      for (int step = 0; step < 300; ++step)
      {
        const u128 app = apps[rng() % apps.size()];
        const auto &ring = net->ov->ring();
        const int n = ring[rng() % ring.size()];
        const int op = static_cast<int>(rng() % 10);
        Tree &t = f.tree(app);
        if (op < 6)
        {
          if (!(t.has(n) && t.members.at(n).subscribed) && n != t.root)
            f.subscribe(app, n);
        }
        else if (op < 9)
        {
          if (t.has(n) && t.members.at(n).subscribed)
            f.unsubscribe(app, n);
        }
        else if (ring.size() > 50)
        {
          net->ov->fail(n);
          for (const auto &[id, tr] : f.trees())
            if (tr.has(n))
              f.recover_timed(id, {n}, RecoveryParams{}, rng);
          net->ov->repair_all();
        }
        for (const auto &[id, tr] : f.trees())
          CHECK(f.validate(id).empty());
      }
    }
  }

  TEST_CASE("edge list format")
  {
    auto net = fixture::make_net(40, 4, 20);
    Forest f(*net->ov);
    const u128 app = app_id("edges");
    f.create_tree(app, "", quiet());
    subscribe_all(f, app);
    const std::string e = f.edge_list(app);
    std::istringstream in(e);
    std::string line;
    int rows = 0;
    while (std::getline(in, line))
    {
      ++rows;
      CHECK(line.size() == 32 * 3 + 2);
      CHECK(line.substr(66) == to_hex(app));
    }
    CHECK(rows == static_cast<int>(f.tree(app).size()) - 1);
  }
}
