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

#include "ringforest/harness.hpp"
#include "ringforest/error.hpp"
#include "ringforest/netsim.hpp"
#include "ringforest/topology.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace ringforest
{

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace
{

std::string num(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_policy(const Policy &p)
{
  std::string out;
  for (std::size_t i = 0; i < p.size(); ++i)
    out += (i ? ";" : "") + num(p[i]);
  return out;
}

std::vector<std::string> split(const std::string &s, char sep)
{
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep))
    out.push_back(cur);
  return out;
}

void write_file(const fs::path &p, const std::string &text)
{
  std::ofstream out(p, std::ios::binary);
  if (!out)
    fail(Errc::Io, "cannot write " + p.string());
  out << text;
}

std::string read_file(const std::string &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(Errc::Io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

TimedRound timed_round(Simulator &sim, FlowNetwork &net, const Overlay &ov, const Tree &t,
                       const std::map<int, Partial> &payloads, double bytes, double timeout_ms,
                       std::map<int, Partial> &carry, std::vector<double> &traffic)
{
  TimedRound out;
  const Combine comb = t.state.combine;
  auto charge = [&](int a, int b) {
    traffic.at(static_cast<std::size_t>(a)) += bytes;
    traffic.at(static_cast<std::size_t>(b)) += bytes;
  };
  auto prop = [&](int a, int b) { return ms_to_us(ov.rtt(a, b) / 2.0); };

  const TimeUs t0 = sim.now();
  TimeUs last = t0;
  std::function<void(int)> down = [&](int n) {
    for (int c : t.members.at(n).children)
    {
      if (!ov.live(c))
        continue;
      charge(n, c);
      net.transmit(n, c, bytes, prop(n, c), [&, c](const FlowRecord &) {
        last = std::max(last, sim.now());
        down(c);
      });
    }
  };
  down(t.root);
  sim.run();
  out.bcast_ms = static_cast<double>(last - t0) / 1000.0;

  const TimeUs t1 = sim.now();
  TimeUs done = t1;
  std::map<int, Partial> acc;
  std::map<int, std::size_t> waiting;
  std::set<int> forwarded;
  for (const auto &[n, m] : t.members)
  {
    if (!ov.live(n))
      continue;
    Partial p;
    if (auto c = carry.find(n); c != carry.end())
    {
      merge(comb, p, c->second);
      carry.erase(c);
    }
    if (auto w = payloads.find(n); w != payloads.end())
      merge(comb, p, w->second);
    acc[n] = std::move(p);
    std::size_t k = 0;
    for (int c : m.children)
      k += ov.live(c) ? 1 : 0;
    waiting[n] = k;
  }
  std::function<void(int)> send = [&](int n) {
    if (!forwarded.insert(n).second)
      return;
    if (n == t.root)
    {
      done = sim.now();
      out.root = acc[n];
      return;
    }
    const int p = t.members.at(n).parent;
    const Partial part = acc[n];
    charge(n, p);
    net.transmit(n, p, bytes, prop(n, p), [&, p, part](const FlowRecord &) {
      if (forwarded.count(p))
      {
        merge(comb, carry[p], part);
        ++out.late;
        return;
      }
      merge(comb, acc[p], part);
      if (--waiting[p] == 0)
        send(p);
    });
  };
  for (const auto &[n, k] : waiting)
    if (k == 0)
      send(n);
  if (timeout_ms > 0.0)
    sim.schedule(t1 + ms_to_us(timeout_ms), "aggregation-timeout", to_hex(t.app), "", [&] {
      // Deepest first.
      std::vector<std::pair<int, int>> open;
      for (const auto &[n, k] : waiting)
        if (!forwarded.count(n))
          open.push_back({-t.depth(n), n});
      std::sort(open.begin(), open.end());
      for (const auto &[d, n] : open)
        send(n);
    });
  sim.run();
  out.agg_ms = static_cast<double>(done - t1) / 1000.0;
  return out;
}

FlRound synth_fl_round(const Forest &f, u128 app, const std::vector<double> &model, double noise,
                       std::mt19937_64 &rng)
{
  const Tree &t = f.tree(app);
  FlRound out;
  out.broadcast = f.broadcast(app, t.root, model);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::map<int, Partial> payloads;
  for (int w : t.subscribers())
  {
    if (w == t.root)
      continue;
    out.workers.push_back(w);
    std::vector<double> v = model;
    if (noise > 0.0)
      for (double &x : v)
        x += noise * nd(rng);
    payloads[w] = lift(t.state.combine, v, 1.0);
  }
  out.aggregate = f.aggregate(app, payloads);
  out.payloads = std::move(payloads);
  out.model = out.aggregate.partial.count > 0 ? out.aggregate.value : model;
  return out;
}

GameParams game_params(const Scenario &s, int learners)
{
  GameParams g;
  g.min_hops = s.min_hops;
  g.max_hops = s.max_hops;
  g.theta_lo = s.theta_lo;
  g.theta_hi = s.theta_hi;
  g.rate_max_mbps = s.rate_max_mbps;
  g.payload_bytes = s.packet_bytes;
  g.packets = s.packets;
  g.grid = s.grid;
  g.multicast_grid = s.multicast_grid;
  g.multicast_max_subset = s.multicast_max_subset;
  g.bandit_epsilon = s.bandit_epsilon;
  g.perturb_every = s.perturb_every;
  g.heat_bins = s.heat_bins;
  g.trace = s.trace;
  g.latency_reward = s.reward == "latency";
  g.l_max_cap_ms = s.l_max_cap_ms;
  g.cfg.alpha = s.alpha;
  g.cfg.beta = s.beta;
  g.cfg.tau = s.tau;
  g.cfg.epsilon = s.epsilon;
  if (s.theory)
  {
    const int k = std::max(1, static_cast<int>(std::lround(std::cbrt(static_cast<double>(s.packets)))));
    g.cfg = GameConfig::theory(std::max(1, learners), k);
    g.cfg.epsilon = s.epsilon;
  }
  g.cfg.design = s.design == "max" ? DesignRule::MaxDet : DesignRule::MinDet;
  return g;
}

MetricsBundle run(const Scenario &s)
{
  s.validate();
  MetricsBundle b;
  std::mt19937_64 rng(s.seed);

  TopologyConfig tc;
  tc.regions = s.regions;
  tc.region_spread_km = s.region_spread_km;
  tc.diameter_ms = s.diameter_ms;
  tc.landmarks = s.landmarks;
  tc.thresholds_ms = s.thresholds_ms;

  // Capacity per host in logical-node units; empty mix means one node per host.
  std::vector<double> capacity;
  if (s.instance_mix.empty())
    capacity.assign(static_cast<std::size_t>(s.nodes), 1.0);
  else
  {
    std::vector<std::string> names;
    std::vector<double> weights;
    for (const auto &[k, w] : s.instance_mix)
    {
      names.push_back(k);
      weights.push_back(w);
    }
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    int total = 0;
    while (total < s.nodes)
    {
      const double units = instance_capacity_units().at(names[pick(rng)]);
      const int take = std::min(logical_count(units, 1.0), s.nodes - total);
      capacity.push_back(take);
      total += take;
    }
  }
  Topology topo = s.topology_csv.empty()
                      ? Topology::generate(tc, static_cast<int>(capacity.size()), rng)
                      : Topology::import_csv(s.topology_csv, tc, rng);
  if (topo.size() < capacity.size())
    capacity.resize(topo.size());

  ZoneConfig zc;
  zc.m = s.m;
  OverlayConfig oc;
  oc.zone = zc;
  oc.b = s.b;
  oc.leaf_size = s.leaf_size;
  oc.neighborhood = s.neighborhood;
  Overlay ov(oc, [&topo](int a, int c) { return topo.rtt_ms(a, c); });

  std::vector<u128> host_zone;
  std::set<u128> zones;
  for (std::size_t h = 0; h < capacity.size(); ++h)
  {
    const u128 z = zone_for_bin(bin_node(topo.landmark_rtts(static_cast<int>(h)), s.thresholds_ms), zc);
    host_zone.push_back(z);
    zones.insert(z);
    for (NodeId id : multiplex_logical_nodes(capacity[h], 1.0, z, zc, rng))
      if (ov.find(id) < 0)
        ov.add_node(id, static_cast<int>(h));
  }
  ov.bootstrap_all();
  b.logical_nodes = static_cast<int>(ov.size());
  b.zones = static_cast<int>(zones.size());
  b.zone_compliance = zone_diameter_compliance(
      topo, std::vector<u128>(host_zone.begin(), host_zone.end()));

  Forest f(ov);
  TreeOptions to;
  to.combine = combine_from(s.combine);
  to.replicas = s.replicas;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int a = 0; a < s.apps; ++a)
  {
    const std::string name = "app-" + std::to_string(a);
    const std::string salt = a < static_cast<int>(s.salts.size()) ? s.salts[a] : std::string();
    const u128 app = app_id(name, {}, salt);
    if (f.has_tree(app))
      fail(Errc::Config, "apps " + name + " collide on AppId; use distinct salts");
    b.apps.push_back(app);
    f.create_tree(app, "name=" + name, to);
  }
  auto subscribe_node = [&](int n) {
    for (u128 app : b.apps)
    {
      const Tree &t = f.tree(app);
      if (t.root_dead || n == t.root || (t.has(n) && t.members.at(n).subscribed))
        continue;
      if (u01(rng) < s.participation)
        f.subscribe(app, n);
    }
  };
  for (int n : std::vector<int>(ov.ring()))
    subscribe_node(n);

  Simulator sim;
  sim.set_trace(s.trace);
  FlowNetwork net(sim);
  for (std::size_t n = 0; n < ov.size(); ++n)
    net.add_node(topo.hosts[static_cast<std::size_t>(ov.host(static_cast<int>(n)))].bandwidth_mbps);
  b.traffic_bytes.assign(ov.size(), 0.0);

  std::vector<std::vector<double>> model(b.apps.size(),
                                         std::vector<double>(static_cast<std::size_t>(s.dimension), 0.0));
  RecoveryParams rp;
  rp.keepalive_ms = s.keepalive_ms;
  rp.missed_beats = s.missed_beats;
  rp.rto_ms = s.rto_ms;

  auto check = [&](const std::string &when) {
    for (const auto &[app, t] : f.trees())
      for (const auto &v : f.validate(app))
        fail(Errc::Invariant, when + ": " + v);
  };

  auto resolve = [&](const std::string &node) {
    if (node.rfind("master", 0) == 0)
    {
      const std::size_t a = node.size() > 7 ? std::stoul(node.substr(7)) : 0;
      if (a >= b.apps.size())
        fail(Errc::Config, "churn references app " + std::to_string(a) + " which does not exist");
      return f.tree(b.apps[a]).root;
    }
    const int n = std::stoi(node);
    if (n < 0 || static_cast<std::size_t>(n) >= ov.size())
      fail(Errc::Config, "churn references unknown node " + node);
    return n;
  };

  auto recover_all = [&](int x, const std::string &event) {
    std::vector<u128> touched;
    for (const auto &[app, t] : f.trees())
      if (t.has(x))
        touched.push_back(app);
    for (u128 app : touched)
    {
      Tree &t = f.tree(app);
      const std::uint64_t before = t.state.round;
      const bool was_master = t.root == x;
      RecoveryReport rep = f.recover_timed(app, {x}, rp, rng);
      const auto it = std::find(b.apps.begin(), b.apps.end(), app);
      const int a = it == b.apps.end() ? -1 : static_cast<int>(it - b.apps.begin());
      std::vector<RecoveryRecord> recs = rep.records;
      if (recs.empty())
        recs.push_back(RecoveryRecord{});
      for (const auto &r : recs)
      {
        RecoveryRow row;
        row.time_ms = static_cast<double>(sim.now()) / 1000.0;
        row.app = a;
        row.event = event;
        row.failed = x;
        row.node = r.node;
        row.new_parent = r.new_parent;
        row.detect_ms = r.detect_ms;
        row.done_ms = r.done_ms;
        row.contacts = r.contacts;
        row.master = was_master;
        row.restored = rep.master ? rep.master->restored : false;
        row.round_before = before;
        row.round_after = f.tree(app).state.round;
        b.recovery.push_back(row);
      }
      if (was_master && a >= 0)
      {
        const Tree &nt = f.tree(app);
        model[static_cast<std::size_t>(a)] =
            nt.state.model.empty() ? std::vector<double>(static_cast<std::size_t>(s.dimension), 0.0)
                                   : nt.state.model;
      }
    }
    check(event + " of " + to_hex(ov.id(x)));
  };

  std::size_t next_churn = 0;
  auto apply_churn_until = [&](TimeUs until) {
    while (next_churn < s.churn.size() && ms_to_us(s.churn[next_churn].time_ms) <= until)
    {
      const ChurnSpec &c = s.churn[next_churn++];
      const TimeUs at = ms_to_us(c.time_ms);
      if (at > sim.now())
        sim.advance(at);
      const int x = resolve(c.node);
      const ChurnKind kind = churn_kind_from(c.kind);
      sim.note(std::string("churn-") + c.kind, to_hex(ov.id(x)), num(c.value));
      switch (kind)
      {
      case ChurnKind::Fail:
        if (!ov.live(x))
          break;
        ov.fail(x);
        net.fail_node(x);
        recover_all(x, "fail");
        ov.repair_all();
        break;
      case ChurnKind::Leave:
        if (!ov.live(x))
          break;
        ov.leave(x);
        net.fail_node(x);
        recover_all(x, "leave");
        break;
      case ChurnKind::Join:
        if (ov.live(x))
          break;
        ov.join(x, ov.ring().front());
        net.revive_node(x);
        subscribe_node(x);
        break;
      case ChurnKind::BandwidthSet:
        net.set_bandwidth(x, c.value);
        break;
      }
    }
  };

  const double bytes = 8.0 * s.dimension;
  std::vector<std::map<int, Partial>> carry(b.apps.size());
  for (int r = 0; r < s.rounds; ++r)
  {
    apply_churn_until(sim.now());
    for (std::size_t a = 0; a < b.apps.size(); ++a)
    {
      const u128 app = b.apps[a];
      FlRound fr = synth_fl_round(f, app, model[a], s.noise, rng);
      const TimedRound tm = timed_round(sim, net, ov, f.tree(app), fr.payloads, bytes,
                                        s.aggregation_timeout_ms, carry[a], b.traffic_bytes);
      if (tm.root.count > 0)
        model[a] = finish(f.tree(app).state.combine, tm.root);
      MasterState st = f.tree(app).state;
      ++st.round;
      st.model = model[a];
      st.roster = fr.workers;
      f.commit_round(app, st);
      RoundRecord rec;
      rec.app = static_cast<int>(a);
      rec.round = st.round;
      rec.members = static_cast<int>(f.tree(app).size());
      rec.workers = static_cast<int>(fr.workers.size());
      rec.bcast_hops = fr.broadcast.max_depth;
      rec.bcast_ms = tm.bcast_ms;
      rec.agg_hops = fr.aggregate.max_depth;
      rec.agg_ms = tm.agg_ms;
      rec.late = tm.late;
      double mean = 0.0;
      for (double x : model[a])
        mean += x;
      rec.model_mean = mean / static_cast<double>(model[a].size());
      b.rounds.push_back(rec);
    }
    sim.advance(sim.now() + ms_to_us(s.round_gap_ms));
  }
  apply_churn_until(std::numeric_limits<TimeUs>::max());
  check("end of run");

  const auto roots = f.roots_per_node();
  int rooted = 0;
  for (const auto &[n, k] : roots)
  {
    ++b.masters_histogram[k];
    ++rooted;
  }
  b.masters_histogram[0] = static_cast<int>(ov.live_count()) - rooted;

  if (s.game)
  {
    const u128 key = b.apps.empty() ? app_id("game") : b.apps.front();
    GameParams gp = game_params(s, 0);
    const GameSetup setup = build_game(ov, key, gp, rng);
    gp = game_params(s, static_cast<int>(setup.learners.size()));
    const RoutingPolicy pol = routing_policy_from(s.policy);
    b.game = play_game(setup, gp, pol, rng);
    if (b.game->clip_fraction() > 0.01)
      fail(Errc::Invariant, "latency rewards clipped on " + num(100.0 * b.game->clip_fraction()) +
                                "% of samples (limit 1%); raise game.l_max_cap_ms");
    for (int n : setup.learners)
      b.learner_hex.push_back(to_hex(ov.id(n)));
    json m;
    m["policy"] = s.policy;
    m["tau"] = gp.cfg.tau;
    m["floor"] = gp.cfg.floor;
    m["grid"] = gp.grid;
    m["multicast_grid"] = gp.multicast_grid;
    m["multicast_max_subset"] = gp.multicast_max_subset;
    m["rate_max_mbps"] = gp.rate_max_mbps;
    m["reward"] = s.reward;
    m["l_max_cap_ms"] = gp.l_max_cap_ms;
    m["packet_bytes"] = gp.payload_bytes;
    m["theta"] = setup.theta;
    json relays = json::array();
    for (int r : setup.relays)
      relays.push_back(to_hex(ov.id(r)));
    m["relays"] = relays;
    json learners = json::array();
    for (std::size_t i = 0; i < setup.learners.size(); ++i)
      learners.push_back({{"node", b.learner_hex[i]}, {"hops", setup.hops[i]}});
    m["learners"] = learners;
    json epochs = json::array();
    for (const auto &[from, bw] : b.game->bandwidth_epochs)
      epochs.push_back({{"from_episode", from}, {"bandwidth", bw}});
    m["bandwidth_epochs"] = epochs;
    b.game_model_json = m.dump(2) + "\n";
    for (const auto &t : b.game->trace)
      b.trace.push_back(format_trace(t));
  }

  b.overlay_dump = ov.dump();
  {
    std::istringstream in(b.overlay_dump);
    for (const auto &v : check_overlay_dump(in))
      b.violations.push_back(v);
  }
  for (const auto &[app, t] : f.trees())
    b.tree_edges += f.edge_list(app);
  std::vector<std::string> lines;
  for (const auto &t : sim.trace())
    lines.push_back(format_trace(t));
  lines.insert(lines.end(), b.trace.begin(), b.trace.end());
  b.trace = std::move(lines);
  if (!b.violations.empty())
    fail(Errc::Invariant, "overlay dump check: " + b.violations.front());
  return b;
}

std::string file_sha1(const std::string &path) { return sha1_hex(read_file(path)); }

std::map<std::string, std::string> emit(const MetricsBundle &b, const Scenario &s,
                                        const std::string &dir)
{
  fs::create_directories(dir);
  std::map<std::string, std::string> files;
  auto put = [&](const std::string &name, const std::string &text) {
    write_file(fs::path(dir) / name, text);
    files[name] = sha1_hex(text);
  };

  std::string r = "app,round,members,workers,bcast_hops,bcast_ms,agg_hops,agg_ms,late,model_mean\n";
  for (const auto &x : b.rounds)
    r += std::to_string(x.app) + "," + std::to_string(x.round) + "," + std::to_string(x.members) +
         "," + std::to_string(x.workers) + "," + std::to_string(x.bcast_hops) + "," + num(x.bcast_ms) +
         "," + std::to_string(x.agg_hops) + "," + num(x.agg_ms) + "," + std::to_string(x.late) + "," +
         num(x.model_mean) + "\n";
  put("rounds.csv", r);

  std::string rc = "time_ms,app,event,failed,node,new_parent,detect_ms,done_ms,contacts,master,"
                   "restored,round_before,round_after\n";
  for (const auto &x : b.recovery)
    rc += num(x.time_ms) + "," + std::to_string(x.app) + "," + x.event + "," +
          std::to_string(x.failed) + "," + std::to_string(x.node) + "," +
          std::to_string(x.new_parent) + "," + num(x.detect_ms) + "," + num(x.done_ms) + "," +
          std::to_string(x.contacts) + "," + (x.master ? "1" : "0") + "," + (x.restored ? "1" : "0") +
          "," + std::to_string(x.round_before) + "," + std::to_string(x.round_after) + "\n";
  put("recovery.csv", rc);

  std::string tr = "node,bytes\n";
  for (std::size_t i = 0; i < b.traffic_bytes.size(); ++i)
    tr += std::to_string(i) + "," + num(b.traffic_bytes[i]) + "\n";
  put("traffic.csv", tr);

  std::string ms = "trees_rooted,nodes\n";
  for (const auto &[k, n] : b.masters_histogram)
    ms += std::to_string(k) + "," + std::to_string(n) + "\n";
  put("masters.csv", ms);

  put("overlay.tsv", b.overlay_dump);
  put("trees.csv", "parent,child,app\n" + b.tree_edges);

  json summary;
  summary["logical_nodes"] = b.logical_nodes;
  summary["zones"] = b.zones;
  summary["zone_compliance"] = b.zone_compliance;
  summary["rounds"] = b.rounds.size();
  summary["recovery_records"] = b.recovery.size();

  if (b.game)
  {
    const GameRun &g = *b.game;
    std::string rg = "episode,cumulative_regret,regret_per_packet,gap\n";
    for (std::size_t k = 0; k < g.regret.size(); ++k)
      rg += std::to_string(k) + "," + num(g.regret[k]) + "," + num(g.regret_per_packet(k)) + "," +
            num(g.log[k].gap) + "\n";
    put("regret.csv", rg);

    std::string ph = "episode,node,policy,modal_hop,mean_reward\n";
    for (const auto &e : g.log)
      for (std::size_t n = 0; n < e.joint.size(); ++n)
        ph += std::to_string(e.episode) + "," + b.learner_hex[n] + "," + join_policy(e.joint[n]) +
              "," + std::to_string(e.modal[n]) + "," + num(e.mean_reward[n]) + "\n";
    put("policy_history.csv", ph);

    std::string hm;
    for (const auto &row : g.heat)
    {
      for (std::size_t i = 0; i < row.size(); ++i)
        hm += (i ? "," : "") + std::to_string(row[i]);
      hm += "\n";
    }
    put("heatmap.csv", hm);

    std::string sel = "node,counts\n";
    for (std::size_t n = 0; n < g.hop_counts.size(); ++n)
    {
      std::string c;
      for (std::size_t i = 0; i < g.hop_counts[n].size(); ++i)
        c += (i ? ";" : "") + std::to_string(g.hop_counts[n][i]);
      sel += b.learner_hex[n] + "," + c + "\n";
    }
    put("selection.csv", sel);

    std::string lat = "episode,cumulative_latency_ms\n";
    for (std::size_t k = 0; k < g.cum_latency_ms.size(); ++k)
      lat += std::to_string(k) + "," + num(g.cum_latency_ms[k]) + "\n";
    put("latency.csv", lat);
    put("model.json", b.game_model_json);

    summary["game"] = {{"policy", routing_policy_name(g.policy)},
                       {"episodes", g.episodes},
                       {"tau", g.tau},
                       {"learners", g.hop_counts.size()},
                       {"cumulative_regret", g.regret.empty() ? 0.0 : g.regret.back()},
                       {"mean_reward", g.mean_reward},
                       {"selection_variance", g.selection_variance()},
                       {"flows_started", g.flows_started},
                       {"flows_delivered", g.flows_delivered},
                       {"rewards_clipped", g.rewards_clipped},
                       {"clip_fraction", g.clip_fraction()}};
  }
  put("summary.json", summary.dump(2) + "\n");
  if (s.trace)
  {
    std::string t;
    for (const auto &l : b.trace)
      t += l + "\n";
    put("trace.tsv", t);
  }

  const std::string text = serialize_scenario(s);
  json man;
  man["version"] = RINGFOREST_VERSION;
  man["seed"] = s.seed;
  man["scenario"] = text;
  man["scenario_sha1"] = sha1_hex(text);
  man["files"] = files;
  write_file(fs::path(dir) / "manifest.json", man.dump(2) + "\n");
  return files;
}

std::vector<std::string> replay(const std::string &manifest_path, const std::string &dir)
{
  json man = json::parse(read_file(manifest_path));
  const std::string text = man.at("scenario").get<std::string>();
  if (sha1_hex(text) != man.at("scenario_sha1").get<std::string>())
    fail(Errc::Schema, "manifest scenario does not match its hash");
  const Scenario s = parse_scenario(text);
  const auto got = emit(run(s), s, dir);
  std::vector<std::string> bad;
  for (const auto &[name, h] : man.at("files").items())
  {
    auto it = got.find(name);
    if (it == got.end() || it->second != h.get<std::string>())
      bad.push_back(name);
  }
  for (const auto &[name, h] : got)
    if (!man.at("files").contains(name))
      bad.push_back(name);
  return bad;
}

std::vector<SweepResult> sweep(const std::string &scenario_text, const std::string &key,
                               const std::vector<std::string> &values, const std::string &dir,
                               int threads)
{
  std::vector<SweepResult> out(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++)
    {
      SweepResult &r = out[i];
      r.value = values[i];
      r.dir = (fs::path(dir) / (key + "=" + values[i])).string();
      try
      {
        const Scenario s = parse_scenario(override_scenario(scenario_text, key, values[i]));
        emit(run(s), s, r.dir);
      }
      catch (const std::exception &e)
      {
        r.error = e.what();
      }
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(values.size())));
  std::vector<std::thread> pool;
  for (int t = 0; t < n; ++t)
    pool.emplace_back(worker);
  for (auto &t : pool)
    t.join();
  return out;
}

std::vector<double> regret_eval(const std::string &history_path, const std::string &model_path)
{
  const json m = json::parse(read_file(model_path));
  const RoutingPolicy pol = routing_policy_from(m.at("policy").get<std::string>());
  GameParams gp;
  gp.cfg.tau = m.at("tau").get<int>();
  gp.cfg.floor = m.at("floor").get<double>();
  gp.grid = m.at("grid").get<int>();
  gp.multicast_grid = m.at("multicast_grid").get<int>();
  gp.multicast_max_subset = m.at("multicast_max_subset").get<int>();
  gp.rate_max_mbps = m.at("rate_max_mbps").get<double>();
  gp.latency_reward = m.value("reward", std::string("share")) == "latency";
  gp.l_max_cap_ms = m.value("l_max_cap_ms", gp.l_max_cap_ms);
  gp.payload_bytes = m.value("packet_bytes", gp.payload_bytes);
  GameSetup setup;
  setup.theta = m.at("theta").get<std::vector<double>>();
  std::map<std::string, std::size_t> learner_index;
  for (const auto &l : m.at("learners"))
  {
    learner_index[l.at("node").get<std::string>()] = setup.hops.size();
    setup.hops.push_back(l.at("hops").get<std::vector<int>>());
    setup.hop_cands.push_back(simplex_grid(setup.hops.back().size(), gp.grid, gp.cfg.floor));
  }
  std::vector<std::pair<long, std::vector<double>>> epochs;
  for (const auto &e : m.at("bandwidth_epochs"))
    epochs.push_back({e.at("from_episode").get<long>(), e.at("bandwidth").get<std::vector<double>>()});
  if (epochs.empty())
    fail(Errc::Schema, "model.json has no bandwidth epochs");
  const auto cands = action_candidates(setup, gp, pol);

  std::map<long, JointPolicy> joint;
  std::istringstream in(read_file(history_path));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line))
  {
    if (line.empty())
      continue;
    const auto f = split(line, ',');
    if (f.size() != 5)
      fail(Errc::Schema, "policy history row needs 5 fields: " + line);
    const long ep = std::stol(f[0]);
    auto it = learner_index.find(f[1]);
    if (it == learner_index.end())
      fail(Errc::Schema, "history names an unknown learner " + f[1]);
    JointPolicy &jp = joint[ep];
    jp.resize(setup.hops.size());
    Policy p;
    for (const auto &x : split(f[2], ';'))
      p.push_back(std::stod(x));
    jp[it->second] = p;
  }
  std::vector<HistoryStep> hist;
  std::size_t e = 0;
  std::shared_ptr<const JointGame> game = joint_game(setup, gp, pol, epochs[0].second);
  for (const auto &[ep, jp] : joint)
  {
    while (e + 1 < epochs.size() && epochs[e + 1].first <= ep)
      game = joint_game(setup, gp, pol, epochs[++e].second);
    hist.push_back({jp, game, gp.cfg.tau});
  }
  return nash_regret(hist, cands);
}

} // namespace ringforest
