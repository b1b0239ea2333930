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

#include "ringforest/scenario.hpp"
#include "ringforest/error.hpp"
#include "ringforest/netsim.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace ringforest
{

namespace
{

struct Field
{
  std::string section;
  std::string key;
  std::function<void(Scenario &, const YAML::Node &)> read;
  std::function<void(const Scenario &, YAML::Emitter &)> write;
};

template <typename T> Field plain(std::string section, std::string key, T Scenario::*mem)
{
  Field f;
  f.section = std::move(section);
  f.key = std::move(key);
  f.read = [mem](Scenario &s, const YAML::Node &n) { s.*mem = n.as<T>(); };
  f.write = [mem](const Scenario &s, YAML::Emitter &out) { out << s.*mem; };
  return f;
}

Field landmarks_field()
{
  Field f;
  f.section = "topology";
  f.key = "landmarks";
  f.read = [](Scenario &s, const YAML::Node &n) {
    s.landmarks.clear();
    for (const auto &p : n)
    {
      const auto v = p.as<std::vector<double>>();
      if (v.size() != 2)
        throw YAML::Exception(p.Mark(), "landmark must be [lat, lon]");
      s.landmarks.push_back({v[0], v[1]});
    }
  };
  f.write = [](const Scenario &s, YAML::Emitter &out) {
    out << YAML::BeginSeq;
    for (const auto &g : s.landmarks)
      out << YAML::Flow << YAML::BeginSeq << g.lat << g.lon << YAML::EndSeq;
    out << YAML::EndSeq;
  };
  return f;
}

Field churn_field()
{
  Field f;
  f.section = "";
  f.key = "churn";
  f.read = [](Scenario &s, const YAML::Node &n) {
    s.churn.clear();
    const std::set<std::string> allowed{"time_ms", "node", "kind", "value"};
    for (const auto &e : n)
    {
      for (const auto &kv : e)
        if (!allowed.count(kv.first.as<std::string>()))
          fail(Errc::Schema, "churn: unknown key '" + kv.first.as<std::string>() + "'");
      ChurnSpec c;
      if (!e["time_ms"] || !e["node"])
        fail(Errc::Schema, "churn: every event needs time_ms and node");
      c.time_ms = e["time_ms"].as<double>();
      c.node = e["node"].as<std::string>();
      if (e["kind"])
        c.kind = e["kind"].as<std::string>();
      if (e["value"])
        c.value = e["value"].as<double>();
      s.churn.push_back(c);
    }
  };
  f.write = [](const Scenario &s, YAML::Emitter &out) {
    out << YAML::BeginSeq;
    for (const auto &c : s.churn)
      out << YAML::Flow << YAML::BeginMap << YAML::Key << "time_ms" << YAML::Value << c.time_ms
          << YAML::Key << "node" << YAML::Value << c.node << YAML::Key << "kind" << YAML::Value
          << c.kind << YAML::Key << "value" << YAML::Value << c.value << YAML::EndMap;
    out << YAML::EndSeq;
  };
  return f;
}

const std::vector<Field> &fields()
{
  static const std::vector<Field> f = {
      plain("", "seed", &Scenario::seed),
      plain("", "nodes", &Scenario::nodes),
      plain("", "trace", &Scenario::trace),
      plain("topology", "csv", &Scenario::topology_csv),
      plain("topology", "regions", &Scenario::regions),
      plain("topology", "spread_km", &Scenario::region_spread_km),
      plain("topology", "diameter_ms", &Scenario::diameter_ms),
      landmarks_field(),
      plain("topology", "thresholds_ms", &Scenario::thresholds_ms),
      plain("topology", "instance_mix", &Scenario::instance_mix),
      plain("zone", "m", &Scenario::m),
      plain("overlay", "b", &Scenario::b),
      plain("overlay", "leaf_size", &Scenario::leaf_size),
      plain("overlay", "neighborhood", &Scenario::neighborhood),
      plain("apps", "count", &Scenario::apps),
      plain("apps", "salts", &Scenario::salts),
      plain("apps", "replicas", &Scenario::replicas),
      plain("apps", "combine", &Scenario::combine),
      plain("apps", "participation", &Scenario::participation),
      plain("workload", "rounds", &Scenario::rounds),
      plain("workload", "dimension", &Scenario::dimension),
      plain("workload", "noise", &Scenario::noise),
      plain("workload", "round_gap_ms", &Scenario::round_gap_ms),
      plain("workload", "aggregation_timeout_ms", &Scenario::aggregation_timeout_ms),
      plain("game", "enabled", &Scenario::game),
      plain("game", "policy", &Scenario::policy),
      plain("game", "alpha", &Scenario::alpha),
      plain("game", "beta", &Scenario::beta),
      plain("game", "tau", &Scenario::tau),
      plain("game", "epsilon", &Scenario::epsilon),
      plain("game", "design", &Scenario::design),
      plain("game", "theory", &Scenario::theory),
      plain("game", "grid", &Scenario::grid),
      plain("game", "packets", &Scenario::packets),
      plain("game", "min_hops", &Scenario::min_hops),
      plain("game", "max_hops", &Scenario::max_hops),
      plain("game", "theta_lo", &Scenario::theta_lo),
      plain("game", "theta_hi", &Scenario::theta_hi),
      plain("game", "rate_max_mbps", &Scenario::rate_max_mbps),
      plain("game", "packet_bytes", &Scenario::packet_bytes),
      plain("game", "bandit_epsilon", &Scenario::bandit_epsilon),
      plain("game", "perturb_every", &Scenario::perturb_every),
      plain("game", "multicast_max_subset", &Scenario::multicast_max_subset),
      plain("game", "multicast_grid", &Scenario::multicast_grid),
      plain("game", "heat_bins", &Scenario::heat_bins),
      plain("game", "reward", &Scenario::reward),
      plain("game", "l_max_cap_ms", &Scenario::l_max_cap_ms),
      plain("game", "max_staleness", &Scenario::max_staleness),
      plain("recovery", "keepalive_ms", &Scenario::keepalive_ms),
      plain("recovery", "missed_beats", &Scenario::missed_beats),
      plain("recovery", "rto_ms", &Scenario::rto_ms),
      churn_field(),
  };
  return f;
}

void require(bool ok, const std::string &key, const std::string &constraint)
{
  if (!ok)
    fail(Errc::Schema, key + ": " + constraint);
}

Scenario from_node(const YAML::Node &root)
{
  Scenario s;
  if (!root || root.IsNull())
  {
    s.validate();
    return s;
  }
  if (!root.IsMap())
    fail(Errc::Schema, "scenario must be a mapping");
  std::map<std::string, std::map<std::string, const Field *>> by_section;
  for (const auto &f : fields())
    by_section[f.section][f.key] = &f;
  auto apply = [](const Field &f, Scenario &sc, const YAML::Node &n) {
    const std::string name = f.section.empty() ? f.key : f.section + "." + f.key;
    try
    {
      f.read(sc, n);
    }
    catch (const YAML::Exception &e)
    {
      fail(Errc::Schema, name + ": " + e.msg);
    }
  };
  for (const auto &kv : root)
  {
    std::string key = kv.first.as<std::string>();
    if (key == "N")
      key = "nodes";
    const auto &top = by_section[""];
    if (auto it = top.find(key); it != top.end())
    {
      apply(*it->second, s, kv.second);
      continue;
    }
    auto sec = by_section.find(key);
    if (sec == by_section.end() || key.empty())
      fail(Errc::Schema, "unknown key '" + key + "'");
    if (!kv.second.IsMap())
      fail(Errc::Schema, key + ": must be a mapping");
    for (const auto &inner : kv.second)
    {
      const std::string k = inner.first.as<std::string>();
      auto f = sec->second.find(k);
      if (f == sec->second.end())
        fail(Errc::Schema, "unknown key '" + key + "." + k + "'");
      apply(*f->second, s, inner.second);
    }
  }
  s.validate();
  return s;
}

} // namespace

void Scenario::validate() const
{
  require(nodes >= 1, "nodes", "must be >= 1");
  require(regions >= 1, "topology.regions", "must be >= 1");
  require(region_spread_km > 0.0, "topology.spread_km", "must be > 0");
  require(diameter_ms > 1.0, "topology.diameter_ms", "must be > 1");
  require(!landmarks.empty(), "topology.landmarks", "must not be empty");
  for (std::size_t i = 1; i < thresholds_ms.size(); ++i)
    require(thresholds_ms[i] > thresholds_ms[i - 1], "topology.thresholds_ms", "must be ascending");
  for (const auto &[k, w] : instance_mix)
  {
    require(instance_capacity_units().count(k) != 0, "topology.instance_mix",
            "unknown instance class '" + k + "'");
    require(w >= 0.0, "topology.instance_mix", "weights must be >= 0");
  }
  require(m >= 1 && m <= 16, "zone.m", "must lie in [1, 16]");
  require(b >= 1 && b <= 8, "overlay.b", "must lie in [1, 8]");
  require(leaf_size >= 2 && leaf_size % 2 == 0, "overlay.leaf_size", "must be even and >= 2");
  require(neighborhood >= 1, "overlay.neighborhood", "must be >= 1");
  require(apps >= 0, "apps.count", "must be >= 0");
  require(static_cast<int>(salts.size()) <= apps, "apps.salts", "more salts than apps");
  require(replicas >= 0, "apps.replicas", "must be >= 0");
  require(combine == "weighted_mean" || combine == "sum" || combine == "max", "apps.combine",
          "must be weighted_mean, sum or max");
  require(participation > 0.0 && participation <= 1.0, "apps.participation", "must lie in (0, 1]");
  require(rounds >= 0, "workload.rounds", "must be >= 0");
  require(dimension >= 1, "workload.dimension", "must be >= 1");
  require(noise >= 0.0, "workload.noise", "must be >= 0");
  require(round_gap_ms >= 0.0, "workload.round_gap_ms", "must be >= 0");
  require(aggregation_timeout_ms >= 0.0, "workload.aggregation_timeout_ms", "must be >= 0");
  require(policy == "algorithm1" || policy == "bandit" || policy == "opt" || policy == "multicast",
          "game.policy", "must be algorithm1, bandit, opt or multicast");
  require(alpha >= 0.0 && alpha <= 1.0, "game.alpha", "must lie in [0, 1]");
  require(beta >= 0.0 && beta <= 1.0, "game.beta", "must lie in [0, 1]");
  require(tau >= 1, "game.tau", "must be >= 1");
  require(epsilon >= 0.0, "game.epsilon", "must be >= 0");
  require(design == "min" || design == "max", "game.design", "must be min or max");
  require(grid >= 1, "game.grid", "must be >= 1");
  require(packets >= 1, "game.packets", "must be >= 1");
  require(min_hops >= 1 && max_hops >= min_hops && max_hops <= 5, "game.min_hops/max_hops",
          "must satisfy 1 <= min_hops <= max_hops <= 5");
  require(theta_lo >= 0.0 && theta_lo <= theta_hi && theta_hi <= 1.0, "game.theta_lo/theta_hi",
          "must satisfy 0 <= lo <= hi <= 1");
  require(rate_max_mbps > 0.0, "game.rate_max_mbps", "must be > 0");
  require(packet_bytes > 0.0, "game.packet_bytes", "must be > 0");
  require(bandit_epsilon >= 0.0 && bandit_epsilon <= 1.0, "game.bandit_epsilon", "must lie in [0, 1]");
  require(perturb_every >= 0, "game.perturb_every", "must be >= 0");
  require(multicast_max_subset >= 1, "game.multicast_max_subset", "must be >= 1");
  require(multicast_grid >= 1, "game.multicast_grid", "must be >= 1");
  require(heat_bins >= 1, "game.heat_bins", "must be >= 1");
  require(reward == "share" || reward == "latency", "game.reward", "must be share or latency");
  require(l_max_cap_ms > 0.0, "game.l_max_cap_ms", "must be > 0");
  require(max_staleness >= 0, "game.max_staleness", "must be >= 0");
  require(keepalive_ms > 0.0, "recovery.keepalive_ms", "must be > 0");
  require(missed_beats >= 1, "recovery.missed_beats", "must be >= 1");
  require(rto_ms >= 0.0, "recovery.rto_ms", "must be >= 0");
  double last = -1.0;
  for (const auto &c : churn)
  {
    require(c.time_ms >= 0.0 && c.time_ms >= last, "churn.time_ms", "must be >= 0 and non-decreasing");
    last = c.time_ms;
    churn_kind_from(c.kind);
    if (c.node.rfind("master", 0) != 0)
    {
      std::size_t used = 0;
      int idx = -1;
      try
      {
        idx = std::stoi(c.node, &used);
      }
      catch (const std::exception &)
      {
        used = 0;
      }
      require(used == c.node.size() && idx >= 0 && idx < nodes, "churn.node",
              "must be a node index below nodes or master[:app]");
    }
    if (c.kind == "bandwidth-set")
      require(c.value > 0.0, "churn.value", "bandwidth must be > 0");
  }
}

Scenario parse_scenario(const std::string &text)
{
  YAML::Node root;
  try
  {
    root = YAML::Load(text);
  }
  catch (const YAML::Exception &e)
  {
    fail(Errc::Schema, std::string("scenario does not parse: ") + e.what());
  }
  return from_node(root);
}

Scenario load_scenario(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
    fail(Errc::Io, "cannot open scenario " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string serialize_scenario(const Scenario &s)
{
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  std::string open;
  for (const auto &f : fields())
  {
    if (f.section != open)
    {
      if (!open.empty())
        out << YAML::EndMap;
      open = f.section;
      if (!open.empty())
        out << YAML::Key << open << YAML::Value << YAML::BeginMap;
    }
    out << YAML::Key << f.key << YAML::Value;
    f.write(s, out);
  }
  if (!open.empty())
    out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string override_scenario(const std::string &text, const std::string &key,
                              const std::string &value)
{
  YAML::Node root = YAML::Load(text);
  if (!root || root.IsNull())
    root = YAML::Node(YAML::NodeType::Map);
  const auto dot = key.find('.');
  if (dot == std::string::npos)
    root[key] = YAML::Load(value);
  else
    root[key.substr(0, dot)][key.substr(dot + 1)] = YAML::Load(value);
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << root;
  return std::string(out.c_str()) + "\n";
}

} // namespace ringforest
