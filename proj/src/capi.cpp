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

#include "ringforest/ringforest.h"

#include "ringforest/error.hpp"
#include "ringforest/forest.hpp"
#include "ringforest/harness.hpp"
#include "ringforest/scenario.hpp"
#include "ringforest/topology.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <optional>
#include <sstream>

using namespace ringforest;

struct rf_scenario
{
  Scenario s;
};

struct rf_result
{
  MetricsBundle b;
};

struct rf_net
{
  Topology topo;
  std::unique_ptr<Overlay> ov;
  std::unique_ptr<Forest> forest;
};

namespace
{

thread_local std::string last_error;

template <class F> rf_status guard(F &&f)
{
  try
  {
    f();
    last_error.clear();
    return RF_OK;
  }
  catch (const Error &e)
  {
    last_error = e.what();
    return static_cast<rf_status>(e.code());
  }
  catch (const std::bad_alloc &)
  {
    last_error = "out of memory";
    return RF_E_INTERNAL;
  }
  catch (const std::out_of_range &e)
  {
    last_error = e.what();
    return RF_E_NOT_FOUND;
  }
  catch (const std::invalid_argument &e)
  {
    last_error = e.what();
    return RF_E_ARGUMENT;
  }
  catch (const std::exception &e)
  {
    last_error = e.what();
    return RF_E_INTERNAL;
  }
}

void need(const void *p, const char *name)
{
  if (!p)
    throw std::invalid_argument(std::string(name) + " must not be null");
}

char *dup(const std::string &s)
{
  char *p = static_cast<char *>(std::malloc(s.size() + 1));
  if (!p)
    throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

std::string lines(const std::vector<std::string> &v)
{
  std::string out;
  for (const auto &x : v)
    out += x + "\n";
  return out;
}

void put_hex(u128 v, char hex[33])
{
  const std::string h = to_hex(v);
  std::memcpy(hex, h.c_str(), 33);
}

u128 app_of(const rf_net *n, const char *hex)
{
  need(hex, "app_hex");
  const u128 app = from_hex(hex);
  if (!n->forest->has_tree(app))
    fail(Errc::NotFound, std::string("no tree for app ") + hex);
  return app;
}

void check_node(const rf_net *n, int node)
{
  if (node < 0 || static_cast<std::size_t>(node) >= n->ov->size())
    fail(Errc::Range, "node index " + std::to_string(node) + " out of range");
}

} // namespace

extern "C" {

const char *rf_version(void) { return RINGFOREST_VERSION; }

const char *rf_status_name(rf_status s)
{
  switch (s)
  {
  case RF_OK:
    return "ok";
  case RF_E_ARGUMENT:
    return "argument";
  case RF_E_INTERNAL:
    return "internal";
  default:
    return errc_name(static_cast<Errc>(s));
  }
}

const char *rf_last_error(void) { return last_error.c_str(); }

void rf_free(void *p) { std::free(p); }

rf_status rf_scenario_load(const char *path, rf_scenario **out)
{
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new rf_scenario{load_scenario(path)};
  });
}

rf_status rf_scenario_parse(const char *yaml_text, rf_scenario **out)
{
  return guard([&] {
    need(yaml_text, "yaml_text");
    need(out, "out");
    *out = new rf_scenario{parse_scenario(yaml_text)};
  });
}

rf_status rf_scenario_set(rf_scenario *s, const char *key, const char *value)
{
  return guard([&] {
    need(s, "scenario");
    need(key, "key");
    need(value, "value");
    s->s = parse_scenario(override_scenario(serialize_scenario(s->s), key, value));
  });
}

rf_status rf_scenario_serialize(const rf_scenario *s, char **yaml_text)
{
  return guard([&] {
    need(s, "scenario");
    need(yaml_text, "yaml_text");
    *yaml_text = dup(serialize_scenario(s->s));
  });
}

void rf_scenario_free(rf_scenario *s) { delete s; }

rf_status rf_run(const rf_scenario *s, rf_result **out)
{
  return guard([&] {
    need(s, "scenario");
    need(out, "out");
    *out = new rf_result{run(s->s)};
  });
}

rf_status rf_result_emit(const rf_result *r, const rf_scenario *s, const char *dir)
{
  return guard([&] {
    need(r, "result");
    need(s, "scenario");
    need(dir, "dir");
    emit(r->b, s->s, dir);
  });
}

rf_status rf_result_summary(const rf_result *r, char **json_text)
{
  return guard([&] {
    need(r, "result");
    need(json_text, "json_text");
    nlohmann::json j;
    j["logical_nodes"] = r->b.logical_nodes;
    j["zones"] = r->b.zones;
    j["rounds"] = r->b.rounds.size();
    j["recovery_records"] = r->b.recovery.size();
    if (r->b.game)
    {
      const GameRun &g = *r->b.game;
      j["policy"] = routing_policy_name(g.policy);
      j["episodes"] = g.episodes;
      j["cumulative_regret"] = g.regret.empty() ? 0.0 : g.regret.back();
      j["selection_variance"] = g.selection_variance();
    }
    *json_text = dup(j.dump());
  });
}

void rf_result_free(rf_result *r) { delete r; }

rf_status rf_replay(const char *manifest_path, const char *dir, char **mismatches, size_t *count)
{
  return guard([&] {
    need(manifest_path, "manifest_path");
    need(dir, "dir");
    need(count, "count");
    const auto bad = replay(manifest_path, dir);
    *count = bad.size();
    if (mismatches)
      *mismatches = dup(lines(bad));
  });
}

rf_status rf_sweep(const rf_scenario *base, const char *key, const char *values, const char *dir,
                   int threads, char **report, size_t *failures)
{
  return guard([&] {
    need(base, "base");
    need(key, "key");
    need(values, "values");
    need(dir, "dir");
    std::vector<std::string> vals;
    std::string v;
    std::istringstream vs(values);
    while (std::getline(vs, v, ','))
      if (!v.empty())
        vals.push_back(v);
    if (vals.empty())
      fail(Errc::Config, "sweep needs at least one value");
    const auto res = sweep(serialize_scenario(base->s), key, vals, dir, threads);
    std::string rep;
    std::size_t bad = 0;
    for (const auto &r : res)
    {
      rep += r.value + "\t" + r.dir + "\t" + r.error + "\n";
      bad += r.error.empty() ? 0 : 1;
    }
    if (failures)
      *failures = bad;
    if (report)
      *report = dup(rep);
  });
}

rf_status rf_overlay_check(const char *dump_path, char **violations, size_t *count)
{
  return guard([&] {
    need(dump_path, "dump_path");
    need(count, "count");
    std::ifstream in(dump_path);
    if (!in)
      fail(Errc::Io, std::string("cannot open ") + dump_path);
    const auto v = check_overlay_dump(in);
    *count = v.size();
    if (violations)
      *violations = dup(lines(v));
  });
}

rf_status rf_regret_eval(const char *history_path, const char *model_path, double **series,
                         size_t *len)
{
  return guard([&] {
    need(history_path, "history_path");
    need(model_path, "model_path");
    need(series, "series");
    need(len, "len");
    const auto r = regret_eval(history_path, model_path);
    double *p = static_cast<double *>(std::malloc(sizeof(double) * std::max<std::size_t>(1, r.size())));
    if (!p)
      throw std::bad_alloc();
    std::copy(r.begin(), r.end(), p);
    *series = p;
    *len = r.size();
  });
}

void rf_net_config_default(rf_net_config *c)
{
  if (!c)
    return;
  c->nodes = 100;
  c->b = OverlayConfig{}.b;
  c->leaf_size = OverlayConfig{}.leaf_size;
  c->m = ZoneConfig{}.m;
  c->seed = 1;
}

rf_status rf_net_create(const rf_net_config *c, rf_net **out)
{
  return guard([&] {
    need(c, "config");
    need(out, "out");
    if (c->nodes == 0)
      fail(Errc::Config, "nodes: must be at least 1");
    std::mt19937_64 rng(c->seed);
    OverlayConfig oc;
    oc.b = c->b;
    oc.leaf_size = c->leaf_size;
    oc.zone.m = c->m;
    oc.validate();
    auto n = std::make_unique<rf_net>();
    TopologyConfig tc;
    n->topo = Topology::generate(tc, static_cast<int>(c->nodes), rng);
    const Topology *topo = &n->topo;
    n->ov = std::make_unique<Overlay>(oc, [topo](int a, int b) { return topo->rtt_ms(a, b); });
    for (int h = 0; h < static_cast<int>(c->nodes); ++h)
    {
      const u128 z = zone_for_bin(bin_node(topo->landmark_rtts(h), tc.thresholds_ms), oc.zone);
      NodeId id = multiplex_logical_nodes(1.0, 1.0, z, oc.zone, rng).front();
      while (n->ov->find(id) >= 0)
        id = multiplex_logical_nodes(1.0, 1.0, z, oc.zone, rng).front();
      n->ov->add_node(id, h);
    }
    n->ov->bootstrap_all();
    n->forest = std::make_unique<Forest>(*n->ov);
    *out = n.release();
  });
}

void rf_net_free(rf_net *n) { delete n; }

rf_status rf_net_size(const rf_net *n, size_t *live)
{
  return guard([&] {
    need(n, "net");
    need(live, "live");
    *live = n->ov->live_count();
  });
}

rf_status rf_net_node_id(const rf_net *n, int node, char hex[33])
{
  return guard([&] {
    need(n, "net");
    need(hex, "hex");
    check_node(n, node);
    put_hex(n->ov->id(node), hex);
  });
}

rf_status rf_net_route(const rf_net *n, const char *key_hex, int from, int *owner, int *hops)
{
  return guard([&] {
    need(n, "net");
    need(key_hex, "key_hex");
    check_node(n, from);
    const RoutePath p = n->ov->route(from_hex(key_hex), from);
    if (owner)
      *owner = p.nodes.back();
    if (hops)
      *hops = static_cast<int>(p.nodes.size()) - 1;
  });
}

rf_status rf_net_fail(rf_net *n, int node)
{
  return guard([&] {
    need(n, "net");
    check_node(n, node);
    if (!n->ov->live(node))
      fail(Errc::Membership, "node " + std::to_string(node) + " is not live");
    n->ov->fail(node);
  });
}

rf_status rf_app_id(const char *name, const char *creator_key, const char *salt, char hex[33])
{
  return guard([&] {
    need(name, "name");
    need(hex, "hex");
    const std::string k = creator_key ? creator_key : "";
    put_hex(app_id(name, k, salt ? salt : ""), hex);
  });
}

rf_status rf_tree_create(rf_net *n, const char *app_hex, int replicas, int *root)
{
  return guard([&] {
    need(n, "net");
    need(app_hex, "app_hex");
    TreeOptions to;
    to.replicas = replicas;
    const Tree &t = n->forest->create_tree(from_hex(app_hex), {}, to);
    if (root)
      *root = t.root;
  });
}

rf_status rf_tree_subscribe(rf_net *n, const char *app_hex, int node)
{
  return guard([&] {
    need(n, "net");
    check_node(n, node);
    n->forest->subscribe(app_of(n, app_hex), node);
  });
}

rf_status rf_tree_unsubscribe(rf_net *n, const char *app_hex, int node)
{
  return guard([&] {
    need(n, "net");
    check_node(n, node);
    n->forest->unsubscribe(app_of(n, app_hex), node);
  });
}

rf_status rf_tree_root(const rf_net *n, const char *app_hex, int *root)
{
  return guard([&] {
    need(n, "net");
    need(root, "root");
    *root = n->forest->tree(app_of(n, app_hex)).root;
  });
}

rf_status rf_tree_size(const rf_net *n, const char *app_hex, size_t *members)
{
  return guard([&] {
    need(n, "net");
    need(members, "members");
    *members = n->forest->tree(app_of(n, app_hex)).size();
  });
}

rf_status rf_tree_broadcast(const rf_net *n, const char *app_hex, int caller, const double *payload,
                            size_t dim, size_t *deliveries, int *max_depth)
{
  return guard([&] {
    need(n, "net");
    if (dim)
      need(payload, "payload");
    const auto r = n->forest->broadcast(app_of(n, app_hex), caller,
                                        std::vector<double>(payload, payload + dim));
    if (deliveries)
      *deliveries = r.deliveries();
    if (max_depth)
      *max_depth = r.max_depth;
  });
}

rf_status rf_tree_aggregate(const rf_net *n, const char *app_hex, const int *nodes,
                            const double *payloads, size_t count, size_t dim, double *out)
{
  return guard([&] {
    need(n, "net");
    need(out, "out");
    if (count)
    {
      need(nodes, "nodes");
      need(payloads, "payloads");
    }
    std::map<int, Partial> in;
    for (std::size_t i = 0; i < count; ++i)
    {
      const double *row = payloads + i * dim;
      in[nodes[i]] = lift(Combine::WeightedMean, std::vector<double>(row, row + dim), 1.0);
    }
    const auto r = n->forest->aggregate(app_of(n, app_hex), in);
    if (r.value.size() != dim)
      fail(Errc::Schema, "aggregate produced " + std::to_string(r.value.size()) +
                             " values, expected " + std::to_string(dim));
    std::copy(r.value.begin(), r.value.end(), out);
  });
}

rf_status rf_tree_commit(rf_net *n, const char *app_hex, uint64_t round, const double *model,
                         size_t dim)
{
  return guard([&] {
    need(n, "net");
    if (dim)
      need(model, "model");
    const u128 app = app_of(n, app_hex);
    MasterState st = n->forest->tree(app).state;
    st.round = round;
    st.model.assign(model, model + dim);
    n->forest->commit_round(app, st);
  });
}

rf_status rf_tree_round(const rf_net *n, const char *app_hex, uint64_t *round)
{
  return guard([&] {
    need(n, "net");
    need(round, "round");
    *round = n->forest->tree(app_of(n, app_hex)).state.round;
  });
}

rf_status rf_tree_recover(rf_net *n, const char *app_hex, size_t *repaired)
{
  return guard([&] {
    need(n, "net");
    const u128 app = app_of(n, app_hex);
    const std::vector<int> orphans = n->forest->drop_failed(app);
    std::optional<Error> lost;
    if (n->forest->tree(app).root_dead)
    {
      if (n->ov->ring().empty())
        fail(Errc::Membership, "no live node left to take over the master role");
      try
      {
        n->forest->recover_master(app, orphans.empty() ? n->ov->ring().front() : orphans.front());
      }
      catch (const Error &e)
      {
        if (e.code() != Errc::Unrecoverable)
          throw;
        lost = e;
      }
    }
    std::size_t done = 0;
    for (int o : orphans)
    {
      const Tree &t = n->forest->tree(app);
      if (t.has(o) && o != t.root && t.members.at(o).parent < 0)
        n->forest->recover_worker(app, o);
      ++done;
    }
    if (repaired)
      *repaired = done;
    if (lost)
      throw *lost;
  });
}

rf_status rf_tree_validate(const rf_net *n, const char *app_hex, char **violations, size_t *count)
{
  return guard([&] {
    need(n, "net");
    need(count, "count");
    const auto v = n->forest->validate(app_of(n, app_hex));
    *count = v.size();
    if (violations)
      *violations = dup(lines(v));
  });
}

} // extern "C"
