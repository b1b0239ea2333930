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

#include "ringforest/topology.hpp"
#include "ringforest/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace ringforest
{

namespace
{

std::uint64_t mix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_hash(std::uint64_t salt, int a, int b)
{
  if (a > b)
    std::swap(a, b);
  const std::uint64_t h =
      mix64(salt ^ mix64((static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b)));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64 &rng, double lo, double hi)
{
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

GeoPoint offset_km(const GeoPoint &c, double dx_km, double dy_km)
{
  const double lat = c.lat + dy_km / 111.0;
  const double lon = c.lon + dx_km / (111.0 * std::max(0.1, std::cos(c.lat * M_PI / 180.0)));
  return {lat, lon};
}

} // namespace

double haversine_km(const GeoPoint &a, const GeoPoint &b)
{
  const double r = 6371.0;
  const double p1 = a.lat * M_PI / 180.0, p2 = b.lat * M_PI / 180.0;
  const double dp = p2 - p1, dl = (b.lon - a.lon) * M_PI / 180.0;
  const double h = std::sin(dp / 2) * std::sin(dp / 2) +
                   std::cos(p1) * std::cos(p2) * std::sin(dl / 2) * std::sin(dl / 2);
  return 2.0 * r * std::asin(std::min(1.0, std::sqrt(h)));
}

void Topology::finish()
{
  const std::size_t R = region_centres.size();
  pair_rtt_.assign(R * R, 0.0);
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < R; ++j)
      if (i != j)
        pair_rtt_[i * R + j] =
            cfg.landmark_base_ms + cfg.ms_per_km * haversine_km(region_centres[i], region_centres[j]);
}

Topology Topology::generate(const TopologyConfig &cfg, int hosts, std::mt19937_64 &rng)
{
  if (hosts < 1 || cfg.regions < 1)
    fail(Errc::Config, "topology needs at least one host and one region");
  if (!(cfg.diameter_ms > 1.0))
    fail(Errc::Config, "zone diameter must exceed 1 ms");
  if (cfg.bandwidth_min_mbps <= 0.0 || cfg.bandwidth_max_mbps < cfg.bandwidth_min_mbps)
    fail(Errc::Config, "bad bandwidth range");
  Topology t;
  t.cfg = cfg;
  t.salt = rng();
  for (int r = 0; r < cfg.regions; ++r)
    t.region_centres.push_back({uniform(rng, cfg.area_min.lat, cfg.area_max.lat),
                                uniform(rng, cfg.area_min.lon, cfg.area_max.lon)});
  for (int h = 0; h < hosts; ++h)
  {
    Host x;
    x.region = static_cast<int>(rng() % static_cast<std::uint64_t>(cfg.regions));
    const double ang = uniform(rng, 0.0, 2.0 * M_PI);
    const double rad = cfg.region_spread_km * std::sqrt(uniform(rng, 0.0, 1.0));
    x.pos = offset_km(t.region_centres[x.region], rad * std::cos(ang), rad * std::sin(ang));
    x.bandwidth_mbps = uniform(rng, cfg.bandwidth_min_mbps, cfg.bandwidth_max_mbps);
    t.hosts.push_back(x);
  }
  t.finish();
  return t;
}

Topology Topology::import_csv(const std::string &path, const TopologyConfig &cfg,
                              std::mt19937_64 &rng)
{
  std::ifstream in(path);
  if (!in)
    fail(Errc::Io, "cannot open topology CSV '" + path + "'");
  Topology t;
  t.cfg = cfg;
  t.salt = rng();
  std::string line;
  while (std::getline(in, line))
  {
    if (line.empty() || line[0] == '#')
      continue;
    std::stringstream ss(line);
    std::string id, lat, lon;
    if (!std::getline(ss, id, ',') || !std::getline(ss, lat, ',') || !std::getline(ss, lon, ','))
      fail(Errc::Schema, "topology CSV row needs id,latitude,longitude");
    GeoPoint p;
    try
    {
      p = {std::stod(lat), std::stod(lon)};
    }
    catch (const std::exception &)
    {
      if (t.hosts.empty())
        continue; // header row
      fail(Errc::Schema, "bad coordinates in topology CSV row '" + line + "'");
    }
    int region = -1;
    for (std::size_t r = 0; r < t.region_centres.size() && region < 0; ++r)
      if (haversine_km(p, t.region_centres[r]) <= cfg.region_spread_km)
        region = static_cast<int>(r);
    if (region < 0)
    {
      region = static_cast<int>(t.region_centres.size());
      t.region_centres.push_back(p);
    }
    Host x;
    x.pos = p;
    x.region = region;
    x.bandwidth_mbps = uniform(rng, cfg.bandwidth_min_mbps, cfg.bandwidth_max_mbps);
    t.hosts.push_back(x);
  }
  if (t.hosts.empty())
    fail(Errc::Schema, "topology CSV has no rows");
  t.cfg.regions = static_cast<int>(t.region_centres.size());
  t.finish();
  return t;
}

double Topology::rtt_ms(int a, int b) const
{
  if (a == b)
    return 0.0;
  const Host &x = hosts[static_cast<std::size_t>(a)];
  const Host &y = hosts[static_cast<std::size_t>(b)];
  double r = 1.0 + (cfg.diameter_ms - 1.0) * unit_hash(salt, a, b);
  if (x.region != y.region)
    r += pair_rtt_[static_cast<std::size_t>(x.region) * region_centres.size() +
                   static_cast<std::size_t>(y.region)];
  return r;
}

std::vector<double> Topology::landmark_rtts(int host) const
{
  std::vector<double> out;
  for (const auto &l : cfg.landmarks)
    out.push_back(cfg.landmark_base_ms +
                  cfg.ms_per_km * haversine_km(hosts.at(static_cast<std::size_t>(host)).pos, l));
  return out;
}

std::string BinLabel::text() const
{
  std::string s;
  for (int i : order)
    s += "L" + std::to_string(i + 1);
  s += "|";
  for (std::size_t i = 0; i < levels.size(); ++i)
    s += (i ? "," : "") + std::to_string(levels[i]);
  return s;
}

BinLabel bin_node(const std::vector<double> &rtts_ms, const std::vector<double> &thresholds_ms)
{
  if (rtts_ms.empty())
    fail(Errc::Config, "binning needs at least one landmark RTT");
  for (std::size_t i = 1; i < thresholds_ms.size(); ++i)
    if (thresholds_ms[i] < thresholds_ms[i - 1])
      fail(Errc::Config, "binning thresholds must be ascending");
  BinLabel b;
  b.order.resize(rtts_ms.size());
  std::iota(b.order.begin(), b.order.end(), 0);
  std::stable_sort(b.order.begin(), b.order.end(),
                   [&](int x, int y) { return rtts_ms[x] < rtts_ms[y]; });
  for (double r : rtts_ms)
  {
    int lvl = 0;
    for (double t : thresholds_ms)
      if (t <= r)
        ++lvl;
    b.levels.push_back(lvl);
  }
  return b;
}

u128 zone_for_bin(const BinLabel &b, const ZoneConfig &cfg)
{
  cfg.validate();
  return hash128(b.text()) & ((u128(1) << cfg.m) - 1);
}

double zone_diameter_compliance(const Topology &t, const std::vector<u128> &zone_of_host)
{
  long ok = 0, all = 0;
  for (std::size_t a = 0; a < t.size(); ++a)
    for (std::size_t b = a + 1; b < t.size(); ++b)
      if (zone_of_host[a] == zone_of_host[b])
      {
        ++all;
        ok += t.rtt_ms(static_cast<int>(a), static_cast<int>(b)) < t.cfg.diameter_ms;
      }
  return all ? static_cast<double>(ok) / static_cast<double>(all) : 1.0;
}

int logical_count(double capacity_units, double unit)
{
  if (!(capacity_units > 0.0) || !(unit > 0.0))
    fail(Errc::Config, "capacity and unit must be positive");
  return std::max(1, static_cast<int>(std::ceil(capacity_units / unit - 1e-9)));
}

std::vector<NodeId> multiplex_logical_nodes(double capacity_units, double unit, u128 zone,
                                            const ZoneConfig &cfg, std::mt19937_64 &rng)
{
  const int k = logical_count(capacity_units, unit);
  std::vector<NodeId> out;
  const u128 mask = (u128(1) << cfg.n()) - 1;
  for (int i = 0; i < k; ++i)
    out.push_back(make_node_id(zone, random_u128(rng) & mask, cfg));
  return out;
}

const std::map<std::string, double> &instance_capacity_units()
{
  static const std::map<std::string, double> m = {
      {"t2.small", 1.0}, {"t2.medium", 2.0}, {"t2.large", 4.0}, {"t2.xlarge", 8.0}, {"t2.2xlarge", 16.0}};
  return m;
}

} // namespace ringforest
