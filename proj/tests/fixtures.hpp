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

#ifndef RINGFOREST_TESTS_FIXTURES_HPP
#define RINGFOREST_TESTS_FIXTURES_HPP

#include "ringforest/forest.hpp"
#include "ringforest/overlay.hpp"

#include <cmath>
#include <memory>
#include <random>
#include <vector>

namespace fixture
{

using namespace ringforest;

// Hosts on a 1000 x 1000 plane; RTT is 1 ms plus 0.1 ms per unit distance.
struct Net
{
  std::vector<double> x, y;
  std::unique_ptr<Overlay> ov;

  double rtt(int a, int b) const { return 1.0 + std::hypot(x[a] - x[b], y[a] - y[b]) / 10.0; }
};

// N nodes spread over `zones` zone prefixes (0 .. zones-1), bootstrapped.
inline std::unique_ptr<Net> make_net(int n, int b, std::uint64_t seed, int zones = 1,
                                     int leaf = 24)
{
  auto net = std::make_unique<Net>();
  std::mt19937_64 rng(seed);
  OverlayConfig c;
  c.b = b;
  c.leaf_size = leaf;
  net->x.resize(static_cast<std::size_t>(n));
  net->y.resize(static_cast<std::size_t>(n));
  Net *p = net.get();
  net->ov = std::make_unique<Overlay>(c, [p](int a, int bb) { return p->rtt(a, bb); });
  std::uniform_real_distribution<double> u(0.0, 1000.0);
  for (int i = 0; i < n; ++i)
  {
    net->x[static_cast<std::size_t>(i)] = u(rng);
    net->y[static_cast<std::size_t>(i)] = u(rng);
    NodeId id;
    do
    {
      const u128 zone = static_cast<u128>(rng() % static_cast<std::uint64_t>(zones));
      id = make_node_id(zone, random_u128(rng) >> c.zone.m, c.zone);
    } while (net->ov->find(id) >= 0);
    net->ov->add_node(id, i);
  }
  net->ov->bootstrap_all();
  return net;
}

inline int log_bound(int n, int b)
{
  return static_cast<int>(std::ceil(std::log(static_cast<double>(n)) / std::log(std::pow(2.0, b)) - 1e-12));
}

} // namespace fixture

#endif
