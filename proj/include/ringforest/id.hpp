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

#ifndef RINGFOREST_ID_HPP
#define RINGFOREST_ID_HPP

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>

namespace ringforest
{

using u128 = unsigned __int128;
using NodeId = u128;
using AppId = u128;

struct ZoneConfig
{
  int m = 8;
  int n() const { return 128 - m; }
  void validate() const;
};

NodeId make_node_id(u128 prefix, u128 suffix, const ZoneConfig &cfg);
std::pair<u128, u128> split_node_id(NodeId id, const ZoneConfig &cfg);
u128 zone_of(NodeId id, const ZoneConfig &cfg);
u128 suffix_of(NodeId id, const ZoneConfig &cfg);
// Lowest id of zone `prefix`.
NodeId zone_base(u128 prefix, const ZoneConfig &cfg);

std::array<std::uint8_t, 20> sha1(std::string_view data);
std::string sha1_hex(std::string_view data);
// Top 128 bits of SHA-1.
u128 hash128(std::string_view data);

AppId app_id(std::string_view name, std::string_view creator_key = {}, std::string_view salt = {});

u128 ring_distance(u128 a, u128 b);
// Distance walking clockwise (increasing ids) from `from` to `to`.
inline u128 cw_distance(u128 from, u128 to) { return to - from; }
// True when `a` is a strictly better owner of `key` than `b`: smaller ring
// distance, ties to the node lying clockwise of the key.
bool closer_to(u128 key, u128 a, u128 b);

std::string to_hex(u128 v);
u128 from_hex(std::string_view hex);

u128 random_u128(std::mt19937_64 &rng);
double to_double(u128 v);

} // namespace ringforest

#endif
