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

#include "ringforest/id.hpp"
#include "ringforest/error.hpp"

#include <openssl/evp.h>

#include <memory>

namespace ringforest
{

void ZoneConfig::validate() const
{
  if (m < 1 || m > 16)
    fail(Errc::Config, "zone prefix bits m must be in [1, 16], got " + std::to_string(m));
}

NodeId make_node_id(u128 prefix, u128 suffix, const ZoneConfig &cfg)
{
  cfg.validate();
  const int n = cfg.n();
  if (prefix >> cfg.m)
    fail(Errc::Range, "zone prefix out of range");
  if (suffix >> n)
    fail(Errc::Range, "suffix out of range");
  return (prefix << n) | suffix;
}

std::pair<u128, u128> split_node_id(NodeId id, const ZoneConfig &cfg)
{
  return {zone_of(id, cfg), suffix_of(id, cfg)};
}

u128 zone_of(NodeId id, const ZoneConfig &cfg) { return id >> cfg.n(); }

u128 suffix_of(NodeId id, const ZoneConfig &cfg) { return id & ((u128(1) << cfg.n()) - 1); }

NodeId zone_base(u128 prefix, const ZoneConfig &cfg) { return prefix << cfg.n(); }

std::array<std::uint8_t, 20> sha1(std::string_view data)
{
  std::array<std::uint8_t, 20> out{};
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1 || len != out.size())
    fail(Errc::Invariant, "SHA-1 digest failed");
  return out;
}

std::string sha1_hex(std::string_view data)
{
  static const char *digits = "0123456789abcdef";
  std::string s;
  for (auto b : sha1(data))
  {
    s += digits[b >> 4];
    s += digits[b & 15];
  }
  return s;
}

u128 hash128(std::string_view data)
{
  auto d = sha1(data);
  u128 v = 0;
  for (int i = 0; i < 16; ++i)
    v = (v << 8) | d[i];
  return v;
}

AppId app_id(std::string_view name, std::string_view creator_key, std::string_view salt)
{
  std::string buf;
  buf.reserve(name.size() + creator_key.size() + salt.size());
  buf.append(name).append(creator_key).append(salt);
  return hash128(buf);
}

u128 ring_distance(u128 a, u128 b)
{
  u128 d = a - b;
  u128 e = b - a;
  return d < e ? d : e;
}

bool closer_to(u128 key, u128 a, u128 b)
{
  u128 da = ring_distance(a, key), db = ring_distance(b, key);
  if (da != db)
    return da < db;
  return a != b && cw_distance(key, a) == da;
}

std::string to_hex(u128 v)
{
  static const char *digits = "0123456789abcdef";
  std::string s(32, '0');
  for (int i = 31; i >= 0; --i)
  {
    s[i] = digits[static_cast<int>(v & 15)];
    v >>= 4;
  }
  return s;
}

u128 from_hex(std::string_view hex)
{
  if (hex.empty() || hex.size() > 32)
    fail(Errc::Schema, "bad 128-bit hex id '" + std::string(hex) + "'");
  u128 v = 0;
  for (char c : hex)
  {
    int d;
    if (c >= '0' && c <= '9')
      d = c - '0';
    else if (c >= 'a' && c <= 'f')
      d = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F')
      d = c - 'A' + 10;
    else
      fail(Errc::Schema, "bad 128-bit hex id '" + std::string(hex) + "'");
    v = (v << 4) | static_cast<unsigned>(d);
  }
  return v;
}

u128 random_u128(std::mt19937_64 &rng)
{
  u128 hi = rng();
  return (hi << 64) | rng();
}

double to_double(u128 v) { return static_cast<double>(v); }

} // namespace ringforest
