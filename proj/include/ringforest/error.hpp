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

#ifndef RINGFOREST_ERROR_HPP
#define RINGFOREST_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ringforest
{

enum class Errc
{
  Range = 1,
  Config,
  Membership,
  Bootstrap,
  Blocked,
  Invariant,
  AlreadyExists,
  Rejected,
  Authority,
  Schema,
  Conditioning,
  Unrecoverable,
  OracleUnavailable,
  Unsupported,
  NotFound,
  Io,
};

const char *errc_name(Errc c);

class Error : public std::runtime_error
{
public:
  Error(Errc code, const std::string &what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string &what) { throw Error(code, what); }

} // namespace ringforest

#endif
