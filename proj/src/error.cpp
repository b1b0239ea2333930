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

#include "ringforest/error.hpp"

namespace ringforest
{

const char *errc_name(Errc c)
{
  switch (c)
  {
    case Errc::Range: return "range";
    case Errc::Config: return "config";
    case Errc::Membership: return "membership";
    case Errc::Bootstrap: return "bootstrap";
    case Errc::Blocked: return "blocked";
    case Errc::Invariant: return "invariant";
    case Errc::AlreadyExists: return "already-exists";
    case Errc::Rejected: return "rejected";
    case Errc::Authority: return "authority";
    case Errc::Schema: return "schema";
    case Errc::Conditioning: return "conditioning";
    case Errc::Unrecoverable: return "unrecoverable";
    case Errc::OracleUnavailable: return "oracle-unavailable";
    case Errc::Unsupported: return "unsupported";
    case Errc::NotFound: return "not-found";
    case Errc::Io: return "io";
  }
  return "unknown";
}

} // namespace ringforest
