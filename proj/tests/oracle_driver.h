// Copyright 2026 The poolsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef POOLSIM_TESTS_ORACLE_DRIVER_H_
#define POOLSIM_TESTS_ORACLE_DRIVER_H_

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "naive_policies.h"
#include "poolsim/policy.h"
#include "poolsim/rng.h"

namespace poolsim::testing {

struct OracleCase {
  PolicyKind kind = PolicyKind::kRandom;
  std::uint64_t seed = 1;
  std::size_t pool_size = 16;
  std::size_t operations = 200;
  std::uint32_t tenants = 4;
  PolicyParams params;
};

// Replays one random Allocate/Release sequence against the real policy and
// the linear-scan reference. Returns a description of the first divergence.
inline std::optional<std::string> CompareWithOracle(const OracleCase& c) {
  Rng driver = Rng(c.seed).Split("driver");
  const Rng policy_stream = Rng(c.seed).Split("policy");
  auto policy = MakePolicy(c.kind, c.params, c.pool_size, policy_stream);
  NaivePool naive(c.kind, c.pool_size, c.params, policy_stream);
  IpTable table(c.pool_size);
  for (std::uint32_t i = 0; i < c.pool_size; ++i) {
    policy->Init(table, static_cast<IpId>(i));
  }

  std::vector<std::uint32_t> held;
  std::int64_t now = 0;
  for (std::size_t op = 0; op < c.operations; ++op) {
    // Mix of same-instant bursts and gaps on the order of d_reuse.
    const std::uint64_t gap = driver.Below(4);
    if (gap == 1) now += static_cast<std::int64_t>(driver.Below(60));
    if (gap == 2) now += static_cast<std::int64_t>(driver.Below(4000));
    const bool release = !held.empty() &&
                         (held.size() == c.pool_size || driver.Bernoulli(0.45));
    if (release) {
      const auto k = driver.Below(held.size());
      const std::uint32_t id = held[k];
      held[k] = held.back();
      held.pop_back();
      policy->Release(table, static_cast<IpId>(id), SimTime(now));
      naive.Release(id, now);
      continue;
    }
    const auto tenant = static_cast<std::uint32_t>(driver.Below(c.tenants));
    const auto got = policy->Allocate(table, static_cast<TenantId>(tenant),
                                      SimTime(now));
    const auto want = naive.Allocate(tenant, now);
    const std::optional<std::uint32_t> got_id =
        got ? std::optional<std::uint32_t>(Index(*got)) : std::nullopt;
    if (got_id != want) {
      std::ostringstream msg;
      msg << PolicyName(c.kind) << " seed " << c.seed << " op " << op
          << " t=" << now << " tenant " << tenant << ": policy chose "
          << (got_id ? std::to_string(*got_id) : "none") << ", reference chose "
          << (want ? std::to_string(*want) : "none");
      return msg.str();
    }
    if (got_id) held.push_back(*got_id);
  }
  return std::nullopt;
}

}  // namespace poolsim::testing

#endif  // POOLSIM_TESTS_ORACLE_DRIVER_H_
