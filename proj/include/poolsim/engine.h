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

#ifndef POOLSIM_ENGINE_H_
#define POOLSIM_ENGINE_H_

#include <cstdint>
#include <memory>
#include <vector>

#include "poolsim/agents.h"
#include "poolsim/analysis.h"
#include "poolsim/behavior.h"
#include "poolsim/config.h"
#include "poolsim/policy.h"

namespace poolsim {

using Roster = std::vector<std::unique_ptr<Agent>>;

// Time-stepped pool simulator. Each step, every active agent in roster order
// contributes requests; all releases are applied before any allocation, and
// each kind is applied in emission order. Adversarial agents are skipped
// until warm-up ends.
class Engine {
 public:
  // Registers every IP of the pool with the policy.
  Engine(const RunConfig& config, std::size_t pool_size,
         std::unique_ptr<AllocationPolicy> policy, Roster roster);

  // Advances one step. Throws ContractViolation on a broken pairing.
  void Step();
  // Steps until the configured horizon and returns the final statistics.
  RunStats Run();

  SimTime now() const { return now_; }
  SimTime end() const { return end_; }
  bool done() const { return now_ >= end_; }

  const IpTable& ips() const { return ips_; }
  const AllocationPolicy& policy() const { return *policy_; }
  const Roster& roster() const { return roster_; }
  std::uint64_t allocated() const { return allocated_; }
  std::optional<TenantId> owner(IpId ip) const;

  // Statistics so far; the trailing partial series interval is not flushed.
  const RunStats& stats() const { return stats_; }

 private:
  void ApplyRelease(const Agent& agent, const Request& request);
  void ApplyAllocate(Agent& agent, const Request& request);
  void FlushSeriesPoint(std::int64_t time_s);

  RunConfig config_;
  LatentConfigModel latent_model_;
  IpTable ips_;
  std::unique_ptr<AllocationPolicy> policy_;
  Roster roster_;
  Rng latent_rng_;

  SimTime now_{0};
  SimTime end_;
  std::vector<TenantId> owner_;
  std::uint64_t allocated_ = 0;
  std::uint64_t next_config_id_ = 1;

  std::vector<Request> requests_;
  std::vector<std::uint32_t> request_agent_;
  std::vector<std::size_t> undiscovered_;

  RunStats stats_;
  SeriesPoint pending_;
  bool pending_dirty_ = false;
};

// Builds the policy from config (its random stream split off the run seed)
// and runs to completion.
RunStats RunSimulation(const RunConfig& config, std::size_t pool_size,
                       Roster roster);

}  // namespace poolsim

#endif  // POOLSIM_ENGINE_H_
