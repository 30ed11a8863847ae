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

#ifndef POOLSIM_AGENTS_H_
#define POOLSIM_AGENTS_H_

#include <cstdint>
#include <deque>
#include <queue>
#include <span>
#include <string_view>
#include <tuple>
#include <vector>

#include "poolsim/behavior.h"
#include "poolsim/core.h"
#include "poolsim/rng.h"

namespace poolsim {

struct Request {
  enum class Kind { kAllocate, kRelease };
  Kind kind;
  TenantId tenant;
  IpId ip{};  // release only

  static Request Allocate(TenantId tenant) {
    return {Kind::kAllocate, tenant, IpId{}};
  }
  static Request Release(TenantId tenant, IpId ip) {
    return {Kind::kRelease, tenant, ip};
  }
  bool operator==(const Request&) const = default;
};

// What an adversary learned from one allocation.
struct Observation {
  bool new_ip = false;
  std::uint32_t new_configs = 0;
};

// Drives a batch of tenants. The engine calls Step once per time step and
// reports the outcome of each Allocate it emitted, in emission order.
class Agent {
 public:
  virtual ~Agent() = default;

  virtual std::string_view name() const = 0;
  // Adversarial agents start after warm-up and leave no latent config.
  virtual bool adversarial() const { return false; }

  virtual void Step(SimTime now, std::vector<Request>& out) = 0;
  virtual void OnGranted(TenantId tenant, IpId ip, SimTime now) = 0;
  virtual void OnDenied(TenantId tenant, SimTime now) = 0;

  // Called at the agent's own allocation instant with the IP's live configs.
  virtual Observation Observe(IpId, std::span<LatentConfig>) { return {}; }

  // Number of IPs the agent holds right now.
  virtual std::uint64_t held() const = 0;
};

// Fourier-driven autoscaling tenants. Targets are only re-evaluated when the
// slope bound says they could have moved, or after a denied allocation.
class AutoscaleAgent final : public Agent {
 public:
  struct Tenant {
    TenantId id;
    BehaviorSpec spec;
    DailyProfile profile;
    std::vector<IpId> held;
  };

  // Tenant ids are first_id, first_id + 1, ... in specs order.
  AutoscaleAgent(TenantId first_id, std::vector<BehaviorSpec> specs, Rng rng);
  // Same, with the daily profiles already built (profiles[i] from specs[i]).
  AutoscaleAgent(TenantId first_id, std::vector<BehaviorSpec> specs,
                 std::vector<DailyProfile> profiles, Rng rng);

  std::string_view name() const override { return "autoscale"; }
  void Step(SimTime now, std::vector<Request>& out) override;
  void OnGranted(TenantId tenant, IpId ip, SimTime now) override;
  void OnDenied(TenantId tenant, SimTime now) override;
  std::uint64_t held() const override { return held_total_; }

  const std::vector<Tenant>& tenants() const { return tenants_; }

 private:
  using Wakeup = std::pair<std::int64_t, std::uint32_t>;  // (time, index)

  void Schedule(std::uint32_t index, std::int64_t at);
  std::uint32_t LocalIndex(TenantId tenant) const;

  std::uint32_t first_id_;
  std::vector<Tenant> tenants_;
  std::vector<std::int64_t> next_eval_;
  std::priority_queue<Wakeup, std::vector<Wakeup>, std::greater<>> wakeups_;
  Rng rng_;
  std::uint64_t held_total_ = 0;
};

struct AdversaryParams {
  enum class Mode { kSingle, kMulti };
  Mode mode = Mode::kSingle;
  std::uint32_t concurrency = 60;
  std::int64_t hold_seconds = 600;
  // Multi mode: allocations issued per tenant before switching accounts.
  std::uint32_t rotation_quota = 60;
  // Multi mode: distinct tenants available; cycled once exhausted.
  std::uint32_t tenant_budget = 10000;
};

// Pool scanner: holds up to `concurrency` IPs for `hold_seconds` each,
// then releases them and allocates fresh ones.
class AdversaryAgent final : public Agent {
 public:
  AdversaryAgent(TenantId first_id, AdversaryParams params);

  std::string_view name() const override { return "adversary"; }
  bool adversarial() const override { return true; }
  void Step(SimTime now, std::vector<Request>& out) override;
  void OnGranted(TenantId tenant, IpId ip, SimTime now) override;
  void OnDenied(TenantId, SimTime) override {}
  Observation Observe(IpId ip, std::span<LatentConfig> configs) override;
  std::uint64_t held() const override { return holds_.size(); }

  // Tenant ids used are [first_id, first_id + tenant_count()).
  std::uint32_t tenant_count() const;
  std::uint64_t allocations_issued() const { return issued_; }
  std::uint64_t unique_ips() const { return unique_ips_; }
  std::uint64_t discovered_configs() const { return discovered_.size(); }
  // Discovered config ids, in discovery order.
  const std::vector<std::uint64_t>& discovered() const { return discovered_; }

 private:
  struct Hold {
    IpId ip;
    TenantId tenant;
    SimTime since;
  };

  TenantId CurrentTenant() const;

  std::uint32_t first_id_;
  AdversaryParams params_;
  std::deque<Hold> holds_;  // acquisition order
  std::uint64_t issued_ = 0;
  std::vector<bool> seen_;
  std::uint64_t unique_ips_ = 0;
  std::vector<std::uint64_t> discovered_;
};

struct TraceEvent {
  TenantId tenant;
  SimTime t_a;
  SimTime t_r;
  bool operator==(const TraceEvent&) const = default;
};

// Replays recorded (tenant, t_a, t_r) allocations. Events whose allocation
// is denied are dropped along with their release.
class TraceAgent final : public Agent {
 public:
  // Throws std::invalid_argument unless every event has t_r > t_a and the
  // events are sorted by t_a. Tenant ids are shifted by tenant_offset.
  TraceAgent(std::vector<TraceEvent> events, std::uint32_t tenant_offset = 0);

  std::string_view name() const override { return "trace"; }
  void Step(SimTime now, std::vector<Request>& out) override;
  void OnGranted(TenantId tenant, IpId ip, SimTime now) override;
  void OnDenied(TenantId tenant, SimTime now) override;
  std::uint64_t held() const override { return releases_.size(); }

  std::uint64_t denied() const { return denied_; }

 private:
  struct PendingRelease {
    std::int64_t t_r;
    std::uint64_t order;  // keeps same-time releases in grant order
    TenantId tenant;
    IpId ip;
    bool operator>(const PendingRelease& o) const {
      return std::tie(t_r, order) > std::tie(o.t_r, o.order);
    }
  };

  std::vector<TraceEvent> events_;
  std::uint32_t offset_;
  std::size_t cursor_ = 0;
  std::deque<std::size_t> awaiting_grant_;
  std::priority_queue<PendingRelease, std::vector<PendingRelease>,
                      std::greater<>>
      releases_;
  std::uint64_t grants_ = 0;
  std::uint64_t denied_ = 0;
};

}  // namespace poolsim

#endif  // POOLSIM_AGENTS_H_
