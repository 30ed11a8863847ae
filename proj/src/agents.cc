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

#include "poolsim/agents.h"

#include <algorithm>
#include <stdexcept>

namespace poolsim {

// Autoscale

namespace {
std::vector<DailyProfile> BuildProfiles(const std::vector<BehaviorSpec>& specs) {
  std::vector<DailyProfile> profiles;
  profiles.reserve(specs.size());
  for (const BehaviorSpec& spec : specs) profiles.emplace_back(spec);
  return profiles;
}
}  // namespace

AutoscaleAgent::AutoscaleAgent(TenantId first_id,
                               std::vector<BehaviorSpec> specs, Rng rng)
    : AutoscaleAgent(first_id, specs, BuildProfiles(specs), std::move(rng)) {}

AutoscaleAgent::AutoscaleAgent(TenantId first_id,
                               std::vector<BehaviorSpec> specs,
                               std::vector<DailyProfile> profiles, Rng rng)
    : first_id_(Index(first_id)), rng_(std::move(rng)) {
  if (profiles.size() != specs.size()) {
    throw std::invalid_argument("one daily profile per tenant required");
  }
  tenants_.reserve(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    tenants_.push_back(Tenant{static_cast<TenantId>(first_id_ + i),
                              std::move(specs[i]), std::move(profiles[i]), {}});
  }
  next_eval_.assign(tenants_.size(), 0);
  for (std::uint32_t i = 0; i < tenants_.size(); ++i) wakeups_.emplace(0, i);
}

std::uint32_t AutoscaleAgent::LocalIndex(TenantId tenant) const {
  const std::uint32_t index = Index(tenant) - first_id_;
  if (Index(tenant) < first_id_ || index >= tenants_.size()) {
    throw ContractViolation("tenant does not belong to the autoscale agent");
  }
  return index;
}

void AutoscaleAgent::Schedule(std::uint32_t index, std::int64_t at) {
  next_eval_[index] = at;
  wakeups_.emplace(at, index);
}

void AutoscaleAgent::Step(SimTime now, std::vector<Request>& out) {
  while (!wakeups_.empty() && wakeups_.top().first <= now.seconds()) {
    const auto [at, index] = wakeups_.top();
    wakeups_.pop();
    if (next_eval_[index] != at) continue;  // superseded

    Tenant& tenant = tenants_[index];
    const int target = tenant.profile.TargetAt(now);
    const auto held = static_cast<int>(tenant.held.size());
    for (int i = held; i < target; ++i) {
      out.push_back(Request::Allocate(tenant.id));
    }
    for (int i = target; i < held; ++i) {
      // Scale-down releases a uniformly chosen instance.
      const auto pick = rng_.Below(tenant.held.size());
      std::swap(tenant.held[pick], tenant.held.back());
      out.push_back(Request::Release(tenant.id, tenant.held.back()));
      tenant.held.pop_back();
      --held_total_;
    }
    Schedule(index, now.seconds() + tenant.profile.UntilChange(now));
  }
}

void AutoscaleAgent::OnGranted(TenantId tenant, IpId ip, SimTime) {
  tenants_[LocalIndex(tenant)].held.push_back(ip);
  ++held_total_;
}

void AutoscaleAgent::OnDenied(TenantId tenant, SimTime now) {
  const std::uint32_t index = LocalIndex(tenant);
  // Retry on the next step.
  if (next_eval_[index] > now.seconds() + 1) {
    Schedule(index, now.seconds() + 1);
  }
}

// Adversary

AdversaryAgent::AdversaryAgent(TenantId first_id, AdversaryParams params)
    : first_id_(Index(first_id)), params_(params) {
  if (params_.concurrency == 0 || params_.hold_seconds <= 0 ||
      params_.rotation_quota == 0 || params_.tenant_budget == 0) {
    throw std::invalid_argument("adversary parameters must be positive");
  }
}

std::uint32_t AdversaryAgent::tenant_count() const {
  return params_.mode == AdversaryParams::Mode::kSingle ? 1
                                                        : params_.tenant_budget;
}

TenantId AdversaryAgent::CurrentTenant() const {
  if (params_.mode == AdversaryParams::Mode::kSingle) {
    return static_cast<TenantId>(first_id_);
  }
  const auto account = (issued_ / params_.rotation_quota) % params_.tenant_budget;
  return static_cast<TenantId>(first_id_ + account);
}

void AdversaryAgent::Step(SimTime now, std::vector<Request>& out) {
  while (!holds_.empty() && now - holds_.front().since >= params_.hold_seconds) {
    out.push_back(Request::Release(holds_.front().tenant, holds_.front().ip));
    holds_.pop_front();
  }
  for (auto n = holds_.size(); n < params_.concurrency; ++n) {
    out.push_back(Request::Allocate(CurrentTenant()));
    ++issued_;
  }
}

void AdversaryAgent::OnGranted(TenantId tenant, IpId ip, SimTime now) {
  holds_.push_back(Hold{ip, tenant, now});
}

Observation AdversaryAgent::Observe(IpId ip,
                                    std::span<LatentConfig> configs) {
  Observation observation;
  if (Index(ip) >= seen_.size()) seen_.resize(Index(ip) + 1, false);
  if (!seen_[Index(ip)]) {
    seen_[Index(ip)] = true;
    observation.new_ip = true;
    ++unique_ips_;
  }
  for (LatentConfig& config : configs) {
    if (config.discovered) continue;
    config.discovered = true;
    discovered_.push_back(config.config_id);
    ++observation.new_configs;
  }
  return observation;
}

// Trace replay

TraceAgent::TraceAgent(std::vector<TraceEvent> events,
                       std::uint32_t tenant_offset)
    : events_(std::move(events)), offset_(tenant_offset) {
  for (std::size_t i = 0; i < events_.size(); ++i) {
    if (events_[i].t_r <= events_[i].t_a) {
      throw std::invalid_argument("trace event releases before it allocates");
    }
    if (i > 0 && events_[i].t_a < events_[i - 1].t_a) {
      throw std::invalid_argument("trace events are not sorted by t_a");
    }
  }
}

void TraceAgent::Step(SimTime now, std::vector<Request>& out) {
  while (!releases_.empty() && releases_.top().t_r <= now.seconds()) {
    out.push_back(Request::Release(releases_.top().tenant, releases_.top().ip));
    releases_.pop();
  }
  while (cursor_ < events_.size() && events_[cursor_].t_a <= now) {
    out.push_back(Request::Allocate(
        static_cast<TenantId>(Index(events_[cursor_].tenant) + offset_)));
    awaiting_grant_.push_back(cursor_);
    ++cursor_;
  }
}

void TraceAgent::OnGranted(TenantId tenant, IpId ip, SimTime) {
  const TraceEvent& event = events_[awaiting_grant_.front()];
  awaiting_grant_.pop_front();
  releases_.push(PendingRelease{event.t_r.seconds(), grants_++, tenant, ip});
}

void TraceAgent::OnDenied(TenantId, SimTime) {
  awaiting_grant_.pop_front();
  ++denied_;
}

}  // namespace poolsim
