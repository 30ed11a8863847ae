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

#include "poolsim/engine.h"

#include <algorithm>

namespace poolsim {

namespace {

std::uint64_t HashKey(std::int64_t a, std::uint64_t b) {
  return Rng::Mix(Rng::Mix(static_cast<std::uint64_t>(a)) ^ b);
}

}  // namespace

Engine::Engine(const RunConfig& config, std::size_t pool_size,
               std::unique_ptr<AllocationPolicy> policy, Roster roster)
    : config_(config),
      latent_model_{config.p_c},
      ips_(pool_size),
      policy_(std::move(policy)),
      roster_(std::move(roster)),
      latent_rng_(Rng(config.seed).Split("latent")),
      end_(config.total_seconds()),
      owner_(pool_size) {
  config_.Validate();
  if (pool_size == 0) throw ContractViolation("empty IP pool");
  for (std::size_t i = 0; i < pool_size; ++i) {
    policy_->Init(ips_, static_cast<IpId>(i));
  }
  stats_.pool_size = pool_size;
  stats_.ar_sample_seconds = config_.ar_sample_seconds;
  stats_.free_durations.sample =
      BottomKSample<std::int64_t>(config_.sample_capacity);
  stats_.exploits = BottomKSample<ExploitRecord>(config_.sample_capacity);
}

std::optional<TenantId> Engine::owner(IpId ip) const {
  if (!ips_[ip].allocated) return std::nullopt;
  return owner_[Index(ip)];
}

void Engine::Step() {
  requests_.clear();
  request_agent_.clear();
  const bool adversary_active = now_.seconds() >= config_.warmup_seconds();
  for (std::uint32_t a = 0; a < roster_.size(); ++a) {
    Agent& agent = *roster_[a];
    if (agent.adversarial() && !adversary_active) continue;
    agent.Step(now_, requests_);
    request_agent_.resize(requests_.size(), a);
  }

  for (std::size_t i = 0; i < requests_.size(); ++i) {
    if (requests_[i].kind == Request::Kind::kRelease) {
      ApplyRelease(*roster_[request_agent_[i]], requests_[i]);
    }
  }
  for (std::size_t i = 0; i < requests_.size(); ++i) {
    if (requests_[i].kind == Request::Kind::kAllocate) {
      ApplyAllocate(*roster_[request_agent_[i]], requests_[i]);
    }
  }

  if (now_.seconds() % config_.ar_sample_seconds == 0) {
    FlushSeriesPoint(now_.seconds());
  }
  stats_.simulated_seconds = now_.seconds() + config_.step_seconds;
  now_ = now_ + config_.step_seconds;
}

void Engine::ApplyRelease(const Agent& agent, const Request& request) {
  if (Index(request.ip) >= ips_.size() || !ips_[request.ip].allocated ||
      owner_[Index(request.ip)] != request.tenant) {
    throw ContractViolation("release by a tenant that does not hold the IP");
  }
  IpRecord& record = ips_[request.ip];
  const std::int64_t held = now_ - record.t_a;
  policy_->Release(ips_, request.ip, now_);
  --allocated_;
  ++stats_.releases;

  if (agent.adversarial()) return;
  if (auto config = SampleLatentConfig(latent_rng_, latent_model_, held, now_,
                                       request.tenant)) {
    config->config_id = next_config_id_++;
    record.configs.push_back(*config);
    ++stats_.configs_created;
  }
}

void Engine::ApplyAllocate(Agent& agent, const Request& request) {
  const bool adversarial = agent.adversarial();
  const auto ip = policy_->Allocate(ips_, request.tenant, now_);
  if (!ip) {
    ++stats_.pool_exhausted;
    if (adversarial) ++stats_.adversary_pool_exhausted;
    agent.OnDenied(request.tenant, now_);
    return;
  }
  IpRecord& record = ips_[*ip];
  owner_[Index(*ip)] = request.tenant;
  ++allocated_;
  stats_.peak_allocated = std::max(stats_.peak_allocated, allocated_);
  ++stats_.allocations;
  ++pending_.allocations;
  pending_dirty_ = true;

  if (!record.t_r.is_never()) {
    const std::int64_t free_for = now_ - record.t_r;
    FreeDurations& fd = stats_.free_durations;
    fd.min = fd.count == 0 ? free_for : std::min(fd.min, free_for);
    fd.max = fd.count == 0 ? free_for : std::max(fd.max, free_for);
    fd.sum += free_for;
    ++fd.count;
    fd.sample.Add(HashKey(now_.seconds(), Index(*ip)), free_for);
  }

  // Exploitable only strictly before t_c.
  std::erase_if(record.configs,
                [&](const LatentConfig& c) { return c.t_c <= now_; });

  if (adversarial) {
    undiscovered_.clear();
    for (std::size_t i = 0; i < record.configs.size(); ++i) {
      if (!record.configs[i].discovered) undiscovered_.push_back(i);
    }
    const Observation seen = agent.Observe(*ip, record.configs);
    ++stats_.adversary_allocations;
    ++pending_.adversary_allocations;
    if (seen.new_ip) {
      ++stats_.unique_ips;
      ++pending_.unique_ips;
    }
    stats_.discovered_configs += seen.new_configs;
    pending_.discovered_configs += seen.new_configs;
    if (seen.new_ip && seen.new_configs > 0) {
      ++stats_.lc_allocations;
      ++pending_.lc_allocations;
    }
    for (std::size_t i : undiscovered_) {
      const LatentConfig& c = record.configs[i];
      if (!c.discovered) continue;
      stats_.exploits.Add(Rng::Mix(c.config_id),
                          ExploitRecord{c.config_id, now_.seconds(),
                                        Index(c.created_by), c.t_r.seconds()});
    }
  } else {
    ++stats_.benign_allocations;
    ++pending_.benign_allocations;
    if (!record.configs.empty()) {
      ++stats_.benign_lc_allocations;
      ++pending_.benign_lc_allocations;
    }
  }
  agent.OnGranted(request.tenant, *ip, now_);
}

void Engine::FlushSeriesPoint(std::int64_t time_s) {
  pending_.time_s = time_s;
  pending_.allocated = allocated_;
  pending_.pool_size = ips_.size();
  stats_.series.push_back(pending_);
  pending_ = SeriesPoint{};
  pending_dirty_ = false;
}

RunStats Engine::Run() {
  while (!done()) Step();
  if (pending_dirty_) FlushSeriesPoint(now_.seconds() - config_.step_seconds);
  stats_.policy = policy_->counters();
  return stats_;
}

RunStats RunSimulation(const RunConfig& config, std::size_t pool_size,
                       Roster roster) {
  auto policy = MakePolicy(config.policy, config.policy_params(), pool_size,
                           Rng(config.seed).Split("policy"));
  Engine engine(config, pool_size, std::move(policy), std::move(roster));
  return engine.Run();
}

}  // namespace poolsim
