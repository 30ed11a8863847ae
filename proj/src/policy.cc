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

#include "poolsim/policy.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iterator>
#include <limits>
#include <string>

namespace poolsim {

IpTable::IpTable(std::size_t pool_size) : records_(pool_size) {
  for (std::size_t i = 0; i < pool_size; ++i) {
    records_[i].id = static_cast<IpId>(i);
  }
}

std::string_view PolicyName(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kRandom:
      return "Random";
    case PolicyKind::kLru:
      return "LRU";
    case PolicyKind::kTagged:
      return "Tagged";
    case PolicyKind::kSegmented:
      return "Segmented";
  }
  return "?";
}

std::optional<PolicyKind> ParsePolicyKind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "random") return PolicyKind::kRandom;
  if (lower == "lru") return PolicyKind::kLru;
  if (lower == "tagged") return PolicyKind::kTagged;
  if (lower == "segmented") return PolicyKind::kSegmented;
  return std::nullopt;
}

void AllocationPolicy::Init(IpTable& table, IpId ip) {
  const auto i = Index(ip);
  if (i >= table.size()) throw ContractViolation("init of IP outside pool");
  if (registered_.size() < table.size()) registered_.resize(table.size());
  if (registered_[i]) throw ContractViolation("IP registered twice");
  registered_[i] = true;
  IpRecord& record = table[ip];
  record.allocated = false;
  record.t_a = SimTime::Never();
  record.t_r = SimTime::Never();
  record.t_cd = 0;
  record.tag.reset();
  OnInit(table, ip);
  ++free_count_;
}

std::optional<IpId> AllocationPolicy::Allocate(IpTable& table,
                                               TenantId tenant, SimTime now) {
  if (free_count_ == 0) return std::nullopt;
  const IpId ip = Choose(table, tenant, now);
  IpRecord& record = table[ip];
  if (record.allocated) throw ContractViolation("policy chose an allocated IP");
  record.allocated = true;
  record.t_a = now;
  --free_count_;
  return ip;
}

void AllocationPolicy::Release(IpTable& table, IpId ip, SimTime now) {
  if (Index(ip) >= registered_.size() || !registered_[Index(ip)] ||
      !table[ip].allocated) {
    throw ContractViolation("release of an IP that is not allocated");
  }
  IpRecord& record = table[ip];
  record.allocated = false;
  record.t_r = now;
  OnRelease(table, ip, now);
  ++free_count_;
}

std::unique_ptr<AllocationPolicy> MakePolicy(PolicyKind kind,
                                             const PolicyParams& params,
                                             std::size_t pool_size, Rng rng) {
  switch (kind) {
    case PolicyKind::kRandom:
      return std::make_unique<RandomPolicy>(pool_size, params.d_reuse,
                                            std::move(rng));
    case PolicyKind::kLru:
      return std::make_unique<LruPolicy>();
    case PolicyKind::kTagged:
      return std::make_unique<TaggedPolicy>();
    case PolicyKind::kSegmented:
      return std::make_unique<SegmentedPolicy>(params.alpha);
  }
  throw std::invalid_argument("unknown policy kind");
}

namespace internal {

FenwickSet::FenwickSet(std::size_t capacity)
    : tree_(capacity + 1, 0), present_(capacity, false) {
  while (top_bit_ * 2 <= capacity) top_bit_ *= 2;
}

void FenwickSet::Add(std::uint32_t id, int delta) {
  for (std::size_t i = id + 1; i < tree_.size(); i += i & (~i + 1)) {
    tree_[i] += delta;
  }
}

void FenwickSet::Insert(std::uint32_t id) {
  if (present_[id]) return;
  present_[id] = true;
  ++size_;
  Add(id, +1);
}

void FenwickSet::Erase(std::uint32_t id) {
  if (!present_[id]) return;
  present_[id] = false;
  --size_;
  Add(id, -1);
}

std::uint32_t FenwickSet::Kth(std::size_t k) const {
  // Largest position whose prefix count is <= k; the answer is the next one.
  std::size_t pos = 0;
  auto remaining = static_cast<std::int64_t>(k);
  for (std::size_t step = top_bit_; step > 0; step >>= 1) {
    const std::size_t next = pos + step;
    if (next < tree_.size() && tree_[next] <= remaining) {
      pos = next;
      remaining -= tree_[next];
    }
  }
  return static_cast<std::uint32_t>(pos);
}

void TagIndex::Insert(TenantId tenant, std::int64_t t_r, IpId ip) {
  if (Index(tenant) >= by_tenant_.size()) by_tenant_.resize(Index(tenant) + 1);
  by_tenant_[Index(tenant)].emplace(t_r, Index(ip));
}

void TagIndex::Erase(TenantId tenant, std::int64_t t_r, IpId ip) {
  by_tenant_[Index(tenant)].erase({t_r, Index(ip)});
}

std::optional<IpId> TagIndex::Oldest(TenantId tenant) const {
  if (Index(tenant) >= by_tenant_.size()) return std::nullopt;
  const KeyedSet& own = by_tenant_[Index(tenant)];
  if (own.empty()) return std::nullopt;
  return static_cast<IpId>(own.begin()->second);
}

}  // namespace internal

// Random

RandomPolicy::RandomPolicy(std::size_t pool_size, std::int64_t d_reuse,
                           Rng rng)
    : d_reuse_(d_reuse), rng_(std::move(rng)), ready_(pool_size) {}

void RandomPolicy::OnInit(IpTable&, IpId ip) { ready_.Insert(Index(ip)); }

IpId RandomPolicy::Choose(IpTable&, TenantId, SimTime now) {
  while (!cooling_.empty() &&
         now.seconds() - cooling_.begin()->first >= d_reuse_) {
    ready_.Insert(cooling_.begin()->second);
    cooling_.erase(cooling_.begin());
  }
  if (ready_.size() > 0) {
    const std::uint32_t id = ready_.Kth(rng_.Below(ready_.size()));
    ready_.Erase(id);
    return static_cast<IpId>(id);
  }
  // Nothing has aged d_reuse; fall back to the oldest release.
  ++counters_.reuse_fallbacks;
  const std::uint32_t id = cooling_.begin()->second;
  cooling_.erase(cooling_.begin());
  return static_cast<IpId>(id);
}

void RandomPolicy::OnRelease(IpTable&, IpId ip, SimTime now) {
  if (d_reuse_ <= 0) {
    ready_.Insert(Index(ip));
  } else {
    cooling_.emplace(now.seconds(), Index(ip));
  }
}

// LRU

void LruPolicy::OnInit(IpTable&, IpId ip) {
  free_.emplace(SimTime::Never().seconds(), Index(ip));
}

IpId LruPolicy::Choose(IpTable&, TenantId, SimTime) {
  const std::uint32_t id = free_.begin()->second;
  free_.erase(free_.begin());
  return static_cast<IpId>(id);
}

void LruPolicy::OnRelease(IpTable&, IpId ip, SimTime now) {
  free_.emplace(now.seconds(), Index(ip));
}

// Tagged

void TaggedPolicy::OnInit(IpTable&, IpId ip) {
  free_.emplace(SimTime::Never().seconds(), Index(ip));
}

IpId TaggedPolicy::Choose(IpTable& table, TenantId tenant, SimTime) {
  IpId ip;
  if (auto own = tags_.Oldest(tenant)) {
    ip = *own;
    ++counters_.own_tag_hits;
  } else {
    ip = static_cast<IpId>(free_.begin()->second);
  }
  IpRecord& record = table[ip];
  free_.erase({record.t_r.seconds(), Index(ip)});
  if (record.tag) tags_.Erase(*record.tag, record.t_r.seconds(), ip);
  record.tag = tenant;
  return ip;
}

void TaggedPolicy::OnRelease(IpTable& table, IpId ip, SimTime now) {
  const IpRecord& record = table[ip];
  free_.emplace(now.seconds(), Index(ip));
  tags_.Insert(*record.tag, now.seconds(), ip);
}

// Segmented

TenantStats& SegmentedPolicy::Stats(TenantId tenant) {
  if (Index(tenant) >= stats_.size()) {
    const auto old = stats_.size();
    stats_.resize(Index(tenant) + 1);
    for (auto i = old; i < stats_.size(); ++i) {
      stats_[i].id = static_cast<TenantId>(i);
    }
  }
  return stats_[Index(tenant)];
}

const TenantStats& SegmentedPolicy::tenant_stats(TenantId tenant) {
  return Stats(tenant);
}

void SegmentedPolicy::ExpireCooldowns(SimTime now) {
  while (!cooling_.empty() && cooling_.begin()->first <= now.seconds()) {
    cooled_.insert(cooling_.begin()->second);
    cooling_.erase(cooling_.begin());
  }
}

void SegmentedPolicy::Insert(const IpRecord& record, SimTime) {
  cooling_.emplace(record.t_cd, Index(record.id));
  if (record.tag) tags_.Insert(*record.tag, record.t_r.seconds(), record.id);
}

void SegmentedPolicy::Erase(const IpRecord& record) {
  if (cooled_.erase(Index(record.id)) == 0) {
    cooling_.erase({record.t_cd, Index(record.id)});
  }
  if (record.tag) tags_.Erase(*record.tag, record.t_r.seconds(), record.id);
}

void SegmentedPolicy::OnInit(IpTable& table, IpId ip) {
  Insert(table[ip], SimTime(0));
}

IpId SegmentedPolicy::Choose(IpTable& table, TenantId tenant, SimTime now) {
  TenantStats& stats = Stats(tenant);
  ++stats.n_a;
  ExpireCooldowns(now);

  std::optional<IpId> choice = tags_.Oldest(tenant);
  if (choice) {
    ++counters_.own_tag_hits;
  } else {
    const double target = alpha_ * stats.mean_allocation_seconds();
    double best_distance = std::numeric_limits<double>::infinity();
    std::uint32_t best_id = 0;
    auto consider = [&](double distance, std::uint32_t id) {
      if (distance < best_distance ||
          (distance == best_distance && id < best_id)) {
        best_distance = distance;
        best_id = id;
      }
    };
    if (!cooled_.empty()) consider(target, *cooled_.begin());
    if (!cooling_.empty()) {
      // Remaining cooldowns are whole seconds, so the closest candidates are
      // the first t_cd at or above now + target and the last one below it.
      const auto pivot =
          now.seconds() + static_cast<std::int64_t>(std::ceil(target));
      auto above = cooling_.lower_bound({pivot, 0});
      if (above != cooling_.end()) {
        consider(std::abs(static_cast<double>(above->first - now.seconds()) -
                          target),
                 above->second);
      }
      if (above != cooling_.begin()) {
        const std::int64_t below_cd = std::prev(above)->first;
        auto first_of_group = cooling_.lower_bound({below_cd, 0});
        consider(std::abs(static_cast<double>(below_cd - now.seconds()) -
                          target),
                 first_of_group->second);
      }
    }
    choice = static_cast<IpId>(best_id);
  }
  IpRecord& record = table[*choice];
  Erase(record);
  record.tag = tenant;
  return *choice;
}

void SegmentedPolicy::OnRelease(IpTable& table, IpId ip, SimTime now) {
  IpRecord& record = table[ip];
  const std::int64_t held = now - record.t_a;
  record.t_cd = now.seconds() +
                static_cast<std::int64_t>(std::llround(alpha_ * held));
  Stats(*record.tag).d_a_total += held;
  Insert(record, now);
}

}  // namespace poolsim
