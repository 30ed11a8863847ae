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

#ifndef POOLSIM_POLICY_H_
#define POOLSIM_POLICY_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string_view>
#include <utility>
#include <vector>

#include "poolsim/core.h"
#include "poolsim/rng.h"

namespace poolsim {

// Per-IP metadata shared by the engine and the policy. The policy owns the
// allocation fields (allocated, t_a, t_r, t_cd, tag); the engine owns configs.
class IpTable {
 public:
  explicit IpTable(std::size_t pool_size);

  std::size_t size() const { return records_.size(); }
  IpRecord& operator[](IpId ip) { return records_[Index(ip)]; }
  const IpRecord& operator[](IpId ip) const { return records_[Index(ip)]; }

  std::vector<IpRecord>::const_iterator begin() const { return records_.begin(); }
  std::vector<IpRecord>::const_iterator end() const { return records_.end(); }

 private:
  std::vector<IpRecord> records_;
};

enum class PolicyKind { kRandom, kLru, kTagged, kSegmented };

std::string_view PolicyName(PolicyKind kind);
// Accepts "Random", "LRU", "Tagged", "Segmented" (case-insensitive).
std::optional<PolicyKind> ParsePolicyKind(std::string_view name);

struct PolicyCounters {
  std::uint64_t own_tag_hits = 0;     // served from the tenant's own tags
  std::uint64_t reuse_fallbacks = 0;  // Random: nothing had aged d_reuse
};

struct PolicyParams {
  std::int64_t d_reuse = 1800;  // Random only
  double alpha = 8.0;           // Segmented only
};

// Allocate / Release / Init over an IP pool. Calls are paired: an IP is
// released only by its current holder and allocated only while free.
class AllocationPolicy {
 public:
  virtual ~AllocationPolicy() = default;

  virtual PolicyKind kind() const = 0;

  // Registers a never-allocated IP as free. Throws ContractViolation on a
  // second registration of the same IP.
  void Init(IpTable& table, IpId ip);

  // Picks a free IP for tenant and marks it allocated at now. Returns nullopt
  // when no IP is free.
  std::optional<IpId> Allocate(IpTable& table, TenantId tenant, SimTime now);

  // Returns ip to the pool. Throws ContractViolation if ip is not allocated.
  void Release(IpTable& table, IpId ip, SimTime now);

  std::size_t free_count() const { return free_count_; }
  const PolicyCounters& counters() const { return counters_; }

 protected:
  virtual void OnInit(IpTable& table, IpId ip) = 0;
  // Called with at least one IP free. Must remove the choice from the
  // policy's free structures.
  virtual IpId Choose(IpTable& table, TenantId tenant, SimTime now) = 0;
  // Called after t_r is set and before the IP re-enters the free structures.
  virtual void OnRelease(IpTable& table, IpId ip, SimTime now) = 0;

  PolicyCounters counters_;

 private:
  std::vector<bool> registered_;
  std::size_t free_count_ = 0;
};

std::unique_ptr<AllocationPolicy> MakePolicy(PolicyKind kind,
                                             const PolicyParams& params,
                                             std::size_t pool_size, Rng rng);

namespace internal {

// Counts of present ids with k-th-element lookup in O(log n).
class FenwickSet {
 public:
  explicit FenwickSet(std::size_t capacity);
  void Insert(std::uint32_t id);
  void Erase(std::uint32_t id);
  bool Contains(std::uint32_t id) const { return present_[id]; }
  std::size_t size() const { return size_; }
  // k-th smallest present id, k in [0, size()).
  std::uint32_t Kth(std::size_t k) const;

 private:
  void Add(std::uint32_t id, int delta);

  std::vector<std::int32_t> tree_;
  std::vector<bool> present_;
  std::size_t size_ = 0;
  std::uint32_t top_bit_ = 1;
};

// (key, id) ordered set; the first element is the argmin with ties broken
// by lowest id.
using KeyedSet = std::set<std::pair<std::int64_t, std::uint32_t>>;

// Free IPs grouped by the tenant they are tagged to, LRU-ordered.
class TagIndex {
 public:
  void Insert(TenantId tenant, std::int64_t t_r, IpId ip);
  void Erase(TenantId tenant, std::int64_t t_r, IpId ip);
  // Least recently released free IP tagged to tenant, if any.
  std::optional<IpId> Oldest(TenantId tenant) const;

 private:
  std::vector<KeyedSet> by_tenant_;
};

}  // namespace internal

// Uniform over free IPs that have been free for at least d_reuse; when none
// qualifies, the least recently released free IP.
class RandomPolicy final : public AllocationPolicy {
 public:
  RandomPolicy(std::size_t pool_size, std::int64_t d_reuse, Rng rng);
  PolicyKind kind() const override { return PolicyKind::kRandom; }

 protected:
  void OnInit(IpTable& table, IpId ip) override;
  IpId Choose(IpTable& table, TenantId tenant, SimTime now) override;
  void OnRelease(IpTable& table, IpId ip, SimTime now) override;

 private:
  std::int64_t d_reuse_;
  Rng rng_;
  internal::FenwickSet ready_;    // free for at least d_reuse
  internal::KeyedSet cooling_;    // (t_r, id), released within d_reuse
};

// Least recently released free IP.
class LruPolicy final : public AllocationPolicy {
 public:
  PolicyKind kind() const override { return PolicyKind::kLru; }

 protected:
  void OnInit(IpTable& table, IpId ip) override;
  IpId Choose(IpTable& table, TenantId tenant, SimTime now) override;
  void OnRelease(IpTable& table, IpId ip, SimTime now) override;

 private:
  internal::KeyedSet free_;  // (t_r, id)
};

// Own tagged IPs first (LRU among them), then LRU over the whole free pool.
class TaggedPolicy final : public AllocationPolicy {
 public:
  PolicyKind kind() const override { return PolicyKind::kTagged; }

 protected:
  void OnInit(IpTable& table, IpId ip) override;
  IpId Choose(IpTable& table, TenantId tenant, SimTime now) override;
  void OnRelease(IpTable& table, IpId ip, SimTime now) override;

 private:
  internal::KeyedSet free_;
  internal::TagIndex tags_;
};

// Scan segmentation. Releases stamp a cooldown expiry
// t_cd = t_r + alpha * (t_r - t_a) and charge the hold time to the tenant.
// Allocation prefers the tenant's own tagged IPs, otherwise the IP whose
// remaining cooldown (floored at zero) is closest to alpha times the
// tenant's mean allocation time.
class SegmentedPolicy final : public AllocationPolicy {
 public:
  explicit SegmentedPolicy(double alpha) : alpha_(alpha) {}
  PolicyKind kind() const override { return PolicyKind::kSegmented; }

  const TenantStats& tenant_stats(TenantId tenant);
  double alpha() const { return alpha_; }

 protected:
  void OnInit(IpTable& table, IpId ip) override;
  IpId Choose(IpTable& table, TenantId tenant, SimTime now) override;
  void OnRelease(IpTable& table, IpId ip, SimTime now) override;

 private:
  TenantStats& Stats(TenantId tenant);
  void ExpireCooldowns(SimTime now);
  void Insert(const IpRecord& record, SimTime now);
  void Erase(const IpRecord& record);

  double alpha_;
  std::vector<TenantStats> stats_;
  internal::TagIndex tags_;
  std::set<std::uint32_t> cooled_;  // t_cd <= now, ordered by id
  internal::KeyedSet cooling_;      // (t_cd, id) with t_cd > now
};

}  // namespace poolsim

#endif  // POOLSIM_POLICY_H_
