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

#include <gtest/gtest.h>

#include <set>

#include "oracle_driver.h"

namespace poolsim {
namespace {

IpId Ip(std::uint32_t i) { return static_cast<IpId>(i); }
TenantId Tenant(std::uint32_t i) { return static_cast<TenantId>(i); }

// A pool with every IP registered.
struct Pool {
  Pool(PolicyKind kind, std::size_t size, PolicyParams params = {},
       std::uint64_t seed = 1)
      : table(size), policy(MakePolicy(kind, params, size, Rng(seed))) {
    for (std::uint32_t i = 0; i < size; ++i) policy->Init(table, Ip(i));
  }

  std::uint32_t Alloc(std::uint32_t tenant, std::int64_t now) {
    auto ip = policy->Allocate(table, Tenant(tenant), SimTime(now));
    EXPECT_TRUE(ip.has_value());
    return ip ? Index(*ip) : ~0u;
  }
  void Free(std::uint32_t ip, std::int64_t now) {
    policy->Release(table, Ip(ip), SimTime(now));
  }

  IpTable table;
  std::unique_ptr<AllocationPolicy> policy;
};

TEST(PolicyNameTest, RoundTrips) {
  for (auto kind : {PolicyKind::kRandom, PolicyKind::kLru, PolicyKind::kTagged,
                    PolicyKind::kSegmented}) {
    EXPECT_EQ(ParsePolicyKind(PolicyName(kind)), kind);
  }
  EXPECT_EQ(ParsePolicyKind("lru"), PolicyKind::kLru);
  EXPECT_EQ(ParsePolicyKind("SEGMENTED"), PolicyKind::kSegmented);
  EXPECT_FALSE(ParsePolicyKind("fifo").has_value());
}

TEST(InitTest, FreshPoolIsFreeAndUntagged) {
  Pool pool(PolicyKind::kTagged, 3);
  EXPECT_EQ(pool.policy->free_count(), 3u);
  for (const auto& record : pool.table) {
    EXPECT_FALSE(record.allocated);
    EXPECT_FALSE(record.tag.has_value());
    EXPECT_TRUE(record.t_r.is_never());
    EXPECT_EQ(record.t_cd, 0);
  }
}

TEST(InitTest, DuplicateRegistrationIsAViolation) {
  Pool pool(PolicyKind::kLru, 3);
  EXPECT_THROW(pool.policy->Init(pool.table, Ip(1)), ContractViolation);
  EXPECT_THROW(pool.policy->Init(pool.table, Ip(7)), ContractViolation);
}

TEST(ReleaseTest, ReleasingAFreeIpIsAViolation) {
  for (auto kind : {PolicyKind::kRandom, PolicyKind::kLru, PolicyKind::kTagged,
                    PolicyKind::kSegmented}) {
    Pool pool(kind, 3);
    EXPECT_THROW(pool.Free(0, 10), ContractViolation);
    EXPECT_THROW(pool.Free(99, 10), ContractViolation);
    const auto ip = pool.Alloc(0, 0);
    pool.Free(ip, 5);
    EXPECT_THROW(pool.Free(ip, 6), ContractViolation);
  }
}

TEST(AllocateTest, ExhaustedPoolReturnsNothing) {
  for (auto kind : {PolicyKind::kRandom, PolicyKind::kLru, PolicyKind::kTagged,
                    PolicyKind::kSegmented}) {
    Pool pool(kind, 2);
    pool.Alloc(0, 0);
    pool.Alloc(1, 0);
    EXPECT_FALSE(pool.policy->Allocate(pool.table, Tenant(2), SimTime(1)));
    EXPECT_EQ(pool.policy->free_count(), 0u);
  }
}

TEST(AllocateTest, AllocationTagsTheIpAndStampsTa) {
  Pool pool(PolicyKind::kSegmented, 4);
  const auto ip = pool.Alloc(9, 123);
  EXPECT_TRUE(pool.table[Ip(ip)].allocated);
  EXPECT_EQ(pool.table[Ip(ip)].t_a, SimTime(123));
  EXPECT_EQ(pool.table[Ip(ip)].tag, Tenant(9));
  pool.Free(ip, 200);
  EXPECT_EQ(pool.table[Ip(ip)].tag, Tenant(9));
  EXPECT_EQ(pool.table[Ip(ip)].t_r, SimTime(200));
}

// Random

TEST(RandomPolicyTest, OnlyAgedIpQualifies) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    Pool pool(PolicyKind::kRandom, 2, {}, seed);
    const auto a = pool.Alloc(0, 0);
    const auto b = pool.Alloc(1, 0);
    pool.Free(a, 0);
    pool.Free(b, 1560);
    EXPECT_EQ(pool.Alloc(2, 1860), a) << "seed " << seed;
  }
}

TEST(RandomPolicyTest, FallsBackToOldestWhenNothingAged) {
  Pool pool(PolicyKind::kRandom, 3);
  const auto a = pool.Alloc(0, 0);
  const auto b = pool.Alloc(1, 0);
  const auto c = pool.Alloc(2, 0);
  pool.Free(b, 1000);
  pool.Free(c, 1100);
  EXPECT_EQ(pool.Alloc(3, 1200), b);
  EXPECT_EQ(pool.Alloc(4, 1200), c);
  EXPECT_EQ(pool.policy->counters().reuse_fallbacks, 2u);
  (void)a;
}

TEST(RandomPolicyTest, FreshPoolIsUniform) {
  constexpr int kTrials = 20000;
  std::vector<int> hits(4, 0);
  Pool pool(PolicyKind::kRandom, 4, {}, 77);
  for (int i = 0; i < kTrials; ++i) {
    const auto ip = pool.Alloc(0, 0);
    ++hits[ip];
    // Released long ago relative to the next pick, so every IP qualifies.
    pool.Free(ip, -100000);
  }
  for (int h : hits) EXPECT_NEAR(h / double(kTrials), 0.25, 0.015);
}

TEST(RandomPolicyTest, ReturnsAgedIpWheneverOneExists) {
  Rng driver(5);
  Pool pool(PolicyKind::kRandom, 32, {}, 5);
  std::vector<std::uint32_t> held;
  std::int64_t now = 0;
  for (int op = 0; op < 20000; ++op) {
    now += static_cast<std::int64_t>(driver.Below(200));
    if (!held.empty() && (held.size() == 32 || driver.Bernoulli(0.5))) {
      const auto k = driver.Below(held.size());
      pool.Free(held[k], now);
      held[k] = held.back();
      held.pop_back();
      continue;
    }
    bool any_aged = false;
    for (const auto& r : pool.table) {
      if (!r.allocated && (r.t_r.is_never() || SimTime(now) - r.t_r >= 1800)) {
        any_aged = true;
      }
    }
    const auto ip = pool.Alloc(0, now);
    const auto& got = pool.table[Ip(ip)];
    if (any_aged) {
      ASSERT_TRUE(got.t_r.is_never() || SimTime(now) - got.t_r >= 1800) << "op " << op;
    }
    held.push_back(ip);
  }
}

// LRU

TEST(LruPolicyTest, NeverReleasedSortsFirst) {
  Pool pool(PolicyKind::kLru, 3);
  EXPECT_EQ(pool.Alloc(0, 0), 0u);
  EXPECT_EQ(pool.Alloc(0, 0), 1u);
  pool.Free(1, 50);
  pool.Free(0, 100);
  EXPECT_EQ(pool.Alloc(0, 200), 2u);
  EXPECT_EQ(pool.Alloc(0, 200), 1u);
  EXPECT_EQ(pool.Alloc(0, 200), 0u);
}

TEST(LruPolicyTest, EqualStatesGiveEqualChoices) {
  Pool a(PolicyKind::kLru, 8);
  Pool b(PolicyKind::kLru, 8, {}, 999);
  for (int i = 0; i < 8; ++i) {
    EXPECT_EQ(a.Alloc(i, i), b.Alloc(i, i));
  }
  for (std::uint32_t ip : {3u, 1u, 6u}) {
    a.Free(ip, 100);
    b.Free(ip, 100);
  }
  EXPECT_EQ(a.Alloc(0, 100), 1u);
  EXPECT_EQ(b.Alloc(0, 100), 1u);
}

// Tagged

TEST(TaggedPolicyTest, TenantGetsItsOwnIpBack) {
  Pool pool(PolicyKind::kTagged, 5);
  const auto a = pool.Alloc(7, 0);
  for (std::uint32_t t = 0; t < 3; ++t) pool.Alloc(t, 0);
  pool.Free(a, 10);
  EXPECT_EQ(pool.Alloc(7, 20), a);
  EXPECT_EQ(pool.policy->counters().own_tag_hits, 1u);
}

TEST(TaggedPolicyTest, FallsBackToLruAcrossOtherTags) {
  Pool pool(PolicyKind::kTagged, 2);
  const auto a = pool.Alloc(3, 0);
  const auto b = pool.Alloc(9, 0);
  pool.Free(b, 50);
  pool.Free(a, 100);
  EXPECT_EQ(pool.Alloc(7, 200), b);
}

TEST(TaggedPolicyTest, LruWithinOwnTags) {
  Pool pool(PolicyKind::kTagged, 3);
  const auto a = pool.Alloc(7, 0);
  const auto b = pool.Alloc(7, 0);
  pool.Free(a, 100);
  pool.Free(b, 40);
  EXPECT_EQ(pool.Alloc(7, 200), b);
  EXPECT_EQ(pool.Alloc(7, 200), a);
  EXPECT_EQ(pool.Alloc(7, 200), 2u);
}

// Segmented

TEST(SegmentedPolicyTest, CooldownIsHoldTimeScaledByAlpha) {
  Pool pool(PolicyKind::kSegmented, 1, {.alpha = 2.0});
  pool.Alloc(0, 0);
  pool.Free(0, 600);
  EXPECT_EQ(pool.table[Ip(0)].t_cd, 1800);
}

TEST(SegmentedPolicyTest, ZeroAlphaCollapsesCooldown) {
  Pool pool(PolicyKind::kSegmented, 1, {.alpha = 0.0});
  pool.Alloc(0, 0);
  pool.Free(0, 600);
  EXPECT_EQ(pool.table[Ip(0)].t_cd, 600);
}

TEST(SegmentedPolicyTest, FreshIpHasNoCooldown) {
  Pool pool(PolicyKind::kSegmented, 2);
  EXPECT_EQ(pool.table[Ip(0)].t_cd, 0);
  EXPECT_EQ(pool.Alloc(0, 0), 0u);
}

TEST(SegmentedPolicyTest, MeanAllocationTimeUsesCompletedHolds) {
  IpTable table(2);
  SegmentedPolicy policy(2.0);
  policy.Init(table, Ip(0));
  policy.Init(table, Ip(1));
  const auto ip = policy.Allocate(table, Tenant(4), SimTime(0));
  policy.Release(table, *ip, SimTime(100));
  const auto ip2 = policy.Allocate(table, Tenant(4), SimTime(100));
  policy.Release(table, *ip2, SimTime(400));
  const auto& stats = policy.tenant_stats(Tenant(4));
  EXPECT_EQ(stats.d_a_total, 400);
  EXPECT_EQ(stats.n_a, 2u);
  EXPECT_DOUBLE_EQ(stats.mean_allocation_seconds(), 200.0);
  EXPECT_EQ(policy.tenant_stats(Tenant(11)).n_a, 0u);
}

TEST(SegmentedPolicyTest, NewTenantGetsCooledIp) {
  Pool pool(PolicyKind::kSegmented, 2, {.alpha = 2.0});
  EXPECT_EQ(pool.Alloc(0, 0), 0u);
  EXPECT_EQ(pool.Alloc(0, 0), 1u);
  pool.Free(1, 0);    // held 0 s, cooldown over immediately
  pool.Free(0, 250);  // t_cd = 750, 500 s remaining at t=250
  EXPECT_EQ(pool.Alloc(5, 250), 1u);
}

TEST(SegmentedPolicyTest, PicksCooldownClosestToScaledMean) {
  Pool pool(PolicyKind::kSegmented, 4, {.alpha = 2.0});
  constexpr std::uint32_t kT = 0, kW = 1, kX = 2, kY = 3, kZ = 4;
  EXPECT_EQ(pool.Alloc(kT, 0), 0u);
  EXPECT_EQ(pool.Alloc(kX, 0), 1u);
  EXPECT_EQ(pool.Alloc(kY, 0), 2u);
  EXPECT_EQ(pool.Alloc(kZ, 1), 3u);
  pool.Free(0, 1200);  // tenant T: one completed hold of 1200 s
  EXPECT_EQ(pool.Alloc(kW, 1200), 0u);
  pool.Free(1, 1300);  // t_cd 3900
  pool.Free(2, 2000);  // t_cd 6000
  pool.Free(3, 2634);  // t_cd 7900
  EXPECT_EQ(pool.table[Ip(1)].t_cd, 3900);
  EXPECT_EQ(pool.table[Ip(2)].t_cd, 6000);
  EXPECT_EQ(pool.table[Ip(3)].t_cd, 7900);
  // At t=4900 remaining cooldowns are {0, 1100, 3000}. T's mean over two
  // allocations is 600 s, so the target is 1200 s.
  EXPECT_EQ(pool.Alloc(kT, 4900), 2u);
}

TEST(SegmentedPolicyTest, OwnTagWinsOverCooldown) {
  Pool pool(PolicyKind::kSegmented, 2, {.alpha = 2.0});
  EXPECT_EQ(pool.Alloc(3, 0), 0u);
  EXPECT_EQ(pool.Alloc(7, 0), 1u);
  pool.Free(0, 0);
  pool.Free(1, 1000);
  EXPECT_EQ(pool.Alloc(7, 1000), 1u);
  EXPECT_EQ(pool.policy->counters().own_tag_hits, 1u);
}

// Structural properties

TEST(FenwickSetTest, KthMatchesOrderedSet) {
  internal::FenwickSet fenwick(300);
  std::set<std::uint32_t> reference;
  Rng rng(3);
  for (int op = 0; op < 20000; ++op) {
    const auto id = static_cast<std::uint32_t>(rng.Below(300));
    if (reference.count(id)) {
      fenwick.Erase(id);
      reference.erase(id);
    } else {
      fenwick.Insert(id);
      reference.insert(id);
    }
    ASSERT_EQ(fenwick.size(), reference.size());
    if (!reference.empty()) {
      const auto k = rng.Below(reference.size());
      ASSERT_EQ(fenwick.Kth(k), *std::next(reference.begin(), k));
    }
  }
}

TEST(PolicyPropertyTest, FreeAndAllocatedPartitionThePool) {
  for (auto kind : {PolicyKind::kRandom, PolicyKind::kLru, PolicyKind::kTagged,
                    PolicyKind::kSegmented}) {
    Rng driver(11);
    Pool pool(kind, 24);
    std::vector<std::uint32_t> held;
    std::int64_t now = 0;
    for (int op = 0; op < 5000; ++op) {
      now += static_cast<std::int64_t>(driver.Below(900));
      if (!held.empty() && (held.size() == 24 || driver.Bernoulli(0.5))) {
        const auto k = driver.Below(held.size());
        pool.Free(held[k], now);
        held[k] = held.back();
        held.pop_back();
      } else {
        const auto ip = pool.Alloc(
            static_cast<std::uint32_t>(driver.Below(6)), now);
        ASSERT_FALSE(std::count(held.begin(), held.end(), ip));
        held.push_back(ip);
      }
      std::size_t allocated = 0;
      for (const auto& r : pool.table) allocated += r.allocated;
      ASSERT_EQ(allocated, held.size());
      ASSERT_EQ(pool.policy->free_count() + allocated, 24u);
    }
  }
}

TEST(PolicyPropertyTest, LoneTenantOnlyEverSeesItsOwnIps) {
  for (auto kind : {PolicyKind::kTagged, PolicyKind::kSegmented}) {
    for (std::size_t k : {1u, 3u, 7u}) {
      Rng driver(k);
      Pool pool(kind, 20);
      std::set<std::uint32_t> seen;
      std::vector<std::uint32_t> held;
      std::int64_t now = 0;
      for (int round = 0; round < 300; ++round) {
        while (held.size() < k) {
          held.push_back(pool.Alloc(42, now));
          seen.insert(held.back());
        }
        now += 1 + static_cast<std::int64_t>(driver.Below(5000));
        const auto n = 1 + driver.Below(held.size());
        for (std::uint64_t i = 0; i < n; ++i) {
          pool.Free(held.back(), now);
          held.pop_back();
        }
      }
      EXPECT_LE(seen.size(), k) << PolicyName(kind) << " k=" << k;
    }
  }
}

TEST(PolicyOracleTest, MatchesLinearScanReference) {
  for (auto kind : {PolicyKind::kRandom, PolicyKind::kLru, PolicyKind::kTagged,
                    PolicyKind::kSegmented}) {
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
      testing::OracleCase c;
      c.kind = kind;
      c.seed = seed;
      c.pool_size = 1 + seed % 64;
      c.tenants = 1 + static_cast<std::uint32_t>(seed % 7);
      c.params.alpha = (seed % 4) * 1.5;
      const auto mismatch = testing::CompareWithOracle(c);
      ASSERT_FALSE(mismatch.has_value()) << *mismatch;
    }
  }
}

}  // namespace
}  // namespace poolsim
