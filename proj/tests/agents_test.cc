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

#include <gtest/gtest.h>

#include <map>

namespace poolsim {
namespace {

TenantId Tenant(std::uint32_t i) { return static_cast<TenantId>(i); }
IpId Ip(std::uint32_t i) { return static_cast<IpId>(i); }

std::vector<BehaviorSpec> SampleSpecs(std::uint64_t seed, int n) {
  Rng rng(seed);
  std::vector<BehaviorSpec> specs;
  for (int i = 0; i < n; ++i) {
    const int s_max = 2 + static_cast<int>(rng.Below(40));
    const int s_min = static_cast<int>(rng.Below(s_max + 1));
    specs.push_back(SampleBehaviorSpec(rng, s_min, s_max, 4, true));
  }
  return specs;
}

// Grants every allocation from an unbounded supply of fresh IPs.
class GrantAll {
 public:
  void Step(Agent& agent, SimTime now) {
    std::vector<Request> out;
    agent.Step(now, out);
    for (const Request& r : out) {
      if (r.kind == Request::Kind::kAllocate) {
        agent.OnGranted(r.tenant, Ip(next_++), now);
        ++allocations;
      } else {
        ++releases;
      }
    }
  }
  std::uint64_t allocations = 0;
  std::uint64_t releases = 0;

 private:
  std::uint32_t next_ = 0;
};

TEST(DailyProfileTest, MatchesPerSecondTargets) {
  const auto specs = SampleSpecs(21, 12);
  for (const auto& spec : specs) {
    const DailyProfile profile(spec);
    for (std::int64_t s = 0; s < kSecondsPerDay; s += 7) {
      const SimTime t(s + 3 * kSecondsPerDay);
      ASSERT_EQ(profile.TargetAt(t), TargetServers(t.day_fraction(), spec))
          << "second " << s;
    }
  }
}

TEST(DailyProfileTest, UntilChangeIsExact) {
  const auto specs = SampleSpecs(22, 6);
  Rng rng(4);
  for (const auto& spec : specs) {
    const DailyProfile profile(spec);
    for (int trial = 0; trial < 200; ++trial) {
      const SimTime t(static_cast<std::int64_t>(rng.Below(5 * kSecondsPerDay)));
      const auto k = profile.UntilChange(t);
      ASSERT_GE(k, 1);
      const int here = profile.TargetAt(t);
      if (k == DailyProfile::kNoChange) {
        EXPECT_TRUE(profile.changes().empty());
        continue;
      }
      ASSERT_EQ(profile.TargetAt(t + (k - 1)), here);
      ASSERT_NE(profile.TargetAt(t + k), here);
      const std::int64_t probe = (k - 1) / 2;
      ASSERT_EQ(profile.TargetAt(t + probe), here);
    }
  }
}

TEST(DailyProfileTest, StaticTenantNeverChanges) {
  const BehaviorSpec spec(50, 50, {0.3, 0.2}, {0.1, 0.9});
  const DailyProfile profile(spec);
  EXPECT_TRUE(profile.changes().empty());
  EXPECT_EQ(profile.TargetAt(SimTime(12345)), 50);
  EXPECT_EQ(profile.UntilChange(SimTime(0)), DailyProfile::kNoChange);
}

TEST(AutoscaleAgentTest, HoldsExactlyTheTargetWhenAlwaysGranted) {
  const auto specs = SampleSpecs(3, 20);
  AutoscaleAgent agent(Tenant(100), specs, Rng(9));
  GrantAll driver;
  for (std::int64_t s = 0; s < 2 * kSecondsPerDay; s += 60) {
    driver.Step(agent, SimTime(s));
    std::uint64_t total = 0;
    for (const auto& tenant : agent.tenants()) {
      const int want = TargetServers(SimTime(s).day_fraction(), tenant.spec);
      ASSERT_EQ(static_cast<int>(tenant.held.size()), want) << "t=" << s;
      total += tenant.held.size();
    }
    ASSERT_EQ(agent.held(), total);
  }
  EXPECT_EQ(driver.allocations - driver.releases, agent.held());
}

TEST(AutoscaleAgentTest, ReleasesOnlyIpsItHolds) {
  const auto specs = SampleSpecs(8, 5);
  AutoscaleAgent agent(Tenant(0), specs, Rng(1));
  std::map<std::uint32_t, std::uint32_t> owner;
  std::uint32_t next = 0;
  for (std::int64_t s = 0; s < kSecondsPerDay; s += 30) {
    std::vector<Request> out;
    agent.Step(SimTime(s), out);
    for (const Request& r : out) {
      if (r.kind == Request::Kind::kAllocate) {
        owner[next] = Index(r.tenant);
        agent.OnGranted(r.tenant, Ip(next++), SimTime(s));
      } else {
        ASSERT_EQ(owner.at(Index(r.ip)), Index(r.tenant));
        owner.erase(Index(r.ip));
      }
    }
  }
}

TEST(AutoscaleAgentTest, DeniedTenantRetriesNextSecond) {
  const BehaviorSpec spec(3, 3, {1.0}, {0.0});
  AutoscaleAgent agent(Tenant(0), {spec}, Rng(1));
  std::vector<Request> out;
  agent.Step(SimTime(0), out);
  ASSERT_EQ(out.size(), 3u);
  agent.OnGranted(Tenant(0), Ip(0), SimTime(0));
  agent.OnDenied(Tenant(0), SimTime(0));
  agent.OnDenied(Tenant(0), SimTime(0));
  out.clear();
  agent.Step(SimTime(1), out);
  EXPECT_EQ(out.size(), 2u);
  EXPECT_THROW(agent.OnGranted(Tenant(5), Ip(1), SimTime(1)), ContractViolation);
}

TEST(AutoscaleAgentTest, ProfileCountMustMatch) {
  const auto specs = SampleSpecs(1, 2);
  EXPECT_THROW(AutoscaleAgent(Tenant(0), specs, {DailyProfile(specs[0])}, Rng(1)),
               std::invalid_argument);
}

TEST(AdversaryAgentTest, SingleTenantCyclesHolds) {
  AdversaryAgent agent(Tenant(7), AdversaryParams{});
  EXPECT_TRUE(agent.adversarial());
  EXPECT_EQ(agent.tenant_count(), 1u);
  std::vector<Request> out;
  agent.Step(SimTime(0), out);
  ASSERT_EQ(out.size(), 60u);
  for (std::uint32_t i = 0; i < 60; ++i) {
    ASSERT_EQ(out[i], Request::Allocate(Tenant(7)));
    agent.OnGranted(Tenant(7), Ip(i), SimTime(0));
  }
  out.clear();
  agent.Step(SimTime(599), out);
  EXPECT_TRUE(out.empty());
  agent.Step(SimTime(600), out);
  ASSERT_EQ(out.size(), 120u);
  for (std::uint32_t i = 0; i < 60; ++i) {
    EXPECT_EQ(out[i], Request::Release(Tenant(7), Ip(i)));
    EXPECT_EQ(out[60 + i].kind, Request::Kind::kAllocate);
  }
  EXPECT_EQ(agent.allocations_issued(), 120u);
}

TEST(AdversaryAgentTest, MultiTenantRotatesAccounts) {
  AdversaryParams params;
  params.mode = AdversaryParams::Mode::kMulti;
  params.concurrency = 5;
  params.rotation_quota = 2;
  params.tenant_budget = 3;
  AdversaryAgent agent(Tenant(10), params);
  EXPECT_EQ(agent.tenant_count(), 3u);
  std::vector<Request> out;
  agent.Step(SimTime(0), out);
  std::vector<std::uint32_t> tenants;
  for (const auto& r : out) tenants.push_back(Index(r.tenant));
  EXPECT_EQ(tenants, (std::vector<std::uint32_t>{10, 10, 11, 11, 12}));
  for (std::uint32_t i = 0; i < 5; ++i) {
    agent.OnGranted(out[i].tenant, Ip(i), SimTime(0));
  }
  out.clear();
  agent.Step(SimTime(600), out);
  tenants.clear();
  for (const auto& r : out) {
    if (r.kind == Request::Kind::kAllocate) tenants.push_back(Index(r.tenant));
  }
  // Accounts wrap once the budget is spent.
  EXPECT_EQ(tenants, (std::vector<std::uint32_t>{12, 10, 10, 11, 11}));
}

TEST(AdversaryAgentTest, CountsNewIpsAndConfigsOnce) {
  AdversaryAgent agent(Tenant(0), AdversaryParams{});
  std::vector<LatentConfig> configs(2);
  configs[0].config_id = 11;
  configs[1].config_id = 12;
  auto first = agent.Observe(Ip(4), configs);
  EXPECT_TRUE(first.new_ip);
  EXPECT_EQ(first.new_configs, 2u);
  auto second = agent.Observe(Ip(4), configs);
  EXPECT_FALSE(second.new_ip);
  EXPECT_EQ(second.new_configs, 0u);
  EXPECT_TRUE(agent.Observe(Ip(9), {}).new_ip);
  EXPECT_EQ(agent.unique_ips(), 2u);
  EXPECT_EQ(agent.discovered(), (std::vector<std::uint64_t>{11, 12}));
}

TEST(AdversaryAgentTest, RejectsNonPositiveParameters) {
  AdversaryParams params;
  params.concurrency = 0;
  EXPECT_THROW(AdversaryAgent(Tenant(0), params), std::invalid_argument);
  params = {};
  params.hold_seconds = 0;
  EXPECT_THROW(AdversaryAgent(Tenant(0), params), std::invalid_argument);
}

TEST(TraceAgentTest, ReplaysAllocationsAndReleases) {
  TraceAgent agent({{Tenant(0), SimTime(0), SimTime(10)},
                    {Tenant(1), SimTime(5), SimTime(15)}},
                   100);
  std::vector<Request> out;
  agent.Step(SimTime(0), out);
  ASSERT_EQ(out, std::vector<Request>{Request::Allocate(Tenant(100))});
  agent.OnGranted(Tenant(100), Ip(3), SimTime(0));
  out.clear();
  agent.Step(SimTime(5), out);
  ASSERT_EQ(out, std::vector<Request>{Request::Allocate(Tenant(101))});
  agent.OnGranted(Tenant(101), Ip(4), SimTime(5));
  out.clear();
  agent.Step(SimTime(10), out);
  ASSERT_EQ(out, std::vector<Request>{Request::Release(Tenant(100), Ip(3))});
  out.clear();
  agent.Step(SimTime(15), out);
  ASSERT_EQ(out, std::vector<Request>{Request::Release(Tenant(101), Ip(4))});
  EXPECT_EQ(agent.held(), 0u);
}

TEST(TraceAgentTest, DeniedEventsAreDropped) {
  TraceAgent agent({{Tenant(0), SimTime(0), SimTime(10)},
                    {Tenant(1), SimTime(0), SimTime(20)}});
  std::vector<Request> out;
  agent.Step(SimTime(0), out);
  ASSERT_EQ(out.size(), 2u);
  agent.OnDenied(Tenant(0), SimTime(0));
  agent.OnGranted(Tenant(1), Ip(0), SimTime(0));
  out.clear();
  agent.Step(SimTime(10), out);
  EXPECT_TRUE(out.empty());
  agent.Step(SimTime(20), out);
  EXPECT_EQ(out, std::vector<Request>{Request::Release(Tenant(1), Ip(0))});
  EXPECT_EQ(agent.denied(), 1u);
}

TEST(TraceAgentTest, RejectsMalformedEvents) {
  EXPECT_THROW(TraceAgent({{Tenant(0), SimTime(5), SimTime(5)}}),
               std::invalid_argument);
  EXPECT_THROW(TraceAgent({{Tenant(0), SimTime(5), SimTime(9)},
                           {Tenant(0), SimTime(1), SimTime(9)}}),
               std::invalid_argument);
}

}  // namespace
}  // namespace poolsim
