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

#ifndef POOLSIM_SCENARIO_H_
#define POOLSIM_SCENARIO_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "poolsim/agents.h"
#include "poolsim/behavior.h"
#include "poolsim/config.h"
#include "poolsim/engine.h"
#include "poolsim/ingest.h"

namespace poolsim {

// Population of autoscaling tenants. s_max is log-uniform on
// [s_max_low, s_max_high]; s_min is s_max times a uniform fraction.
struct TenantMix {
  std::uint32_t count = 1000;
  int n_terms = 4;
  bool bias_phase1 = true;
  int s_max_low = 2;
  int s_max_high = 50;
  double s_min_fraction_low = 0.0;
  double s_min_fraction_high = 0.8;
  // Share of tenants pinned at s_min = s_max.
  double static_fraction = 0.0;
};

// Cluster-style batch jobs: Zipf-weighted users, each with its own mean job
// length (log-uniform), exponential job lengths, uniform arrivals.
struct SyntheticTraceParams {
  std::uint64_t jobs = 1'000'000;
  std::uint32_t users = 2'000;
  std::int64_t days = 20;
  double zipf_exponent = 1.1;
  double min_mean_seconds = 60.0;
  double max_mean_seconds = 86400.0;
};

struct TraceSource {
  std::string path;  // normalized allocation CSV; used when set
  SyntheticTraceParams synthetic;
};

struct Scenario {
  std::string name = "custom";
  RunConfig run;
  TenantMix tenants;
  std::optional<AdversaryParams> adversary;
  std::optional<TraceSource> trace;
};

// "benign", "single-tenant", "multi-tenant" or "trace-replay". Throws
// ConfigError for other names.
Scenario BuiltinScenario(const std::string& name);
std::vector<std::string> BuiltinScenarioNames();

// A "scenario" key selects the template the other keys override.
Scenario ScenarioFromJson(const nlohmann::json& json);
nlohmann::json ToJson(const Scenario& scenario);

Trace GenerateSyntheticTrace(const SyntheticTraceParams& params, Rng rng);

// Highest simultaneous sum of tenant targets over one day, evaluated at
// every step boundary.
std::uint64_t PeakDemand(std::span<const DailyProfile> profiles,
                         std::int64_t step_seconds);

std::vector<BehaviorSpec> SampleTenants(const TenantMix& mix, Rng rng);

struct PreparedRun {
  RunConfig config;  // pool_size resolved
  std::uint64_t peak_demand = 0;
  Roster roster;     // autoscale, trace, adversary
};

// Samples the population, loads or synthesizes the trace, sizes the pool.
// Throws ConfigError when the trace cannot be loaded.
PreparedRun Prepare(const Scenario& scenario);

RunStats RunScenario(const Scenario& scenario);

}  // namespace poolsim

#endif  // POOLSIM_SCENARIO_H_
