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

#ifndef POOLSIM_SWEEP_H_
#define POOLSIM_SWEEP_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "poolsim/scenario.h"

namespace poolsim {

enum class SweepAxis { kArMax, kAlpha, kTenantBudget };

std::optional<SweepAxis> ParseSweepAxis(const std::string& name);
const char* SweepAxisName(SweepAxis axis);

// Parses "0.5,1,2". Throws ConfigError on an empty list or a bad number.
std::vector<double> ParseSweepValues(const std::string& list);

// The scenario for one sweep point: the axis value applied and the seed
// derived from the base seed and the point index. An ar_max point drops any
// fixed pool size so the pool is sized from demand.
Scenario SweepPointScenario(const Scenario& base, SweepAxis axis, double value,
                            std::size_t index);

struct SweepPoint {
  double value = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> unique_ip_yield;
  std::optional<double> lc_yield;
  double ar_max_observed = 0.0;
  std::optional<double> lc_prevalence;
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
};

// One run per value on up to `parallelism` threads. Results are in value
// order and do not depend on parallelism.
std::vector<SweepPoint> RunSweep(const Scenario& base, SweepAxis axis,
                                 const std::vector<double>& values,
                                 unsigned parallelism);

// Header comments carry the base scenario; then
// "value,unique_ip_yield,lc_yield,ar_max_observed,lc_prevalence,seed,error".
void WriteSweepCsv(std::ostream& out, const Scenario& base, SweepAxis axis,
                   const std::vector<SweepPoint>& points);

}  // namespace poolsim

#endif  // POOLSIM_SWEEP_H_
