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

#ifndef POOLSIM_CONFIG_H_
#define POOLSIM_CONFIG_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "poolsim/policy.h"

namespace poolsim {

// Bad configuration file or value.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  // Either given, or derived from peak demand and ar_max.
  std::optional<std::uint64_t> pool_size;
  double ar_max = 0.9;
  std::uint64_t seed = 1;
  std::int64_t step_seconds = 1;
  std::int64_t warmup_days = 10;
  std::int64_t adversary_days = 10;
  std::int64_t d_reuse = 1800;
  double alpha = 8.0;
  double p_c = 0.5;
  PolicyKind policy = PolicyKind::kRandom;
  std::int64_t ar_sample_seconds = 60;
  std::uint64_t sample_capacity = 1'000'000;

  std::int64_t warmup_seconds() const { return warmup_days * 86400; }
  std::int64_t total_seconds() const {
    return (warmup_days + adversary_days) * 86400;
  }
  PolicyParams policy_params() const { return {d_reuse, alpha}; }

  // Throws ConfigError on out-of-range values.
  void Validate() const;
};

// Missing keys keep their defaults; unknown keys are ignored so that one
// file can carry scenario sections as well. Throws ConfigError.
RunConfig RunConfigFromJson(const nlohmann::json& json,
                            RunConfig defaults = {});
nlohmann::json ToJson(const RunConfig& config);

}  // namespace poolsim

#endif  // POOLSIM_CONFIG_H_
