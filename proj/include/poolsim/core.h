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

#ifndef POOLSIM_CORE_H_
#define POOLSIM_CORE_H_

#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace poolsim {

inline constexpr std::int64_t kSecondsPerDay = 86400;

// Simulated wall clock in whole seconds since run start. The "never" value
// orders before every real time so that never-released IPs look oldest.
class SimTime {
 public:
  constexpr SimTime() = default;
  constexpr explicit SimTime(std::int64_t seconds) : seconds_(seconds) {}

  static constexpr SimTime Never() {
    // Quartered so that now - Never() cannot overflow.
    return SimTime(std::numeric_limits<std::int64_t>::min() / 4);
  }

  constexpr std::int64_t seconds() const { return seconds_; }
  constexpr bool is_never() const { return seconds_ == Never().seconds_; }

  // Position within the simulated day, in [0, 1).
  constexpr double day_fraction() const {
    std::int64_t s = seconds_ % kSecondsPerDay;
    if (s < 0) s += kSecondsPerDay;
    return static_cast<double>(s) / static_cast<double>(kSecondsPerDay);
  }

  constexpr SimTime operator+(std::int64_t delta) const {
    return SimTime(seconds_ + delta);
  }
  constexpr std::int64_t operator-(SimTime other) const {
    return seconds_ - other.seconds_;
  }

  constexpr auto operator<=>(const SimTime&) const = default;

 private:
  std::int64_t seconds_ = 0;
};

// Dense index into the IP pool, [0, pool_size).
enum class IpId : std::uint32_t {};
// Tenant identifiers are dense per run; the roster hands out ranges.
enum class TenantId : std::uint32_t {};

constexpr std::uint32_t Index(IpId ip) { return static_cast<std::uint32_t>(ip); }
constexpr std::uint32_t Index(TenantId t) {
  return static_cast<std::uint32_t>(t);
}

// Configuration left behind after a release; exploitable until t_c.
struct LatentConfig {
  std::uint64_t config_id = 0;
  TenantId created_by{};
  SimTime t_r;
  SimTime t_c;
  bool discovered = false;

  std::int64_t duration_of_vulnerability() const { return t_c - t_r; }
};

struct IpRecord {
  IpId id{};
  bool allocated = false;
  SimTime t_a = SimTime::Never();
  SimTime t_r = SimTime::Never();
  // Cooldown expiry, integer seconds. Only the segmented policy sets it.
  std::int64_t t_cd = 0;
  std::optional<TenantId> tag;
  std::vector<LatentConfig> configs;
};

struct TenantStats {
  TenantId id{};
  std::int64_t d_a_total = 0;
  std::uint64_t n_a = 0;

  double mean_allocation_seconds() const {
    return n_a == 0 ? 0.0
                    : static_cast<double>(d_a_total) / static_cast<double>(n_a);
  }
};

// Broken precondition or pairing rule. Not recoverable within a run.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Fraction of the pool currently allocated.
double AllocationRatio(std::uint64_t allocated_count, std::uint64_t pool_size);

// Smallest pool for which peak_demand stays at or under ar_max.
std::uint64_t DerivePoolSize(std::uint64_t peak_demand, double ar_max);

}  // namespace poolsim

#endif  // POOLSIM_CORE_H_
