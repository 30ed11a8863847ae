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

#ifndef POOLSIM_BEHAVIOR_H_
#define POOLSIM_BEHAVIOR_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "poolsim/core.h"
#include "poolsim/rng.h"

namespace poolsim {

// Daily autoscaling profile of one tenant: a randomized Fourier series with a
// one-day base period, scaled to swing between s_min and s_max servers.
class BehaviorSpec {
 public:
  // Throws std::invalid_argument if the limits are inverted, the term vectors
  // are empty or of different lengths, or every amplitude is zero.
  BehaviorSpec(int s_min, int s_max, std::vector<double> amplitudes,
               std::vector<double> phases);

  int s_min() const { return s_min_; }
  int s_max() const { return s_max_; }
  int n_terms() const { return static_cast<int>(amplitudes_.size()); }
  const std::vector<double>& amplitudes() const { return amplitudes_; }
  const std::vector<double>& phases() const { return phases_; }

  // Upper bound on |dS/dt| in servers per simulated second.
  double max_slope_per_second() const { return max_slope_; }
  // Upper bound on |d2S/dt2| in servers per second squared.
  double max_curvature_per_second() const { return max_curvature_; }

 private:
  friend double FourierDeviation(double t, const BehaviorSpec& spec);
  friend double ServerSlope(double t, const BehaviorSpec& spec);
  friend struct TargetOutlook PlanTarget(SimTime now, const BehaviorSpec& spec);

  int s_min_;
  int s_max_;
  std::vector<double> amplitudes_;
  std::vector<double> phases_;
  double weight_sum_ = 0.0;  // sum of a_i / i
  double max_slope_ = 0.0;
  double max_curvature_ = 0.0;
};

// Relative deviation from mean usage at day fraction t; always in [-1, 1].
double FourierDeviation(double t, const BehaviorSpec& spec);

// Unrounded server demand, S_mean + (s_max - s_min) * deviation.
double ServerDemand(double t, const BehaviorSpec& spec);

// dS/dt at day fraction t, in servers per second.
double ServerSlope(double t, const BehaviorSpec& spec);

// Demand rounded to whole servers and clamped to [s_min, s_max].
int TargetServers(double t, const BehaviorSpec& spec);

// Number of whole seconds k >= 1 such that TargetServers is guaranteed to be
// unchanged at now, now+1, ..., now+k-1. Conservative: derived from slope and
// curvature bounds, so the target may in fact hold for longer.
std::int64_t StableSeconds(SimTime now, const BehaviorSpec& spec);

struct TargetOutlook {
  int target = 0;               // TargetServers at now
  std::int64_t stable_seconds;  // StableSeconds at now
};

// Both of the above from a single evaluation of the series.
TargetOutlook PlanTarget(SimTime now, const BehaviorSpec& spec);

// A tenant's exact target schedule over one day, found by stepping through
// the day with PlanTarget. Targets repeat daily, so one profile serves a run
// of any length without evaluating the series again.
class DailyProfile {
 public:
  struct Change {
    std::int32_t second;  // of the day, in (0, 86400)
    std::int32_t target;
  };
  static constexpr std::int64_t kNoChange = std::int64_t{1} << 40;

  explicit DailyProfile(const BehaviorSpec& spec);

  int TargetAt(SimTime t) const;
  // Seconds from t until the target next differs from TargetAt(t), or
  // kNoChange for a constant profile.
  std::int64_t UntilChange(SimTime t) const;

  int initial_target() const { return initial_; }
  const std::vector<Change>& changes() const { return changes_; }

 private:
  int initial_;
  std::vector<Change> changes_;
};

// Amplitudes and phases uniform on [0, 1]. With bias_phase1 the first phase
// is drawn from [0, 0.5) instead, which lines peak loads up across tenants.
BehaviorSpec SampleBehaviorSpec(Rng& rng, int s_min, int s_max, int n_terms,
                                bool bias_phase1);

struct LatentConfigModel {
  double p_c = 0.5;
};

// With probability p_c, a latent configuration whose lifetime after release
// is exponential with mean d_a (rounded to whole seconds). A zero lifetime
// is no configuration at all. The returned config_id is 0; the caller owns
// id assignment.
std::optional<LatentConfig> SampleLatentConfig(Rng& rng,
                                               const LatentConfigModel& model,
                                               std::int64_t d_a, SimTime t_r,
                                               TenantId tenant);

}  // namespace poolsim

#endif  // POOLSIM_BEHAVIOR_H_
