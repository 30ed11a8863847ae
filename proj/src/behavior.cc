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

#include "poolsim/behavior.h"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numbers>
#include <stdexcept>

namespace poolsim {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMinAmplitudeSum = 1e-9;
}  // namespace

BehaviorSpec::BehaviorSpec(int s_min, int s_max,
                           std::vector<double> amplitudes,
                           std::vector<double> phases)
    : s_min_(s_min),
      s_max_(s_max),
      amplitudes_(std::move(amplitudes)),
      phases_(std::move(phases)) {
  if (s_min_ < 0 || s_max_ < s_min_) {
    throw std::invalid_argument("behavior needs 0 <= s_min <= s_max");
  }
  if (amplitudes_.empty() || amplitudes_.size() != phases_.size()) {
    throw std::invalid_argument("behavior needs matching, non-empty terms");
  }
  double amplitude_sum = 0.0;
  double curvature_sum = 0.0;
  for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
    weight_sum_ += amplitudes_[i] / static_cast<double>(i + 1);
    amplitude_sum += amplitudes_[i];
    curvature_sum += amplitudes_[i] * static_cast<double>(i + 1);
  }
  if (!(weight_sum_ > kMinAmplitudeSum)) {
    throw std::invalid_argument("behavior amplitudes are all zero");
  }
  // d/dt of the series is 2*pi*sum(a_i cos(..)) / sum(a_i / i) per day.
  max_slope_ = static_cast<double>(s_max_ - s_min_) * kTwoPi * amplitude_sum /
               weight_sum_ / static_cast<double>(kSecondsPerDay);
  max_curvature_ = static_cast<double>(s_max_ - s_min_) * kTwoPi * kTwoPi *
                   curvature_sum / weight_sum_ /
                   static_cast<double>(kSecondsPerDay * kSecondsPerDay);
}

double FourierDeviation(double t, const BehaviorSpec& spec) {
  double numerator = 0.0;
  for (std::size_t i = 0; i < spec.amplitudes_.size(); ++i) {
    const double k = static_cast<double>(i + 1);
    numerator += spec.amplitudes_[i] / k *
                 std::sin(kTwoPi * k * (t + spec.phases_[i]));
  }
  return numerator / spec.weight_sum_;
}

double ServerDemand(double t, const BehaviorSpec& spec) {
  const double mean = 0.5 * (spec.s_max() + spec.s_min());
  return mean + (spec.s_max() - spec.s_min()) * FourierDeviation(t, spec);
}

double ServerSlope(double t, const BehaviorSpec& spec) {
  double sum = 0.0;
  for (std::size_t i = 0; i < spec.amplitudes_.size(); ++i) {
    const double k = static_cast<double>(i + 1);
    sum += spec.amplitudes_[i] * std::cos(kTwoPi * k * (t + spec.phases_[i]));
  }
  return (spec.s_max() - spec.s_min()) * kTwoPi * sum / spec.weight_sum_ /
         static_cast<double>(kSecondsPerDay);
}

int TargetServers(double t, const BehaviorSpec& spec) {
  if (spec.s_min() == spec.s_max()) return spec.s_min();
  const long rounded = std::lround(ServerDemand(t, spec));
  return static_cast<int>(std::clamp<long>(rounded, spec.s_min(), spec.s_max()));
}

TargetOutlook PlanTarget(SimTime now, const BehaviorSpec& spec) {
  constexpr std::int64_t kForever = std::int64_t{1} << 40;
  const double t = now.day_fraction();
  const double slope = spec.max_slope_per_second();
  if (spec.s_min() == spec.s_max() || slope <= 0.0) {
    return {spec.s_min(), kForever};
  }

  // One pass for the deviation and its derivative. The deviation sum is
  // accumulated exactly as FourierDeviation does.
  double numerator = 0.0;
  double cosine_sum = 0.0;
  for (std::size_t i = 0; i < spec.amplitudes_.size(); ++i) {
    const double k = static_cast<double>(i + 1);
    const double angle = kTwoPi * k * (t + spec.phases_[i]);
    numerator += spec.amplitudes_[i] / k * std::sin(angle);
    cosine_sum += spec.amplitudes_[i] * std::cos(angle);
  }
  const double range = spec.s_max() - spec.s_min();
  const double demand = 0.5 * (spec.s_max() + spec.s_min()) +
                        range * (numerator / spec.weight_sum_);
  const int target = static_cast<int>(
      std::clamp<long>(std::lround(demand), spec.s_min(), spec.s_max()));

  // Distance from demand to the edge of the interval that rounds to target;
  // the clamped ends are unbounded.
  double distance = kForever;
  if (target > spec.s_min()) distance = std::min(distance, demand - (target - 0.5));
  if (target < spec.s_max()) distance = std::min(distance, (target + 0.5) - demand);
  distance -= 1e-7;  // float slack on the evaluated demand
  if (distance <= 0.0) return {target, 1};
  distance *= 1.0 - 1e-9;
  // |S(now + x) - S(now)| <= v x + c x^2 / 2 with v the current slope and c
  // the curvature bound; the global slope bound also holds. Take the later.
  double reach = distance / slope;
  const double v = std::abs(range * kTwoPi * cosine_sum / spec.weight_sum_ /
                            static_cast<double>(kSecondsPerDay));
  const double c = spec.max_curvature_per_second();
  if (c > 0.0) {
    reach = std::max(reach, (std::sqrt(v * v + 2.0 * c * distance) - v) / c);
  }
  const double steps = std::floor(reach);
  if (steps >= static_cast<double>(kForever)) return {target, kForever};
  return {target, std::max<std::int64_t>(1, static_cast<std::int64_t>(steps))};
}

std::int64_t StableSeconds(SimTime now, const BehaviorSpec& spec) {
  return PlanTarget(now, spec).stable_seconds;
}

DailyProfile::DailyProfile(const BehaviorSpec& spec) {
  TargetOutlook outlook = PlanTarget(SimTime(0), spec);
  initial_ = outlook.target;
  int current = initial_;
  // The target is constant through t + stable - 1, so the first evaluation
  // that differs lands exactly on a change.
  for (std::int64_t t = outlook.stable_seconds; t < kSecondsPerDay;
       t += outlook.stable_seconds) {
    outlook = PlanTarget(SimTime(t), spec);
    if (outlook.target != current) {
      current = outlook.target;
      changes_.push_back({static_cast<std::int32_t>(t), current});
    }
  }
}

namespace {
std::int64_t SecondOfDay(SimTime t) {
  const std::int64_t second = t.seconds() % kSecondsPerDay;
  return second < 0 ? second + kSecondsPerDay : second;
}
}  // namespace

int DailyProfile::TargetAt(SimTime t) const {
  const std::int64_t second = SecondOfDay(t);
  auto it = std::upper_bound(
      changes_.begin(), changes_.end(), second,
      [](std::int64_t s, const Change& c) { return s < c.second; });
  return it == changes_.begin() ? initial_ : std::prev(it)->target;
}

std::int64_t DailyProfile::UntilChange(SimTime t) const {
  if (changes_.empty()) return kNoChange;
  const std::int64_t second = SecondOfDay(t);
  auto it = std::upper_bound(
      changes_.begin(), changes_.end(), second,
      [](std::int64_t s, const Change& c) { return s < c.second; });
  if (it != changes_.end()) return it->second - second;
  // Past the last change: the day wraps back to the initial target.
  if (changes_.back().target != initial_) return kSecondsPerDay - second;
  return changes_.front().second + kSecondsPerDay - second;
}

BehaviorSpec SampleBehaviorSpec(Rng& rng, int s_min, int s_max, int n_terms,
                                bool bias_phase1) {
  if (n_terms < 1) throw std::invalid_argument("n_terms must be >= 1");
  std::vector<double> amplitudes(n_terms);
  std::vector<double> phases(n_terms);
  for (;;) {
    double sum = 0.0;
    for (int i = 0; i < n_terms; ++i) {
      amplitudes[i] = rng.Uniform();
      phases[i] = rng.Uniform();
      sum += amplitudes[i];
    }
    if (sum >= kMinAmplitudeSum) break;
  }
  if (bias_phase1) phases[0] = rng.Uniform(0.0, 0.5);
  return BehaviorSpec(s_min, s_max, std::move(amplitudes), std::move(phases));
}

std::optional<LatentConfig> SampleLatentConfig(Rng& rng,
                                               const LatentConfigModel& model,
                                               std::int64_t d_a, SimTime t_r,
                                               TenantId tenant) {
  if (d_a < 0) throw ContractViolation("negative allocation duration");
  if (!rng.Bernoulli(model.p_c)) return std::nullopt;
  // Inverse CDF of the exponential with mean d_a.
  const double d_v =
      -static_cast<double>(d_a) * std::log(rng.UniformOpenClosed());
  const auto whole = static_cast<std::int64_t>(std::llround(d_v));
  if (whole <= 0) return std::nullopt;
  LatentConfig config;
  config.created_by = tenant;
  config.t_r = t_r;
  config.t_c = t_r + whole;
  return config;
}

}  // namespace poolsim
