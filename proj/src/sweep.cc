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

#include "poolsim/sweep.h"

#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <iomanip>
#include <sstream>
#include <thread>

namespace poolsim {

std::optional<SweepAxis> ParseSweepAxis(const std::string& name) {
  if (name == "ar_max") return SweepAxis::kArMax;
  if (name == "alpha") return SweepAxis::kAlpha;
  if (name == "tenant_budget") return SweepAxis::kTenantBudget;
  return std::nullopt;
}

const char* SweepAxisName(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kArMax: return "ar_max";
    case SweepAxis::kAlpha: return "alpha";
    case SweepAxis::kTenantBudget: return "tenant_budget";
  }
  return "?";
}

std::vector<double> ParseSweepValues(const std::string& list) {
  std::vector<double> values;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    if (first == std::string::npos) throw ConfigError("empty sweep value");
    item = item.substr(first, last - first + 1);
    double value = 0.0;
    const auto [end, ec] =
        std::from_chars(item.data(), item.data() + item.size(), value);
    if (ec != std::errc() || end != item.data() + item.size() ||
        !std::isfinite(value)) {
      throw ConfigError("bad sweep value '" + item + "'");
    }
    values.push_back(value);
  }
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  return values;
}

Scenario SweepPointScenario(const Scenario& base, SweepAxis axis, double value,
                            std::size_t index) {
  Scenario scenario = base;
  scenario.run.seed = Rng(base.run.seed).Split(index)();
  switch (axis) {
    case SweepAxis::kArMax:
      scenario.run.ar_max = value;
      scenario.run.pool_size.reset();
      break;
    case SweepAxis::kAlpha:
      scenario.run.alpha = value;
      break;
    case SweepAxis::kTenantBudget:
      if (!scenario.adversary) {
        throw ConfigError("tenant_budget sweep needs an adversary");
      }
      if (!(value >= 1.0) || value != std::floor(value) || value > 4.0e9) {
        throw ConfigError("tenant_budget must be a positive integer");
      }
      scenario.adversary->tenant_budget = static_cast<std::uint32_t>(value);
      break;
  }
  scenario.run.Validate();
  return scenario;
}

namespace {

SweepPoint RunPoint(const Scenario& base, SweepAxis axis, double value,
                    std::size_t index) {
  SweepPoint point;
  point.value = value;
  try {
    const Scenario scenario = SweepPointScenario(base, axis, value, index);
    point.seed = scenario.run.seed;
    const RunStats stats = RunScenario(scenario);
    point.unique_ip_yield = UniqueIpYield(stats);
    point.lc_yield = LcYield(stats);
    point.ar_max_observed = ObservedArMax(stats);
    point.lc_prevalence = LcPrevalence(stats);
  } catch (const std::exception& e) {
    point.error = e.what();
    if (point.error.empty()) point.error = "failed";
  }
  return point;
}

void WriteOptional(std::ostream& out, const std::optional<double>& value) {
  if (value) out << *value;
}

}  // namespace

std::vector<SweepPoint> RunSweep(const Scenario& base, SweepAxis axis,
                                 const std::vector<double>& values,
                                 unsigned parallelism) {
  std::vector<SweepPoint> points(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      points[i] = RunPoint(base, axis, values[i], i);
    }
  };
  const unsigned threads = std::max(
      1u, std::min<unsigned>(parallelism, static_cast<unsigned>(values.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  return points;
}

void WriteSweepCsv(std::ostream& out, const Scenario& base, SweepAxis axis,
                   const std::vector<SweepPoint>& points) {
  out << "# config: " << ToJson(base).dump() << "\n";
  out << "# seed: " << base.run.seed << "\n";
  out << "# axis: " << SweepAxisName(axis) << "\n";
  out << "value,unique_ip_yield,lc_yield,ar_max_observed,lc_prevalence,seed,"
         "error\n";
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(10);
  for (const SweepPoint& p : points) {
    out << p.value << ',';
    WriteOptional(out, p.unique_ip_yield);
    out << ',';
    WriteOptional(out, p.lc_yield);
    out << ',';
    if (p.ok()) out << p.ar_max_observed;
    out << ',';
    WriteOptional(out, p.lc_prevalence);
    out << ',' << p.seed << ',';
    std::string error = p.error;
    for (char& c : error) {
      if (c == ',' || c == '\n' || c == '\r') c = ' ';
    }
    out << error << "\n";
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace poolsim
