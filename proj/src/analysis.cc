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

#include "poolsim/analysis.h"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace poolsim {

void RunStats::Merge(const RunStats& other) {
  pool_size = std::max(pool_size, other.pool_size);
  ar_sample_seconds = std::min(ar_sample_seconds, other.ar_sample_seconds);
  simulated_seconds = std::max(simulated_seconds, other.simulated_seconds);

  std::map<std::int64_t, SeriesPoint> by_time;
  const std::vector<SeriesPoint>* sources[] = {&series, &other.series};
  for (const auto* source : sources) {
    for (const SeriesPoint& p : *source) {
      auto [it, inserted] = by_time.try_emplace(p.time_s, p);
      if (inserted) continue;
      SeriesPoint& q = it->second;
      q.allocated += p.allocated;
      q.pool_size += p.pool_size;
      q.allocations += p.allocations;
      q.adversary_allocations += p.adversary_allocations;
      q.unique_ips += p.unique_ips;
      q.discovered_configs += p.discovered_configs;
      q.lc_allocations += p.lc_allocations;
      q.benign_allocations += p.benign_allocations;
      q.benign_lc_allocations += p.benign_lc_allocations;
    }
  }
  series.clear();
  for (auto& [time, point] : by_time) series.push_back(point);
  peak_allocated = std::max(peak_allocated, other.peak_allocated);

  allocations += other.allocations;
  releases += other.releases;
  pool_exhausted += other.pool_exhausted;
  benign_allocations += other.benign_allocations;
  benign_lc_allocations += other.benign_lc_allocations;
  configs_created += other.configs_created;
  adversary_allocations += other.adversary_allocations;
  adversary_pool_exhausted += other.adversary_pool_exhausted;
  unique_ips += other.unique_ips;
  discovered_configs += other.discovered_configs;
  lc_allocations += other.lc_allocations;
  policy.own_tag_hits += other.policy.own_tag_hits;
  policy.reuse_fallbacks += other.policy.reuse_fallbacks;

  FreeDurations& fd = free_durations;
  const FreeDurations& ofd = other.free_durations;
  if (ofd.count > 0) {
    fd.min = fd.count == 0 ? ofd.min : std::min(fd.min, ofd.min);
    fd.max = fd.count == 0 ? ofd.max : std::max(fd.max, ofd.max);
    fd.count += ofd.count;
    fd.sum += ofd.sum;
  }
  fd.sample.Merge(ofd.sample);
  exploits.Merge(other.exploits);
}

namespace {

std::optional<double> Ratio(std::uint64_t numerator, std::uint64_t denominator) {
  if (denominator == 0) return std::nullopt;
  return static_cast<double>(numerator) / static_cast<double>(denominator);
}

template <typename Field>
std::uint64_t SumWindow(const RunStats& stats, SimTime from, SimTime to,
                        Field field) {
  std::uint64_t total = 0;
  for (const SeriesPoint& p : stats.series) {
    if (p.time_s >= from.seconds() && p.time_s < to.seconds()) total += p.*field;
  }
  return total;
}

}  // namespace

std::optional<double> UniqueIpYield(const RunStats& stats) {
  return Ratio(stats.unique_ips, stats.adversary_allocations);
}

std::optional<double> LcYield(const RunStats& stats) {
  return Ratio(stats.lc_allocations, stats.adversary_allocations);
}

std::optional<double> UniqueIpYield(const RunStats& stats, SimTime from,
                                    SimTime to) {
  return Ratio(SumWindow(stats, from, to, &SeriesPoint::unique_ips),
               SumWindow(stats, from, to, &SeriesPoint::adversary_allocations));
}

std::optional<double> LcYield(const RunStats& stats, SimTime from, SimTime to) {
  return Ratio(SumWindow(stats, from, to, &SeriesPoint::lc_allocations),
               SumWindow(stats, from, to, &SeriesPoint::adversary_allocations));
}

std::optional<double> LcPrevalence(const RunStats& stats) {
  return Ratio(stats.benign_lc_allocations, stats.benign_allocations);
}

double ObservedArMax(const RunStats& stats) {
  if (stats.pool_size == 0) return 0.0;
  return AllocationRatio(stats.peak_allocated, stats.pool_size);
}

std::optional<EmpiricalCdf> EmpiricalCdf::FromSamples(
    std::vector<std::int64_t> samples) {
  if (samples.empty()) return std::nullopt;
  std::sort(samples.begin(), samples.end());
  return EmpiricalCdf(std::move(samples));
}

std::int64_t EmpiricalCdf::Quantile(double q) const {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("q outside [0, 1]");
  const double n = static_cast<double>(sorted_.size());
  auto rank = static_cast<std::int64_t>(std::ceil(q * n)) - 1;
  rank = std::clamp<std::int64_t>(rank, 0,
                                  static_cast<std::int64_t>(sorted_.size()) - 1);
  return sorted_[static_cast<std::size_t>(rank)];
}

std::optional<EmpiricalCdf> FreeDurationDistribution(const RunStats& stats) {
  return EmpiricalCdf::FromSamples(stats.free_durations.sample.SortedValues());
}

double FitExponentialMle(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("MLE of an empty sample");
  double sum = 0.0;
  for (double x : samples) {
    if (!(x > 0.0)) throw std::invalid_argument("MLE sample is not positive");
    sum += x;
  }
  return static_cast<double>(samples.size()) / sum;
}

nlohmann::json ToJson(const RunStats& stats) {
  using nlohmann::json;
  auto optional_number = [](std::optional<double> v) -> json {
    return v ? json(*v) : json(nullptr);
  };

  json series = json::array();
  for (const SeriesPoint& p : stats.series) {
    series.push_back({{"time_s", p.time_s},
                      {"allocated", p.allocated},
                      {"pool_size", p.pool_size},
                      {"allocations", p.allocations},
                      {"adversary_allocations", p.adversary_allocations},
                      {"unique_ips", p.unique_ips},
                      {"discovered_configs", p.discovered_configs},
                      {"lc_allocations", p.lc_allocations},
                      {"benign_allocations", p.benign_allocations},
                      {"benign_lc_allocations", p.benign_lc_allocations}});
  }

  const FreeDurations& fd = stats.free_durations;
  json free_durations = {{"count", fd.count},
                         {"sample_capacity", fd.sample.capacity()},
                         {"sample_size", fd.sample.size()}};
  if (fd.count > 0) {
    free_durations["min"] = fd.min;
    free_durations["max"] = fd.max;
    free_durations["mean"] =
        static_cast<double>(fd.sum) / static_cast<double>(fd.count);
  }
  if (auto cdf = FreeDurationDistribution(stats)) {
    json quantiles;
    for (double q : {0.0, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0}) {
      std::ostringstream key;
      key << q;
      quantiles[key.str()] = cdf->Quantile(q);
    }
    free_durations["quantiles"] = quantiles;
  }

  json exploits = json::array();
  for (const ExploitRecord& r : stats.exploits.SortedValues()) {
    exploits.push_back({{"config_id", r.config_id},
                        {"discovered_at", r.discovered_at},
                        {"victim", r.victim},
                        {"released_at", r.released_at}});
  }

  return json{
      {"pool", {{"pool_size", stats.pool_size},
                {"peak_allocated", stats.peak_allocated},
                {"ar_max_observed", ObservedArMax(stats)},
                {"simulated_seconds", stats.simulated_seconds}}},
      {"totals", {{"allocations", stats.allocations},
                  {"releases", stats.releases},
                  {"pool_exhausted", stats.pool_exhausted},
                  {"benign_allocations", stats.benign_allocations},
                  {"benign_lc_allocations", stats.benign_lc_allocations},
                  {"configs_created", stats.configs_created}}},
      {"adversary", {{"allocations", stats.adversary_allocations},
                     {"pool_exhausted", stats.adversary_pool_exhausted},
                     {"unique_ips", stats.unique_ips},
                     {"discovered_configs", stats.discovered_configs},
                     {"lc_allocations", stats.lc_allocations}}},
      {"metrics", {{"unique_ip_yield", optional_number(UniqueIpYield(stats))},
                   {"lc_yield", optional_number(LcYield(stats))},
                   {"lc_prevalence", optional_number(LcPrevalence(stats))}}},
      {"policy", {{"own_tag_hits", stats.policy.own_tag_hits},
                  {"reuse_fallbacks", stats.policy.reuse_fallbacks}}},
      {"free_durations", free_durations},
      {"exploits", {{"sample_capacity", stats.exploits.capacity()},
                    {"records", exploits}}},
      {"series", {{"sample_seconds", stats.ar_sample_seconds},
                  {"points", series}}},
  };
}

void WriteSeriesCsv(std::ostream& out, const RunStats& stats,
                    const std::string& header) {
  std::istringstream lines(header);
  for (std::string line; std::getline(lines, line);) out << "# " << line << '\n';
  out << "time_s,ar,cumulative_unique_ips,cumulative_configs\n";
  std::uint64_t unique = 0;
  std::uint64_t configs = 0;
  for (const SeriesPoint& p : stats.series) {
    unique += p.unique_ips;
    configs += p.discovered_configs;
    out << p.time_s << ',' << p.ar() << ',' << unique << ',' << configs << '\n';
  }
}

void WriteFreeDurationCdfCsv(std::ostream& out, const RunStats& stats,
                             const std::string& header) {
  std::istringstream lines(header);
  for (std::string line; std::getline(lines, line);) out << "# " << line << '\n';
  out << "quantile,free_seconds\n";
  const auto cdf = FreeDurationDistribution(stats);
  if (!cdf) return;
  for (int permille = 0; permille <= 1000; ++permille) {
    out << permille / 1000.0 << ',' << cdf->Quantile(permille / 1000.0) << '\n';
  }
}

}  // namespace poolsim
