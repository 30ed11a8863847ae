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

#ifndef POOLSIM_ANALYSIS_H_
#define POOLSIM_ANALYSIS_H_

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "poolsim/core.h"
#include "poolsim/policy.h"

namespace poolsim {

// Bounded sample that keeps the `capacity` entries with the smallest key
// hashes. Unlike a classic reservoir it does not depend on insertion order,
// so merging two samples gives exactly the sample of the combined stream.
template <typename T>
class BottomKSample {
 public:
  BottomKSample() = default;
  explicit BottomKSample(std::size_t capacity) : capacity_(capacity) {}

  void Add(std::uint64_t key_hash, T value) {
    if (capacity_ == 0) return;
    Entry entry{key_hash, std::move(value)};
    if (heap_.size() < capacity_) {
      heap_.push_back(std::move(entry));
      std::push_heap(heap_.begin(), heap_.end());
    } else if (entry < heap_.front()) {
      std::pop_heap(heap_.begin(), heap_.end());
      heap_.back() = std::move(entry);
      std::push_heap(heap_.begin(), heap_.end());
    }
  }

  void Merge(const BottomKSample& other) {
    capacity_ = std::max(capacity_, other.capacity_);
    for (const Entry& e : other.heap_) Add(e.first, e.second);
  }

  std::size_t size() const { return heap_.size(); }
  std::size_t capacity() const { return capacity_; }

  // Retained values in ascending order.
  std::vector<T> SortedValues() const {
    std::vector<T> values;
    values.reserve(heap_.size());
    for (const Entry& e : heap_) values.push_back(e.second);
    std::sort(values.begin(), values.end());
    return values;
  }

 private:
  using Entry = std::pair<std::uint64_t, T>;
  std::size_t capacity_ = 1'000'000;
  std::vector<Entry> heap_;  // max-heap
};

// One AR sample plus the event counts accumulated since the previous one.
struct SeriesPoint {
  std::int64_t time_s = 0;
  std::uint64_t allocated = 0;
  std::uint64_t pool_size = 0;
  std::uint64_t allocations = 0;
  std::uint64_t adversary_allocations = 0;
  std::uint64_t unique_ips = 0;
  std::uint64_t discovered_configs = 0;
  std::uint64_t lc_allocations = 0;
  std::uint64_t benign_allocations = 0;
  std::uint64_t benign_lc_allocations = 0;

  double ar() const {
    return pool_size == 0 ? 0.0
                          : static_cast<double>(allocated) /
                                static_cast<double>(pool_size);
  }
};

struct ExploitRecord {
  std::uint64_t config_id = 0;
  std::int64_t discovered_at = 0;
  std::uint32_t victim = 0;
  std::int64_t released_at = 0;
  auto operator<=>(const ExploitRecord&) const = default;
};

struct FreeDurations {
  std::uint64_t count = 0;
  std::int64_t min = 0;
  std::int64_t max = 0;
  std::int64_t sum = 0;
  BottomKSample<std::int64_t> sample;
};

struct RunStats {
  std::uint64_t pool_size = 0;
  std::int64_t ar_sample_seconds = 60;
  std::int64_t simulated_seconds = 0;
  std::vector<SeriesPoint> series;
  std::uint64_t peak_allocated = 0;

  std::uint64_t allocations = 0;
  std::uint64_t releases = 0;
  std::uint64_t pool_exhausted = 0;
  std::uint64_t benign_allocations = 0;
  // Benign allocations that landed on an IP with live latent config.
  std::uint64_t benign_lc_allocations = 0;
  std::uint64_t configs_created = 0;

  std::uint64_t adversary_allocations = 0;
  std::uint64_t adversary_pool_exhausted = 0;
  std::uint64_t unique_ips = 0;
  std::uint64_t discovered_configs = 0;
  // Adversary allocations of a never-seen IP carrying live latent config.
  std::uint64_t lc_allocations = 0;

  PolicyCounters policy;
  FreeDurations free_durations;
  BottomKSample<ExploitRecord> exploits;

  // Counters add, samples union, series interleave by time (points at the
  // same instant are summed). Associative and commutative; for two disjoint
  // windows of one run it reproduces the stats of the whole run.
  void Merge(const RunStats& other);
};

// Fraction of adversary allocations that returned a never-seen IP.
std::optional<double> UniqueIpYield(const RunStats& stats);
// Fraction of adversary allocations that returned a never-seen IP with live
// latent configuration. Never exceeds UniqueIpYield.
std::optional<double> LcYield(const RunStats& stats);
// Same yields restricted to series points with from <= time_s < to.
std::optional<double> UniqueIpYield(const RunStats& stats, SimTime from,
                                    SimTime to);
std::optional<double> LcYield(const RunStats& stats, SimTime from, SimTime to);
// Fraction of benign allocations handed an IP with live latent config.
std::optional<double> LcPrevalence(const RunStats& stats);
// Highest allocation ratio seen during the run.
double ObservedArMax(const RunStats& stats);

class EmpiricalCdf {
 public:
  // nullopt when there are no samples.
  static std::optional<EmpiricalCdf> FromSamples(std::vector<std::int64_t> samples);

  // Nearest-rank quantile, q in [0, 1].
  std::int64_t Quantile(double q) const;
  const std::vector<std::int64_t>& sorted() const { return sorted_; }

 private:
  explicit EmpiricalCdf(std::vector<std::int64_t> sorted)
      : sorted_(std::move(sorted)) {}
  std::vector<std::int64_t> sorted_;
};

std::optional<EmpiricalCdf> FreeDurationDistribution(const RunStats& stats);

// Exponential rate by maximum likelihood, n / sum(samples). Throws
// std::invalid_argument on an empty sample or any non-positive value.
double FitExponentialMle(std::span<const double> samples);

nlohmann::json ToJson(const RunStats& stats);

// Writes "time_s,ar,cumulative_unique_ips,cumulative_configs" rows. Each
// line of `header` is emitted first as a "# " comment.
void WriteSeriesCsv(std::ostream& out, const RunStats& stats,
                    const std::string& header = "");

// Writes "quantile,free_seconds" rows for q = 0, 0.001, ..., 1 of the
// sampled free-duration distribution, after the same header comments.
void WriteFreeDurationCdfCsv(std::ostream& out, const RunStats& stats,
                             const std::string& header = "");

}  // namespace poolsim

#endif  // POOLSIM_ANALYSIS_H_
