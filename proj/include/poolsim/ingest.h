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

#ifndef POOLSIM_INGEST_H_
#define POOLSIM_INGEST_H_

#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "poolsim/agents.h"

namespace poolsim {

struct LineError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct ParseOptions {
  // Reject the whole file when more than this fraction of data lines fail.
  double max_bad_fraction = 0.01;
  std::size_t max_line_length = 4096;
};

// A trace in the normalized form the engine replays: events sorted by
// (t_a, t_r, tenant name), times rebased so the first allocation is at 0,
// tenant ids interned densely in order of first appearance.
struct Trace {
  std::vector<TraceEvent> events;
  std::vector<std::string> tenant_names;  // indexed by TenantId

  std::uint64_t MaxConcurrency() const;
};

struct NamedAllocation {
  std::string tenant;
  std::int64_t t_a = 0;
  std::int64_t t_r = 0;
};

// Sorts by (t_a, t_r, tenant), subtracts origin from every time and interns
// tenant names in first-appearance order.
Trace BuildTrace(std::vector<NamedAllocation> rows, std::int64_t origin);

struct ParsedTrace {
  Trace trace;
  std::vector<LineError> errors;
  std::size_t data_lines = 0;
  bool rejected = false;
};

// Parses "tenant,start_seconds,end_seconds" lines. A leading header line,
// blank lines and '#' comments are skipped. Fractional times are truncated.
// Bad lines are reported, not fatal, unless they exceed the threshold.
ParsedTrace ParseAllocationCsv(std::istream& in, const ParseOptions& options = {});

// Inverse of ParseAllocationCsv for a normalized trace.
void WriteAllocationCsv(std::ostream& out, const Trace& trace);

// One job row from a cluster scheduler export.
struct RawJobRecord {
  std::string user;
  std::optional<double> start;  // seconds
  std::optional<double> end;
  std::string status;
};

// Where the fields live in a delimited job export.
struct ColumnMap {
  int user = 0;
  int start = 1;
  int end = 2;
  int status = -1;          // -1: no status column
  double time_scale = 1.0;  // multiply raw times to get seconds
  bool header = true;
  char delimiter = ',';
  std::vector<std::string> accepted_statuses;  // empty: accept all

  // "user=3,start=1,end=2,status=4,scale=1e-6,header=0,accept=FINISH|KILL"
  // Throws std::invalid_argument on unknown keys or bad values.
  static ColumnMap Parse(const std::string& spec);
};

struct JobReadResult {
  std::vector<RawJobRecord> records;
  std::vector<LineError> errors;
};

JobReadResult ReadJobRecords(std::istream& in, const ColumnMap& columns,
                             const ParseOptions& options = {});

struct JobConversion {
  Trace trace;
  std::size_t dropped_malformed = 0;
  std::size_t dropped_horizon = 0;
  std::size_t dropped_status = 0;
};

// One allocation per job. Jobs with missing, inverted or zero-length
// timestamps, or that extend past horizon_days from the earliest start, are
// dropped. Times are rebased to the earliest well-formed start.
JobConversion JobsToAllocations(std::span<const RawJobRecord> records,
                                int horizon_days,
                                const std::vector<std::string>& accepted_statuses = {});

// Opens a file for reading, transparently inflating a ".gz" suffix.
// Returns nullptr when the file cannot be read.
std::unique_ptr<std::istream> OpenInput(const std::string& path);

}  // namespace poolsim

#endif  // POOLSIM_INGEST_H_
