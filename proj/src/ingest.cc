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

#include "poolsim/ingest.h"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <tuple>
#include <unordered_map>

namespace poolsim {

namespace {

using Row = NamedAllocation;

std::vector<std::string_view> Split(std::string_view line, char delimiter) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(delimiter, start);
    fields.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::optional<double> ParseNumber(std::string_view s) {
  s = Trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::optional<std::int64_t> ToSeconds(double value) {
  constexpr double kLimit = 9.0e15;
  if (!(std::abs(value) < kLimit)) return std::nullopt;
  return static_cast<std::int64_t>(std::trunc(value));
}

bool OverThreshold(std::size_t bad, std::size_t total, double fraction) {
  if (bad == 0) return false;
  return static_cast<double>(bad) > fraction * static_cast<double>(total);
}

}  // namespace

Trace BuildTrace(std::vector<NamedAllocation> rows, std::int64_t origin) {
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.t_a, a.t_r, a.tenant) < std::tie(b.t_a, b.t_r, b.tenant);
  });
  Trace trace;
  trace.events.reserve(rows.size());
  std::unordered_map<std::string, std::uint32_t> ids;
  for (Row& row : rows) {
    auto [it, inserted] = ids.try_emplace(
        row.tenant, static_cast<std::uint32_t>(trace.tenant_names.size()));
    if (inserted) trace.tenant_names.push_back(std::move(row.tenant));
    trace.events.push_back(TraceEvent{static_cast<TenantId>(it->second),
                                      SimTime(row.t_a - origin),
                                      SimTime(row.t_r - origin)});
  }
  return trace;
}

std::uint64_t Trace::MaxConcurrency() const {
  // Releases at an instant are applied before allocations, as in the engine.
  std::vector<std::pair<std::int64_t, int>> deltas;
  deltas.reserve(events.size() * 2);
  for (const TraceEvent& e : events) {
    deltas.emplace_back(e.t_a.seconds(), +1);
    deltas.emplace_back(e.t_r.seconds(), -1);
  }
  std::sort(deltas.begin(), deltas.end());
  std::int64_t current = 0;
  std::int64_t peak = 0;
  for (const auto& [time, delta] : deltas) {
    current += delta;
    peak = std::max(peak, current);
  }
  return static_cast<std::uint64_t>(peak);
}

ParsedTrace ParseAllocationCsv(std::istream& in, const ParseOptions& options) {
  ParsedTrace result;
  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = Trim(line);
    if (view.empty() || view.front() == '#') continue;
    const bool may_be_header = first_content;
    first_content = false;

    auto fail = [&](std::string message) {
      ++result.data_lines;
      result.errors.push_back({line_no, std::move(message)});
    };
    if (line.size() > options.max_line_length) {
      fail("line longer than " + std::to_string(options.max_line_length));
      continue;
    }
    const auto fields = Split(view, ',');
    if (fields.size() != 3) {
      if (may_be_header) continue;
      fail("expected 3 fields, got " + std::to_string(fields.size()));
      continue;
    }
    const auto start = ParseNumber(fields[1]);
    const auto end = ParseNumber(fields[2]);
    if (may_be_header && !start && !end) continue;  // header row
    ++result.data_lines;
    const std::string_view tenant = Trim(fields[0]);
    if (tenant.empty()) {
      result.errors.push_back({line_no, "empty tenant"});
      continue;
    }
    if (!start || !end) {
      result.errors.push_back({line_no, "non-numeric time"});
      continue;
    }
    const auto t_a = ToSeconds(*start);
    const auto t_r = ToSeconds(*end);
    if (!t_a || !t_r) {
      result.errors.push_back({line_no, "time out of range"});
      continue;
    }
    if (*t_r <= *t_a) {
      result.errors.push_back({line_no, "release not after allocation"});
      continue;
    }
    rows.push_back(Row{std::string(tenant), *t_a, *t_r});
  }

  result.rejected = OverThreshold(result.errors.size(), result.data_lines,
                                  options.max_bad_fraction);
  std::int64_t origin = 0;
  if (!rows.empty()) {
    origin = std::min_element(rows.begin(), rows.end(),
                              [](const Row& a, const Row& b) {
                                return a.t_a < b.t_a;
                              })->t_a;
  }
  result.trace = BuildTrace(std::move(rows), origin);
  return result;
}

void WriteAllocationCsv(std::ostream& out, const Trace& trace) {
  out << "tenant,start_seconds,end_seconds\n";
  for (const TraceEvent& e : trace.events) {
    out << trace.tenant_names[Index(e.tenant)] << ',' << e.t_a.seconds() << ','
        << e.t_r.seconds() << '\n';
  }
}

ColumnMap ColumnMap::Parse(const std::string& spec) {
  ColumnMap columns;
  std::istringstream items(spec);
  for (std::string item; std::getline(items, item, ',');) {
    if (Trim(item).empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("column map entry '" + item + "' lacks '='");
    }
    const std::string key(Trim(std::string_view(item).substr(0, eq)));
    const std::string value(Trim(std::string_view(item).substr(eq + 1)));
    auto as_int = [&]() {
      int v = 0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc() || ptr != value.data() + value.size() || v < -1) {
        throw std::invalid_argument("bad column index for '" + key + "'");
      }
      return v;
    };
    if (key == "user") {
      columns.user = as_int();
    } else if (key == "start") {
      columns.start = as_int();
    } else if (key == "end") {
      columns.end = as_int();
    } else if (key == "status") {
      columns.status = as_int();
    } else if (key == "scale") {
      auto v = ParseNumber(value);
      if (!v || *v <= 0.0) throw std::invalid_argument("bad time scale");
      columns.time_scale = *v;
    } else if (key == "header") {
      columns.header = value != "0" && value != "false";
    } else if (key == "delimiter") {
      if (value == "tab") {
        columns.delimiter = '\t';
      } else if (value.size() == 1) {
        columns.delimiter = value[0];
      } else {
        throw std::invalid_argument("delimiter must be one character or 'tab'");
      }
    } else if (key == "accept") {
      std::istringstream statuses(value);
      for (std::string s; std::getline(statuses, s, '|');) {
        columns.accepted_statuses.push_back(s);
      }
    } else {
      throw std::invalid_argument("unknown column map key '" + key + "'");
    }
  }
  if (columns.user < 0 || columns.start < 0 || columns.end < 0) {
    throw std::invalid_argument("user, start and end columns are required");
  }
  return columns;
}

JobReadResult ReadJobRecords(std::istream& in, const ColumnMap& columns,
                             const ParseOptions& options) {
  JobReadResult result;
  const int needed =
      std::max({columns.user, columns.start, columns.end, columns.status}) + 1;
  std::string line;
  std::size_t line_no = 0;
  bool skip_header = columns.header;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    if (skip_header) {
      skip_header = false;
      continue;
    }
    if (line.size() > options.max_line_length) {
      result.errors.push_back({line_no, "line too long"});
      continue;
    }
    const auto fields = Split(line, columns.delimiter);
    if (static_cast<int>(fields.size()) < needed) {
      result.errors.push_back({line_no, "too few fields"});
      continue;
    }
    RawJobRecord record;
    record.user = std::string(Trim(fields[columns.user]));
    if (auto v = ParseNumber(fields[columns.start])) {
      record.start = *v * columns.time_scale;
    }
    if (auto v = ParseNumber(fields[columns.end])) {
      record.end = *v * columns.time_scale;
    }
    if (columns.status >= 0) record.status = std::string(Trim(fields[columns.status]));
    result.records.push_back(std::move(record));
  }
  return result;
}

JobConversion JobsToAllocations(std::span<const RawJobRecord> records,
                                int horizon_days,
                                const std::vector<std::string>& accepted_statuses) {
  JobConversion result;
  std::vector<Row> rows;
  auto accepted = [&](const RawJobRecord& r) {
    return accepted_statuses.empty() ||
           std::find(accepted_statuses.begin(), accepted_statuses.end(),
                     r.status) != accepted_statuses.end();
  };
  for (const RawJobRecord& r : records) {
    if (!accepted(r)) {
      ++result.dropped_status;
      continue;
    }
    const auto t_a = r.start ? ToSeconds(*r.start) : std::nullopt;
    const auto t_r = r.end ? ToSeconds(*r.end) : std::nullopt;
    if (r.user.empty() || !t_a || !t_r || *t_r <= *t_a) {
      ++result.dropped_malformed;
      continue;
    }
    rows.push_back(Row{r.user, *t_a, *t_r});
  }
  std::int64_t origin = std::numeric_limits<std::int64_t>::max();
  for (const Row& row : rows) origin = std::min(origin, row.t_a);
  const std::int64_t horizon = static_cast<std::int64_t>(horizon_days) * 86400;
  std::erase_if(rows, [&](const Row& row) {
    if (row.t_r - origin <= horizon) return false;
    ++result.dropped_horizon;
    return true;
  });
  if (rows.empty()) origin = 0;
  result.trace = BuildTrace(std::move(rows), origin);
  return result;
}

std::unique_ptr<std::istream> OpenInput(const std::string& path) {
  const bool gz = path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
  if (!gz) {
    auto file = std::make_unique<std::ifstream>(path);
    if (!*file) return nullptr;
    return file;
  }
  gzFile file = gzopen(path.c_str(), "rb");
  if (file == nullptr) return nullptr;
  std::string data;
  char buffer[1 << 16];
  int n = 0;
  while ((n = gzread(file, buffer, sizeof buffer)) > 0) data.append(buffer, n);
  const bool failed = n < 0;
  gzclose(file);
  if (failed) return nullptr;
  return std::make_unique<std::istringstream>(std::move(data));
}

}  // namespace poolsim
