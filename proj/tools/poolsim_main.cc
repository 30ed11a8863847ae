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

// poolsim: run pool scenarios, sweeps and trace ingestion from the shell.
//
// Exit codes: 0 success, 1 unexpected failure, 2 bad config or unreadable
// input, 3 contract violation during a run, 4 too many malformed lines.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "poolsim/analysis.h"
#include "poolsim/config.h"
#include "poolsim/core.h"
#include "poolsim/ingest.h"
#include "poolsim/scenario.h"
#include "poolsim/sweep.h"

namespace {

using poolsim::ConfigError;
using poolsim::ContractViolation;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitContract = 3;
constexpr int kExitMalformed = 4;

struct ScenarioFlags {
  std::string config_path;
  std::string scenario_name;
  std::optional<std::uint64_t> seed;
};

void AddScenarioFlags(CLI::App* cmd, ScenarioFlags& flags) {
  cmd->add_option("--config", flags.config_path, "scenario JSON file");
  cmd->add_option("--scenario", flags.scenario_name,
                  "built-in scenario used when --config is absent");
  cmd->add_option("--seed", flags.seed, "override the run seed");
}

poolsim::Scenario LoadScenario(const ScenarioFlags& flags) {
  poolsim::Scenario scenario;
  if (!flags.config_path.empty()) {
    std::ifstream in(flags.config_path);
    if (!in) throw ConfigError("cannot read config '" + flags.config_path + "'");
    nlohmann::json json;
    try {
      json = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config '" + flags.config_path + "': " + e.what());
    }
    scenario = poolsim::ScenarioFromJson(json);
  } else if (!flags.scenario_name.empty()) {
    scenario = poolsim::BuiltinScenario(flags.scenario_name);
  } else {
    throw ConfigError("one of --config or --scenario is required");
  }
  if (flags.seed) scenario.run.seed = *flags.seed;
  scenario.run.Validate();
  return scenario;
}

std::ofstream OpenOutput(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  return out;
}

std::string SiblingPath(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  p.replace_extension();
  return p.string() + suffix;
}

std::string ProvenanceHeader(const poolsim::Scenario& scenario) {
  std::ostringstream header;
  header << "config: " << poolsim::ToJson(scenario).dump() << "\n"
         << "seed: " << scenario.run.seed;
  return header.str();
}

int CmdRun(const ScenarioFlags& flags, const std::string& out_path,
           std::string series_path) {
  const poolsim::Scenario scenario = LoadScenario(flags);
  const poolsim::RunStats stats = poolsim::RunScenario(scenario);

  nlohmann::json json = poolsim::ToJson(stats);
  json["config"] = poolsim::ToJson(scenario);
  json["seed"] = scenario.run.seed;
  std::ofstream out = OpenOutput(out_path);
  out << json.dump(2) << "\n";

  if (series_path.empty()) series_path = SiblingPath(out_path, ".series.csv");
  std::ofstream series = OpenOutput(series_path);
  poolsim::WriteSeriesCsv(series, stats, ProvenanceHeader(scenario));

  std::ofstream cdf = OpenOutput(SiblingPath(out_path, ".free_cdf.csv"));
  poolsim::WriteFreeDurationCdfCsv(cdf, stats, ProvenanceHeader(scenario));
  return kExitOk;
}

int CmdSweep(const ScenarioFlags& flags, const std::string& axis_name,
             const std::string& values_list, unsigned parallel,
             const std::string& out_path) {
  const poolsim::Scenario scenario = LoadScenario(flags);
  const auto axis = poolsim::ParseSweepAxis(axis_name);
  if (!axis) throw ConfigError("unknown axis '" + axis_name + "'");
  const auto values = poolsim::ParseSweepValues(values_list);
  const auto points = poolsim::RunSweep(scenario, *axis, values, parallel);
  std::ofstream out = OpenOutput(out_path);
  poolsim::WriteSweepCsv(out, scenario, *axis, points);
  for (const auto& point : points) {
    if (!point.ok()) {
      std::cerr << "sweep point " << point.value << " failed: " << point.error
                << "\n";
    }
  }
  return kExitOk;
}

struct IngestFlags {
  std::string in_path;
  std::string out_path;
  std::string columns;
  int horizon_days = 31;
  double max_bad_fraction = 0.01;
  std::string summary_path;
  std::string errors_path;
};

int CmdIngest(IngestFlags flags) {
  auto in = poolsim::OpenInput(flags.in_path);
  if (!in) throw ConfigError("cannot read input '" + flags.in_path + "'");
  poolsim::ParseOptions options;
  options.max_bad_fraction = flags.max_bad_fraction;

  poolsim::Trace trace;
  std::vector<poolsim::LineError> errors;
  std::size_t data_lines = 0;
  bool rejected = false;
  nlohmann::json dropped = nlohmann::json::object();
  if (flags.columns.empty()) {
    poolsim::ParsedTrace parsed = poolsim::ParseAllocationCsv(*in, options);
    trace = std::move(parsed.trace);
    errors = std::move(parsed.errors);
    data_lines = parsed.data_lines;
    rejected = parsed.rejected;
  } else {
    poolsim::ColumnMap columns;
    try {
      columns = poolsim::ColumnMap::Parse(flags.columns);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("--columns: ") + e.what());
    }
    poolsim::JobReadResult read = poolsim::ReadJobRecords(*in, columns, options);
    errors = std::move(read.errors);
    data_lines = read.records.size() + errors.size();
    rejected = !errors.empty() &&
               static_cast<double>(errors.size()) >
                   options.max_bad_fraction * static_cast<double>(data_lines);
    poolsim::JobConversion converted = poolsim::JobsToAllocations(
        read.records, flags.horizon_days, columns.accepted_statuses);
    trace = std::move(converted.trace);
    dropped = {{"malformed", converted.dropped_malformed},
               {"horizon", converted.dropped_horizon},
               {"status", converted.dropped_status}};
  }

  if (flags.errors_path.empty()) {
    flags.errors_path = SiblingPath(flags.out_path, ".errors.txt");
  }
  {
    std::ofstream report = OpenOutput(flags.errors_path);
    for (const auto& error : errors) {
      report << flags.in_path << ":" << error.line << ": " << error.message
             << "\n";
    }
  }
  if (rejected) {
    std::cerr << "ingest: " << errors.size() << " of " << data_lines
              << " lines malformed, over the threshold; see "
              << flags.errors_path << "\n";
    return kExitMalformed;
  }

  {
    std::ofstream out = OpenOutput(flags.out_path);
    poolsim::WriteAllocationCsv(out, trace);
  }
  if (flags.summary_path.empty()) {
    flags.summary_path = SiblingPath(flags.out_path, ".summary.json");
  }
  nlohmann::json summary = {
      {"input", flags.in_path},
      {"events", trace.events.size()},
      {"tenants", trace.tenant_names.size()},
      {"max_concurrency", trace.MaxConcurrency()},
      {"data_lines", data_lines},
      {"malformed_lines", errors.size()},
  };
  if (!dropped.empty()) summary["dropped"] = dropped;
  std::ofstream out = OpenOutput(flags.summary_path);
  out << summary.dump(2) << "\n";
  return kExitOk;
}

int CmdGenTrace(const poolsim::SyntheticTraceParams& params, std::uint64_t seed,
                const std::string& out_path) {
  const poolsim::Trace trace =
      poolsim::GenerateSyntheticTrace(params, poolsim::Rng(seed).Split("trace"));
  std::ofstream out = OpenOutput(out_path);
  poolsim::WriteAllocationCsv(out, trace);
  return kExitOk;
}

template <typename F>
int Guarded(F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ContractViolation& e) {
    std::cerr << "contract violation: " << e.what() << "\n";
    return kExitContract;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IP pool allocation simulator"};
  app.require_subcommand(1);

  ScenarioFlags run_flags;
  std::string run_out;
  std::string run_series;
  auto* run = app.add_subcommand("run", "run one scenario");
  AddScenarioFlags(run, run_flags);
  run->add_option("--out", run_out, "stats JSON path")->required();
  run->add_option("--series", run_series,
                  "series CSV path (default: <out>.series.csv)");

  ScenarioFlags sweep_flags;
  std::string sweep_axis;
  std::string sweep_values;
  unsigned sweep_parallel = 1;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "run one scenario per axis value");
  AddScenarioFlags(sweep, sweep_flags);
  sweep->add_option("--axis", sweep_axis, "ar_max | alpha | tenant_budget")
      ->required();
  sweep->add_option("--values", sweep_values, "comma-separated values")
      ->required();
  sweep->add_option("--parallel", sweep_parallel, "worker threads")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--out", sweep_out, "summary CSV path")->required();

  IngestFlags ingest_flags;
  auto* ingest = app.add_subcommand("ingest", "normalize an allocation trace");
  ingest->add_option("--in", ingest_flags.in_path, "input file (.gz ok)")
      ->required();
  ingest->add_option("--out", ingest_flags.out_path, "normalized CSV path")
      ->required();
  ingest->add_option("--columns", ingest_flags.columns,
                     "job export column map, e.g. user=3,start=1,end=2");
  ingest->add_option("--horizon-days", ingest_flags.horizon_days,
                     "drop jobs ending later than this after the first start");
  ingest->add_option("--max-bad-fraction", ingest_flags.max_bad_fraction,
                     "malformed line fraction that rejects the input");
  ingest->add_option("--summary", ingest_flags.summary_path,
                     "summary JSON path (default: <out>.summary.json)");
  ingest->add_option("--errors", ingest_flags.errors_path,
                     "per-line error report (default: <out>.errors.txt)");

  std::string template_name;
  auto* scenario = app.add_subcommand("scenario", "print a built-in scenario");
  scenario->add_option("name", template_name, "scenario name")
      ->required()
      ->check(CLI::IsMember(poolsim::BuiltinScenarioNames()));

  poolsim::SyntheticTraceParams trace_params;
  std::uint64_t trace_seed = 1;
  std::string trace_out;
  auto* gen = app.add_subcommand("gen-trace", "write a synthetic job trace");
  gen->add_option("--out", trace_out, "output CSV path")->required();
  gen->add_option("--seed", trace_seed, "generator seed");
  gen->add_option("--jobs", trace_params.jobs, "number of jobs");
  gen->add_option("--users", trace_params.users, "number of users");
  gen->add_option("--days", trace_params.days, "span of job start times");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*run) {
    return Guarded([&] { return CmdRun(run_flags, run_out, run_series); });
  }
  if (*sweep) {
    return Guarded([&] {
      return CmdSweep(sweep_flags, sweep_axis, sweep_values, sweep_parallel,
                      sweep_out);
    });
  }
  if (*ingest) return Guarded([&] { return CmdIngest(ingest_flags); });
  if (*scenario) {
    return Guarded([&] {
      std::cout << poolsim::ToJson(poolsim::BuiltinScenario(template_name)).dump(2)
                << "\n";
      return kExitOk;
    });
  }
  if (*gen) {
    return Guarded([&] { return CmdGenTrace(trace_params, trace_seed, trace_out); });
  }
  return kExitFailure;
}
