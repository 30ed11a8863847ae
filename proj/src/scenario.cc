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

#include "poolsim/scenario.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace poolsim {

namespace {

template <typename T>
void Read(const nlohmann::json& json, const char* key, T& field) {
  auto it = json.find(key);
  if (it == json.end() || it->is_null()) return;
  try {
    field = it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    std::ostringstream msg;
    msg << "scenario key '" << key << "': " << e.what();
    throw ConfigError(msg.str());
  }
}

const nlohmann::json* Section(const nlohmann::json& json, const char* key) {
  auto it = json.find(key);
  if (it == json.end() || it->is_null()) return nullptr;
  if (!it->is_object()) {
    throw ConfigError(std::string("scenario section '") + key +
                      "' must be an object");
  }
  return &*it;
}

void ReadTenantMix(const nlohmann::json& json, TenantMix& mix) {
  Read(json, "count", mix.count);
  Read(json, "n_terms", mix.n_terms);
  Read(json, "bias_phase1", mix.bias_phase1);
  Read(json, "s_max_low", mix.s_max_low);
  Read(json, "s_max_high", mix.s_max_high);
  Read(json, "s_min_fraction_low", mix.s_min_fraction_low);
  Read(json, "s_min_fraction_high", mix.s_min_fraction_high);
  Read(json, "static_fraction", mix.static_fraction);
  if (mix.n_terms < 1) throw ConfigError("tenants.n_terms must be >= 1");
  if (mix.s_max_low < 0 || mix.s_max_high < mix.s_max_low) {
    throw ConfigError("tenants need 0 <= s_max_low <= s_max_high");
  }
  if (!(mix.s_min_fraction_low >= 0.0 &&
        mix.s_min_fraction_high <= 1.0 &&
        mix.s_min_fraction_low <= mix.s_min_fraction_high)) {
    throw ConfigError("tenants s_min fractions must satisfy 0 <= low <= high <= 1");
  }
  if (!(mix.static_fraction >= 0.0 && mix.static_fraction <= 1.0)) {
    throw ConfigError("tenants.static_fraction must be in [0, 1]");
  }
}

nlohmann::json TenantMixJson(const TenantMix& mix) {
  return {{"count", mix.count},
          {"n_terms", mix.n_terms},
          {"bias_phase1", mix.bias_phase1},
          {"s_max_low", mix.s_max_low},
          {"s_max_high", mix.s_max_high},
          {"s_min_fraction_low", mix.s_min_fraction_low},
          {"s_min_fraction_high", mix.s_min_fraction_high},
          {"static_fraction", mix.static_fraction}};
}

void ReadAdversary(const nlohmann::json& json, AdversaryParams& params) {
  if (auto it = json.find("mode"); it != json.end() && !it->is_null()) {
    const std::string mode = it->is_string() ? it->get<std::string>() : "";
    if (mode == "single") {
      params.mode = AdversaryParams::Mode::kSingle;
    } else if (mode == "multi") {
      params.mode = AdversaryParams::Mode::kMulti;
    } else {
      throw ConfigError("adversary.mode must be \"single\" or \"multi\"");
    }
  }
  Read(json, "concurrency", params.concurrency);
  Read(json, "hold_seconds", params.hold_seconds);
  Read(json, "rotation_quota", params.rotation_quota);
  Read(json, "tenant_budget", params.tenant_budget);
  if (params.concurrency == 0 || params.hold_seconds <= 0 ||
      params.rotation_quota == 0 || params.tenant_budget == 0) {
    throw ConfigError("adversary parameters must be positive");
  }
}

nlohmann::json AdversaryJson(const AdversaryParams& params) {
  return {{"mode", params.mode == AdversaryParams::Mode::kSingle ? "single"
                                                                 : "multi"},
          {"concurrency", params.concurrency},
          {"hold_seconds", params.hold_seconds},
          {"rotation_quota", params.rotation_quota},
          {"tenant_budget", params.tenant_budget}};
}

void ReadTrace(const nlohmann::json& json, TraceSource& source) {
  Read(json, "path", source.path);
  SyntheticTraceParams& p = source.synthetic;
  if (const auto* synthetic = Section(json, "synthetic")) {
    Read(*synthetic, "jobs", p.jobs);
    Read(*synthetic, "users", p.users);
    Read(*synthetic, "days", p.days);
    Read(*synthetic, "zipf_exponent", p.zipf_exponent);
    Read(*synthetic, "min_mean_seconds", p.min_mean_seconds);
    Read(*synthetic, "max_mean_seconds", p.max_mean_seconds);
  }
  if (p.users == 0 || p.days <= 0 || !(p.min_mean_seconds >= 1.0) ||
      p.max_mean_seconds < p.min_mean_seconds) {
    throw ConfigError("invalid synthetic trace parameters");
  }
}

nlohmann::json TraceJson(const TraceSource& source) {
  const SyntheticTraceParams& p = source.synthetic;
  nlohmann::json json = {{"synthetic",
                          {{"jobs", p.jobs},
                           {"users", p.users},
                           {"days", p.days},
                           {"zipf_exponent", p.zipf_exponent},
                           {"min_mean_seconds", p.min_mean_seconds},
                           {"max_mean_seconds", p.max_mean_seconds}}}};
  json["path"] = source.path;
  return json;
}

std::int64_t AlignUp(std::int64_t t, std::int64_t step) {
  return (t + step - 1) / step * step;
}

}  // namespace

std::vector<std::string> BuiltinScenarioNames() {
  return {"benign", "single-tenant", "multi-tenant", "trace-replay"};
}

Scenario BuiltinScenario(const std::string& name) {
  Scenario scenario;
  scenario.name = name;
  if (name == "benign") return scenario;
  if (name == "single-tenant") {
    scenario.adversary = AdversaryParams{};
    return scenario;
  }
  if (name == "multi-tenant") {
    AdversaryParams adversary;
    adversary.mode = AdversaryParams::Mode::kMulti;
    scenario.adversary = adversary;
    return scenario;
  }
  if (name == "trace-replay") {
    scenario.run.ar_max = 0.95;
    scenario.tenants.count = 0;
    AdversaryParams adversary;
    adversary.mode = AdversaryParams::Mode::kMulti;
    scenario.adversary = adversary;
    scenario.trace = TraceSource{};
    return scenario;
  }
  throw ConfigError("unknown scenario '" + name + "'");
}

Scenario ScenarioFromJson(const nlohmann::json& json) {
  if (!json.is_object()) throw ConfigError("config must be a JSON object");
  Scenario scenario;
  if (auto it = json.find("scenario"); it != json.end() && !it->is_null()) {
    if (!it->is_string()) throw ConfigError("'scenario' must be a string");
    scenario = BuiltinScenario(it->get<std::string>());
  }
  Read(json, "name", scenario.name);
  scenario.run = RunConfigFromJson(json, scenario.run);
  if (const auto* tenants = Section(json, "tenants")) {
    ReadTenantMix(*tenants, scenario.tenants);
  }
  if (auto it = json.find("adversary"); it != json.end()) {
    if (it->is_null() || (it->is_boolean() && !it->get<bool>())) {
      scenario.adversary.reset();
    } else if (it->is_object()) {
      AdversaryParams params = scenario.adversary.value_or(AdversaryParams{});
      ReadAdversary(*it, params);
      scenario.adversary = params;
    } else {
      throw ConfigError("'adversary' must be an object, null or false");
    }
  }
  if (auto it = json.find("trace"); it != json.end()) {
    if (it->is_null() || (it->is_boolean() && !it->get<bool>())) {
      scenario.trace.reset();
    } else if (it->is_object()) {
      TraceSource source = scenario.trace.value_or(TraceSource{});
      ReadTrace(*it, source);
      scenario.trace = source;
    } else {
      throw ConfigError("'trace' must be an object, null or false");
    }
  }
  return scenario;
}

nlohmann::json ToJson(const Scenario& scenario) {
  nlohmann::json json = ToJson(scenario.run);
  json["name"] = scenario.name;
  json["tenants"] = TenantMixJson(scenario.tenants);
  json["adversary"] = scenario.adversary ? AdversaryJson(*scenario.adversary)
                                         : nlohmann::json(nullptr);
  json["trace"] =
      scenario.trace ? TraceJson(*scenario.trace) : nlohmann::json(nullptr);
  return json;
}

Trace GenerateSyntheticTrace(const SyntheticTraceParams& params, Rng rng) {
  if (params.users == 0 || params.days <= 0) {
    throw std::invalid_argument("synthetic trace needs users and days");
  }
  // Zipf-weighted users, each with a log-uniform mean job length.
  std::vector<double> cumulative(params.users);
  std::vector<double> mean_seconds(params.users);
  double total = 0.0;
  const double log_lo = std::log(params.min_mean_seconds);
  const double log_hi = std::log(params.max_mean_seconds);
  for (std::uint32_t k = 0; k < params.users; ++k) {
    total += 1.0 / std::pow(static_cast<double>(k + 1), params.zipf_exponent);
    cumulative[k] = total;
    mean_seconds[k] = std::exp(log_lo + (log_hi - log_lo) * rng.Uniform());
  }

  const std::int64_t horizon = params.days * kSecondsPerDay;
  std::vector<NamedAllocation> rows;
  rows.reserve(params.jobs);
  for (std::uint64_t j = 0; j < params.jobs; ++j) {
    const auto t_a = static_cast<std::int64_t>(
        rng.Below(static_cast<std::uint64_t>(horizon)));
    const double u = rng.Uniform() * total;
    const auto user = static_cast<std::uint32_t>(std::min<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), u) -
            cumulative.begin(),
        params.users - 1));
    const double length =
        -mean_seconds[user] * std::log(rng.UniformOpenClosed());
    const auto d_a = std::max<std::int64_t>(1, std::llround(length));
    rows.push_back({"user" + std::to_string(user), t_a, t_a + d_a});
  }
  return BuildTrace(std::move(rows), 0);
}

std::uint64_t PeakDemand(std::span<const DailyProfile> profiles,
                         std::int64_t step_seconds) {
  if (step_seconds < 1) throw std::invalid_argument("step_seconds must be >= 1");
  // (step instant at which a change is first seen, target delta)
  std::vector<std::pair<std::int64_t, std::int64_t>> deltas;
  std::int64_t sum = 0;
  for (const DailyProfile& profile : profiles) {
    sum += profile.initial_target();
    int previous = profile.initial_target();
    for (const DailyProfile::Change& change : profile.changes()) {
      deltas.emplace_back(AlignUp(change.second, step_seconds),
                          change.target - previous);
      previous = change.target;
    }
  }
  std::sort(deltas.begin(), deltas.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::int64_t peak = sum;
  for (std::size_t i = 0; i < deltas.size();) {
    const std::int64_t at = deltas[i].first;
    if (at >= kSecondsPerDay) break;
    for (; i < deltas.size() && deltas[i].first == at; ++i) sum += deltas[i].second;
    peak = std::max(peak, sum);
  }
  return static_cast<std::uint64_t>(peak);
}

std::vector<BehaviorSpec> SampleTenants(const TenantMix& mix, Rng rng) {
  std::vector<BehaviorSpec> specs;
  specs.reserve(mix.count);
  const double log_lo = std::log(std::max(1, mix.s_max_low));
  const double log_hi = std::log(std::max(1, mix.s_max_high) + 1.0);
  for (std::uint32_t i = 0; i < mix.count; ++i) {
    // Log-uniform over [s_max_low, s_max_high].
    int s_max = static_cast<int>(
        std::floor(std::exp(log_lo + (log_hi - log_lo) * rng.Uniform())));
    s_max = std::clamp(s_max, mix.s_max_low, mix.s_max_high);
    const double fraction =
        rng.Uniform(mix.s_min_fraction_low,
                    std::nextafter(mix.s_min_fraction_high, 2.0));
    int s_min = static_cast<int>(std::floor(fraction * s_max));
    if (rng.Bernoulli(mix.static_fraction)) s_min = s_max;
    s_min = std::clamp(s_min, 0, s_max);
    specs.push_back(
        SampleBehaviorSpec(rng, s_min, s_max, mix.n_terms, mix.bias_phase1));
  }
  return specs;
}

PreparedRun Prepare(const Scenario& scenario) {
  scenario.run.Validate();
  const Rng root(scenario.run.seed);
  PreparedRun prepared;
  prepared.config = scenario.run;
  std::uint32_t next_tenant = 0;
  std::uint64_t peak = 0;

  if (scenario.tenants.count > 0) {
    std::vector<BehaviorSpec> specs =
        SampleTenants(scenario.tenants, root.Split("tenants"));
    std::vector<DailyProfile> profiles;
    profiles.reserve(specs.size());
    for (const BehaviorSpec& spec : specs) profiles.emplace_back(spec);
    peak += PeakDemand(profiles, scenario.run.step_seconds);
    prepared.roster.push_back(std::make_unique<AutoscaleAgent>(
        TenantId{next_tenant}, std::move(specs), std::move(profiles),
        root.Split("autoscale")));
    next_tenant += scenario.tenants.count;
  }

  if (scenario.trace) {
    Trace trace;
    if (!scenario.trace->path.empty()) {
      auto in = OpenInput(scenario.trace->path);
      if (!in) throw ConfigError("cannot read trace '" + scenario.trace->path + "'");
      ParsedTrace parsed = ParseAllocationCsv(*in);
      if (parsed.rejected) {
        throw ConfigError("trace '" + scenario.trace->path +
                          "' has too many malformed lines");
      }
      trace = std::move(parsed.trace);
    } else {
      trace = GenerateSyntheticTrace(scenario.trace->synthetic,
                                     root.Split("trace"));
    }
    // Events that start after the horizon never replay.
    const std::int64_t end = scenario.run.total_seconds();
    std::erase_if(trace.events,
                  [end](const TraceEvent& e) { return e.t_a.seconds() >= end; });
    peak += trace.MaxConcurrency();
    const auto tenants = static_cast<std::uint32_t>(trace.tenant_names.size());
    prepared.roster.push_back(
        std::make_unique<TraceAgent>(std::move(trace.events), next_tenant));
    next_tenant += tenants;
  }

  if (scenario.adversary) {
    prepared.roster.push_back(std::make_unique<AdversaryAgent>(
        TenantId{next_tenant}, *scenario.adversary));
  }

  prepared.peak_demand = peak;
  if (!prepared.config.pool_size) {
    if (peak == 0) {
      throw ConfigError("pool_size is required when there is no benign demand");
    }
    prepared.config.pool_size = DerivePoolSize(peak, prepared.config.ar_max);
  }
  return prepared;
}

RunStats RunScenario(const Scenario& scenario) {
  PreparedRun prepared = Prepare(scenario);
  return RunSimulation(prepared.config, *prepared.config.pool_size,
                       std::move(prepared.roster));
}

}  // namespace poolsim
