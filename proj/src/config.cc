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

#include "poolsim/config.h"

#include <sstream>

namespace poolsim {

void RunConfig::Validate() const {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (pool_size && *pool_size == 0) fail("pool_size must be positive");
  if (!(ar_max > 0.0 && ar_max <= 1.0)) fail("ar_max must be in (0, 1]");
  if (step_seconds < 1) fail("step_seconds must be >= 1");
  if (warmup_days < 0 || adversary_days < 0) fail("day counts must be >= 0");
  if (d_reuse < 0) fail("d_reuse must be >= 0");
  if (!(alpha >= 0.0)) fail("alpha must be >= 0");
  if (!(p_c >= 0.0 && p_c <= 1.0)) fail("p_c must be in [0, 1]");
  if (ar_sample_seconds < 1) fail("ar_sample_seconds must be >= 1");
}

namespace {

template <typename T>
void Read(const nlohmann::json& json, const char* key, T& field) {
  auto it = json.find(key);
  if (it == json.end() || it->is_null()) return;
  try {
    field = it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    std::ostringstream msg;
    msg << "config key '" << key << "': " << e.what();
    throw ConfigError(msg.str());
  }
}

}  // namespace

RunConfig RunConfigFromJson(const nlohmann::json& json, RunConfig defaults) {
  if (!json.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig config = defaults;
  if (auto it = json.find("pool_size"); it != json.end()) {
    if (it->is_null()) {
      config.pool_size.reset();
    } else {
      std::uint64_t size = 0;
      Read(json, "pool_size", size);
      config.pool_size = size;
    }
  }
  Read(json, "ar_max", config.ar_max);
  Read(json, "seed", config.seed);
  Read(json, "step_seconds", config.step_seconds);
  Read(json, "warmup_days", config.warmup_days);
  Read(json, "adversary_days", config.adversary_days);
  Read(json, "d_reuse", config.d_reuse);
  Read(json, "alpha", config.alpha);
  Read(json, "p_c", config.p_c);
  Read(json, "ar_sample_seconds", config.ar_sample_seconds);
  Read(json, "sample_capacity", config.sample_capacity);
  if (auto it = json.find("policy"); it != json.end()) {
    if (!it->is_string()) throw ConfigError("config key 'policy' must be a string");
    auto kind = ParsePolicyKind(it->get<std::string>());
    if (!kind) throw ConfigError("unknown policy '" + it->get<std::string>() + "'");
    config.policy = *kind;
  }
  config.Validate();
  return config;
}

nlohmann::json ToJson(const RunConfig& config) {
  nlohmann::json json = {
      {"ar_max", config.ar_max},
      {"seed", config.seed},
      {"step_seconds", config.step_seconds},
      {"warmup_days", config.warmup_days},
      {"adversary_days", config.adversary_days},
      {"d_reuse", config.d_reuse},
      {"alpha", config.alpha},
      {"p_c", config.p_c},
      {"policy", std::string(PolicyName(config.policy))},
      {"ar_sample_seconds", config.ar_sample_seconds},
      {"sample_capacity", config.sample_capacity},
  };
  json["pool_size"] = config.pool_size ? nlohmann::json(*config.pool_size)
                                       : nlohmann::json(nullptr);
  return json;
}

}  // namespace poolsim
