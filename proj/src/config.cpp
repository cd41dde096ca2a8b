// Copyright 2026 The E2E Engine Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "e2e/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include "e2e/errors.hpp"
#include "e2e/hashing.hpp"
#include "e2e/validation.hpp"

namespace e2e {
namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> known,
                         std::string_view where) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool ok = false;
    for (std::string_view k : known) ok = ok || key == k;
    if (!ok) {
      throw ConfigError("unknown config key \"" + key + "\" in " +
                        std::string(where));
    }
  }
}

void parse_engine(const json& j, EngineConfig* engine) {
  reject_unknown_keys(j, {"kind", "endpoint", "timeout_s", "max_inflight"},
                      "engine");
  if (j.contains("kind")) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "mock") {
      engine->kind = EngineConfig::Kind::kMock;
    } else if (kind == "remote") {
      engine->kind = EngineConfig::Kind::kRemote;
    } else {
      throw ConfigError("engine.kind must be \"mock\" or \"remote\", got \"" +
                        kind + "\"");
    }
  }
  if (j.contains("endpoint")) engine->endpoint = j.at("endpoint").get<std::string>();
  if (j.contains("timeout_s")) engine->timeout_s = j.at("timeout_s").get<double>();
  if (j.contains("max_inflight")) {
    engine->max_inflight = j.at("max_inflight").get<int>();
  }
}

void parse_segmentation(const json& j, SegmentationParams* params) {
  reject_unknown_keys(j,
                      {"fixed_interval_s", "min_tail_fraction",
                       "kinematic_threshold", "kinematic_smooth_window",
                       "min_clip_s"},
                      "segmentation");
  if (j.contains("fixed_interval_s")) {
    params->fixed_interval_s = j.at("fixed_interval_s").get<double>();
  }
  if (j.contains("min_tail_fraction")) {
    params->min_tail_fraction = j.at("min_tail_fraction").get<double>();
  }
  if (j.contains("kinematic_threshold")) {
    params->kinematic_threshold = j.at("kinematic_threshold").get<double>();
  }
  if (j.contains("kinematic_smooth_window")) {
    params->kinematic_smooth_window = j.at("kinematic_smooth_window").get<int>();
  }
  if (j.contains("min_clip_s")) params->min_clip_s = j.at("min_clip_s").get<double>();
}

void validate_config(const PipelineConfig& config) {
  for (size_t m = 0; m < kNumModes; ++m) {
    const double w = config.mode_weights[static_cast<VqaMode>(m)];
    if (!std::isfinite(w) || w < 0.0) {
      throw ConfigError("mode_weights." +
                        std::string(mode_to_string(static_cast<VqaMode>(m))) +
                        " must be finite and >= 0");
    }
  }
  config.segmentation.validate();
  if (config.engine.kind == EngineConfig::Kind::kRemote &&
      config.engine.endpoint.empty()) {
    throw ConfigError("engine.kind \"remote\" needs engine.endpoint");
  }
  if (!(config.engine.timeout_s > 0.0)) {
    throw ConfigError("engine.timeout_s must be > 0");
  }
  if (config.engine.max_inflight < 1) {
    throw ConfigError("engine.max_inflight must be >= 1");
  }
  if (config.max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (config.shard_size < 1) throw ConfigError("shard_size must be >= 1");
  if (config.output_dir.empty()) throw ConfigError("output_dir must be set");
  if (config.split.empty() ||
      config.split.find_first_of("/\\") != std::string::npos) {
    throw ConfigError("split must be a plain name, got \"" + config.split +
                      "\"");
  }
  if (!(config.fault_rate >= 0.0 && config.fault_rate <= 1.0)) {
    throw ConfigError("fault_rate must be in [0, 1]");
  }
  if (config.jobs < 0) throw ConfigError("jobs must be >= 0");
  if (config.connectors.empty()) {
    throw ConfigError("connectors must not be empty");
  }
}

}  // namespace

PipelineConfig default_config() {
  PipelineConfig config;
  config.strategy_map = default_strategy_map();
  config.connectors = default_connectors();
  return config;
}

PipelineConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown_keys(j,
                      {"seed", "mode_weights", "template_paths", "segmentation",
                       "strategy_map", "engine", "max_retries", "shard_size",
                       "output_dir", "split", "fault_rate", "jobs",
                       "analyze_fields", "connectors"},
                      "config");

  PipelineConfig config = default_config();
  try {
    if (j.contains("seed")) config.seed = j.at("seed").get<uint64_t>();
    if (j.contains("mode_weights")) {
      const json& weights = j.at("mode_weights");
      if (!weights.is_object()) {
        throw ConfigError("mode_weights must map mode names to weights");
      }
      for (const auto& [key, value] : weights.items()) {
        config.mode_weights[mode_from_string(key)] = value.get<double>();
      }
    }
    if (j.contains("template_paths")) {
      config.template_paths =
          j.at("template_paths").get<std::vector<std::string>>();
    }
    if (j.contains("segmentation")) {
      parse_segmentation(j.at("segmentation"), &config.segmentation);
    }
    if (j.contains("strategy_map")) {
      const json& strategies = j.at("strategy_map");
      if (!strategies.is_object()) {
        throw ConfigError("strategy_map must map domains to strategies");
      }
      for (const auto& [key, value] : strategies.items()) {
        config.strategy_map[domain_from_string(key)] =
            strategy_from_string(value.get<std::string>());
      }
    }
    if (j.contains("engine")) parse_engine(j.at("engine"), &config.engine);
    if (j.contains("max_retries")) {
      config.max_retries = j.at("max_retries").get<int>();
    }
    if (j.contains("shard_size")) {
      config.shard_size = j.at("shard_size").get<size_t>();
    }
    if (j.contains("output_dir")) {
      config.output_dir = j.at("output_dir").get<std::string>();
    }
    if (j.contains("split")) config.split = j.at("split").get<std::string>();
    if (j.contains("fault_rate")) {
      config.fault_rate = j.at("fault_rate").get<double>();
    }
    if (j.contains("jobs")) config.jobs = j.at("jobs").get<int>();
    if (j.contains("analyze_fields")) {
      config.analyze_fields =
          analyze_fields_from_string(j.at("analyze_fields").get<std::string>());
    }
    if (j.contains("connectors")) {
      config.connectors = j.at("connectors").get<std::vector<std::string>>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }

  validate_config(config);
  return config;
}

PipelineConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config(buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

nlohmann::json config_to_json(const PipelineConfig& config) {
  json weights = json::object();
  for (size_t m = 0; m < kNumModes; ++m) {
    weights[std::string(mode_to_string(static_cast<VqaMode>(m)))] =
        config.mode_weights[static_cast<VqaMode>(m)];
  }
  json strategies = json::object();
  for (const auto& [domain, strategy] : config.strategy_map) {
    strategies[std::string(domain_to_string(domain))] =
        std::string(strategy_to_string(strategy));
  }
  json engine = {
      {"kind",
       config.engine.kind == EngineConfig::Kind::kMock ? "mock" : "remote"},
      {"endpoint", config.engine.endpoint},
      {"timeout_s", config.engine.timeout_s},
      {"max_inflight", config.engine.max_inflight},
  };
  json segmentation = {
      {"fixed_interval_s", config.segmentation.fixed_interval_s},
      {"min_tail_fraction", config.segmentation.min_tail_fraction},
      {"kinematic_threshold", config.segmentation.kinematic_threshold},
      {"kinematic_smooth_window", config.segmentation.kinematic_smooth_window},
      {"min_clip_s", config.segmentation.min_clip_s},
  };
  // nlohmann::json stores object keys sorted; dump() of this value is the
  // canonical form the digest is taken over.
  return json{
      {"seed", config.seed},
      {"mode_weights", std::move(weights)},
      {"template_paths", config.template_paths},
      {"segmentation", std::move(segmentation)},
      {"strategy_map", std::move(strategies)},
      {"engine", std::move(engine)},
      {"max_retries", config.max_retries},
      {"shard_size", config.shard_size},
      {"output_dir", config.output_dir},
      {"split", config.split},
      {"fault_rate", config.fault_rate},
      {"jobs", config.jobs},
      {"analyze_fields", std::string(analyze_fields_to_string(config.analyze_fields))},
      {"connectors", config.connectors},
  };
}

std::string config_digest(const PipelineConfig& config) {
  // Only content-determining fields feed the digest. Transport and
  // scheduling knobs (engine, jobs, output_dir) are excluded so the same
  // dataset carries the same digest no matter how it was produced.
  json j = config_to_json(config);
  j.erase("engine");
  j.erase("jobs");
  j.erase("output_dir");
  return to_hex(fnv1a128(j.dump()));
}

}  // namespace e2e
