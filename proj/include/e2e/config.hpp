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

#ifndef E2E_CONFIG_HPP_
#define E2E_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "e2e/annotation.hpp"
#include "e2e/diversity.hpp"
#include "e2e/segmentation.hpp"
#include "json.hpp"

namespace e2e {

struct EngineConfig {
  enum class Kind { kMock, kRemote };

  Kind kind = Kind::kMock;
  std::string endpoint;
  double timeout_s = 30.0;
  int max_inflight = 8;
};

struct PipelineConfig {
  uint64_t seed = 0;
  ModeWeights mode_weights;
  std::vector<std::string> template_paths;  // empty -> bundled catalog
  SegmentationParams segmentation;
  std::map<Domain, Strategy> strategy_map;  // defaults applied on load
  EngineConfig engine;
  int max_retries = 3;
  size_t shard_size = 10000;
  std::string output_dir = "out";
  std::string split = "train";
  double fault_rate = 0.0;  // mock only, for gate exercises
  int jobs = 0;             // 0 -> hardware concurrency
  AnalyzeFields analyze_fields = AnalyzeFields::kBoth;
  std::vector<std::string> connectors;  // defaults applied on load
};

PipelineConfig default_config();

// Parses a JSON config document over the defaults. Unknown keys are a
// ConfigError: config typos must not silently change datasets.
PipelineConfig parse_config(std::string_view text);

PipelineConfig load_config_file(const std::string& path);

// Canonical JSON of the effective config (sorted keys, all fields present).
nlohmann::json config_to_json(const PipelineConfig& config);

// Hex FNV-1a-128 of the content-determining fields of the canonical form;
// embedded in dataset manifests so a dataset names the configuration that
// produced it. Engine transport, jobs, and output_dir are excluded: they
// change how a dataset is produced, never which bytes come out.
std::string config_digest(const PipelineConfig& config);

}  // namespace e2e

#endif  // E2E_CONFIG_HPP_
