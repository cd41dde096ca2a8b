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

#ifndef E2E_COMPILER_HPP_
#define E2E_COMPILER_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "e2e/hashing.hpp"
#include "e2e/validation.hpp"
#include "json.hpp"

namespace e2e {

// Stable 128-bit key over (clip_id, mode, normalized question): semantic
// duplicates collide, cosmetic whitespace/case differences collide too.
Uint128 dedup_key(const QASample& sample);

struct CompileOptions {
  std::filesystem::path out_dir;
  std::string split = "train";
  size_t shard_size = 10000;
  uint64_t seed = 0;
  std::string config_digest;
  size_t skipped_clips = 0;
};

struct ShardInfo {
  std::string name;
  size_t records = 0;
};

struct DatasetManifest {
  int schema_version = 1;
  std::string split;
  uint64_t seed = 0;
  std::string config_digest;
  std::vector<ShardInfo> shards;
  size_t total_records = 0;
  std::map<std::string, size_t> per_mode;
  std::map<std::string, size_t> per_domain;
  size_t duplicates_dropped = 0;
  size_t rejected_records = 0;
  std::vector<ShardInfo> rejected_shards;
  size_t skipped_clips = 0;
};

// Sorts by (domain, clip_id, mode, question, answer), drops duplicates
// (first occurrence wins), writes `e2e-{split}-{index:05}.jsonl` shards, a
// sibling `rejected-{split}-{index:05}.jsonl` stream, and
// `e2e-manifest.json`. Output bytes depend only on the sample multiset, so
// any worker scheduling upstream compiles to identical files.
DatasetManifest compile(std::vector<QASample> samples,
                        const std::vector<RejectedRecord>& rejected,
                        const CompileOptions& options);

nlohmann::ordered_json manifest_to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const nlohmann::json& j);

std::string shard_name(const std::string& split, size_t index);
std::string rejected_shard_name(const std::string& split, size_t index);

inline constexpr std::string_view kManifestFileName = "e2e-manifest.json";

}  // namespace e2e

#endif  // E2E_COMPILER_HPP_
