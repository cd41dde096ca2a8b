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

#include "e2e/compiler.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <tuple>
#include <utility>

#include "e2e/errors.hpp"
#include "e2e/text.hpp"

namespace e2e {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string indexed_name(const char* prefix, const std::string& split,
                         size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%05zu", index);
  return std::string(prefix) + "-" + split + "-" + buf + ".jsonl";
}

// Writes `lines` as JSONL shards of at most shard_size records each.
template <typename Range, typename Serialize>
std::vector<ShardInfo> write_shards(const Range& records, size_t shard_size,
                                    const std::filesystem::path& out_dir,
                                    const std::string& split,
                                    const char* prefix, Serialize serialize) {
  std::vector<ShardInfo> shards;
  std::ofstream out;
  size_t in_shard = 0;
  for (const auto& record : records) {
    if (!out.is_open() || in_shard == shard_size) {
      if (out.is_open()) out.close();
      ShardInfo info;
      info.name = indexed_name(prefix, split, shards.size());
      const std::filesystem::path path = out_dir / info.name;
      out.open(path, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot open shard for writing: " + path.string());
      shards.push_back(std::move(info));
      in_shard = 0;
    }
    out << serialize(record).dump() << '\n';
    if (!out) {
      throw IoError("write failure on shard: " +
                    (out_dir / shards.back().name).string());
    }
    ++in_shard;
    ++shards.back().records;
  }
  if (out.is_open()) out.close();
  return shards;
}

}  // namespace

Uint128 dedup_key(const QASample& sample) {
  std::string key;
  key.reserve(sample.clip_id.size() + sample.question.size() + 16);
  key += sample.clip_id;
  key += '\x1f';
  key += mode_to_string(sample.mode);
  key += '\x1f';
  key += normalize_text(sample.question);
  return fnv1a128(key);
}

std::string shard_name(const std::string& split, size_t index) {
  return indexed_name("e2e", split, index);
}

std::string rejected_shard_name(const std::string& split, size_t index) {
  return indexed_name("rejected", split, index);
}

DatasetManifest compile(std::vector<QASample> samples,
                        const std::vector<RejectedRecord>& rejected,
                        const CompileOptions& options) {
  if (options.shard_size == 0) throw IoError("shard_size must be positive");
  std::error_code ec;
  std::filesystem::create_directories(options.out_dir, ec);
  if (ec) {
    throw IoError("cannot create output directory " +
                  options.out_dir.string() + ": " + ec.message());
  }

  // Deterministic order regardless of upstream worker scheduling.
  std::sort(samples.begin(), samples.end(),
            [](const QASample& a, const QASample& b) {
              return std::make_tuple(domain_to_string(a.domain),
                                     std::cref(a.clip_id), mode_to_string(a.mode),
                                     std::cref(a.question), std::cref(a.answer)) <
                     std::make_tuple(domain_to_string(b.domain),
                                     std::cref(b.clip_id), mode_to_string(b.mode),
                                     std::cref(b.question), std::cref(b.answer));
            });

  DatasetManifest manifest;
  manifest.split = options.split;
  manifest.seed = options.seed;
  manifest.config_digest = options.config_digest;
  manifest.skipped_clips = options.skipped_clips;

  std::vector<QASample> kept;
  kept.reserve(samples.size());
  std::set<Uint128> seen;
  for (QASample& s : samples) {
    if (!seen.insert(dedup_key(s)).second) {
      ++manifest.duplicates_dropped;
      continue;
    }
    kept.push_back(std::move(s));
  }

  for (const QASample& s : kept) {
    ++manifest.per_mode[std::string(mode_to_string(s.mode))];
    ++manifest.per_domain[std::string(domain_to_string(s.domain))];
  }
  manifest.total_records = kept.size();

  manifest.shards = write_shards(kept, options.shard_size, options.out_dir,
                                 options.split, "e2e", sample_to_json);

  std::vector<RejectedRecord> rej = rejected;
  std::sort(rej.begin(), rej.end(),
            [](const RejectedRecord& a, const RejectedRecord& b) {
              return std::make_tuple(std::cref(a.clip_id), mode_to_string(a.mode),
                                     std::cref(a.template_id)) <
                     std::make_tuple(std::cref(b.clip_id), mode_to_string(b.mode),
                                     std::cref(b.template_id));
            });
  manifest.rejected_records = rej.size();
  manifest.rejected_shards =
      write_shards(rej, options.shard_size, options.out_dir, options.split,
                   "rejected", rejected_to_json);

  const std::filesystem::path manifest_path =
      options.out_dir / std::string(kManifestFileName);
  std::ofstream out(manifest_path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open manifest for writing: " +
                  manifest_path.string());
  }
  out << manifest_to_json(manifest).dump(2) << '\n';
  if (!out) throw IoError("write failure on manifest: " + manifest_path.string());
  return manifest;
}

nlohmann::ordered_json manifest_to_json(const DatasetManifest& m) {
  ordered_json j;
  j["schema_version"] = m.schema_version;
  j["split"] = m.split;
  j["seed"] = m.seed;
  j["config_digest"] = m.config_digest;
  ordered_json shards = ordered_json::array();
  for (const ShardInfo& s : m.shards) {
    ordered_json e;
    e["name"] = s.name;
    e["records"] = s.records;
    shards.push_back(std::move(e));
  }
  j["shards"] = std::move(shards);
  j["total_records"] = m.total_records;
  j["per_mode"] = m.per_mode;
  j["per_domain"] = m.per_domain;
  j["duplicates_dropped"] = m.duplicates_dropped;
  j["rejected_records"] = m.rejected_records;
  ordered_json rejected = ordered_json::array();
  for (const ShardInfo& s : m.rejected_shards) {
    ordered_json e;
    e["name"] = s.name;
    e["records"] = s.records;
    rejected.push_back(std::move(e));
  }
  j["rejected_shards"] = std::move(rejected);
  j["skipped_clips"] = m.skipped_clips;
  return j;
}

DatasetManifest manifest_from_json(const nlohmann::json& j) {
  DatasetManifest m;
  m.schema_version = j.at("schema_version").get<int>();
  m.split = j.at("split").get<std::string>();
  m.seed = j.at("seed").get<uint64_t>();
  m.config_digest = j.at("config_digest").get<std::string>();
  for (const json& e : j.at("shards")) {
    ShardInfo s;
    s.name = e.at("name").get<std::string>();
    s.records = e.at("records").get<size_t>();
    m.shards.push_back(std::move(s));
  }
  m.total_records = j.at("total_records").get<size_t>();
  m.per_mode = j.at("per_mode").get<std::map<std::string, size_t>>();
  m.per_domain = j.at("per_domain").get<std::map<std::string, size_t>>();
  m.duplicates_dropped = j.at("duplicates_dropped").get<size_t>();
  m.rejected_records = j.at("rejected_records").get<size_t>();
  for (const json& e : j.at("rejected_shards")) {
    ShardInfo s;
    s.name = e.at("name").get<std::string>();
    s.records = e.at("records").get<size_t>();
    m.rejected_shards.push_back(std::move(s));
  }
  m.skipped_clips = j.at("skipped_clips").get<size_t>();
  return m;
}

}  // namespace e2e
