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

#ifndef E2E_PIPELINE_HPP_
#define E2E_PIPELINE_HPP_

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "e2e/compiler.hpp"
#include "e2e/config.hpp"
#include "e2e/diversity.hpp"
#include "e2e/validation.hpp"

namespace e2e {

// Stage boundaries are JSONL files so every stage can run standalone and the
// whole pipeline is resumable:
//   ingest   manifests        -> episodes.jsonl
//   segment  episodes.jsonl   -> clips.jsonl (clip + evidence + frame refs)
//   annotate clips.jsonl      -> drafts.jsonl, samples.jsonl, rejected.jsonl,
//                                annotate-stats.json
//   compile  samples.jsonl    -> e2e-*.jsonl shards + e2e-manifest.json
//   analyze  shards           -> diversity-report.json, diversity-report.txt

struct IngestStats {
  size_t episodes = 0;
  std::vector<std::string> warnings;
};

struct AnnotateStats {
  size_t clips = 0;
  size_t samples = 0;
  size_t rejected = 0;
  size_t skipped_clips = 0;  // event-needing mode sampled, no events
};

IngestStats run_ingest(const std::vector<std::string>& manifest_paths,
                       const std::filesystem::path& episodes_out);

size_t run_segment(const PipelineConfig& config,
                   const std::filesystem::path& episodes_in,
                   const std::filesystem::path& clips_out);

// Parallel over clips (config.jobs workers); outputs are written in clip
// order, so scheduling never shows up in the bytes.
AnnotateStats run_annotate(const PipelineConfig& config,
                           const std::filesystem::path& clips_in,
                           const std::filesystem::path& drafts_out,
                           const std::filesystem::path& samples_out,
                           const std::filesystem::path& rejected_out,
                           const Engine& engine);

// Re-validates a drafts file against clip evidence. Returns the number of
// failing drafts and prints one report line per failure.
size_t run_validate(const PipelineConfig& config,
                    const std::filesystem::path& drafts_in,
                    const std::filesystem::path& clips_in, std::ostream& out);

DatasetManifest run_compile(const PipelineConfig& config,
                            const std::filesystem::path& samples_in,
                            const std::filesystem::path& rejected_in,
                            size_t skipped_clips);

DiversityReport run_analyze(const PipelineConfig& config,
                            const std::filesystem::path& shard_dir);

// ingest -> segment -> annotate -> compile -> analyze, with intermediates
// under config.output_dir. Returns a process exit code.
int run_all(const PipelineConfig& config,
            const std::vector<std::string>& manifest_paths, std::ostream& log);

// Builds the engine selected by the config. Caller owns the result.
std::unique_ptr<Engine> build_engine(const PipelineConfig& config);

// Writes a synthetic but fully consistent manifest corpus: event spans tile
// every episode, event hands are always visible, and all words come from
// the bundled lexicons, so the unfaulted mock passes the gate everywhere.
std::vector<std::string> generate_corpus(const std::filesystem::path& out_dir,
                                         size_t episodes, uint64_t seed);

}  // namespace e2e

#endif  // E2E_PIPELINE_HPP_
