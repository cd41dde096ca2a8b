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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "e2e/config.hpp"
#include "e2e/errors.hpp"
#include "e2e/fm.hpp"
#include "e2e/pipeline.hpp"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;

struct Overrides {
  std::optional<std::string> config_path;
  std::optional<uint64_t> seed;
  std::optional<std::string> engine;
  std::optional<std::string> endpoint;
  std::optional<int> max_retries;
  std::optional<size_t> shard_size;
  std::optional<std::string> out;
  std::optional<double> fault_rate;
  std::optional<int> jobs;
  std::optional<std::string> split;
};

// --config beats E2E_CONFIG beats defaults; explicit flags beat all three.
e2e::PipelineConfig resolve_config(const Overrides& o) {
  e2e::PipelineConfig config;
  if (o.config_path) {
    config = e2e::load_config_file(*o.config_path);
  } else if (const char* env = std::getenv("E2E_CONFIG"); env && *env) {
    config = e2e::load_config_file(env);
  } else {
    config = e2e::default_config();
  }
  if (o.seed) config.seed = *o.seed;
  if (o.engine) {
    if (*o.engine == "mock") {
      config.engine.kind = e2e::EngineConfig::Kind::kMock;
    } else if (*o.engine == "remote") {
      config.engine.kind = e2e::EngineConfig::Kind::kRemote;
    } else {
      throw e2e::ConfigError("--engine must be mock or remote");
    }
  }
  if (o.endpoint) config.engine.endpoint = *o.endpoint;
  if (o.max_retries) config.max_retries = *o.max_retries;
  if (o.shard_size) config.shard_size = *o.shard_size;
  if (o.out) config.output_dir = *o.out;
  if (o.fault_rate) config.fault_rate = *o.fault_rate;
  if (o.jobs) config.jobs = *o.jobs;
  if (o.split) config.split = *o.split;
  if (config.engine.kind == e2e::EngineConfig::Kind::kRemote &&
      config.engine.endpoint.empty()) {
    throw e2e::ConfigError("remote engine needs --endpoint");
  }
  return config;
}

size_t read_skipped_from_stats(const fs::path& samples_path) {
  const fs::path stats = samples_path.parent_path() / "annotate-stats.json";
  std::error_code ec;
  if (!fs::exists(stats, ec)) return 0;
  std::ifstream in(stats, std::ios::binary);
  if (!in) return 0;
  try {
    nlohmann::json j;
    in >> j;
    return j.value("skipped_clips", size_t{0});
  } catch (const nlohmann::json::exception&) {
    return 0;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Egocentric clip annotation pipeline"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  Overrides o;
  app.add_option("--config", o.config_path,
                 "JSON config file (default: $E2E_CONFIG if set)");
  app.add_option("--seed", o.seed, "Pipeline seed");
  app.add_option("--engine", o.engine, "Annotation engine: mock or remote");
  app.add_option("--endpoint", o.endpoint, "Remote engine base URL");
  app.add_option("--max-retries", o.max_retries,
                 "Regeneration attempts after the first");
  app.add_option("--shard-size", o.shard_size, "Records per output shard");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--fault-rate", o.fault_rate,
                 "Mock-only fault injection rate in [0,1]");
  app.add_option("--jobs", o.jobs, "Worker threads (0 = hardware)");
  app.add_option("--split", o.split, "Dataset split name");

  auto* gen = app.add_subcommand("gen-corpus",
                                 "Write a synthetic manifest corpus");
  std::string gen_dir = "data/corpus";
  size_t gen_episodes = 50;
  gen->add_option("--dir", gen_dir, "Corpus directory");
  gen->add_option("--episodes", gen_episodes, "Episode count");

  auto* ingest = app.add_subcommand("ingest", "Parse manifests to episodes.jsonl");
  std::vector<std::string> ingest_manifests;
  ingest->add_option("manifests", ingest_manifests, "Manifest JSON files")
      ->required();

  auto* segment = app.add_subcommand("segment", "Cut episodes into clips");
  std::string segment_episodes;
  segment->add_option("--episodes", segment_episodes,
                      "episodes.jsonl (default {out}/episodes.jsonl)");

  auto* annotate =
      app.add_subcommand("annotate", "Run the generation-validation loop");
  std::string annotate_clips;
  annotate->add_option("--clips", annotate_clips,
                       "clips.jsonl (default {out}/clips.jsonl)");

  auto* validate = app.add_subcommand("validate", "Re-check a drafts file");
  std::string validate_drafts;
  std::string validate_clips;
  validate->add_option("--drafts", validate_drafts,
                       "drafts.jsonl (default {out}/drafts.jsonl)");
  validate->add_option("--clips", validate_clips,
                       "clips.jsonl (default {out}/clips.jsonl)");

  auto* compile_cmd = app.add_subcommand("compile", "Shard validated samples");
  std::string compile_samples;
  std::string compile_rejected;
  std::optional<size_t> compile_skipped;
  compile_cmd->add_option("--samples", compile_samples,
                          "samples.jsonl (default {out}/samples.jsonl)");
  compile_cmd->add_option("--rejected", compile_rejected,
                          "rejected.jsonl (default {out}/rejected.jsonl)");
  compile_cmd->add_option("--skipped", compile_skipped,
                          "Skipped-clip count (default: annotate-stats.json)");

  auto* analyze = app.add_subcommand("analyze", "Diversity report over shards");
  std::string analyze_dir;
  analyze->add_option("--dir", analyze_dir,
                      "Shard directory (default {out})");

  auto* fm = app.add_subcommand("fm-verify",
                                "Self-check the flow-matching kernel");
  e2e::FmVerifyOptions fm_options;
  fm->add_option("--steps", fm_options.steps, "Euler steps");
  fm->add_option("--k", fm_options.k, "Action chunk length");
  fm->add_option("--d-a", fm_options.d_a, "Action dimension");
  fm->add_option("--seed", fm_options.seed, "Kernel check seed");

  auto* run = app.add_subcommand("run", "Full pipeline over manifests");
  std::vector<std::string> run_manifests;
  run->add_option("manifests", run_manifests, "Manifest JSON files")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const uint64_t seed = o.seed.value_or(7);
      const std::vector<std::string> paths =
          e2e::generate_corpus(gen_dir, gen_episodes, seed);
      std::cout << "wrote " << paths.size() << " manifests to " << gen_dir
                << " (seed " << seed << ")\n";
      return 0;
    }
    if (fm->parsed()) {
      return e2e::run_fm_verify(fm_options, std::cout) ? 0 : 1;
    }

    const e2e::PipelineConfig config = resolve_config(o);
    const fs::path out_dir = config.output_dir;
    const auto or_default = [&](const std::string& given,
                                const char* name) -> fs::path {
      return given.empty() ? out_dir / name : fs::path(given);
    };

    if (ingest->parsed()) {
      fs::create_directories(out_dir);
      const e2e::IngestStats stats =
          e2e::run_ingest(ingest_manifests, out_dir / "episodes.jsonl");
      for (const std::string& w : stats.warnings) {
        std::cerr << "warning: " << w << '\n';
      }
      std::cout << "ingest: " << stats.episodes << " episodes\n";
      return 0;
    }
    if (segment->parsed()) {
      fs::create_directories(out_dir);
      const size_t clips = e2e::run_segment(
          config, or_default(segment_episodes, "episodes.jsonl"),
          out_dir / "clips.jsonl");
      std::cout << "segment: " << clips << " clips\n";
      return 0;
    }
    if (annotate->parsed()) {
      fs::create_directories(out_dir);
      const std::unique_ptr<e2e::Engine> engine = e2e::build_engine(config);
      const e2e::AnnotateStats stats = e2e::run_annotate(
          config, or_default(annotate_clips, "clips.jsonl"),
          out_dir / "drafts.jsonl", out_dir / "samples.jsonl",
          out_dir / "rejected.jsonl", *engine);
      std::cout << "annotate: " << stats.samples << " samples, "
                << stats.rejected << " rejected, " << stats.skipped_clips
                << " skipped\n";
      return 0;
    }
    if (validate->parsed()) {
      const size_t failures = e2e::run_validate(
          config, or_default(validate_drafts, "drafts.jsonl"),
          or_default(validate_clips, "clips.jsonl"), std::cout);
      std::cout << failures << " failing drafts\n";
      return failures == 0 ? 0 : 1;
    }
    if (compile_cmd->parsed()) {
      const fs::path samples = or_default(compile_samples, "samples.jsonl");
      const size_t skipped = compile_skipped
                                 ? *compile_skipped
                                 : read_skipped_from_stats(samples);
      const e2e::DatasetManifest manifest = e2e::run_compile(
          config, samples, or_default(compile_rejected, "rejected.jsonl"),
          skipped);
      std::cout << "compile: " << manifest.total_records << " records in "
                << manifest.shards.size() << " shards\n";
      return 0;
    }
    if (analyze->parsed()) {
      const fs::path dir = analyze_dir.empty() ? out_dir : fs::path(analyze_dir);
      const e2e::DiversityReport report = e2e::run_analyze(config, dir);
      std::cout << e2e::diversity_report_table(report);
      return 0;
    }
    if (run->parsed()) {
      return e2e::run_all(config, run_manifests, std::cout);
    }
  } catch (const e2e::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
