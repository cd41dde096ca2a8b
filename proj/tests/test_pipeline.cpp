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

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "e2e/annotation.hpp"
#include "e2e/config.hpp"
#include "e2e/corpus.hpp"
#include "e2e/errors.hpp"
#include "e2e/pipeline.hpp"
#include "e2e/segmentation.hpp"
#include "e2e/validation.hpp"
#include "fixtures.hpp"
#include "json.hpp"

namespace {

using e2e::testing::TempDir;
using e2e::testing::dir_snapshot;
using e2e::testing::read_file;
using nlohmann::json;

std::string slurp(const std::filesystem::path& path) {
  return read_file(path.string());
}

size_t count_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  size_t n = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) ++n;
  }
  return n;
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  std::vector<json> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  REQUIRE(bool(out));
  out << text;
}

// A tiny hand-written manifest: one frame, one event, full visibility.
std::string mini_manifest(const std::string& id, const std::string& extra_key) {
  json frames = json::array();
  for (int f = 0; f < 8; ++f) {
    frames.push_back({{"t", 0.5 * f}, {"motion", 0.1}});
  }
  json manifest = {
      {"episode_id", id},
      {"domain", "household"},
      {"duration_s", 4.0},
      {"frames", frames},
      {"events", json::array({{{"t0", 0.0},
                               {"t1", 4.0},
                               {"verb", "lift"},
                               {"object", "cup"},
                               {"hand", "right"},
                               {"contact", false}}})},
      {"visible_hand_spans",
       json::array({{{"hand", "both"}, {"t0", 0.0}, {"t1", 4.0}}})},
      {"objects", json::array({{{"name", "cup"}}})},
  };
  if (!extra_key.empty()) manifest[extra_key] = "surprise";
  return manifest.dump(2);
}

}  // namespace

TEST_CASE("default config validates and digests stably") {
  const e2e::PipelineConfig config = e2e::default_config();
  CHECK(config.seed == 0);
  CHECK(config.max_retries == 3);
  CHECK(config.split == "train");
  CHECK(config.engine.kind == e2e::EngineConfig::Kind::kMock);
  CHECK_FALSE(config.strategy_map.empty());
  CHECK_FALSE(config.connectors.empty());

  const std::string digest = e2e::config_digest(config);
  CHECK(digest.size() == 32);
  CHECK(digest.find_first_not_of("0123456789abcdef") == std::string::npos);
  CHECK(e2e::config_digest(e2e::default_config()) == digest);
}

TEST_CASE("parse_config layers overrides over the defaults") {
  const std::string text = R"({
    "seed": 42,
    "split": "val",
    "shard_size": 7,
    "max_retries": 1,
    "fault_rate": 0.25,
    "jobs": 3,
    "output_dir": "scratch",
    "analyze_fields": "question",
    "mode_weights": {"spatial": 2.0, "temporal": 0.5},
    "segmentation": {"fixed_interval_s": 3.0, "min_clip_s": 0.75},
    "strategy_map": {"household": "fixed"},
    "engine": {"kind": "remote", "endpoint": "http://127.0.0.1:1", "timeout_s": 2.5, "max_inflight": 2},
    "connectors": ["then", "soon"]
  })";
  const e2e::PipelineConfig config = e2e::parse_config(text);
  CHECK(config.seed == 42);
  CHECK(config.split == "val");
  CHECK(config.shard_size == 7);
  CHECK(config.max_retries == 1);
  CHECK(config.fault_rate == doctest::Approx(0.25));
  CHECK(config.jobs == 3);
  CHECK(config.output_dir == "scratch");
  CHECK(config.analyze_fields == e2e::AnalyzeFields::kQuestion);
  CHECK(config.mode_weights[e2e::VqaMode::kSpatial] == doctest::Approx(2.0));
  CHECK(config.mode_weights[e2e::VqaMode::kTemporal] == doctest::Approx(0.5));
  // Unmentioned modes keep their default weight.
  CHECK(config.mode_weights[e2e::VqaMode::kSummary] ==
        e2e::default_config().mode_weights[e2e::VqaMode::kSummary]);
  CHECK(config.segmentation.fixed_interval_s == doctest::Approx(3.0));
  CHECK(config.segmentation.min_clip_s == doctest::Approx(0.75));
  CHECK(config.strategy_map.at(e2e::Domain::kHousehold) ==
        e2e::Strategy::kFixed);
  // Unmentioned domains keep their default strategy.
  CHECK(config.strategy_map.at(e2e::Domain::kFactory) ==
        e2e::default_strategy_map().at(e2e::Domain::kFactory));
  CHECK(config.engine.kind == e2e::EngineConfig::Kind::kRemote);
  CHECK(config.engine.endpoint == "http://127.0.0.1:1");
  CHECK(config.engine.timeout_s == doctest::Approx(2.5));
  CHECK(config.engine.max_inflight == 2);
  CHECK(config.connectors == std::vector<std::string>{"then", "soon"});
}

TEST_CASE("parse_config rejects unknown keys at every level") {
  CHECK_THROWS_WITH_AS(e2e::parse_config(R"({"frobnicate": 1})"),
                       doctest::Contains("unknown config key \"frobnicate\""),
                       e2e::ConfigError);
  CHECK_THROWS_WITH_AS(e2e::parse_config(R"({"engine": {"host": "x"}})"),
                       doctest::Contains("in engine"), e2e::ConfigError);
  CHECK_THROWS_WITH_AS(
      e2e::parse_config(R"({"segmentation": {"interval": 2}})"),
      doctest::Contains("in segmentation"), e2e::ConfigError);
}

TEST_CASE("parse_config validates value ranges") {
  CHECK_THROWS_AS(e2e::parse_config("not json"), e2e::ConfigError);
  CHECK_THROWS_AS(e2e::parse_config("[1,2]"), e2e::ConfigError);
  CHECK_THROWS_AS(e2e::parse_config(R"({"fault_rate": 1.5})"),
                  e2e::ConfigError);
  CHECK_THROWS_AS(e2e::parse_config(R"({"fault_rate": -0.1})"),
                  e2e::ConfigError);
  CHECK_THROWS_AS(e2e::parse_config(R"({"shard_size": 0})"), e2e::ConfigError);
  CHECK_THROWS_AS(e2e::parse_config(R"({"split": "a/b"})"), e2e::ConfigError);
  CHECK_THROWS_AS(e2e::parse_config(R"({"split": ""})"), e2e::ConfigError);
  CHECK_THROWS_AS(e2e::parse_config(R"({"max_retries": -1})"),
                  e2e::ConfigError);
  CHECK_THROWS_AS(e2e::parse_config(R"({"jobs": -1})"), e2e::ConfigError);
  CHECK_THROWS_AS(e2e::parse_config(R"({"connectors": []})"),
                  e2e::ConfigError);
  CHECK_THROWS_AS(e2e::parse_config(R"({"mode_weights": {"spatial": -1.0}})"),
                  e2e::ConfigError);
  CHECK_THROWS_AS(e2e::parse_config(R"({"mode_weights": {"verbs": 1.0}})"),
                  e2e::ConfigError);
  CHECK_THROWS_AS(e2e::parse_config(R"({"engine": {"kind": "llm"}})"),
                  e2e::ConfigError);
  CHECK_THROWS_AS(e2e::parse_config(R"({"engine": {"kind": "remote"}})"),
                  e2e::ConfigError);
  CHECK_THROWS_AS(e2e::parse_config(R"({"engine": {"timeout_s": 0.0}})"),
                  e2e::ConfigError);
  CHECK_THROWS_AS(e2e::parse_config(R"({"engine": {"max_inflight": 0}})"),
                  e2e::ConfigError);
}

TEST_CASE("load_config_file prefixes errors with the path") {
  TempDir tmp;
  CHECK_THROWS_AS(e2e::load_config_file((tmp / "absent.json").string()),
                  e2e::IoError);

  const std::filesystem::path bad = tmp / "bad.json";
  write_file(bad, R"({"frobnicate": 1})");
  CHECK_THROWS_WITH_AS(e2e::load_config_file(bad.string()),
                       doctest::Contains(bad.string().c_str()),
                       e2e::ConfigError);

  const std::filesystem::path good = tmp / "good.json";
  write_file(good, R"({"seed": 9, "split": "dev"})");
  const e2e::PipelineConfig config = e2e::load_config_file(good.string());
  CHECK(config.seed == 9);
  CHECK(config.split == "dev");
}

TEST_CASE("config digest ignores transport and placement knobs") {
  const e2e::PipelineConfig base = e2e::default_config();
  const std::string digest = e2e::config_digest(base);

  e2e::PipelineConfig moved = base;
  moved.engine.kind = e2e::EngineConfig::Kind::kRemote;
  moved.engine.endpoint = "http://10.0.0.1:8000";
  moved.engine.timeout_s = 1.0;
  moved.engine.max_inflight = 64;
  moved.jobs = 17;
  moved.output_dir = "/somewhere/else";
  CHECK(e2e::config_digest(moved) == digest);

  // Every content-determining field moves the digest.
  auto differs = [&](auto&& mutate) {
    e2e::PipelineConfig c = base;
    mutate(c);
    return e2e::config_digest(c) != digest;
  };
  CHECK(differs([](e2e::PipelineConfig& c) { c.seed = 1; }));
  CHECK(differs([](e2e::PipelineConfig& c) { c.split = "val"; }));
  CHECK(differs([](e2e::PipelineConfig& c) { c.shard_size = 123; }));
  CHECK(differs([](e2e::PipelineConfig& c) { c.max_retries = 0; }));
  CHECK(differs([](e2e::PipelineConfig& c) { c.fault_rate = 0.5; }));
  CHECK(differs([](e2e::PipelineConfig& c) {
    c.analyze_fields = e2e::AnalyzeFields::kAnswer;
  }));
  CHECK(differs([](e2e::PipelineConfig& c) {
    c.mode_weights[e2e::VqaMode::kSpatial] = 3.0;
  }));
  CHECK(differs([](e2e::PipelineConfig& c) {
    c.segmentation.fixed_interval_s += 0.5;
  }));
  CHECK(differs([](e2e::PipelineConfig& c) {
    c.strategy_map[e2e::Domain::kHousehold] = e2e::Strategy::kFixed;
  }));
  CHECK(differs([](e2e::PipelineConfig& c) {
    c.connectors.push_back("soon");
  }));
  CHECK(differs([](e2e::PipelineConfig& c) {
    c.template_paths.push_back("templates.json");
  }));
}

TEST_CASE("config round trips through its canonical json") {
  const e2e::PipelineConfig config = e2e::parse_config(
      R"({"seed": 5, "split": "val", "fault_rate": 0.125,
          "mode_weights": {"mechanics": 2.0},
          "engine": {"kind": "remote", "endpoint": "http://h:1"}})");
  const json canonical = e2e::config_to_json(config);
  const e2e::PipelineConfig reparsed = e2e::parse_config(canonical.dump());
  CHECK(e2e::config_to_json(reparsed) == canonical);
  CHECK(e2e::config_digest(reparsed) == e2e::config_digest(config));
}

TEST_CASE("generate_corpus is deterministic and yields valid manifests") {
  TempDir tmp;
  const auto paths_a = e2e::generate_corpus(tmp / "a", 6, 7);
  const auto paths_b = e2e::generate_corpus(tmp / "b", 6, 7);
  REQUIRE(paths_a.size() == 6);
  REQUIRE(paths_b.size() == 6);
  CHECK(dir_snapshot((tmp / "a").string()) ==
        dir_snapshot((tmp / "b").string()));

  const auto paths_c = e2e::generate_corpus(tmp / "c", 6, 8);
  bool any_difference = false;
  for (size_t i = 0; i < 6; ++i) {
    any_difference =
        any_difference || slurp(paths_a[i]) != slurp(paths_c[i]);
  }
  CHECK(any_difference);

  for (const std::string& path : paths_a) {
    std::vector<std::string> warnings;
    const e2e::Episode episode = e2e::parse_manifest(slurp(path), &warnings);
    CHECK(warnings.empty());
    CHECK(episode.duration_s >= 6.0);
    CHECK(episode.duration_s <= 14.0);
    REQUIRE_FALSE(episode.events.empty());
    // Events tile the timeline, so every clip overlaps at least one.
    CHECK(episode.events.front().t0 == 0.0);
    CHECK(episode.events.back().t1 == episode.duration_s);
    for (size_t i = 1; i < episode.events.size(); ++i) {
      CHECK(episode.events[i].t0 == episode.events[i - 1].t1);
    }
    REQUIRE(episode.visible_hand_spans.size() == 1);
    CHECK(episode.visible_hand_spans[0].t0 == 0.0);
    CHECK(episode.visible_hand_spans[0].t1 == episode.duration_s);
    const e2e::Lexicon& lex = e2e::bundled_lexicon();
    for (const e2e::InteractionEvent& ev : episode.events) {
      CHECK(lex.is_verb_lemma(ev.verb));
      CHECK(lex.is_noun_lemma(ev.object));
    }
  }
}

TEST_CASE("run_ingest writes one line per episode and prefixes warnings") {
  TempDir tmp;
  const auto paths = e2e::generate_corpus(tmp / "corpus", 4, 7);
  std::vector<std::string> manifest_paths(paths.begin(), paths.end());

  const std::filesystem::path episodes = tmp / "episodes.jsonl";
  const e2e::IngestStats stats = e2e::run_ingest(manifest_paths, episodes);
  CHECK(stats.episodes == 4);
  CHECK(stats.warnings.empty());
  CHECK(count_lines(episodes) == 4);
  const std::vector<json> lines = read_jsonl(episodes);
  for (size_t i = 0; i < lines.size(); ++i) {
    const e2e::Episode episode = e2e::episode_from_json(lines[i]);
    CHECK(episode.episode_id ==
          std::filesystem::path(manifest_paths[i]).stem().string());
  }

  SUBCASE("unknown manifest fields surface as path-prefixed warnings") {
    const std::filesystem::path odd = tmp / "odd.json";
    write_file(odd, mini_manifest("ep-odd", "weather"));
    const e2e::IngestStats s =
        e2e::run_ingest({odd.string()}, tmp / "odd.jsonl");
    REQUIRE(s.warnings.size() == 1);
    CHECK(s.warnings[0] ==
          odd.string() + ": ignoring unknown field $.weather");
  }

  SUBCASE("duplicate episode ids are an error") {
    CHECK_THROWS_WITH_AS(
        e2e::run_ingest({manifest_paths[0], manifest_paths[0]},
                        tmp / "dup.jsonl"),
        doctest::Contains("duplicate episode id"), e2e::ManifestError);
  }

  SUBCASE("a broken manifest names its file") {
    const std::filesystem::path broken = tmp / "broken.json";
    write_file(broken, "{\"episode_id\": ");
    CHECK_THROWS_WITH_AS(
        e2e::run_ingest({broken.string()}, tmp / "broken.jsonl"),
        doctest::Contains(broken.string().c_str()), e2e::ManifestError);
  }
}

TEST_CASE("run_segment matches per-episode segmentation") {
  TempDir tmp;
  const auto paths = e2e::generate_corpus(tmp / "corpus", 6, 7);
  const std::filesystem::path episodes = tmp / "episodes.jsonl";
  e2e::run_ingest({paths.begin(), paths.end()}, episodes);

  const e2e::PipelineConfig config = e2e::default_config();
  const std::filesystem::path clips = tmp / "clips.jsonl";
  const size_t clip_count = e2e::run_segment(config, episodes, clips);

  size_t expected = 0;
  for (const std::string& path : paths) {
    const e2e::Episode episode = e2e::parse_manifest(slurp(path), nullptr);
    const e2e::Strategy strategy =
        e2e::select_strategy(episode.domain, config.strategy_map);
    expected += e2e::segment(episode, strategy, config.segmentation).size();
  }
  CHECK(clip_count == expected);
  CHECK(count_lines(clips) == expected);

  for (const json& line : read_jsonl(clips)) {
    CHECK(line.at("clip_id").get<std::string>().find("ep-") == 0);
    CHECK(line.at("t_end").get<double>() > line.at("t_start").get<double>());
    // The generator stamps a frame_ref on every frame.
    CHECK_FALSE(line.at("frame_refs").empty());
    CHECK_FALSE(line.at("evidence").at("events").empty());
  }
}

TEST_CASE("run_annotate accounts for every clip") {
  TempDir tmp;
  const auto paths = e2e::generate_corpus(tmp / "corpus", 6, 7);
  const std::filesystem::path episodes = tmp / "episodes.jsonl";
  const std::filesystem::path clips = tmp / "clips.jsonl";
  e2e::run_ingest({paths.begin(), paths.end()}, episodes);
  const e2e::PipelineConfig config = e2e::default_config();
  const size_t clip_count = e2e::run_segment(config, episodes, clips);

  const e2e::MockEngine engine{e2e::FaultPolicy{}};
  const std::filesystem::path drafts = tmp / "drafts.jsonl";
  const std::filesystem::path samples = tmp / "samples.jsonl";
  const std::filesystem::path rejected = tmp / "rejected.jsonl";
  const e2e::AnnotateStats stats =
      e2e::run_annotate(config, clips, drafts, samples, rejected, engine);

  CHECK(stats.clips == clip_count);
  CHECK(stats.clips == stats.samples + stats.rejected + stats.skipped_clips);
  CHECK(stats.rejected == 0);  // clean mock always passes the gate
  CHECK(count_lines(samples) == stats.samples);
  CHECK(count_lines(rejected) == 0);
  CHECK(count_lines(drafts) == stats.samples);  // one attempt per clip

  const json stats_json = json::parse(slurp(tmp / "annotate-stats.json"));
  CHECK(stats_json.at("clips") == stats.clips);
  CHECK(stats_json.at("samples") == stats.samples);
  CHECK(stats_json.at("rejected") == stats.rejected);
  CHECK(stats_json.at("skipped_clips") == stats.skipped_clips);

  for (const json& line : read_jsonl(samples)) {
    const e2e::QASample sample = e2e::sample_from_json(line);
    CHECK(sample.validation.passed);
    CHECK(sample.attempt == 0);
    CHECK(sample.engine_id == e2e::kMockEngineId);
    CHECK(sample.seed == config.seed);
    CHECK_FALSE(sample.question.empty());
    CHECK_FALSE(sample.answer.empty());
  }
}

TEST_CASE("fault_rate drives the gate through the rate policy") {
  TempDir tmp;
  const auto paths = e2e::generate_corpus(tmp / "corpus", 5, 7);
  const std::filesystem::path episodes = tmp / "episodes.jsonl";
  const std::filesystem::path clips = tmp / "clips.jsonl";
  e2e::run_ingest({paths.begin(), paths.end()}, episodes);

  e2e::PipelineConfig config = e2e::default_config();
  const size_t clip_count = e2e::run_segment(config, episodes, clips);
  REQUIRE(clip_count > 0);

  SUBCASE("rate 1.0 rejects every clip after the full budget") {
    config.fault_rate = 1.0;
    config.max_retries = 2;
    const std::unique_ptr<e2e::Engine> engine = e2e::build_engine(config);
    const e2e::AnnotateStats stats =
        e2e::run_annotate(config, clips, tmp / "d.jsonl", tmp / "s.jsonl",
                          tmp / "r.jsonl", *engine);
    CHECK(stats.samples == 0);
    CHECK(stats.rejected == stats.clips - stats.skipped_clips);
    for (const json& line : read_jsonl(tmp / "r.jsonl")) {
      const e2e::RejectedRecord record = e2e::rejected_from_json(line);
      CHECK(record.drafts.size() == 3);   // max_retries + 1 attempts
      CHECK(record.reports.size() == 3);
      for (const e2e::ValidationReport& report : record.reports) {
        CHECK_FALSE(report.passed);
      }
    }
    CHECK(count_lines(tmp / "d.jsonl") == 3 * stats.rejected);
  }

  SUBCASE("a partial rate still accounts for every clip") {
    config.fault_rate = 0.3;
    config.max_retries = 3;
    const std::unique_ptr<e2e::Engine> engine = e2e::build_engine(config);
    const e2e::AnnotateStats stats =
        e2e::run_annotate(config, clips, tmp / "d.jsonl", tmp / "s.jsonl",
                          tmp / "r.jsonl", *engine);
    CHECK(stats.clips == stats.samples + stats.rejected + stats.skipped_clips);
    for (const json& line : read_jsonl(tmp / "r.jsonl")) {
      CHECK(e2e::rejected_from_json(line).reports.size() == 4);
    }
    for (const json& line : read_jsonl(tmp / "s.jsonl")) {
      const e2e::QASample sample = e2e::sample_from_json(line);
      CHECK(sample.attempt <= config.max_retries);
      CHECK(sample.validation.passed);
    }
  }
}

TEST_CASE("build_engine selects the configured transport") {
  e2e::PipelineConfig config = e2e::default_config();
  const auto fixtures = e2e::testing::consistent_fixtures();
  e2e::AnnotationRequest req;
  req.clip_id = fixtures[0].clip_id;
  req.mode = e2e::VqaMode::kSpatial;
  req.tmpl = *e2e::bundled_templates().for_mode(e2e::VqaMode::kSpatial)[0];
  req.evidence = fixtures[0];
  req.seed = 5;

  SUBCASE("mock engine") {
    const std::unique_ptr<e2e::Engine> engine = e2e::build_engine(config);
    const e2e::QADraft draft = engine->annotate(req, 0);
    CHECK(draft.engine_id == e2e::kMockEngineId);
  }

  SUBCASE("remote engine points at the configured endpoint") {
    config.engine.kind = e2e::EngineConfig::Kind::kRemote;
    config.engine.endpoint = "http://127.0.0.1:9";  // nothing listens here
    config.engine.timeout_s = 2.0;
    const std::unique_ptr<e2e::Engine> engine = e2e::build_engine(config);
    CHECK_THROWS_AS(engine->annotate(req, 0), e2e::TransportError);
  }
}

TEST_CASE("run_validate recounts gate failures over a drafts stream") {
  TempDir tmp;
  const auto paths = e2e::generate_corpus(tmp / "corpus", 3, 7);
  const std::filesystem::path episodes = tmp / "episodes.jsonl";
  const std::filesystem::path clips = tmp / "clips.jsonl";
  e2e::run_ingest({paths.begin(), paths.end()}, episodes);
  const e2e::PipelineConfig config = e2e::default_config();
  e2e::run_segment(config, episodes, clips);

  const e2e::MockEngine engine{e2e::FaultPolicy{}};
  const std::filesystem::path drafts = tmp / "drafts.jsonl";
  e2e::run_annotate(config, clips, drafts, tmp / "s.jsonl", tmp / "r.jsonl",
                    engine);

  SUBCASE("clean drafts validate clean") {
    std::ostringstream out;
    CHECK(e2e::run_validate(config, drafts, clips, out) == 0);
    CHECK(out.str().empty());
  }

  SUBCASE("a sabotaged draft is reported with its codes") {
    const std::vector<json> clip_lines = read_jsonl(clips);
    REQUIRE_FALSE(clip_lines.empty());
    e2e::QADraft bad;
    bad.clip_id = clip_lines[0].at("clip_id").get<std::string>();
    bad.mode = e2e::VqaMode::kSpatial;
    bad.template_id = "sabotage";
    bad.engine_id = "fixture";
    bad.attempt = 2;
    bad.question = "Where does the work happen?";
    bad.answer = "The {object} stays in view.";
    std::ofstream append(drafts, std::ios::binary | std::ios::app);
    append << e2e::draft_to_json(bad).dump() << '\n';
    append.close();

    std::ostringstream out;
    CHECK(e2e::run_validate(config, drafts, clips, out) == 1);
    const std::string report = out.str();
    CHECK(report.find("FAIL " + bad.clip_id + " mode=spatial attempt=2") !=
          std::string::npos);
    CHECK(report.find("codes=PLACEHOLDER_UNRESOLVED") != std::string::npos);
  }

  SUBCASE("a draft naming an unknown clip is an error") {
    e2e::QADraft stray;
    stray.clip_id = "no-such-clip";
    stray.mode = e2e::VqaMode::kSpatial;
    stray.question = "Where?";
    stray.answer = "Here.";
    std::ofstream append(drafts, std::ios::binary | std::ios::app);
    append << e2e::draft_to_json(stray).dump() << '\n';
    append.close();
    std::ostringstream out;
    CHECK_THROWS_AS(e2e::run_validate(config, drafts, clips, out),
                    e2e::IoError);
  }
}

TEST_CASE("run_compile and run_analyze close out the pipeline") {
  TempDir tmp;
  const auto paths = e2e::generate_corpus(tmp / "corpus", 5, 7);
  const std::filesystem::path episodes = tmp / "episodes.jsonl";
  const std::filesystem::path clips = tmp / "clips.jsonl";
  e2e::run_ingest({paths.begin(), paths.end()}, episodes);

  e2e::PipelineConfig config = e2e::default_config();
  config.output_dir = (tmp / "out").string();
  e2e::run_segment(config, episodes, clips);
  const e2e::MockEngine engine{e2e::FaultPolicy{}};
  const std::filesystem::path samples = tmp / "samples.jsonl";
  const e2e::AnnotateStats stats = e2e::run_annotate(
      config, clips, tmp / "drafts.jsonl", samples, tmp / "rejected.jsonl",
      engine);

  // A missing rejected file reads as empty rather than failing.
  const e2e::DatasetManifest manifest = e2e::run_compile(
      config, samples, tmp / "never-written.jsonl", stats.skipped_clips);
  CHECK(manifest.total_records == stats.samples);
  CHECK(manifest.rejected_records == 0);
  CHECK(manifest.skipped_clips == stats.skipped_clips);
  CHECK(manifest.config_digest == e2e::config_digest(config));
  CHECK(manifest.duplicates_dropped == 0);

  const e2e::DiversityReport report = e2e::run_analyze(config, tmp / "out");
  CHECK(report.total_samples == manifest.total_records);
  CHECK_FALSE(report.per_domain.empty());
  CHECK_FALSE(report.per_mode.empty());
  const json on_disk =
      json::parse(slurp(tmp / "out" / "diversity-report.json"));
  CHECK(on_disk == e2e::diversity_report_to_json(report));
  CHECK_FALSE(slurp(tmp / "out" / "diversity-report.txt").empty());
}

TEST_CASE("run_all composes the stages and reruns byte-identically") {
  TempDir tmp;
  const auto paths = e2e::generate_corpus(tmp / "corpus", 8, 7);
  const std::vector<std::string> manifests(paths.begin(), paths.end());

  auto run_into = [&](const std::string& dir, int jobs) {
    e2e::PipelineConfig config = e2e::default_config();
    config.output_dir = (tmp / dir).string();
    config.jobs = jobs;
    std::ostringstream log;
    const int rc = e2e::run_all(config, manifests, log);
    return std::make_pair(rc, log.str());
  };

  const auto [rc1, log1] = run_into("out1", 1);
  REQUIRE(rc1 == 0);
  CHECK(log1.find("ingest: 8 episodes") != std::string::npos);
  CHECK(log1.find("segment: ") != std::string::npos);
  CHECK(log1.find("annotate: ") != std::string::npos);
  CHECK(log1.find("compile: ") != std::string::npos);
  CHECK(log1.find("analyze: ") != std::string::npos);

  const auto [rc2, log2] = run_into("out2", 1);
  REQUIRE(rc2 == 0);
  CHECK(dir_snapshot((tmp / "out1").string()) ==
        dir_snapshot((tmp / "out2").string()));

  // Worker count shapes scheduling, never bytes.
  const auto [rc3, log3] = run_into("out3", 4);
  REQUIRE(rc3 == 0);
  CHECK(dir_snapshot((tmp / "out1").string()) ==
        dir_snapshot((tmp / "out3").string()));

  SUBCASE("stage failures name the stage and return nonzero") {
    e2e::PipelineConfig config = e2e::default_config();
    config.output_dir = (tmp / "out-err").string();
    std::ostringstream log;
    const int rc =
        e2e::run_all(config, {(tmp / "absent.json").string()}, log);
    CHECK(rc == 1);
    CHECK(log.str().find("error in ingest: ") != std::string::npos);
  }
}
