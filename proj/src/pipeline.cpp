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

#include "e2e/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <utility>

#include "e2e/errors.hpp"
#include "e2e/hashing.hpp"
#include "e2e/remote.hpp"
#include "e2e/segmentation.hpp"
#include "json.hpp"

namespace e2e {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<json> read_jsonl(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<json> lines;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      lines.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw IoError(path.string() + ":" + std::to_string(lineno) +
                    ": bad JSON line: " + e.what());
    }
  }
  return lines;
}

class JsonlWriter {
 public:
  explicit JsonlWriter(const fs::path& path)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError("cannot write " + path.string());
  }

  void write(const ordered_json& j) {
    out_ << j.dump() << '\n';
    if (!out_) throw IoError("write failed on " + path_.string());
  }

  void close() {
    out_.close();
    if (!out_) throw IoError("write failed on " + path_.string());
  }

 private:
  fs::path path_;
  std::ofstream out_;
};

ordered_json task_to_json(const AnnotationTask& task) {
  ordered_json j;
  j["clip_id"] = task.clip.clip_id;
  j["domain"] = domain_to_string(task.domain);
  j["t_start"] = task.clip.t_start;
  j["t_end"] = task.clip.t_end;
  j["strategy"] = strategy_to_string(task.clip.strategy);
  j["frame_indices"] = task.clip.frame_indices;
  j["frame_refs"] = task.frame_refs;
  j["evidence"] = evidence_to_json(task.evidence);
  j["episode_metadata"] = task.episode_metadata;
  return j;
}

AnnotationTask task_from_json(const json& j) {
  AnnotationTask task;
  task.clip.clip_id = j.at("clip_id").get<std::string>();
  task.domain = domain_from_string(j.at("domain").get<std::string>());
  task.clip.t_start = j.at("t_start").get<double>();
  task.clip.t_end = j.at("t_end").get<double>();
  task.clip.strategy = strategy_from_string(j.at("strategy").get<std::string>());
  task.clip.frame_indices = j.at("frame_indices").get<std::vector<size_t>>();
  task.frame_refs = j.at("frame_refs").get<std::vector<std::string>>();
  task.evidence = evidence_from_json(j.at("evidence"));
  task.episode_metadata = j.at("episode_metadata").get<std::string>();
  return task;
}

// Template files merge into one catalog; a single path keeps its document
// intact so from_json_text sees exactly what the user wrote.
class TemplateCatalog {
 public:
  explicit TemplateCatalog(const std::vector<std::string>& paths) {
    if (paths.empty()) {
      set_ = &bundled_templates();
      return;
    }
    if (paths.size() == 1) {
      owned_.emplace(TemplateSet::from_json_text(slurp(paths[0])));
      set_ = &*owned_;
      return;
    }
    json all = json::array();
    for (const std::string& path : paths) {
      json doc;
      try {
        doc = json::parse(slurp(path));
      } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
      }
      if (!doc.is_object() || !doc.contains("templates") ||
          doc.at("schema_version") != 1) {
        throw ConfigError(path + ": expected {schema_version: 1, templates: [...]}");
      }
      for (json& t : doc.at("templates")) all.push_back(std::move(t));
    }
    json merged = {{"schema_version", 1}, {"templates", std::move(all)}};
    owned_.emplace(TemplateSet::from_json_text(merged.dump()));
    set_ = &*owned_;
  }

  const TemplateSet& get() const { return *set_; }

 private:
  std::optional<TemplateSet> owned_;
  const TemplateSet* set_ = nullptr;
};

GateOptions gate_options(const PipelineConfig& config) {
  GateOptions opts;
  opts.connectors = config.connectors;
  return opts;
}

int effective_jobs(const PipelineConfig& config, size_t tasks) {
  int jobs = config.jobs > 0
                 ? config.jobs
                 : static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;
  if (config.engine.kind == EngineConfig::Kind::kRemote) {
    jobs = std::min(jobs, config.engine.max_inflight);
  }
  if (tasks > 0 && static_cast<size_t>(jobs) > tasks) {
    jobs = static_cast<int>(tasks);
  }
  return jobs;
}

}  // namespace

IngestStats run_ingest(const std::vector<std::string>& manifest_paths,
                       const fs::path& episodes_out) {
  IngestStats stats;
  JsonlWriter out(episodes_out);
  std::set<std::string> seen_ids;
  for (const std::string& path : manifest_paths) {
    std::vector<std::string> warnings;
    Episode episode;
    try {
      episode = parse_manifest(slurp(path), &warnings);
    } catch (const ManifestError& e) {
      throw ManifestError(e.kind(), e.path(), path + ": " + e.what());
    }
    for (const std::string& w : warnings) {
      stats.warnings.push_back(path + ": " + w);
    }
    if (!seen_ids.insert(episode.episode_id).second) {
      throw ManifestError(ManifestError::Kind::kInvariantViolation,
                          "episode_id",
                          path + ": duplicate episode id \"" +
                              episode.episode_id + "\"");
    }
    out.write(episode_to_json(episode));
    ++stats.episodes;
  }
  out.close();
  return stats;
}

size_t run_segment(const PipelineConfig& config, const fs::path& episodes_in,
                   const fs::path& clips_out) {
  JsonlWriter out(clips_out);
  size_t clips = 0;
  for (const json& line : read_jsonl(episodes_in)) {
    const Episode episode = episode_from_json(line);
    const Strategy strategy =
        select_strategy(episode.domain, config.strategy_map);
    for (const Clip& clip : segment(episode, strategy, config.segmentation)) {
      AnnotationTask task;
      task.clip = clip;
      task.evidence = slice_evidence(episode, clip);
      task.domain = episode.domain;
      task.episode_metadata = episode.metadata;
      for (size_t idx : clip.frame_indices) {
        if (episode.frames[idx].frame_ref) {
          task.frame_refs.push_back(*episode.frames[idx].frame_ref);
        }
      }
      out.write(task_to_json(task));
      ++clips;
    }
  }
  out.close();
  return clips;
}

AnnotateStats run_annotate(const PipelineConfig& config,
                           const fs::path& clips_in, const fs::path& drafts_out,
                           const fs::path& samples_out,
                           const fs::path& rejected_out, const Engine& engine) {
  std::vector<AnnotationTask> tasks;
  for (const json& line : read_jsonl(clips_in)) {
    tasks.push_back(task_from_json(line));
  }

  const TemplateCatalog catalog(config.template_paths);
  const GateOptions opts = gate_options(config);

  struct Slot {
    VqaMode mode = VqaMode::kTemporal;
    const Template* tmpl = nullptr;
    bool skipped = false;
    LoopResult result;
  };
  std::vector<Slot> slots(tasks.size());
  for (size_t i = 0; i < tasks.size(); ++i) {
    auto [mode, tmpl] = sample_mode_template(
        config.seed, tasks[i].clip.clip_id, config.mode_weights, catalog.get());
    slots[i].mode = mode;
    slots[i].tmpl = tmpl;
    slots[i].skipped =
        mode_requires_events(mode) && tasks[i].evidence.events.empty();
  }

  // Per-clip parallelism; slots land by clip index, so output bytes never
  // depend on scheduling.
  const int jobs = effective_jobs(config, tasks.size());
  std::atomic<size_t> next{0};
  std::vector<std::exception_ptr> failures(static_cast<size_t>(jobs));
  std::vector<std::thread> workers;
  workers.reserve(static_cast<size_t>(jobs));
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (size_t i = next.fetch_add(1); i < tasks.size();
             i = next.fetch_add(1)) {
          Slot& slot = slots[i];
          if (slot.skipped) continue;
          slot.result = run_loop(tasks[i], slot.mode, *slot.tmpl, engine,
                                 config.seed, config.max_retries, opts);
        }
      } catch (...) {
        failures[static_cast<size_t>(w)] = std::current_exception();
      }
    });
  }
  for (std::thread& t : workers) t.join();
  for (const std::exception_ptr& e : failures) {
    if (e) std::rethrow_exception(e);
  }

  AnnotateStats stats;
  stats.clips = tasks.size();
  JsonlWriter drafts(drafts_out);
  JsonlWriter samples(samples_out);
  JsonlWriter rejected(rejected_out);
  for (const Slot& slot : slots) {
    if (slot.skipped) {
      ++stats.skipped_clips;
      continue;
    }
    for (const QADraft& d : slot.result.drafts) drafts.write(draft_to_json(d));
    if (slot.result.sample) {
      samples.write(sample_to_json(*slot.result.sample));
      ++stats.samples;
    }
    if (slot.result.rejected) {
      rejected.write(rejected_to_json(*slot.result.rejected));
      ++stats.rejected;
    }
  }
  drafts.close();
  samples.close();
  rejected.close();

  ordered_json stats_json;
  stats_json["clips"] = stats.clips;
  stats_json["samples"] = stats.samples;
  stats_json["rejected"] = stats.rejected;
  stats_json["skipped_clips"] = stats.skipped_clips;
  std::ofstream stats_out(samples_out.parent_path() / "annotate-stats.json",
                          std::ios::binary | std::ios::trunc);
  stats_out << stats_json.dump(2) << '\n';
  if (!stats_out) {
    throw IoError("cannot write annotate-stats.json next to " +
                  samples_out.string());
  }
  return stats;
}

size_t run_validate(const PipelineConfig& config, const fs::path& drafts_in,
                    const fs::path& clips_in, std::ostream& out) {
  std::map<std::string, EvidenceRecord> evidence_by_clip;
  for (const json& line : read_jsonl(clips_in)) {
    AnnotationTask task = task_from_json(line);
    evidence_by_clip.emplace(task.clip.clip_id, std::move(task.evidence));
  }
  const GateOptions opts = gate_options(config);
  size_t failures = 0;
  for (const json& line : read_jsonl(drafts_in)) {
    const QADraft draft = draft_from_json(line);
    const auto it = evidence_by_clip.find(draft.clip_id);
    if (it == evidence_by_clip.end()) {
      throw IoError("draft references unknown clip \"" + draft.clip_id + "\"");
    }
    const ValidationReport report =
        validate(draft, it->second, draft.mode, opts);
    if (report.passed) continue;
    ++failures;
    out << "FAIL " << draft.clip_id << " mode=" << mode_to_string(draft.mode)
        << " attempt=" << draft.attempt << " codes=";
    for (size_t i = 0; i < report.violations.size(); ++i) {
      if (i > 0) out << ',';
      out << violation_code_to_string(report.violations[i].code);
    }
    out << '\n';
  }
  return failures;
}

DatasetManifest run_compile(const PipelineConfig& config,
                            const fs::path& samples_in,
                            const fs::path& rejected_in, size_t skipped_clips) {
  std::vector<QASample> samples;
  for (const json& line : read_jsonl(samples_in)) {
    samples.push_back(sample_from_json(line));
  }
  std::vector<RejectedRecord> rejected;
  if (!rejected_in.empty() && fs::exists(rejected_in)) {
    for (const json& line : read_jsonl(rejected_in)) {
      rejected.push_back(rejected_from_json(line));
    }
  }
  CompileOptions options;
  options.out_dir = config.output_dir;
  options.split = config.split;
  options.shard_size = config.shard_size;
  options.seed = config.seed;
  options.config_digest = config_digest(config);
  options.skipped_clips = skipped_clips;
  return compile(std::move(samples), rejected, options);
}

DiversityReport run_analyze(const PipelineConfig& config,
                            const fs::path& shard_dir) {
  json manifest_json;
  try {
    manifest_json = json::parse(slurp(shard_dir / kManifestFileName));
  } catch (const json::exception& e) {
    throw IoError((shard_dir / kManifestFileName).string() +
                  ": bad manifest: " + e.what());
  }
  const DatasetManifest manifest = manifest_from_json(manifest_json);

  const Lexicon& lex = bundled_lexicon();
  DiversityAccumulator acc;
  for (const ShardInfo& shard : manifest.shards) {
    for (const json& line : read_jsonl(shard_dir / shard.name)) {
      acc.add(sample_from_json(line), lex, config.analyze_fields);
    }
  }
  const DiversityReport report = finalize_report(acc);

  std::ofstream json_out(shard_dir / "diversity-report.json",
                         std::ios::binary | std::ios::trunc);
  json_out << diversity_report_to_json(report).dump(2) << '\n';
  std::ofstream table_out(shard_dir / "diversity-report.txt",
                          std::ios::binary | std::ios::trunc);
  table_out << diversity_report_table(report);
  if (!json_out || !table_out) {
    throw IoError("cannot write diversity report under " + shard_dir.string());
  }
  return report;
}

int run_all(const PipelineConfig& config,
            const std::vector<std::string>& manifest_paths, std::ostream& log) {
  const fs::path out_dir = config.output_dir;
  std::string stage = "setup";
  try {
    fs::create_directories(out_dir);
    const fs::path episodes = out_dir / "episodes.jsonl";
    const fs::path clips = out_dir / "clips.jsonl";
    const fs::path drafts = out_dir / "drafts.jsonl";
    const fs::path samples = out_dir / "samples.jsonl";
    const fs::path rejected = out_dir / "rejected.jsonl";

    stage = "ingest";
    const IngestStats ingest = run_ingest(manifest_paths, episodes);
    for (const std::string& w : ingest.warnings) {
      log << "warning: " << w << '\n';
    }
    log << "ingest: " << ingest.episodes << " episodes\n";

    stage = "segment";
    const size_t clip_count = run_segment(config, episodes, clips);
    log << "segment: " << clip_count << " clips\n";

    stage = "annotate";
    const std::unique_ptr<Engine> engine = build_engine(config);
    const AnnotateStats annotate =
        run_annotate(config, clips, drafts, samples, rejected, *engine);
    log << "annotate: " << annotate.samples << " samples, "
        << annotate.rejected << " rejected, " << annotate.skipped_clips
        << " skipped\n";

    stage = "compile";
    const DatasetManifest manifest =
        run_compile(config, samples, rejected, annotate.skipped_clips);
    log << "compile: " << manifest.total_records << " records in "
        << manifest.shards.size() << " shards\n";

    stage = "analyze";
    const DiversityReport report = run_analyze(config, out_dir);
    log << "analyze: " << report.per_domain.size() << " domains, "
        << report.per_mode.size() << " modes\n";
    return 0;
  } catch (const Error& e) {
    log << "error in " << stage << ": " << e.what() << '\n';
    return 1;
  }
}

std::unique_ptr<Engine> build_engine(const PipelineConfig& config) {
  if (config.engine.kind == EngineConfig::Kind::kRemote) {
    RemoteOptions options;
    options.endpoint = config.engine.endpoint;
    options.timeout_s = config.engine.timeout_s;
    options.max_inflight = config.engine.max_inflight;
    return std::make_unique<RemoteEngine>(options);
  }
  FaultPolicy policy;
  if (config.fault_rate > 0.0) {
    policy.kind = FaultPolicy::Kind::kRate;
    policy.rate = config.fault_rate;
  }
  return std::make_unique<MockEngine>(policy);
}

namespace {

struct DomainPool {
  Domain domain;
  std::vector<std::string> nouns;
  std::vector<std::string> verbs;          // plain action verbs
  std::vector<std::string> contact_verbs;  // always contact=true
};

const std::vector<DomainPool>& domain_pools() {
  static const std::vector<DomainPool> kPools = {
      {Domain::kHousehold,
       {"cup", "plate", "bowl", "knife", "spoon", "sponge", "towel", "pan",
        "lid", "jar"},
       {"grasp", "lift", "place", "wipe", "stir", "pour", "push", "open"},
       {"hold", "touch"}},
      {Domain::kFactory,
       {"bolt", "panel", "lever", "wrench", "gear", "clamp", "bracket",
        "crate", "valve", "pipe"},
       {"fasten", "tighten", "loosen", "align", "insert", "pull", "rotate",
        "slide"},
       {"grip", "hold"}},
      {Domain::kLab,
       {"beaker", "pipette", "vial", "flask", "tray", "burner", "tube",
        "funnel", "dish", "filter"},
       {"measure", "adjust", "pour", "rinse", "tilt", "shake", "load", "feed"},
       {"touch", "grip"}},
  };
  return kPools;
}

}  // namespace

std::vector<std::string> generate_corpus(const fs::path& out_dir,
                                         size_t episodes, uint64_t seed) {
  fs::create_directories(out_dir);
  std::vector<std::string> paths;
  paths.reserve(episodes);
  constexpr double kDt = 0.25;  // frame grid; all spans snap to it

  for (size_t i = 0; i < episodes; ++i) {
    char id_buf[32];
    std::snprintf(id_buf, sizeof(id_buf), "ep-%04zu", i);
    const std::string episode_id = id_buf;
    SplitMix64 rng(mix_key(seed, episode_id, "episode"));
    const DomainPool& pool = domain_pools()[i % domain_pools().size()];

    // 6.0 .. 14.0 seconds on the frame grid.
    const double duration = kDt * static_cast<double>(24 + rng.next_below(33));

    // Hand visibility profile covers the whole episode, so any event hand
    // drawn from the profile is visible in every clip it touches.
    const bool both_hands = rng.next_double() < 0.6;
    const Hand solo_hand =
        rng.next_below(2) == 0 ? Hand::kLeft : Hand::kRight;

    // Events tile [0, duration): every clip of every strategy overlaps one.
    struct GenEvent {
      double t0, t1;
      std::string verb, object;
      Hand hand;
      bool contact;
    };
    std::vector<GenEvent> events;
    double t = 0.0;
    while (t < duration) {
      double len = kDt * static_cast<double>(4 + rng.next_below(7));
      double t1 = std::min(t + len, duration);
      if (duration - t1 < 1.0) t1 = duration;  // no sub-second tail event
      GenEvent ev;
      ev.t0 = t;
      ev.t1 = t1;
      const bool contact_verb = rng.next_double() < 0.25;
      if (contact_verb) {
        ev.verb = pool.contact_verbs[rng.next_below(pool.contact_verbs.size())];
        ev.contact = true;
      } else {
        ev.verb = pool.verbs[rng.next_below(pool.verbs.size())];
        ev.contact = rng.next_double() < 0.35;
      }
      ev.object = pool.nouns[rng.next_below(pool.nouns.size())];
      if (both_hands) {
        const uint64_t pick = rng.next_below(3);
        ev.hand = pick == 0 ? Hand::kLeft
                            : (pick == 1 ? Hand::kRight : Hand::kBoth);
      } else {
        ev.hand = solo_hand;
      }
      events.push_back(std::move(ev));
      t = t1;
    }

    std::set<size_t> marker_frames;
    for (const GenEvent& ev : events) {
      if (ev.t0 > 0.0) {
        marker_frames.insert(static_cast<size_t>(ev.t0 / kDt + 0.5));
      }
    }

    ordered_json frames = ordered_json::array();
    const size_t frame_count = static_cast<size_t>(duration / kDt + 0.5);
    double motion = rng.next_double();
    for (size_t f = 0; f < frame_count; ++f) {
      motion += 0.36 * rng.next_double() - 0.18;
      motion = std::clamp(motion, 0.0, 1.0);
      char ref_buf[32];
      std::snprintf(ref_buf, sizeof(ref_buf), "frames/%06zu.jpg", f);
      ordered_json jf;
      jf["t"] = kDt * static_cast<double>(f);
      jf["frame_ref"] = episode_id + "/" + ref_buf;
      jf["motion"] = motion;
      if (marker_frames.count(f)) jf["event_marker"] = "step";
      frames.push_back(std::move(jf));
    }

    std::set<std::string> object_names;
    ordered_json events_json = ordered_json::array();
    for (const GenEvent& ev : events) {
      object_names.insert(ev.object);
      ordered_json je;
      je["t0"] = ev.t0;
      je["t1"] = ev.t1;
      je["verb"] = ev.verb;
      je["object"] = ev.object;
      je["hand"] = hand_to_string(ev.hand);
      je["contact"] = ev.contact;
      events_json.push_back(std::move(je));
    }
    for (int extra = 0; extra < 2; ++extra) {
      object_names.insert(pool.nouns[rng.next_below(pool.nouns.size())]);
    }
    ordered_json objects = ordered_json::array();
    for (const std::string& name : object_names) {
      objects.push_back(ordered_json{{"name", name}});
    }

    ordered_json spans = ordered_json::array();
    ordered_json span;
    span["hand"] = hand_to_string(both_hands ? Hand::kBoth : solo_hand);
    span["t0"] = 0.0;
    span["t1"] = duration;
    spans.push_back(std::move(span));

    ordered_json manifest;
    manifest["episode_id"] = episode_id;
    manifest["domain"] = domain_to_string(pool.domain);
    manifest["duration_s"] = duration;
    manifest["frames"] = std::move(frames);
    manifest["events"] = std::move(events_json);
    manifest["visible_hand_spans"] = std::move(spans);
    manifest["objects"] = std::move(objects);
    manifest["metadata"] = "synthetic " +
                            std::string(domain_to_string(pool.domain)) +
                            " episode";

    const fs::path path = out_dir / (episode_id + ".json");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << manifest.dump(2) << '\n';
    if (!out) throw IoError("write failed on " + path.string());
    paths.push_back(path.string());
  }
  return paths;
}

}  // namespace e2e
