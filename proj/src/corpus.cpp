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

#include "e2e/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "e2e/errors.hpp"
#include "e2e/lexicon.hpp"

namespace e2e {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void schema_error(const std::string& path,
                               const std::string& reason) {
  throw ManifestError(ManifestError::Kind::kSchemaViolation, path, reason);
}

[[noreturn]] void invariant_error(const std::string& description) {
  throw ManifestError(ManifestError::Kind::kInvariantViolation, "",
                      description);
}

double get_finite_number(const json& j, const std::string& path) {
  if (!j.is_number()) schema_error(path, "expected a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) schema_error(path, "number must be finite");
  return v;
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) schema_error(path, "expected a string");
  return j.get<std::string>();
}

void warn_unknown_keys(const json& obj, const std::string& path,
                       std::initializer_list<std::string_view> known,
                       std::vector<std::string>* warnings) {
  if (warnings == nullptr) return;
  for (const auto& [key, value] : obj.items()) {
    bool found = false;
    for (std::string_view k : known) {
      if (key == k) {
        found = true;
        break;
      }
    }
    if (!found) {
      warnings->push_back("ignoring unknown field " + path + "." + key);
    }
  }
}

bool is_lower_alpha(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < 'a' || c > 'z') return false;
  }
  return true;
}

void sort_events(std::vector<InteractionEvent>* events) {
  std::sort(events->begin(), events->end(),
            [](const InteractionEvent& a, const InteractionEvent& b) {
              if (a.t0 != b.t0) return a.t0 < b.t0;
              if (a.t1 != b.t1) return a.t1 < b.t1;
              if (a.verb != b.verb) return a.verb < b.verb;
              return a.object < b.object;
            });
}

Episode episode_from_json_impl(const json& root,
                               std::vector<std::string>* warnings) {
  if (!root.is_object()) schema_error("$", "manifest must be a JSON object");
  warn_unknown_keys(root, "$",
                    {"episode_id", "domain", "duration_s", "frames", "events",
                     "visible_hand_spans", "objects", "metadata"},
                    warnings);

  Episode e;
  if (!root.contains("episode_id")) schema_error("episode_id", "missing");
  e.episode_id = get_string(root.at("episode_id"), "episode_id");
  if (e.episode_id.empty()) schema_error("episode_id", "must be nonempty");

  if (!root.contains("domain")) schema_error("domain", "missing");
  e.domain = domain_from_string(get_string(root.at("domain"), "domain"));

  if (!root.contains("duration_s")) schema_error("duration_s", "missing");
  e.duration_s = get_finite_number(root.at("duration_s"), "duration_s");
  if (e.duration_s < 0) invariant_error("duration_s must be nonnegative");

  if (root.contains("frames")) {
    const json& frames = root.at("frames");
    if (!frames.is_array()) schema_error("frames", "expected an array");
    size_t i = 0;
    for (const json& jf : frames) {
      std::string path = "frames[" + std::to_string(i) + "]";
      if (!jf.is_object()) schema_error(path, "expected an object");
      warn_unknown_keys(jf, path, {"t", "frame_ref", "motion", "event_marker"},
                        warnings);
      FrameRecord f;
      if (!jf.contains("t")) schema_error(path + ".t", "missing");
      f.t = get_finite_number(jf.at("t"), path + ".t");
      if (jf.contains("frame_ref")) {
        f.frame_ref = get_string(jf.at("frame_ref"), path + ".frame_ref");
      }
      if (jf.contains("motion")) {
        double m = get_finite_number(jf.at("motion"), path + ".motion");
        if (m < 0) invariant_error(path + ".motion must be >= 0");
        f.motion = m;
      }
      if (jf.contains("event_marker")) {
        f.event_marker =
            get_string(jf.at("event_marker"), path + ".event_marker");
      }
      if (f.t < 0 || f.t > e.duration_s) {
        invariant_error(path + ".t outside [0, duration_s]");
      }
      if (!e.frames.empty() && f.t <= e.frames.back().t) {
        invariant_error("frame timestamps must be strictly increasing at " +
                        path);
      }
      e.frames.push_back(std::move(f));
      ++i;
    }
  }

  if (root.contains("objects")) {
    const json& objects = root.at("objects");
    if (!objects.is_array()) schema_error("objects", "expected an array");
    size_t i = 0;
    for (const json& jo : objects) {
      std::string path = "objects[" + std::to_string(i) + "]";
      if (!jo.is_object()) schema_error(path, "expected an object");
      warn_unknown_keys(jo, path, {"name"}, warnings);
      if (!jo.contains("name")) schema_error(path + ".name", "missing");
      ObjectRecord o{get_string(jo.at("name"), path + ".name")};
      if (o.name.empty()) schema_error(path + ".name", "must be nonempty");
      e.objects.push_back(std::move(o));
      ++i;
    }
  }

  if (root.contains("events")) {
    const json& events = root.at("events");
    if (!events.is_array()) schema_error("events", "expected an array");
    size_t i = 0;
    for (const json& je : events) {
      std::string path = "events[" + std::to_string(i) + "]";
      if (!je.is_object()) schema_error(path, "expected an object");
      warn_unknown_keys(je, path, {"t0", "t1", "verb", "object", "hand",
                                   "contact"},
                        warnings);
      InteractionEvent ev;
      for (const char* key : {"t0", "t1", "verb", "object", "hand",
                              "contact"}) {
        if (!je.contains(key)) {
          schema_error(path + "." + key, "missing");
        }
      }
      ev.t0 = get_finite_number(je.at("t0"), path + ".t0");
      ev.t1 = get_finite_number(je.at("t1"), path + ".t1");
      ev.verb = get_string(je.at("verb"), path + ".verb");
      ev.object = get_string(je.at("object"), path + ".object");
      ev.hand = hand_from_string(get_string(je.at("hand"), path + ".hand"));
      if (!je.at("contact").is_boolean()) {
        schema_error(path + ".contact", "expected a boolean");
      }
      ev.contact = je.at("contact").get<bool>();

      if (!is_lower_alpha(ev.verb)) {
        invariant_error(path + ".verb must be a nonempty lowercase lemma");
      }
      if (ev.object.empty()) schema_error(path + ".object", "must be nonempty");
      if (!(ev.t0 < ev.t1)) invariant_error(path + ": t0 must be < t1");
      if (ev.t0 < 0 || ev.t1 > e.duration_s) {
        invariant_error(path + ": span outside [0, duration_s]");
      }
      bool object_known = false;
      for (const ObjectRecord& o : e.objects) {
        if (o.name == ev.object) {
          object_known = true;
          break;
        }
      }
      if (!object_known) {
        invariant_error(path + ": event object \"" + ev.object +
                        "\" missing from objects list");
      }
      e.events.push_back(std::move(ev));
      ++i;
    }
  }
  sort_events(&e.events);

  if (root.contains("visible_hand_spans")) {
    const json& spans = root.at("visible_hand_spans");
    if (!spans.is_array()) {
      schema_error("visible_hand_spans", "expected an array");
    }
    size_t i = 0;
    for (const json& js : spans) {
      std::string path = "visible_hand_spans[" + std::to_string(i) + "]";
      if (!js.is_object()) schema_error(path, "expected an object");
      warn_unknown_keys(js, path, {"hand", "t0", "t1"}, warnings);
      for (const char* key : {"hand", "t0", "t1"}) {
        if (!js.contains(key)) schema_error(path + "." + key, "missing");
      }
      HandSpan s;
      s.hand = hand_from_string(get_string(js.at("hand"), path + ".hand"));
      s.t0 = get_finite_number(js.at("t0"), path + ".t0");
      s.t1 = get_finite_number(js.at("t1"), path + ".t1");
      if (!(s.t0 < s.t1)) invariant_error(path + ": t0 must be < t1");
      if (s.t0 < 0 || s.t1 > e.duration_s) {
        invariant_error(path + ": span outside [0, duration_s]");
      }
      e.visible_hand_spans.push_back(s);
      ++i;
    }
  }

  if (root.contains("metadata")) {
    e.metadata = get_string(root.at("metadata"), "metadata");
  }
  return e;
}

}  // namespace

std::string_view domain_to_string(Domain d) {
  switch (d) {
    case Domain::kHousehold:
      return "household";
    case Domain::kFactory:
      return "factory";
    case Domain::kLab:
      return "lab";
  }
  return "household";
}

Domain domain_from_string(std::string_view s) {
  if (s == "household") return Domain::kHousehold;
  if (s == "factory") return Domain::kFactory;
  if (s == "lab") return Domain::kLab;
  throw ManifestError(ManifestError::Kind::kSchemaViolation, "domain",
                      "unknown domain \"" + std::string(s) + "\"");
}

std::string_view hand_to_string(Hand h) {
  switch (h) {
    case Hand::kLeft:
      return "left";
    case Hand::kRight:
      return "right";
    case Hand::kBoth:
      return "both";
  }
  return "right";
}

Hand hand_from_string(std::string_view s) {
  if (s == "left") return Hand::kLeft;
  if (s == "right") return Hand::kRight;
  if (s == "both") return Hand::kBoth;
  throw ManifestError(ManifestError::Kind::kSchemaViolation, "hand",
                      "unknown hand \"" + std::string(s) + "\"");
}

std::string_view strategy_to_string(Strategy s) {
  switch (s) {
    case Strategy::kFixed:
      return "fixed";
    case Strategy::kEvent:
      return "event";
    case Strategy::kKinematic:
      return "kinematic";
  }
  return "fixed";
}

Strategy strategy_from_string(std::string_view s) {
  if (s == "fixed") return Strategy::kFixed;
  if (s == "event") return Strategy::kEvent;
  if (s == "kinematic") return Strategy::kKinematic;
  throw ConfigError("unknown strategy \"" + std::string(s) + "\"");
}

Episode parse_manifest(std::string_view text,
                       std::vector<std::string>* warnings) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ManifestError(ManifestError::Kind::kMalformedJson, "", err.what());
  }
  return episode_from_json_impl(root, warnings);
}

EvidenceRecord slice_evidence(const Episode& episode, const Clip& clip) {
  const Lexicon& lex = bundled_lexicon();
  EvidenceRecord ev;
  ev.clip_id = clip.clip_id;

  for (const InteractionEvent& event : episode.events) {
    // Half-open overlap: [t0, t1) meets [t_start, t_end).
    if (event.t0 < clip.t_end && clip.t_start < event.t1) {
      ev.events.push_back(event);
      ev.object_lemmas.insert(lex.lemmatize(event.object));
    }
  }
  sort_events(&ev.events);

  for (const HandSpan& span : episode.visible_hand_spans) {
    if (span.t0 < clip.t_end && clip.t_start < span.t1) {
      if (span.hand == Hand::kLeft || span.hand == Hand::kBoth) {
        ev.visible_hands.left = true;
      }
      if (span.hand == Hand::kRight || span.hand == Hand::kBoth) {
        ev.visible_hands.right = true;
      }
    }
  }

  // Object records carry no span: they describe the whole episode.
  for (const ObjectRecord& o : episode.objects) {
    ev.object_lemmas.insert(lex.lemmatize(o.name));
  }
  return ev;
}

ordered_json episode_to_json(const Episode& e) {
  ordered_json j;
  j["episode_id"] = e.episode_id;
  j["domain"] = domain_to_string(e.domain);
  j["duration_s"] = e.duration_s;
  j["frames"] = ordered_json::array();
  for (const FrameRecord& f : e.frames) {
    ordered_json jf;
    jf["t"] = f.t;
    if (f.frame_ref) jf["frame_ref"] = *f.frame_ref;
    if (f.motion) jf["motion"] = *f.motion;
    if (f.event_marker) jf["event_marker"] = *f.event_marker;
    j["frames"].push_back(std::move(jf));
  }
  j["events"] = ordered_json::array();
  for (const InteractionEvent& ev : e.events) {
    j["events"].push_back(ordered_json{{"t0", ev.t0},
                                       {"t1", ev.t1},
                                       {"verb", ev.verb},
                                       {"object", ev.object},
                                       {"hand", hand_to_string(ev.hand)},
                                       {"contact", ev.contact}});
  }
  j["visible_hand_spans"] = ordered_json::array();
  for (const HandSpan& s : e.visible_hand_spans) {
    j["visible_hand_spans"].push_back(ordered_json{
        {"hand", hand_to_string(s.hand)}, {"t0", s.t0}, {"t1", s.t1}});
  }
  j["objects"] = ordered_json::array();
  for (const ObjectRecord& o : e.objects) {
    j["objects"].push_back(ordered_json{{"name", o.name}});
  }
  j["metadata"] = e.metadata;
  return j;
}

Episode episode_from_json(const json& j) {
  return episode_from_json_impl(j, nullptr);
}

ordered_json evidence_to_json(const EvidenceRecord& ev) {
  ordered_json j;
  j["clip_id"] = ev.clip_id;
  ordered_json hands = ordered_json::array();
  if (ev.visible_hands.left) hands.push_back("left");
  if (ev.visible_hands.right) hands.push_back("right");
  j["visible_hands"] = std::move(hands);
  j["object_lemmas"] = ev.object_lemmas;  // std::set: sorted, stable
  j["events"] = ordered_json::array();
  for (const InteractionEvent& event : ev.events) {
    j["events"].push_back(ordered_json{{"t0", event.t0},
                                       {"t1", event.t1},
                                       {"verb", event.verb},
                                       {"object", event.object},
                                       {"hand", hand_to_string(event.hand)},
                                       {"contact", event.contact}});
  }
  return j;
}

EvidenceRecord evidence_from_json(const json& j) {
  EvidenceRecord ev;
  ev.clip_id = j.at("clip_id").get<std::string>();
  for (const json& h : j.at("visible_hands")) {
    Hand hand = hand_from_string(h.get<std::string>());
    if (hand == Hand::kLeft) ev.visible_hands.left = true;
    if (hand == Hand::kRight) ev.visible_hands.right = true;
  }
  for (const json& o : j.at("object_lemmas")) {
    ev.object_lemmas.insert(o.get<std::string>());
  }
  for (const json& je : j.at("events")) {
    InteractionEvent event;
    event.t0 = je.at("t0").get<double>();
    event.t1 = je.at("t1").get<double>();
    event.verb = je.at("verb").get<std::string>();
    event.object = je.at("object").get<std::string>();
    event.hand = hand_from_string(je.at("hand").get<std::string>());
    event.contact = je.at("contact").get<bool>();
    ev.events.push_back(std::move(event));
  }
  return ev;
}

std::string make_clip_id(std::string_view episode_id, size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04zu", index);
  return std::string(episode_id) + "#" + buf;
}

}  // namespace e2e
