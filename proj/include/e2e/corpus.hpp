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

#ifndef E2E_CORPUS_HPP_
#define E2E_CORPUS_HPP_

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace e2e {

enum class Domain { kHousehold, kFactory, kLab };
enum class Hand { kLeft, kRight, kBoth };
enum class Strategy { kFixed, kEvent, kKinematic };

std::string_view domain_to_string(Domain d);
Domain domain_from_string(std::string_view s);  // throws ManifestError
std::string_view hand_to_string(Hand h);
Hand hand_from_string(std::string_view s);  // throws ManifestError
std::string_view strategy_to_string(Strategy s);
Strategy strategy_from_string(std::string_view s);  // throws ConfigError

struct FrameRecord {
  double t = 0.0;
  std::optional<std::string> frame_ref;
  std::optional<double> motion;
  std::optional<std::string> event_marker;

  friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

struct InteractionEvent {
  double t0 = 0.0;
  double t1 = 0.0;
  std::string verb;
  std::string object;
  Hand hand = Hand::kRight;
  bool contact = false;

  friend bool operator==(const InteractionEvent&,
                         const InteractionEvent&) = default;
};

struct HandSpan {
  Hand hand = Hand::kRight;
  double t0 = 0.0;
  double t1 = 0.0;

  friend bool operator==(const HandSpan&, const HandSpan&) = default;
};

struct ObjectRecord {
  std::string name;

  friend bool operator==(const ObjectRecord&, const ObjectRecord&) = default;
};

// Immutable after parsing; shared freely across worker threads.
struct Episode {
  std::string episode_id;
  Domain domain = Domain::kHousehold;
  double duration_s = 0.0;
  std::vector<FrameRecord> frames;
  std::vector<InteractionEvent> events;  // sorted by (t0, t1, verb, object)
  std::vector<HandSpan> visible_hand_spans;
  std::vector<ObjectRecord> objects;
  std::string metadata;

  friend bool operator==(const Episode&, const Episode&) = default;
};

// Half-open span [t_start, t_end). Clips of one episode tile [0, duration).
struct Clip {
  std::string clip_id;  // episode_id + "#" + zero-padded index
  double t_start = 0.0;
  double t_end = 0.0;
  std::vector<size_t> frame_indices;
  Strategy strategy = Strategy::kFixed;

  friend bool operator==(const Clip&, const Clip&) = default;
};

// Which hands are visible during a clip. A subset of {left, right}; "both"
// spans in the manifest expand into the two singles.
struct HandSet {
  bool left = false;
  bool right = false;

  bool contains(Hand h) const {
    if (h == Hand::kBoth) return left && right;
    return h == Hand::kLeft ? left : right;
  }
  bool full() const { return left && right; }
  bool empty() const { return !left && !right; }

  friend bool operator==(const HandSet&, const HandSet&) = default;
};

struct EvidenceRecord {
  std::string clip_id;
  HandSet visible_hands;
  std::set<std::string> object_lemmas;
  std::vector<InteractionEvent> events;  // sorted by (t0, t1, verb, object)

  friend bool operator==(const EvidenceRecord&,
                         const EvidenceRecord&) = default;
};

// Parses one episode manifest. Unknown fields are skipped; when `warnings`
// is non-null one message per unknown field is appended.
Episode parse_manifest(std::string_view text,
                       std::vector<std::string>* warnings = nullptr);

// Restriction of the episode's evidence to the clip span. Events overlap by
// the half-open rule ([t0,t1) meets [t_start,t_end)); hand visibility uses
// the same rule; object lemmas cover event objects plus every episode object
// record (records carry no span, so they are present for the whole episode).
EvidenceRecord slice_evidence(const Episode& episode, const Clip& clip);

// Lossless JSON round trips for the intermediate files.
nlohmann::ordered_json episode_to_json(const Episode& e);
Episode episode_from_json(const nlohmann::json& j);
nlohmann::ordered_json evidence_to_json(const EvidenceRecord& ev);
EvidenceRecord evidence_from_json(const nlohmann::json& j);

std::string make_clip_id(std::string_view episode_id, size_t index);

}  // namespace e2e

#endif  // E2E_CORPUS_HPP_
