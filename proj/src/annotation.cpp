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

#include "e2e/annotation.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>

#include "e2e/embedded.hpp"
#include "e2e/errors.hpp"
#include "e2e/hashing.hpp"
#include "e2e/lexicon.hpp"
#include "e2e/text.hpp"

namespace e2e {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::array<std::string_view, kNumModes> kModeNames = {
    "temporal", "spatial",   "attribute", "mechanics",
    "reasoning", "summary", "trajectory"};

constexpr std::array<std::string_view, 8> kFaultNames = {
    "unknown_object",     "unknown_action", "false_contact",
    "unseen_hand",        "hand_contradiction", "no_connector",
    "wrong_order",        "placeholder"};

bool is_contact_verb(std::string_view lemma) {
  return lemma == "touch" || lemma == "hold" || lemma == "grip";
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(s[0]));
  return s;
}

std::string_view hand_phrase(Hand h) {
  switch (h) {
    case Hand::kLeft:
      return "the left hand";
    case Hand::kRight:
      return "the right hand";
    case Hand::kBoth:
      return "both hands";
  }
  return "the right hand";
}

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

// Third person singular form. Every shape produced here lemmatizes back to
// the base verb under the suffix rules, so grounding sees the event verb.
std::string third_person(const std::string& verb) {
  auto ends_with = [&verb](std::string_view suffix) {
    return verb.size() >= suffix.size() &&
           verb.compare(verb.size() - suffix.size(), suffix.size(), suffix) ==
               0;
  };
  if (ends_with("s") || ends_with("sh") || ends_with("ch") || ends_with("x") ||
      ends_with("z")) {
    return verb + "es";
  }
  if (verb.size() >= 2 && verb.back() == 'y' &&
      !is_vowel(verb[verb.size() - 2])) {
    return verb.substr(0, verb.size() - 1) + "ies";
  }
  return verb + "s";
}

// "both hands" takes the plural (bare) form.
std::string verb_form(const std::string& verb, Hand h) {
  return h == Hand::kBoth ? verb : third_person(verb);
}

std::string event_clause(const InteractionEvent& e) {
  return std::string(hand_phrase(e.hand)) + " " + verb_form(e.verb, e.hand) +
         " the " + e.object;
}

struct Pattern {
  std::string verb;
  std::string object;

  friend bool operator==(const Pattern&, const Pattern&) = default;
};

Pattern event_pattern(const InteractionEvent& e, const Lexicon& lex) {
  return {lex.lemmatize(ascii_lower(e.verb)),
          lex.lemmatize(ascii_lower(e.object))};
}

// Indices of the events the mock narrates, in temporal order, capped at
// three. An event is skipped when an already narrated event carries the same
// (verb, object) pattern under a different single hand; narrating both would
// read as a hand contradiction to the gate.
std::vector<size_t> narrated_indices(const EvidenceRecord& ev,
                                     const Lexicon& lex) {
  std::vector<size_t> out;
  std::vector<Pattern> pats;
  for (size_t i = 0; i < ev.events.size() && out.size() < 3; ++i) {
    Pattern p = event_pattern(ev.events[i], lex);
    bool conflict = false;
    for (size_t k = 0; k < out.size(); ++k) {
      const InteractionEvent& prev = ev.events[out[k]];
      if (pats[k] == p && prev.hand != Hand::kBoth &&
          ev.events[i].hand != Hand::kBoth &&
          prev.hand != ev.events[i].hand) {
        conflict = true;
        break;
      }
    }
    if (conflict) continue;
    pats.push_back(std::move(p));
    out.push_back(i);
  }
  return out;
}

// Object lemma whose events all have contact=false and never use a contact
// verb, so a fabricated contact claim about it trips exactly the false
// contact rule (the claim's clause stays unmatched for the temporal check).
std::optional<std::string> false_contact_target(const EvidenceRecord& ev,
                                                const Lexicon& lex) {
  struct Flags {
    bool any_contact = false;
    bool any_contact_verb = false;
  };
  std::map<std::string, Flags> by_object;
  for (const InteractionEvent& e : ev.events) {
    Pattern p = event_pattern(e, lex);
    Flags& f = by_object[p.object];
    f.any_contact |= e.contact;
    f.any_contact_verb |= is_contact_verb(p.verb);
  }
  for (const auto& [object, flags] : by_object) {
    if (!flags.any_contact && !flags.any_contact_verb) return object;
  }
  return std::nullopt;
}

// Last narrated event held by a single hand; the contradiction fault
// re-attributes it to the other hand.
std::optional<size_t> contradiction_target(const EvidenceRecord& ev,
                                           const Lexicon& lex) {
  std::vector<size_t> narr = narrated_indices(ev, lex);
  for (auto it = narr.rbegin(); it != narr.rend(); ++it) {
    if (ev.events[*it].hand != Hand::kBoth) return *it;
  }
  return std::nullopt;
}

// Ordered pair (i, j), i before j, whose patterns differ and cannot be
// narrated in reverse: every event matching j's pattern starts strictly
// after every event matching i's pattern.
std::optional<std::pair<size_t, size_t>> reversible_pair(
    const EvidenceRecord& ev, const Lexicon& lex) {
  const size_t n = ev.events.size();
  std::vector<Pattern> pats;
  pats.reserve(n);
  for (const InteractionEvent& e : ev.events) pats.push_back(event_pattern(e, lex));
  auto min_t0 = [&](const Pattern& p) {
    double m = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < n; ++k)
      if (pats[k] == p) m = std::min(m, ev.events[k].t0);
    return m;
  };
  auto max_t0 = [&](const Pattern& p) {
    double m = -std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < n; ++k)
      if (pats[k] == p) m = std::max(m, ev.events[k].t0);
    return m;
  };
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      if (pats[i] == pats[j]) continue;
      if (min_t0(pats[j]) > max_t0(pats[i])) return std::make_pair(i, j);
    }
  }
  return std::nullopt;
}

std::string fallback_object(const EvidenceRecord& ev) {
  return ev.object_lemmas.empty() ? std::string() : *ev.object_lemmas.begin();
}

std::string fill_pattern(const std::string& pattern,
                         const EvidenceRecord& ev, const Lexicon& lex) {
  const InteractionEvent* first =
      ev.events.empty() ? nullptr : &ev.events[0];
  std::string object = first ? first->object : fallback_object(ev);
  if (object.empty()) object = "scene";
  std::string verb = first ? first->verb : "work";
  std::string hand;
  if (first) {
    hand = hand_phrase(first->hand);
  } else if (ev.visible_hands.right) {
    hand = hand_phrase(Hand::kRight);
  } else if (ev.visible_hands.left) {
    hand = hand_phrase(Hand::kLeft);
  } else {
    hand = "either hand";
  }
  std::string second = object;
  if (first) {
    const std::string lemma0 = lex.lemmatize(ascii_lower(first->object));
    for (const InteractionEvent& e : ev.events) {
      if (lex.lemmatize(ascii_lower(e.object)) != lemma0) {
        second = e.object;
        break;
      }
    }
  }

  std::string out;
  out.reserve(pattern.size() + 16);
  for (size_t i = 0; i < pattern.size();) {
    if (pattern[i] != '{') {
      out += pattern[i++];
      continue;
    }
    size_t close = pattern.find('}', i);
    std::string_view name(pattern.data() + i + 1, close - i - 1);
    if (name == "object") {
      out += object;
    } else if (name == "hand") {
      out += hand;
    } else if (name == "verb") {
      out += verb;
    } else {
      out += second;  // {second_object}; the set was validated at load
    }
    i = close + 1;
  }
  return out;
}

// --- Answer builders -------------------------------------------------------
//
// Every fixed word below is either a grounding whitelist word or absent from
// both lexicons, so the only lexicon tokens in a clean answer come from the
// evidence itself. Temporal sensitive modes narrate events in order and tie
// them with connector words.

std::string narrate_temporal(const std::string& template_id,
                             const EvidenceRecord& ev,
                             const std::vector<size_t>& narr) {
  const auto& ee = ev.events;
  const std::string s0 = event_clause(ee[narr[0]]);
  if (template_id == "t2") {
    std::string out = "First, " + s0;
    out += narr.size() >= 2 ? ", before the rest of the clip continues."
                            : ", and the clip settles.";
    return out;
  }
  if (template_id == "t3") {
    std::string out = "After the start of the clip, " + s0;
    if (narr.size() >= 2) out += ", then " + event_clause(ee[narr[1]]);
    out += ".";
    return out;
  }
  std::string out = "First, " + s0;
  if (narr.size() == 1) {
    out += ", then the person eases back and the clip settles.";
    return out;
  }
  out += ". Then " + event_clause(ee[narr[1]]) + ".";
  if (narr.size() >= 3) out += " Finally, " + event_clause(ee[narr[2]]) + ".";
  return out;
}

std::string narrate_summary(const std::string& template_id,
                            const EvidenceRecord& ev,
                            const std::vector<size_t>& narr) {
  if (narr.empty()) {
    std::string obj = fallback_object(ev);
    if (obj.empty())
      return "First the scene stays steady, then it settles with no action "
             "taken.";
    return "In this clip the workspace stays calm; first the " + obj +
           " rests in view, then the scene settles.";
  }
  const auto& ee = ev.events;
  std::string core = "first " + event_clause(ee[narr[0]]);
  if (narr.size() >= 2) core += ", then " + event_clause(ee[narr[1]]);
  if (narr.size() >= 3) core += ", finally " + event_clause(ee[narr[2]]);
  if (template_id == "u2") return "Across the clip, " + core + ".";
  if (template_id == "u3")
    return "Overall, " + core + ", and the task moves along smoothly.";
  return "In this clip, " + core + ".";
}

std::string narrate_trajectory(const std::string& template_id,
                               const EvidenceRecord& ev,
                               const std::vector<size_t>& narr) {
  const auto& ee = ev.events;
  const InteractionEvent& f = ee[narr[0]];
  if (template_id == "j2") {
    std::string out = "The " + f.object + " stays with " +
                      std::string(hand_phrase(f.hand)) +
                      " through the clip; first " + event_clause(f);
    if (narr.size() >= 2) out += ", then " + event_clause(ee[narr[1]]);
    out += ".";
    return out;
  }
  if (template_id == "j3") {
    std::string out = "First " + event_clause(f);
    if (narr.size() >= 2) out += ", then " + event_clause(ee[narr[1]]);
    out += ", and the motion settles by the end of the clip.";
    return out;
  }
  std::string out = "First " + std::string(hand_phrase(f.hand)) +
                    " moves in from the edge of the view and " +
                    verb_form(f.verb, f.hand) + " the " + f.object;
  if (narr.size() >= 2) {
    out += ", then " + event_clause(ee[narr[1]]) +
           "; finally the motion eases toward the center of the view.";
  } else {
    out += ", then the motion eases back toward the center of the view.";
  }
  return out;
}

std::string answer_spatial(const std::string& template_id,
                           const EvidenceRecord& ev) {
  if (ev.events.empty()) {
    std::string obj = fallback_object(ev);
    if (obj.empty())
      return "The scene stays steady with the workspace in easy reach.";
    return "The " + obj + " sits near the middle of the view, within easy "
           "reach.";
  }
  const InteractionEvent& f = ev.events[0];
  if (template_id == "s2") {
    std::string side;
    switch (f.hand) {
      case Hand::kLeft:
        side = "on the left side of the view";
        break;
      case Hand::kRight:
        side = "on the right side of the view";
        break;
      case Hand::kBoth:
        side = "across the view";
        break;
    }
    return capitalize(std::string(hand_phrase(f.hand))) + " works mostly " +
           side + ", near the " + f.object + ".";
  }
  if (template_id == "s3") {
    return "The " + f.object + " ends up near where " +
           std::string(hand_phrase(f.hand)) +
           " last worked, toward the middle of the scene.";
  }
  return "The " + f.object + " sits near the middle of the view, within easy "
         "reach of " + std::string(hand_phrase(f.hand)) + ".";
}

std::string answer_attribute(const std::string& template_id,
                             const EvidenceRecord& ev, const Lexicon& lex) {
  if (ev.events.empty()) {
    std::string obj = fallback_object(ev);
    if (obj.empty()) return "No single object draws focus; the scene stays quiet.";
    return "The main object in view is the " + obj +
           "; it stays in view through the clip.";
  }
  const InteractionEvent& f = ev.events[0];
  const std::string hp(hand_phrase(f.hand));
  const std::string vf = verb_form(f.verb, f.hand);
  if (template_id == "a2") {
    return capitalize(hp) + " works on the " + f.object +
           " for most of the clip.";
  }
  if (template_id == "a3") {
    std::set<std::string> distinct;
    for (const InteractionEvent& e : ev.events)
      distinct.insert(lex.lemmatize(ascii_lower(e.object)));
    if (distinct.size() >= 2) {
      return "Yes; the person works with several objects, mainly the " +
             f.object + ", and " + hp + " " + vf + " it early on.";
    }
    return "No; the person works with a single object, the " + f.object +
           ", and " + hp + " " + vf + " it through the clip.";
  }
  return "The main object in view is the " + f.object + "; " + hp + " " + vf +
         " it during the clip.";
}

std::string answer_mechanics(const std::string& template_id,
                             const EvidenceRecord& ev) {
  const InteractionEvent& f = ev.events[0];
  const std::string hp(hand_phrase(f.hand));
  const std::string vf = verb_form(f.verb, f.hand);
  const std::string stem = capitalize(hp) + " " + vf + " the " + f.object;
  if (template_id == "m2") {
    if (f.contact)
      return stem + " with steady pressure, and the grip stays even.";
    return stem + " with a light motion, keeping the pressure low.";
  }
  if (template_id == "m3") {
    if (f.contact) return "Yes. " + stem + " and the hold stays firm.";
    return "No. " + stem + " briefly and the pressure stays light.";
  }
  if (f.contact) return "Yes. " + stem + " and holds it through the motion.";
  return "No. " + stem + " lightly and keeps the pressure low.";
}

std::string answer_reasoning(const std::string& template_id,
                             const EvidenceRecord& ev) {
  const InteractionEvent& f = ev.events[0];
  const std::string hp(hand_phrase(f.hand));
  if (template_id == "r2") {
    return "The goal is to get the " + f.object +
           " where it belongs; the person " + third_person(f.verb) +
           " it to line up the next step of the task.";
  }
  if (template_id == "r3") {
    return "If the person let go, the " + f.object +
           " would sit idle and the task would stall; so " + hp + " " +
           verb_form(f.verb, f.hand) + " it with care.";
  }
  return "The person " + third_person(f.verb) + " the " + f.object +
         " to keep the task in order; " + hp +
         " stays steady through the motion.";
}

std::string build_answer(VqaMode mode, const std::string& template_id,
                         const EvidenceRecord& ev, const Lexicon& lex) {
  const std::vector<size_t> narr = narrated_indices(ev, lex);
  switch (mode) {
    case VqaMode::kTemporal:
      return narrate_temporal(template_id, ev, narr);
    case VqaMode::kSpatial:
      return answer_spatial(template_id, ev);
    case VqaMode::kAttribute:
      return answer_attribute(template_id, ev, lex);
    case VqaMode::kMechanics:
      return answer_mechanics(template_id, ev);
    case VqaMode::kReasoning:
      return answer_reasoning(template_id, ev);
    case VqaMode::kSummary:
      return narrate_summary(template_id, ev, narr);
    case VqaMode::kTrajectory:
      return narrate_trajectory(template_id, ev, narr);
  }
  return {};
}

// Rewrites `answer` so that exactly the targeted rule fires. Appended
// sentences are built from whitelist words, evidence words, and the two
// lexicon sentinels ("anvil", "carve") that no manifest ever uses.
void apply_fault(FaultClass fault, const EvidenceRecord& ev,
                 const Lexicon& lex, std::string* answer) {
  switch (fault) {
    case FaultClass::kUnknownObject:
      *answer += " An anvil rests on the table.";
      return;
    case FaultClass::kUnknownAction: {
      const std::string target =
          ev.events.empty() ? std::string("table") : ev.events[0].object;
      *answer += " The hand carves the " + target + ".";
      return;
    }
    case FaultClass::kFalseContact: {
      auto target = false_contact_target(ev, lex);
      if (!target)
        throw std::invalid_argument("false_contact fault not injectable");
      *answer += " The person holds the " + *target + " for a moment.";
      return;
    }
    case FaultClass::kUnseenHand: {
      if (ev.visible_hands.full())
        throw std::invalid_argument("unseen_hand fault not injectable");
      const char* side = ev.visible_hands.left ? "right" : "left";
      *answer += std::string(" The ") + side + " hand waits nearby.";
      return;
    }
    case FaultClass::kHandContradiction: {
      auto idx = contradiction_target(ev, lex);
      if (!idx || !ev.visible_hands.full())
        throw std::invalid_argument("hand_contradiction fault not injectable");
      const InteractionEvent& e = ev.events[*idx];
      const Hand other = e.hand == Hand::kLeft ? Hand::kRight : Hand::kLeft;
      *answer += " " + capitalize(event_clause(e)) + ". " +
                 capitalize(std::string(hand_phrase(other)) + " " +
                            verb_form(e.verb, other) + " the " + e.object +
                            " as well.");
      return;
    }
    case FaultClass::kNoConnector: {
      std::vector<size_t> narr = narrated_indices(ev, lex);
      if (narr.empty()) {
        *answer = "The scene stays steady through the clip.";
        return;
      }
      std::string out = capitalize(event_clause(ev.events[narr[0]])) + ".";
      if (narr.size() >= 2)
        out += " " + capitalize(event_clause(ev.events[narr[1]])) + ".";
      *answer = out;
      return;
    }
    case FaultClass::kWrongOrder: {
      auto pair = reversible_pair(ev, lex);
      if (!pair)
        throw std::invalid_argument("wrong_order fault not injectable");
      *answer = "First " + event_clause(ev.events[pair->second]) + ", then " +
                event_clause(ev.events[pair->first]) + ".";
      return;
    }
    case FaultClass::kPlaceholder: {
      for (const Token& tok : tokenize(*answer)) {
        if (ev.object_lemmas.count(lex.lemmatize(tok.text)) != 0) {
          answer->replace(tok.begin, tok.end - tok.begin, "{object}");
          return;
        }
      }
      *answer += " The {object} stays in view.";
      return;
    }
  }
}

}  // namespace

std::string_view mode_to_string(VqaMode m) {
  return kModeNames[static_cast<size_t>(m)];
}

VqaMode mode_from_string(std::string_view s) {
  for (int i = 0; i < kNumModes; ++i) {
    if (kModeNames[i] == s) return static_cast<VqaMode>(i);
  }
  throw ConfigError("unknown mode: " + std::string(s));
}

bool mode_requires_events(VqaMode m) {
  switch (m) {
    case VqaMode::kTemporal:
    case VqaMode::kMechanics:
    case VqaMode::kReasoning:
    case VqaMode::kTrajectory:
      return true;
    default:
      return false;
  }
}

bool mode_temporal_sensitive(VqaMode m) {
  return m == VqaMode::kTemporal || m == VqaMode::kSummary ||
         m == VqaMode::kTrajectory;
}

TemplateSet TemplateSet::from_json_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("template catalog is not valid JSON: ") +
                      e.what());
  }
  if (!j.is_object() || !j.contains("templates") ||
      !j["templates"].is_array()) {
    throw ConfigError("template catalog must be an object with a 'templates' array");
  }
  if (j.value("schema_version", 0) != 1) {
    throw ConfigError("template catalog schema_version must be 1");
  }

  TemplateSet set;
  std::set<std::string> seen_ids;
  for (const json& t : j["templates"]) {
    if (!t.is_object()) throw ConfigError("template entries must be objects");
    Template tmpl;
    if (!t.contains("id") || !t["id"].is_string() ||
        t["id"].get<std::string>().empty()) {
      throw ConfigError("template missing non-empty 'id'");
    }
    tmpl.template_id = t["id"].get<std::string>();
    if (!seen_ids.insert(tmpl.template_id).second) {
      throw ConfigError("duplicate template id: " + tmpl.template_id);
    }
    if (!t.contains("mode") || !t["mode"].is_string()) {
      throw ConfigError("template " + tmpl.template_id + " missing 'mode'");
    }
    tmpl.mode = mode_from_string(t["mode"].get<std::string>());
    if (!t.contains("question") || !t["question"].is_string()) {
      throw ConfigError("template " + tmpl.template_id + " missing 'question'");
    }
    tmpl.question_pattern = t["question"].get<std::string>();
    tmpl.weight = t.value("weight", 1.0);
    if (!(tmpl.weight >= 0.0)) {
      throw ConfigError("template " + tmpl.template_id +
                        " weight must be finite and non-negative");
    }
    tmpl.required_connectors =
        t.value("required_connectors", mode_temporal_sensitive(tmpl.mode));
    tmpl.notes = t.value("notes", std::string());

    const std::string& q = tmpl.question_pattern;
    for (size_t i = 0; i < q.size(); ++i) {
      if (q[i] == '}')
        throw ConfigError("template " + tmpl.template_id +
                          ": unmatched '}' in question");
      if (q[i] != '{') continue;
      size_t close = q.find('}', i);
      if (close == std::string::npos)
        throw ConfigError("template " + tmpl.template_id +
                          ": unmatched '{' in question");
      std::string_view name(q.data() + i + 1, close - i - 1);
      if (name != "object" && name != "hand" && name != "verb" &&
          name != "second_object") {
        throw ConfigError("template " + tmpl.template_id +
                          ": unknown placeholder {" + std::string(name) + "}");
      }
      i = close;
    }
    set.templates_.push_back(std::move(tmpl));
  }

  for (const Template& t : set.templates_) {
    set.by_mode_[static_cast<size_t>(t.mode)].push_back(&t);
  }
  for (VqaMode m : all_modes()) {
    if (set.for_mode(m).empty()) {
      throw ConfigError(std::string("no templates for mode: ") +
                        std::string(mode_to_string(m)));
    }
  }
  return set;
}

const TemplateSet& bundled_templates() {
  static const TemplateSet set =
      TemplateSet::from_json_text(embedded_templates_json());
  return set;
}

std::pair<VqaMode, const Template*> sample_mode_template(
    uint64_t seed, std::string_view clip_id, const ModeWeights& weights,
    const TemplateSet& templates) {
  double total = 0.0;
  for (VqaMode m : all_modes()) {
    const double w = weights[m];
    if (!(w >= 0.0)) {
      throw AnnotationError(AnnotationError::Kind::kAllWeightsZero,
                            "mode weights must be finite and non-negative");
    }
    if (w > 0.0 && templates.for_mode(m).empty()) {
      throw AnnotationError(AnnotationError::Kind::kEmptyTemplateSet,
                            std::string("no templates for weighted mode: ") +
                                std::string(mode_to_string(m)));
    }
    total += w;
  }
  if (total <= 0.0) {
    throw AnnotationError(AnnotationError::Kind::kAllWeightsZero,
                          "all mode weights are zero");
  }

  SplitMix64 rng(mix_key(seed, clip_id, "mode_template"));
  const double x = rng.next_double() * total;
  VqaMode chosen = VqaMode::kTemporal;
  double cum = 0.0;
  bool picked = false;
  for (VqaMode m : all_modes()) {
    const double w = weights[m];
    if (w <= 0.0) continue;
    chosen = m;  // the last positive mode absorbs x == total round-off
    cum += w;
    if (x < cum) {
      picked = true;
      break;
    }
  }
  (void)picked;
  const auto& pool = templates.for_mode(chosen);
  const Template* tmpl = pool[rng.next_below(pool.size())];
  return {chosen, tmpl};
}

nlohmann::ordered_json request_to_json(const AnnotationRequest& req) {
  ordered_json j;
  j["clip_id"] = req.clip_id;
  j["mode"] = mode_to_string(req.mode);
  j["template_id"] = req.tmpl.template_id;
  j["question_pattern"] = req.tmpl.question_pattern;
  j["evidence"] = evidence_to_json(req.evidence);
  j["episode_metadata"] = req.episode_metadata;
  j["frame_refs"] = req.frame_refs;
  ordered_json errors = ordered_json::array();
  for (const Violation& v : req.prior_errors) {
    ordered_json e;
    e["code"] = violation_code_to_string(v.code);
    e["message"] = v.message;
    errors.push_back(std::move(e));
  }
  j["prior_errors"] = std::move(errors);
  j["seed"] = req.seed;
  return j;
}

AnnotationRequest request_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("annotation request must be an object");
  for (const char* key :
       {"clip_id", "mode", "template_id", "question_pattern", "evidence",
        "episode_metadata", "frame_refs", "prior_errors", "seed"}) {
    if (!j.contains(key)) {
      throw ConfigError(std::string("annotation request missing '") + key +
                        "'");
    }
  }
  AnnotationRequest req;
  req.clip_id = j["clip_id"].get<std::string>();
  req.mode = mode_from_string(j["mode"].get<std::string>());
  req.tmpl.template_id = j["template_id"].get<std::string>();
  req.tmpl.mode = req.mode;
  req.tmpl.question_pattern = j["question_pattern"].get<std::string>();
  req.tmpl.required_connectors = mode_temporal_sensitive(req.mode);
  req.evidence = evidence_from_json(j["evidence"]);
  req.episode_metadata = j["episode_metadata"].get<std::string>();
  req.frame_refs = j["frame_refs"].get<std::vector<std::string>>();
  for (const json& e : j["prior_errors"]) {
    Violation v;
    v.code = violation_code_from_string(e.at("code").get<std::string>());
    v.message = e.value("message", std::string());
    req.prior_errors.push_back(std::move(v));
  }
  req.seed = j["seed"].get<uint64_t>();
  return req;
}

nlohmann::ordered_json draft_to_json(const QADraft& d) {
  ordered_json j;
  j["clip_id"] = d.clip_id;
  j["mode"] = mode_to_string(d.mode);
  j["template_id"] = d.template_id;
  j["question"] = d.question;
  j["answer"] = d.answer;
  j["engine_id"] = d.engine_id;
  j["attempt"] = d.attempt;
  return j;
}

QADraft draft_from_json(const nlohmann::json& j) {
  QADraft d;
  d.clip_id = j.at("clip_id").get<std::string>();
  d.mode = mode_from_string(j.at("mode").get<std::string>());
  d.template_id = j.at("template_id").get<std::string>();
  d.question = j.at("question").get<std::string>();
  d.answer = j.at("answer").get<std::string>();
  d.engine_id = j.at("engine_id").get<std::string>();
  d.attempt = j.value("attempt", 0);
  return d;
}

std::string_view fault_class_to_string(FaultClass f) {
  return kFaultNames[static_cast<size_t>(f)];
}

FaultClass fault_class_from_string(std::string_view s) {
  for (size_t i = 0; i < kFaultNames.size(); ++i) {
    if (kFaultNames[i] == s) return static_cast<FaultClass>(i);
  }
  throw ConfigError("unknown fault class: " + std::string(s));
}

std::vector<FaultClass> injectable_faults(VqaMode mode,
                                          const EvidenceRecord& evidence) {
  const Lexicon& lex = bundled_lexicon();
  std::vector<FaultClass> out;
  out.push_back(FaultClass::kUnknownObject);
  out.push_back(FaultClass::kUnknownAction);
  if (false_contact_target(evidence, lex))
    out.push_back(FaultClass::kFalseContact);
  if (!evidence.visible_hands.full()) out.push_back(FaultClass::kUnseenHand);
  if (evidence.visible_hands.full() && contradiction_target(evidence, lex))
    out.push_back(FaultClass::kHandContradiction);
  if (mode_temporal_sensitive(mode)) {
    out.push_back(FaultClass::kNoConnector);
    if (reversible_pair(evidence, lex))
      out.push_back(FaultClass::kWrongOrder);
  }
  out.push_back(FaultClass::kPlaceholder);
  return out;
}

QADraft mock_annotate(const AnnotationRequest& req,
                      std::optional<FaultClass> fault) {
  const Lexicon& lex = bundled_lexicon();
  if (mode_requires_events(req.mode) && req.evidence.events.empty()) {
    throw AnnotationError(
        AnnotationError::Kind::kInsufficientEvidence,
        std::string(mode_to_string(req.mode)) +
            " annotation needs interaction events; clip " + req.clip_id +
            " has none");
  }
  QADraft d;
  d.clip_id = req.clip_id;
  d.mode = req.mode;
  d.template_id = req.tmpl.template_id;
  d.engine_id = std::string(kMockEngineId);
  d.attempt = 0;
  d.question = fill_pattern(req.tmpl.question_pattern, req.evidence, lex);
  d.answer = build_answer(req.mode, req.tmpl.template_id, req.evidence, lex);
  if (fault) apply_fault(*fault, req.evidence, lex, &d.answer);
  return d;
}

std::optional<FaultClass> FaultPolicy::decide(
    uint64_t seed, std::string_view clip_id, int attempt, VqaMode mode,
    const EvidenceRecord& evidence) const {
  switch (kind) {
    case Kind::kNone:
      return std::nullopt;
    case Kind::kAlways: {
      const auto ok = injectable_faults(mode, evidence);
      if (std::find(ok.begin(), ok.end(), always_fault) == ok.end())
        return std::nullopt;
      return always_fault;
    }
    case Kind::kSchedule: {
      if (attempt < 0 || static_cast<size_t>(attempt) >= schedule.size())
        return std::nullopt;
      return schedule[static_cast<size_t>(attempt)];
    }
    case Kind::kRate: {
      if (rate <= 0.0) return std::nullopt;
      SplitMix64 rng(
          mix_key(seed, clip_id, "fault:" + std::to_string(attempt)));
      if (rng.next_double() >= rate) return std::nullopt;
      const auto ok = injectable_faults(mode, evidence);
      return ok[rng.next_below(ok.size())];
    }
  }
  return std::nullopt;
}

QADraft MockEngine::annotate(const AnnotationRequest& req, int attempt) const {
  std::optional<FaultClass> fault =
      policy_.decide(req.seed, req.clip_id, attempt, req.mode, req.evidence);
  QADraft d = mock_annotate(req, fault);
  d.attempt = attempt;
  return d;
}

}  // namespace e2e
