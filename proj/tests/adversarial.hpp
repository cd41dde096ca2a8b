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

#ifndef E2E_TESTS_ADVERSARIAL_HPP_
#define E2E_TESTS_ADVERSARIAL_HPP_

#include <string>
#include <vector>

#include "e2e/annotation.hpp"
#include "e2e/corpus.hpp"
#include "e2e/violations.hpp"
#include "fixtures.hpp"

namespace e2e::testing {

// A hand-written draft that must be rejected with exactly one violation code.
struct AdversarialCase {
  std::string name;
  EvidenceRecord evidence;
  VqaMode mode = VqaMode::kSpatial;
  QADraft draft;
  ViolationCode expected = ViolationCode::kPlaceholderUnresolved;
};

// At least three cases per violation code. Every draft is clean with respect
// to all the other rules, so a correct gate reports the expected code and
// nothing else.
inline std::vector<AdversarialCase> adversarial_cases() {
  using H = Hand;
  const EvidenceRecord ev_a = make_evidence(
      "adv-a", true, true,
      {make_event(0, 1, "grasp", "cup", H::kRight, true),
       make_event(1, 2, "lift", "plate", H::kRight, false)});
  const EvidenceRecord ev_b = make_evidence(
      "adv-b", false, true, {make_event(0, 1.5, "lift", "cup", H::kRight, false)});
  const EvidenceRecord ev_c = make_evidence(
      "adv-c", true, false, {make_event(0, 2, "rinse", "beaker", H::kLeft, true)});
  const EvidenceRecord ev_d = make_evidence(
      "adv-d", true, true,
      {make_event(0, 2, "push", "crate", H::kRight, false),
       make_event(2, 4, "slide", "panel", H::kRight, false)});

  auto make = [](std::string name, const EvidenceRecord& ev, VqaMode mode,
                 std::string question, std::string answer,
                 ViolationCode expected) {
    AdversarialCase c;
    c.name = std::move(name);
    c.evidence = ev;
    c.mode = mode;
    c.draft.clip_id = ev.clip_id;
    c.draft.mode = mode;
    c.draft.template_id = "adv";
    c.draft.question = std::move(question);
    c.draft.answer = std::move(answer);
    c.draft.engine_id = "fixture";
    c.expected = expected;
    return c;
  };

  std::vector<AdversarialCase> out;

  // PLACEHOLDER_UNRESOLVED
  out.push_back(make("placeholder-in-question", ev_b, VqaMode::kSpatial,
                     "What about the {object}?", "The cup sits in view.",
                     ViolationCode::kPlaceholderUnresolved));
  out.push_back(make("placeholder-in-answer", ev_b, VqaMode::kSpatial,
                     "Where is the cup?",
                     "The cup stays {somewhere} in view.",
                     ViolationCode::kPlaceholderUnresolved));
  out.push_back(make("placeholder-twice", ev_a, VqaMode::kSpatial,
                     "Describe {object} and {second_object}.",
                     "The cup rests by the plate.",
                     ViolationCode::kPlaceholderUnresolved));

  // GROUNDING_UNKNOWN_OBJECT
  out.push_back(make("object-not-in-clip", ev_b, VqaMode::kSpatial,
                     "Where is the cup?", "The cup sits near the knife.",
                     ViolationCode::kGroundingUnknownObject));
  out.push_back(make("object-sentinel", ev_a, VqaMode::kSpatial,
                     "What is in view?", "An anvil rests on the table.",
                     ViolationCode::kGroundingUnknownObject));
  out.push_back(make("object-plural-form", ev_b, VqaMode::kSpatial,
                     "What else is nearby?", "The spoons rest by the cup.",
                     ViolationCode::kGroundingUnknownObject));

  // GROUNDING_UNKNOWN_ACTION
  out.push_back(make("action-not-in-clip", ev_b, VqaMode::kSpatial,
                     "What does the hand do?", "The right hand pours the cup.",
                     ViolationCode::kGroundingUnknownAction));
  out.push_back(make("action-sentinel", ev_c, VqaMode::kSpatial,
                     "What does the hand do?",
                     "The left hand carves the beaker.",
                     ViolationCode::kGroundingUnknownAction));
  out.push_back(make("action-wrong-event", ev_d, VqaMode::kSpatial,
                     "What does the hand do?",
                     "The right hand aligns the crate.",
                     ViolationCode::kGroundingUnknownAction));

  // GROUNDING_FALSE_CONTACT
  out.push_back(make("contact-verb-on-contactless-object", ev_b,
                     VqaMode::kSpatial, "How is the cup handled?",
                     "The right hand lifts the cup and holds the cup.",
                     ViolationCode::kGroundingFalseContact));
  out.push_back(make("contact-bigram", ev_d, VqaMode::kSpatial,
                     "Where is the crate?",
                     "The crate stays in contact with the hand.",
                     ViolationCode::kGroundingFalseContact));
  out.push_back(make("contact-touch", ev_b, VqaMode::kSpatial,
                     "What does the person do?", "The person touches the cup.",
                     ViolationCode::kGroundingFalseContact));

  // EGO_UNSEEN_HAND
  out.push_back(make("unseen-left", ev_b, VqaMode::kSpatial,
                     "What waits nearby?", "The left hand waits near the cup.",
                     ViolationCode::kEgoUnseenHand));
  out.push_back(make("unseen-right", ev_c, VqaMode::kSpatial,
                     "Where is the beaker?",
                     "The beaker sits by the right hand.",
                     ViolationCode::kEgoUnseenHand));
  out.push_back(make("unseen-right-bare", ev_c, VqaMode::kSpatial,
                     "What is in view?", "The right hand rests in view.",
                     ViolationCode::kEgoUnseenHand));

  // EGO_HAND_CONTRADICTION
  out.push_back(make("contradiction-direct", ev_a, VqaMode::kSpatial,
                     "Which hand lifts the plate?",
                     "The left hand lifts the plate. The right hand lifts the "
                     "plate as well.",
                     ViolationCode::kEgoHandContradiction));
  out.push_back(make("contradiction-via-it", ev_a, VqaMode::kSpatial,
                     "Which hand grasps the cup?",
                     "The right hand grasps the cup. The left hand grasps it "
                     "too.",
                     ViolationCode::kEgoHandContradiction));
  out.push_back(make("contradiction-later-sentence", ev_d, VqaMode::kSpatial,
                     "Which hand pushes the crate?",
                     "The right hand pushes the crate. The crate moves. The "
                     "left hand pushes the crate afterwards.",
                     ViolationCode::kEgoHandContradiction));

  // TEMPORAL_NO_CONNECTOR
  out.push_back(make("no-connector-temporal", ev_a, VqaMode::kTemporal,
                     "What happens in order?", "The right hand grasps the cup.",
                     ViolationCode::kTemporalNoConnector));
  out.push_back(make("no-connector-summary", ev_b, VqaMode::kSummary,
                     "What happens overall?", "The right hand lifts the cup.",
                     ViolationCode::kTemporalNoConnector));
  out.push_back(make("no-connector-trajectory", ev_d, VqaMode::kTrajectory,
                     "How does the crate move?",
                     "The right hand pushes the crate.",
                     ViolationCode::kTemporalNoConnector));

  // TEMPORAL_ORDER
  out.push_back(make("order-reversed-narration", ev_a, VqaMode::kTemporal,
                     "What happens in order?",
                     "First the right hand lifts the plate, then the right "
                     "hand grasps the cup.",
                     ViolationCode::kTemporalOrder));
  out.push_back(make("order-after-inversion", ev_a, VqaMode::kTemporal,
                     "What happens in order?",
                     "The right hand grasps the cup after the right hand "
                     "lifts the plate.",
                     ViolationCode::kTemporalOrder));
  out.push_back(make("order-reversed-factory", ev_d, VqaMode::kTemporal,
                     "What happens in order?",
                     "First the right hand slides the panel, then the right "
                     "hand pushes the crate.",
                     ViolationCode::kTemporalOrder));

  return out;
}

}  // namespace e2e::testing

#endif  // E2E_TESTS_ADVERSARIAL_HPP_
