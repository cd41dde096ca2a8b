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

#include <map>
#include <set>
#include <string>
#include <vector>

#include "adversarial.hpp"
#include "doctest.h"
#include "e2e/annotation.hpp"
#include "e2e/errors.hpp"
#include "e2e/validation.hpp"
#include "fixtures.hpp"

using namespace e2e;
using e2e::testing::adversarial_cases;
using e2e::testing::consistent_fixtures;
using e2e::testing::make_event;
using e2e::testing::make_evidence;

namespace {

QADraft make_draft(const EvidenceRecord& ev, VqaMode mode, std::string question,
                   std::string answer) {
  QADraft d;
  d.clip_id = ev.clip_id;
  d.mode = mode;
  d.template_id = "adv";
  d.question = std::move(question);
  d.answer = std::move(answer);
  d.engine_id = "fixture";
  return d;
}

AnnotationTask make_task(const EvidenceRecord& ev) {
  AnnotationTask task;
  task.clip.clip_id = ev.clip_id;
  task.clip.t_start = 0.0;
  task.clip.t_end = 4.0;
  task.evidence = ev;
  task.domain = Domain::kHousehold;
  task.frame_refs = {"f0", "f1"};
  task.episode_metadata = "meta";
  return task;
}

const Template& first_template(VqaMode mode) {
  return *bundled_templates().for_mode(mode)[0];
}

// Engine that records how many prior errors each attempt carried.
class RecordingEngine : public Engine {
 public:
  explicit RecordingEngine(FaultPolicy policy) : mock_(policy) {}

  QADraft annotate(const AnnotationRequest& req, int attempt) const override {
    prior_sizes.push_back(req.prior_errors.size());
    return mock_.annotate(req, attempt);
  }
  std::string_view id() const override { return mock_.id(); }

  mutable std::vector<size_t> prior_sizes;

 private:
  MockEngine mock_;
};

// Engine that throws TransportError on the listed attempts.
class FlakyEngine : public Engine {
 public:
  FlakyEngine(std::set<int> throw_on, FaultPolicy policy = {})
      : throw_on_(std::move(throw_on)), mock_(policy) {}

  QADraft annotate(const AnnotationRequest& req, int attempt) const override {
    ++calls;
    if (throw_on_.count(attempt) != 0) {
      throw TransportError("connection reset");
    }
    return mock_.annotate(req, attempt);
  }
  std::string_view id() const override { return mock_.id(); }

  mutable int calls = 0;

 private:
  std::set<int> throw_on_;
  MockEngine mock_;
};

}  // namespace

TEST_CASE("every adversarial fixture is rejected with exactly its code") {
  std::map<ViolationCode, int> per_code;
  for (const auto& c : adversarial_cases()) {
    const ValidationReport report = validate(c.draft, c.evidence, c.mode);
    CAPTURE(c.name);
    CHECK_FALSE(report.passed);
    std::set<ViolationCode> codes;
    for (const Violation& v : report.violations) codes.insert(v.code);
    if (codes != std::set<ViolationCode>{c.expected}) {
      for (const Violation& v : report.violations) CAPTURE(v.message);
    }
    CHECK(codes == std::set<ViolationCode>{c.expected});
    per_code[c.expected]++;
  }
  CHECK(per_code.size() == 8);
  for (const auto& [code, count] : per_code) {
    CAPTURE(violation_code_to_string(code));
    CHECK(count >= 3);
  }
}

TEST_CASE("violations are reported in rule-family order") {
  const EvidenceRecord ev = make_evidence(
      "multi", false, true, {make_event(0, 1, "lift", "cup", Hand::kRight, false)});
  const QADraft draft = make_draft(
      ev, VqaMode::kTemporal, "What about the {object}?",
      "The anvil waits. The left hand lifts the cup.");
  const ValidationReport report = validate(draft, ev, VqaMode::kTemporal);
  REQUIRE(report.violations.size() == 4);
  CHECK(report.violations[0].code == ViolationCode::kPlaceholderUnresolved);
  CHECK(report.violations[0].target == TextTarget::kQuestion);
  CHECK(report.violations[1].code == ViolationCode::kGroundingUnknownObject);
  CHECK(report.violations[2].code == ViolationCode::kEgoUnseenHand);
  CHECK(report.violations[3].code == ViolationCode::kTemporalNoConnector);
  CHECK_FALSE(report.passed);
}

TEST_CASE("violation spans point into the right text") {
  const EvidenceRecord ev = make_evidence(
      "span", true, true, {make_event(0, 1, "lift", "cup", Hand::kRight, false)});
  const QADraft draft =
      make_draft(ev, VqaMode::kSpatial, "Where is the cup?",
                 "The cup sits near the knife.");
  const ValidationReport report = validate(draft, ev, VqaMode::kSpatial);
  REQUIRE(report.violations.size() == 1);
  const Violation& v = report.violations[0];
  CHECK(v.target == TextTarget::kAnswer);
  CHECK(draft.answer.substr(v.begin, v.end - v.begin) == "knife");
}

TEST_CASE("whitelist words never trip grounding") {
  for (const char* w :
       {"person", "hand", "hands", "scene", "table", "camera", "view"}) {
    CHECK(grounding_whitelisted(w));
  }
  CHECK_FALSE(grounding_whitelisted("cup"));
  CHECK_FALSE(grounding_whitelisted("anvil"));

  const EvidenceRecord ev = make_evidence(
      "wl", true, true, {make_event(0, 1, "lift", "cup", Hand::kRight, false)});
  const QADraft draft = make_draft(
      ev, VqaMode::kSpatial, "What is in view?",
      "The person keeps the table and the scene in view of the camera.");
  CHECK(validate(draft, ev, VqaMode::kSpatial).passed);
}

TEST_CASE("contact claims bind through 'it' to the last named object") {
  const EvidenceRecord ev = make_evidence(
      "bind", true, true, {make_event(0, 1, "grasp", "cup", Hand::kRight, true)});
  const QADraft good = make_draft(
      ev, VqaMode::kSpatial, "How is the cup handled?",
      "The right hand grasps the cup and holds it.");
  CHECK(validate(good, ev, VqaMode::kSpatial).passed);

  const EvidenceRecord no_contact = make_evidence(
      "bind2", true, true, {make_event(0, 1, "lift", "cup", Hand::kRight, false)});
  const QADraft bad = make_draft(
      no_contact, VqaMode::kSpatial, "How is the cup handled?",
      "The right hand lifts the cup and holds it.");
  const ValidationReport report = validate(bad, no_contact, VqaMode::kSpatial);
  REQUIRE(report.violations.size() == 1);
  CHECK(report.violations[0].code == ViolationCode::kGroundingFalseContact);
}

TEST_CASE("contact claims about objects without events are left alone") {
  // "cup" is an object record with no events; the contact-state rule only
  // judges objects the timeline knows something about.
  const EvidenceRecord ev = make_evidence("noev", true, true, {}, {"cup"});
  const QADraft draft = make_draft(ev, VqaMode::kSpatial, "What is held?",
                                   "The person holds the cup.");
  CHECK(validate(draft, ev, VqaMode::kSpatial).passed);
}

TEST_CASE("same-pattern events keep reorderings satisfiable") {
  const EvidenceRecord ev = make_evidence(
      "sat", true, true,
      {make_event(0, 1, "lift", "cup", Hand::kRight, false),
       make_event(1, 2, "wipe", "pan", Hand::kRight, false),
       make_event(2, 3, "lift", "cup", Hand::kRight, false)});
  // wipe@1 precedes the second lift@2, so wipe-then-lift is satisfiable even
  // though the first lift happened earlier.
  const QADraft draft = make_draft(
      ev, VqaMode::kTemporal, "What happens in order?",
      "First the right hand wipes the pan, then the right hand lifts the cup.");
  CHECK(validate(draft, ev, VqaMode::kTemporal).passed);
}

TEST_CASE("'while' clauses carry no ordering constraint") {
  const EvidenceRecord ev = make_evidence(
      "whl", true, true,
      {make_event(0, 1, "grasp", "cup", Hand::kRight, true),
       make_event(1, 2, "lift", "plate", Hand::kLeft, false)});
  // Reversed order, but tied with "while": no order violation.
  const QADraft draft = make_draft(
      ev, VqaMode::kTemporal, "What happens?",
      "The left hand lifts the plate while the right hand grasps the cup.");
  CHECK(validate(draft, ev, VqaMode::kTemporal).passed);
}

TEST_CASE("unmatched clauses drop out of the ordering check") {
  const EvidenceRecord ev = make_evidence(
      "para", true, true,
      {make_event(0, 1, "grasp", "cup", Hand::kRight, true),
       make_event(1, 2, "lift", "plate", Hand::kLeft, false)});
  // The middle clause is pure paraphrase (no lexicon verb); the outer clauses
  // still pair up and stay in the true order.
  const QADraft ok = make_draft(
      ev, VqaMode::kTemporal, "What happens?",
      "First the right hand grasps the cup, then the pace stays calm, "
      "finally the left hand lifts the plate.");
  CHECK(validate(ok, ev, VqaMode::kTemporal).passed);

  const QADraft bad = make_draft(
      ev, VqaMode::kTemporal, "What happens?",
      "First the left hand lifts the plate, then the pace stays calm, "
      "finally the right hand grasps the cup.");
  const ValidationReport report = validate(bad, ev, VqaMode::kTemporal);
  REQUIRE(report.violations.size() == 1);
  CHECK(report.violations[0].code == ViolationCode::kTemporalOrder);
}

TEST_CASE("custom connector lexicon") {
  const EvidenceRecord ev = make_evidence(
      "conn", true, true, {make_event(0, 1, "lift", "cup", Hand::kRight, false)});
  const QADraft draft = make_draft(ev, VqaMode::kTemporal, "What happens?",
                                   "Soon the right hand lifts the cup.");
  // Default connectors reject the draft ("soon" is not one of them).
  CHECK_FALSE(validate(draft, ev, VqaMode::kTemporal).passed);
  GateOptions opts;
  opts.connectors.push_back("soon");
  CHECK(validate(draft, ev, VqaMode::kTemporal, opts).passed);
}

TEST_CASE("run_loop returns a first-attempt sample for a clean engine") {
  const EvidenceRecord ev = consistent_fixtures()[1];
  const AnnotationTask task = make_task(ev);
  const MockEngine engine;
  const LoopResult result = run_loop(task, VqaMode::kTemporal,
                                     first_template(VqaMode::kTemporal),
                                     engine, 21, 3);
  REQUIRE(result.sample.has_value());
  CHECK_FALSE(result.rejected.has_value());
  CHECK(result.drafts.size() == 1);
  const QASample& s = *result.sample;
  CHECK(s.clip_id == ev.clip_id);
  CHECK(s.attempt == 0);
  CHECK(s.validation.passed);
  CHECK(s.engine_id == kMockEngineId);
  CHECK(s.seed == 21);
  CHECK(s.t_end == 4.0);
}

TEST_CASE("run_loop feeds each failure into the next attempt") {
  const EvidenceRecord ev = consistent_fixtures()[1];
  const AnnotationTask task = make_task(ev);
  FaultPolicy policy;
  policy.kind = FaultPolicy::Kind::kSchedule;
  policy.schedule = {FaultClass::kPlaceholder, FaultClass::kUnknownObject,
                     std::nullopt};
  const RecordingEngine engine(policy);
  const LoopResult result = run_loop(task, VqaMode::kSpatial,
                                     first_template(VqaMode::kSpatial),
                                     engine, 5, 3);
  REQUIRE(result.sample.has_value());
  CHECK(result.sample->attempt == 2);
  CHECK(result.drafts.size() == 3);
  CHECK(result.drafts[0].attempt == 0);
  CHECK(result.drafts[2].attempt == 2);
  // Attempt 0 starts clean; attempts 1 and 2 carry the previous violations.
  REQUIRE(engine.prior_sizes.size() == 3);
  CHECK(engine.prior_sizes[0] == 0);
  CHECK(engine.prior_sizes[1] >= 1);
  CHECK(engine.prior_sizes[2] >= 1);
}

TEST_CASE("run_loop attempt budget is exactly max_retries + 1") {
  const EvidenceRecord ev = consistent_fixtures()[1];
  const AnnotationTask task = make_task(ev);
  FaultPolicy policy;
  policy.kind = FaultPolicy::Kind::kAlways;
  policy.always_fault = FaultClass::kPlaceholder;  // injectable everywhere

  for (int max_retries : {0, 1, 3}) {
    const MockEngine engine(policy);
    const LoopResult result = run_loop(task, VqaMode::kSpatial,
                                       first_template(VqaMode::kSpatial),
                                       engine, 5, max_retries);
    CAPTURE(max_retries);
    CHECK_FALSE(result.sample.has_value());
    REQUIRE(result.rejected.has_value());
    const size_t expected = static_cast<size_t>(max_retries) + 1;
    CHECK(result.drafts.size() == expected);
    CHECK(result.rejected->drafts.size() == expected);
    CHECK(result.rejected->reports.size() == expected);
    for (size_t i = 0; i < expected; ++i) {
      CHECK(result.rejected->drafts[i].attempt == static_cast<int>(i));
      CHECK(result.rejected->reports[i].attempt == static_cast<int>(i));
      CHECK_FALSE(result.rejected->reports[i].passed);
    }
    CHECK(result.rejected->clip_id == ev.clip_id);
    CHECK(result.rejected->mode == VqaMode::kSpatial);
  }
}

TEST_CASE("transport errors consume attempts and recovery still succeeds") {
  const EvidenceRecord ev = consistent_fixtures()[1];
  const AnnotationTask task = make_task(ev);
  const FlakyEngine engine({0});
  const LoopResult result = run_loop(task, VqaMode::kSpatial,
                                     first_template(VqaMode::kSpatial),
                                     engine, 5, 2);
  REQUIRE(result.sample.has_value());
  CHECK(result.sample->attempt == 1);
  CHECK(result.drafts.size() == 1);
  CHECK(engine.calls == 2);
}

TEST_CASE("a transport error on the final attempt is rethrown") {
  const EvidenceRecord ev = consistent_fixtures()[1];
  const AnnotationTask task = make_task(ev);

  // Every attempt fails at the transport layer.
  const FlakyEngine all_throw({0, 1, 2});
  CHECK_THROWS_AS(run_loop(make_task(ev), VqaMode::kSpatial,
                           first_template(VqaMode::kSpatial), all_throw, 5, 2),
                  TransportError);
  CHECK(all_throw.calls == 3);

  // A gate failure followed by a final transport failure also surfaces the
  // transport error; there is no complete rejected record to report.
  FaultPolicy policy;
  policy.kind = FaultPolicy::Kind::kAlways;
  policy.always_fault = FaultClass::kPlaceholder;
  const FlakyEngine late_throw({1}, policy);
  CHECK_THROWS_AS(run_loop(task, VqaMode::kSpatial,
                           first_template(VqaMode::kSpatial), late_throw, 5, 1),
                  TransportError);
}

TEST_CASE("sample JSON round trip") {
  const EvidenceRecord ev = consistent_fixtures()[7];
  const MockEngine engine;
  const LoopResult result = run_loop(make_task(ev), VqaMode::kTrajectory,
                                     first_template(VqaMode::kTrajectory),
                                     engine, 9, 0);
  REQUIRE(result.sample.has_value());
  const QASample& s = *result.sample;
  CHECK(sample_from_json(sample_to_json(s)) == s);
}

TEST_CASE("rejected JSON round trip") {
  const EvidenceRecord ev = consistent_fixtures()[1];
  FaultPolicy policy;
  policy.kind = FaultPolicy::Kind::kAlways;
  policy.always_fault = FaultClass::kUnknownObject;
  const MockEngine engine(policy);
  const LoopResult result = run_loop(make_task(ev), VqaMode::kSpatial,
                                     first_template(VqaMode::kSpatial),
                                     engine, 9, 2);
  REQUIRE(result.rejected.has_value());
  const RejectedRecord& r = *result.rejected;
  CHECK(r.drafts.size() == 3);
  CHECK(rejected_from_json(rejected_to_json(r)) == r);
}
