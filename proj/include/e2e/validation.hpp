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

#ifndef E2E_VALIDATION_HPP_
#define E2E_VALIDATION_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "e2e/annotation.hpp"
#include "e2e/corpus.hpp"
#include "e2e/lexicon.hpp"
#include "e2e/violations.hpp"

namespace e2e {

inline const std::vector<std::string>& default_connectors() {
  static const std::vector<std::string> kConnectors = {
      "then", "after", "before", "next",
      "first", "finally", "while", "subsequently"};
  return kConnectors;
}

struct GateOptions {
  const Lexicon* lexicon = nullptr;  // null -> bundled_lexicon()
  std::vector<std::string> connectors = default_connectors();
};

// The four rule families. Each is a pure function of (draft, evidence); the
// fixed concatenation order below makes structured error messages stable.

// One violation per surviving {...} placeholder, question and answer both.
std::vector<Violation> check_placeholders(const QADraft& draft);

// Lexicon nouns in the answer must be clip objects (or generic whitelist
// words); lexicon verbs must be event verbs; contact assertions must match
// an event with contact=true for that object.
std::vector<Violation> check_evidence_grounding(const QADraft& draft,
                                                const EvidenceRecord& ev,
                                                const GateOptions& opts = {});

// Hand mentions must be visible hands; one event narrated with two disjoint
// hand assignments is a contradiction.
std::vector<Violation> check_egocentric_consistency(
    const QADraft& draft, const EvidenceRecord& ev,
    const GateOptions& opts = {});

// Temporal-sensitive modes only: the answer needs at least one connector,
// and clause order (after "after"/"before" rewriting) must be satisfiable
// by the event timeline.
std::vector<Violation> check_temporal_logic(const QADraft& draft,
                                            const EvidenceRecord& ev,
                                            VqaMode mode,
                                            const GateOptions& opts = {});

// placeholder -> grounding -> egocentric -> temporal, concatenated.
ValidationReport validate(const QADraft& draft, const EvidenceRecord& ev,
                          VqaMode mode, const GateOptions& opts = {});

// Whitelist of generic scene words exempt from object grounding.
bool grounding_whitelisted(std::string_view lemma);

// A draft that passed the gate, with full traceability.
struct QASample {
  std::string clip_id;
  std::vector<std::string> frame_refs;
  VqaMode mode = VqaMode::kTemporal;
  std::string template_id;
  std::string question;
  std::string answer;
  std::string engine_id;
  int attempt = 0;
  ValidationReport validation;  // passed == true
  uint64_t seed = 0;
  Domain domain = Domain::kHousehold;
  double t_start = 0.0;
  double t_end = 0.0;

  friend bool operator==(const QASample&, const QASample&) = default;
};

// A clip whose every attempt failed; all reports kept for gate audits.
struct RejectedRecord {
  std::string clip_id;
  VqaMode mode = VqaMode::kTemporal;
  std::string template_id;
  std::vector<QADraft> drafts;
  std::vector<ValidationReport> reports;

  friend bool operator==(const RejectedRecord&,
                         const RejectedRecord&) = default;
};

// Everything run_loop needs to know about one clip.
struct AnnotationTask {
  Clip clip;
  EvidenceRecord evidence;
  Domain domain = Domain::kHousehold;
  std::vector<std::string> frame_refs;
  std::string episode_metadata;
};

struct LoopResult {
  std::optional<QASample> sample;
  std::optional<RejectedRecord> rejected;
  std::vector<QADraft> drafts;  // every attempt, for the drafts stream
};

// The generation-validation loop. Attempt 0 sends empty prior_errors; each
// failed report's violations become the next attempt's prior_errors. Stops
// at the first pass, or returns a RejectedRecord after max_retries + 1
// failures. Engine transport errors consume attempts from the same budget
// and the last one is rethrown once the budget is gone.
LoopResult run_loop(const AnnotationTask& task, VqaMode mode,
                    const Template& tmpl, const Engine& engine, uint64_t seed,
                    int max_retries, const GateOptions& opts = {});

nlohmann::ordered_json sample_to_json(const QASample& s);
QASample sample_from_json(const nlohmann::json& j);
nlohmann::ordered_json rejected_to_json(const RejectedRecord& r);
RejectedRecord rejected_from_json(const nlohmann::json& j);

}  // namespace e2e

#endif  // E2E_VALIDATION_HPP_
