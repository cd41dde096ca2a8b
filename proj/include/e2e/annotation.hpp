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

#ifndef E2E_ANNOTATION_HPP_
#define E2E_ANNOTATION_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "e2e/corpus.hpp"
#include "e2e/violations.hpp"
#include "json.hpp"

namespace e2e {

// Enum order is the sampling order; changing it changes sampled datasets.
enum class VqaMode {
  kTemporal,
  kSpatial,
  kAttribute,
  kMechanics,
  kReasoning,
  kSummary,
  kTrajectory,
};

inline constexpr int kNumModes = 7;

std::string_view mode_to_string(VqaMode m);
VqaMode mode_from_string(std::string_view s);
constexpr std::array<VqaMode, kNumModes> all_modes() {
  return {VqaMode::kTemporal,  VqaMode::kSpatial,   VqaMode::kAttribute,
          VqaMode::kMechanics, VqaMode::kReasoning, VqaMode::kSummary,
          VqaMode::kTrajectory};
}

// Modes whose questions are about the event sequence; with no events there
// is nothing truthful to generate and the clip is skipped.
bool mode_requires_events(VqaMode m);

// Modes whose answers must narrate in order with explicit connectors.
bool mode_temporal_sensitive(VqaMode m);

struct Template {
  std::string template_id;
  VqaMode mode = VqaMode::kTemporal;
  std::string question_pattern;  // placeholders: {object} {hand} {verb}
                                 // {second_object}
  bool required_connectors = false;
  std::string notes;
  double weight = 1.0;

  friend bool operator==(const Template&, const Template&) = default;
};

class TemplateSet {
 public:
  // Throws ConfigError on schema problems, unknown placeholders, or a mode
  // with no templates.
  static TemplateSet from_json_text(std::string_view text);

  const std::vector<Template>& all() const { return templates_; }
  const std::vector<const Template*>& for_mode(VqaMode m) const {
    return by_mode_[static_cast<size_t>(m)];
  }

 private:
  std::vector<Template> templates_;
  std::array<std::vector<const Template*>, kNumModes> by_mode_;
};

// The template catalog shipped inside the binary (data/templates.json).
const TemplateSet& bundled_templates();

struct ModeWeights {
  std::array<double, kNumModes> weights{1, 1, 1, 1, 1, 1, 1};

  double& operator[](VqaMode m) { return weights[static_cast<size_t>(m)]; }
  double operator[](VqaMode m) const {
    return weights[static_cast<size_t>(m)];
  }

  friend bool operator==(const ModeWeights&, const ModeWeights&) = default;
};

// Draws (mode, template) from a stream keyed by (seed, clip_id) only, so the
// result is identical no matter when or on which worker the clip is handled.
// Throws AnnotationError(kAllWeightsZero / kEmptyTemplateSet).
std::pair<VqaMode, const Template*> sample_mode_template(
    uint64_t seed, std::string_view clip_id, const ModeWeights& weights,
    const TemplateSet& templates);

struct AnnotationRequest {
  std::string clip_id;
  VqaMode mode = VqaMode::kTemporal;
  Template tmpl;
  EvidenceRecord evidence;
  std::string episode_metadata;
  std::vector<std::string> frame_refs;
  std::vector<Violation> prior_errors;  // empty on the first attempt
  uint64_t seed = 0;
};

struct QADraft {
  std::string clip_id;
  VqaMode mode = VqaMode::kTemporal;
  std::string template_id;
  std::string question;
  std::string answer;
  std::string engine_id;
  int attempt = 0;

  friend bool operator==(const QADraft&, const QADraft&) = default;
};

// Wire format (the HTTP protocol of the remote engine). The stub server and
// the client share these, so mock-behind-stub reproduces direct mock output
// byte for byte.
nlohmann::ordered_json request_to_json(const AnnotationRequest& req);
AnnotationRequest request_from_json(const nlohmann::json& j);

nlohmann::ordered_json draft_to_json(const QADraft& d);
QADraft draft_from_json(const nlohmann::json& j);

// One deliberately injectable violation class per gate rule.
enum class FaultClass {
  kUnknownObject,
  kUnknownAction,
  kFalseContact,
  kUnseenHand,
  kHandContradiction,
  kNoConnector,
  kWrongOrder,
  kPlaceholder,
};

std::string_view fault_class_to_string(FaultClass f);
FaultClass fault_class_from_string(std::string_view s);

// Fault classes that can produce exactly their one target violation given
// this mode and evidence (e.g. kWrongOrder needs two reorderable events).
std::vector<FaultClass> injectable_faults(VqaMode mode,
                                          const EvidenceRecord& evidence);

// Deterministic stand-in for a hosted annotation engine. Fills the template
// from evidence and writes an answer the gate accepts; with `fault` set it
// degrades the output so that exactly the targeted violation fires.
// Throws AnnotationError(kInsufficientEvidence) when the mode needs events
// and the evidence has none.
QADraft mock_annotate(const AnnotationRequest& req,
                      std::optional<FaultClass> fault = std::nullopt);

inline constexpr std::string_view kMockEngineId = "mock-v1";

// When and what the mock engine injects. Scheduling is keyed by
// (seed, clip_id, attempt) so it is reproducible under any parallelism.
struct FaultPolicy {
  enum class Kind { kNone, kAlways, kSchedule, kRate };

  Kind kind = Kind::kNone;
  FaultClass always_fault = FaultClass::kPlaceholder;     // kAlways
  std::vector<std::optional<FaultClass>> schedule;        // kSchedule, by attempt
  double rate = 0.0;                                      // kRate

  std::optional<FaultClass> decide(uint64_t seed, std::string_view clip_id,
                                   int attempt, VqaMode mode,
                                   const EvidenceRecord& evidence) const;
};

class Engine {
 public:
  virtual ~Engine() = default;
  // `attempt` never crosses the wire; it only drives local fault scheduling.
  virtual QADraft annotate(const AnnotationRequest& req, int attempt) const = 0;
  virtual std::string_view id() const = 0;
};

class MockEngine : public Engine {
 public:
  explicit MockEngine(FaultPolicy policy = {}) : policy_(policy) {}

  QADraft annotate(const AnnotationRequest& req, int attempt) const override;
  std::string_view id() const override { return kMockEngineId; }

 private:
  FaultPolicy policy_;
};

}  // namespace e2e

#endif  // E2E_ANNOTATION_HPP_
