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

#include "e2e/violations.hpp"

#include "e2e/errors.hpp"

namespace e2e {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view violation_code_to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::kGroundingUnknownObject:
      return "GROUNDING_UNKNOWN_OBJECT";
    case ViolationCode::kGroundingUnknownAction:
      return "GROUNDING_UNKNOWN_ACTION";
    case ViolationCode::kGroundingFalseContact:
      return "GROUNDING_FALSE_CONTACT";
    case ViolationCode::kEgoUnseenHand:
      return "EGO_UNSEEN_HAND";
    case ViolationCode::kEgoHandContradiction:
      return "EGO_HAND_CONTRADICTION";
    case ViolationCode::kTemporalNoConnector:
      return "TEMPORAL_NO_CONNECTOR";
    case ViolationCode::kTemporalOrder:
      return "TEMPORAL_ORDER";
    case ViolationCode::kPlaceholderUnresolved:
      return "PLACEHOLDER_UNRESOLVED";
  }
  return "PLACEHOLDER_UNRESOLVED";
}

ViolationCode violation_code_from_string(std::string_view s) {
  if (s == "GROUNDING_UNKNOWN_OBJECT") {
    return ViolationCode::kGroundingUnknownObject;
  }
  if (s == "GROUNDING_UNKNOWN_ACTION") {
    return ViolationCode::kGroundingUnknownAction;
  }
  if (s == "GROUNDING_FALSE_CONTACT") {
    return ViolationCode::kGroundingFalseContact;
  }
  if (s == "EGO_UNSEEN_HAND") return ViolationCode::kEgoUnseenHand;
  if (s == "EGO_HAND_CONTRADICTION") {
    return ViolationCode::kEgoHandContradiction;
  }
  if (s == "TEMPORAL_NO_CONNECTOR") return ViolationCode::kTemporalNoConnector;
  if (s == "TEMPORAL_ORDER") return ViolationCode::kTemporalOrder;
  if (s == "PLACEHOLDER_UNRESOLVED") {
    return ViolationCode::kPlaceholderUnresolved;
  }
  throw Error("unknown violation code \"" + std::string(s) + "\"");
}

ordered_json violation_to_json(const Violation& v) {
  return ordered_json{
      {"code", violation_code_to_string(v.code)},
      {"message", v.message},
      {"span", {v.begin, v.end}},
      {"target", v.target == TextTarget::kQuestion ? "question" : "answer"},
  };
}

Violation violation_from_json(const json& j) {
  Violation v;
  v.code = violation_code_from_string(j.at("code").get<std::string>());
  v.message = j.at("message").get<std::string>();
  v.begin = j.at("span").at(0).get<size_t>();
  v.end = j.at("span").at(1).get<size_t>();
  v.target = j.at("target").get<std::string>() == "question"
                 ? TextTarget::kQuestion
                 : TextTarget::kAnswer;
  return v;
}

ordered_json report_to_json(const ValidationReport& r) {
  ordered_json violations = ordered_json::array();
  for (const Violation& v : r.violations) {
    violations.push_back(violation_to_json(v));
  }
  return ordered_json{
      {"clip_id", r.clip_id},
      {"attempt", r.attempt},
      {"passed", r.passed},
      {"violations", std::move(violations)},
  };
}

ValidationReport report_from_json(const json& j) {
  ValidationReport r;
  r.clip_id = j.at("clip_id").get<std::string>();
  r.attempt = j.at("attempt").get<int>();
  r.passed = j.at("passed").get<bool>();
  for (const json& v : j.at("violations")) {
    r.violations.push_back(violation_from_json(v));
  }
  return r;
}

}  // namespace e2e
