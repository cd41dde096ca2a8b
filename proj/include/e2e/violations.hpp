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

#ifndef E2E_VIOLATIONS_HPP_
#define E2E_VIOLATIONS_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace e2e {

enum class ViolationCode {
  kGroundingUnknownObject,
  kGroundingUnknownAction,
  kGroundingFalseContact,
  kEgoUnseenHand,
  kEgoHandContradiction,
  kTemporalNoConnector,
  kTemporalOrder,
  kPlaceholderUnresolved,
};

// Serialized verbatim into prior_errors and the compiled dataset.
std::string_view violation_code_to_string(ViolationCode code);
ViolationCode violation_code_from_string(std::string_view s);

enum class TextTarget { kQuestion, kAnswer };

struct Violation {
  ViolationCode code = ViolationCode::kPlaceholderUnresolved;
  std::string message;
  // Character span [begin, end) into the text named by `target`.
  size_t begin = 0;
  size_t end = 0;
  TextTarget target = TextTarget::kAnswer;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::string clip_id;
  int attempt = 0;
  std::vector<Violation> violations;
  bool passed = false;  // passed <=> violations empty

  friend bool operator==(const ValidationReport&,
                         const ValidationReport&) = default;
};

nlohmann::ordered_json violation_to_json(const Violation& v);
Violation violation_from_json(const nlohmann::json& j);
nlohmann::ordered_json report_to_json(const ValidationReport& r);
ValidationReport report_from_json(const nlohmann::json& j);

}  // namespace e2e

#endif  // E2E_VIOLATIONS_HPP_
