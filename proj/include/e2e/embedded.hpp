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

#ifndef E2E_EMBEDDED_HPP_
#define E2E_EMBEDDED_HPP_

#include <string_view>

namespace e2e {

// Contents of the data/ files, baked in at build time so the binary has no
// runtime data dependencies. Definitions are generated by CMake.
std::string_view embedded_noun_lexicon();
std::string_view embedded_verb_lexicon();
std::string_view embedded_templates_json();

}  // namespace e2e

#endif  // E2E_EMBEDDED_HPP_
