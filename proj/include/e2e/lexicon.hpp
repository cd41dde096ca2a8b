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

#ifndef E2E_LEXICON_HPP_
#define E2E_LEXICON_HPP_

#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace e2e {

// Closed part-of-speech lexicons plus a suffix-rule lemmatizer. Words in
// neither set are treated as open-vocabulary prose: the rule gate ignores
// them and the diversity counters do not count them.
struct Lexicon {
  std::unordered_set<std::string> nouns;
  std::unordered_set<std::string> verbs;
  // Applied longest-suffix-first; at most one rule fires per token, and only
  // if the rewritten form is a known lemma.
  std::vector<std::pair<std::string, std::string>> suffix_rules;

  bool is_noun_lemma(std::string_view lemma) const {
    return nouns.count(std::string(lemma)) > 0;
  }
  bool is_verb_lemma(std::string_view lemma) const {
    return verbs.count(std::string(lemma)) > 0;
  }

  // First suffix rule whose rewrite lands in nouns or verbs wins; otherwise
  // the token comes back unchanged ("glass" never becomes "glas").
  std::string lemmatize(std::string_view token) const;
};

std::vector<std::pair<std::string, std::string>> default_suffix_rules();

// Parses one-lemma-per-line text; '#' starts a comment, blank lines skipped.
Lexicon load_lexicon(std::string_view nouns_text, std::string_view verbs_text);

// The lexicons shipped inside the binary (data/lexicon_*.txt at build time).
const Lexicon& bundled_lexicon();

}  // namespace e2e

#endif  // E2E_LEXICON_HPP_
