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

#include "e2e/lexicon.hpp"

#include "e2e/embedded.hpp"
#include "e2e/text.hpp"

namespace e2e {

namespace {

void parse_lemma_lines(std::string_view text,
                       std::unordered_set<std::string>* out) {
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.remove_suffix(1);
    }
    while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
    if (line.empty() || line.front() == '#') continue;
    out->insert(std::string(line));
    if (pos > text.size()) break;
  }
}

}  // namespace

std::vector<std::pair<std::string, std::string>> default_suffix_rules() {
  // Longest suffix first; the double entries cover e-drop forms
  // ("placing" -> "place", "sliced" -> "slice").
  return {
      {"sses", "ss"}, {"ies", "y"}, {"ing", ""}, {"ing", "e"},
      {"ed", ""},     {"ed", "e"},  {"es", ""},  {"s", ""},
  };
}

std::string Lexicon::lemmatize(std::string_view token) const {
  for (const auto& [suffix, replacement] : suffix_rules) {
    if (token.size() <= suffix.size()) continue;
    if (token.substr(token.size() - suffix.size()) != suffix) continue;
    std::string candidate(token.substr(0, token.size() - suffix.size()));
    candidate += replacement;
    if (nouns.count(candidate) > 0 || verbs.count(candidate) > 0) {
      return candidate;
    }
  }
  return std::string(token);
}

Lexicon load_lexicon(std::string_view nouns_text,
                     std::string_view verbs_text) {
  Lexicon lex;
  lex.suffix_rules = default_suffix_rules();
  parse_lemma_lines(nouns_text, &lex.nouns);
  parse_lemma_lines(verbs_text, &lex.verbs);
  return lex;
}

const Lexicon& bundled_lexicon() {
  static const Lexicon kLexicon =
      load_lexicon(embedded_noun_lexicon(), embedded_verb_lexicon());
  return kLexicon;
}

}  // namespace e2e
