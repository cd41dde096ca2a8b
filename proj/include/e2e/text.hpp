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

#ifndef E2E_TEXT_HPP_
#define E2E_TEXT_HPP_

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace e2e {

// One lowercased alphabetic run. [begin, end) indexes the original text, so
// violation spans can point back at the exact offending characters.
struct Token {
  std::string text;
  size_t begin = 0;
  size_t end = 0;
};

inline char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

inline bool ascii_alpha(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = ascii_lower(c);
  return out;
}

// Splits on every non-alphabetic character and lowercases. Digits and
// punctuation never reach the rule checkers or the diversity counters.
inline std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < text.size()) {
    if (!ascii_alpha(text[i])) {
      ++i;
      continue;
    }
    size_t j = i;
    std::string word;
    while (j < text.size() && ascii_alpha(text[j])) {
      word.push_back(ascii_lower(text[j]));
      ++j;
    }
    out.push_back(Token{std::move(word), i, j});
    i = j;
  }
  return out;
}

// Lowercase, collapse whitespace runs to single spaces, trim both ends.
// Used by the dedup key so cosmetic rewrites collide.
inline std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
        c == '\v') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(ascii_lower(c));
  }
  return out;
}

}  // namespace e2e

#endif  // E2E_TEXT_HPP_
