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

#include "e2e/diversity.hpp"

#include <array>
#include <cstdio>

#include "e2e/errors.hpp"
#include "e2e/text.hpp"

namespace e2e {
namespace {

using nlohmann::ordered_json;

constexpr std::array<std::string_view, 4> kBandNames = {"low", "medium",
                                                        "high", "very_high"};

template <typename Fn>
void for_each_text(const QASample& s, AnalyzeFields fields, Fn fn) {
  if (fields != AnalyzeFields::kAnswer) fn(s.question);
  if (fields != AnalyzeFields::kQuestion) fn(s.answer);
}

}  // namespace

std::string_view band_to_string(Band b) {
  return kBandNames[static_cast<size_t>(b)];
}

Band bin_object_div(double score) {
  if (score < 200.0) return Band::kLow;
  if (score < 300.0) return Band::kMedium;
  if (score < 350.0) return Band::kHigh;
  return Band::kVeryHigh;
}

Band bin_verb_div(double score) {
  if (score < 80.0) return Band::kLow;
  if (score < 120.0) return Band::kMedium;
  if (score < 160.0) return Band::kHigh;
  return Band::kVeryHigh;
}

std::string_view analyze_fields_to_string(AnalyzeFields f) {
  switch (f) {
    case AnalyzeFields::kBoth:
      return "both";
    case AnalyzeFields::kQuestion:
      return "question";
    case AnalyzeFields::kAnswer:
      return "answer";
  }
  return "both";
}

AnalyzeFields analyze_fields_from_string(std::string_view s) {
  if (s == "both") return AnalyzeFields::kBoth;
  if (s == "question") return AnalyzeFields::kQuestion;
  if (s == "answer") return AnalyzeFields::kAnswer;
  throw ConfigError("unknown analyze fields: " + std::string(s));
}

double object_div(const std::vector<QASample>& samples, const Lexicon& lex,
                  AnalyzeFields fields) {
  std::set<std::string> lemmas;
  uint64_t tokens = 0;
  for (const QASample& s : samples) {
    for_each_text(s, fields, [&](const std::string& text) {
      for (const Token& tok : tokenize(text)) {
        std::string lemma = lex.lemmatize(tok.text);
        if (!lex.is_noun_lemma(lemma)) continue;
        ++tokens;
        lemmas.insert(std::move(lemma));
      }
    });
  }
  if (tokens == 0) {
    throw DiversityError(DiversityError::Kind::kNoNounTokens,
                         "no noun tokens in the sample set");
  }
  return static_cast<double>(lemmas.size()) / static_cast<double>(tokens) *
         1000.0;
}

double verb_div(const std::vector<QASample>& samples, const Lexicon& lex,
                AnalyzeFields fields) {
  if (samples.empty()) {
    throw DiversityError(DiversityError::Kind::kEmptyMode,
                         "verb diversity needs at least one QA pair");
  }
  std::set<std::string> lemmas;
  for (const QASample& s : samples) {
    for_each_text(s, fields, [&](const std::string& text) {
      for (const Token& tok : tokenize(text)) {
        std::string lemma = lex.lemmatize(tok.text);
        if (lex.is_verb_lemma(lemma)) lemmas.insert(std::move(lemma));
      }
    });
  }
  return static_cast<double>(lemmas.size()) /
         static_cast<double>(samples.size()) * 1000.0;
}

void DiversityAccumulator::add(const QASample& sample, const Lexicon& lex,
                               AnalyzeFields fields) {
  const std::string domain(domain_to_string(sample.domain));
  const std::string mode(mode_to_string(sample.mode));
  ++total_samples;
  ++mode_pairs[mode];
  for_each_text(sample, fields, [&](const std::string& text) {
    for (const Token& tok : tokenize(text)) {
      std::string lemma = lex.lemmatize(tok.text);
      if (lex.is_noun_lemma(lemma)) {
        ++domain_noun_tokens[domain];
        ++total_noun_tokens;
        domain_noun_lemmas[domain].insert(std::move(lemma));
      } else if (lex.is_verb_lemma(lemma)) {
        ++total_verb_tokens;
        mode_verb_lemmas[mode].insert(std::move(lemma));
      }
    }
  });
}

void DiversityAccumulator::merge(const DiversityAccumulator& other) {
  for (const auto& [domain, lemmas] : other.domain_noun_lemmas)
    domain_noun_lemmas[domain].insert(lemmas.begin(), lemmas.end());
  for (const auto& [domain, count] : other.domain_noun_tokens)
    domain_noun_tokens[domain] += count;
  for (const auto& [mode, lemmas] : other.mode_verb_lemmas)
    mode_verb_lemmas[mode].insert(lemmas.begin(), lemmas.end());
  for (const auto& [mode, count] : other.mode_pairs)
    mode_pairs[mode] += count;
  total_samples += other.total_samples;
  total_noun_tokens += other.total_noun_tokens;
  total_verb_tokens += other.total_verb_tokens;
}

DiversityReport finalize_report(const DiversityAccumulator& acc) {
  DiversityReport report;
  report.total_samples = acc.total_samples;
  report.total_noun_tokens = acc.total_noun_tokens;
  report.total_verb_tokens = acc.total_verb_tokens;
  for (const auto& [domain, tokens] : acc.domain_noun_tokens) {
    if (tokens == 0) continue;
    DomainDiversity d;
    auto it = acc.domain_noun_lemmas.find(domain);
    d.unique_nouns = it == acc.domain_noun_lemmas.end()
                         ? 0
                         : static_cast<uint64_t>(it->second.size());
    d.noun_tokens = tokens;
    d.object_div = static_cast<double>(d.unique_nouns) /
                   static_cast<double>(tokens) * 1000.0;
    d.band = bin_object_div(d.object_div);
    report.per_domain[domain] = d;
  }
  for (const auto& [mode, pairs] : acc.mode_pairs) {
    if (pairs == 0) continue;
    ModeDiversity m;
    auto it = acc.mode_verb_lemmas.find(mode);
    m.unique_verbs = it == acc.mode_verb_lemmas.end()
                         ? 0
                         : static_cast<uint64_t>(it->second.size());
    m.qa_pairs = pairs;
    m.verb_div = static_cast<double>(m.unique_verbs) /
                 static_cast<double>(pairs) * 1000.0;
    m.band = bin_verb_div(m.verb_div);
    report.per_mode[mode] = m;
  }
  return report;
}

nlohmann::ordered_json diversity_report_to_json(const DiversityReport& r) {
  ordered_json j;
  ordered_json per_domain = ordered_json::object();
  for (const auto& [domain, d] : r.per_domain) {
    ordered_json e;
    e["object_div"] = d.object_div;
    e["band"] = band_to_string(d.band);
    e["unique_nouns"] = d.unique_nouns;
    e["noun_tokens"] = d.noun_tokens;
    per_domain[domain] = std::move(e);
  }
  j["per_domain"] = std::move(per_domain);
  ordered_json per_mode = ordered_json::object();
  for (const auto& [mode, m] : r.per_mode) {
    ordered_json e;
    e["verb_div"] = m.verb_div;
    e["band"] = band_to_string(m.band);
    e["unique_verbs"] = m.unique_verbs;
    e["qa_pairs"] = m.qa_pairs;
    per_mode[mode] = std::move(e);
  }
  j["per_mode"] = std::move(per_mode);
  j["total_samples"] = r.total_samples;
  j["total_noun_tokens"] = r.total_noun_tokens;
  j["total_verb_tokens"] = r.total_verb_tokens;
  return j;
}

std::string diversity_report_table(const DiversityReport& r) {
  std::string out;
  char line[128];
  std::snprintf(line, sizeof(line), "%-12s %12s %-10s %8s %8s\n", "domain",
                "object_div", "band", "uniq", "tokens");
  out += line;
  for (const auto& [domain, d] : r.per_domain) {
    std::snprintf(line, sizeof(line), "%-12s %12.2f %-10s %8llu %8llu\n",
                  domain.c_str(), d.object_div,
                  std::string(band_to_string(d.band)).c_str(),
                  static_cast<unsigned long long>(d.unique_nouns),
                  static_cast<unsigned long long>(d.noun_tokens));
    out += line;
  }
  out += "\n";
  std::snprintf(line, sizeof(line), "%-12s %12s %-10s %8s %8s\n", "mode",
                "verb_div", "band", "uniq", "pairs");
  out += line;
  for (const auto& [mode, m] : r.per_mode) {
    std::snprintf(line, sizeof(line), "%-12s %12.2f %-10s %8llu %8llu\n",
                  mode.c_str(), m.verb_div,
                  std::string(band_to_string(m.band)).c_str(),
                  static_cast<unsigned long long>(m.unique_verbs),
                  static_cast<unsigned long long>(m.qa_pairs));
    out += line;
  }
  return out;
}

}  // namespace e2e
