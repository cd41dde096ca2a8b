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

#ifndef E2E_DIVERSITY_HPP_
#define E2E_DIVERSITY_HPP_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "e2e/lexicon.hpp"
#include "e2e/validation.hpp"
#include "json.hpp"

namespace e2e {

enum class Band { kLow, kMedium, kHigh, kVeryHigh };

std::string_view band_to_string(Band b);

// Lower-inclusive bins. Object scores: <200 low, [200,300) medium,
// [300,350) high, >=350 very high. Verb scores: <80 low, [80,120) medium,
// [120,160) high, >=160 very high.
Band bin_object_div(double score);
Band bin_verb_div(double score);

enum class AnalyzeFields { kBoth, kQuestion, kAnswer };

std::string_view analyze_fields_to_string(AnalyzeFields f);
AnalyzeFields analyze_fields_from_string(std::string_view s);

// ObjectDiv: unique noun lemmas per noun token, x1000, over one domain's
// samples. Throws DiversityError(kNoNounTokens) when no noun token occurs.
double object_div(const std::vector<QASample>& samples, const Lexicon& lex,
                  AnalyzeFields fields = AnalyzeFields::kBoth);

// VerbDiv: unique verb lemmas per QA pair, x1000, over one mode's samples.
// The denominator is the pair count, not a token count. Throws
// DiversityError(kEmptyMode) on an empty sample list.
double verb_div(const std::vector<QASample>& samples, const Lexicon& lex,
                AnalyzeFields fields = AnalyzeFields::kBoth);

// Streaming counts; merge is associative and order-independent, so shard
// partials reduce to the single-pass result.
struct DiversityAccumulator {
  std::map<std::string, std::set<std::string>> domain_noun_lemmas;
  std::map<std::string, uint64_t> domain_noun_tokens;
  std::map<std::string, std::set<std::string>> mode_verb_lemmas;
  std::map<std::string, uint64_t> mode_pairs;
  uint64_t total_samples = 0;
  uint64_t total_noun_tokens = 0;
  uint64_t total_verb_tokens = 0;

  void add(const QASample& sample, const Lexicon& lex, AnalyzeFields fields);
  void merge(const DiversityAccumulator& other);
};

struct DomainDiversity {
  double object_div = 0.0;
  Band band = Band::kLow;
  uint64_t unique_nouns = 0;
  uint64_t noun_tokens = 0;
};

struct ModeDiversity {
  double verb_div = 0.0;
  Band band = Band::kLow;
  uint64_t unique_verbs = 0;
  uint64_t qa_pairs = 0;
};

struct DiversityReport {
  std::map<std::string, DomainDiversity> per_domain;
  std::map<std::string, ModeDiversity> per_mode;
  uint64_t total_samples = 0;
  uint64_t total_noun_tokens = 0;
  uint64_t total_verb_tokens = 0;
};

// Domains without noun tokens and modes without samples are omitted rather
// than reported as errors; the standalone metric functions stay strict.
DiversityReport finalize_report(const DiversityAccumulator& acc);

nlohmann::ordered_json diversity_report_to_json(const DiversityReport& r);

// Aligned fixed-width table with one row per domain and per mode.
std::string diversity_report_table(const DiversityReport& r);

}  // namespace e2e

#endif  // E2E_DIVERSITY_HPP_
