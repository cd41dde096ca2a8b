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

#include "e2e/validation.hpp"

#include <algorithm>
#include <exception>
#include <limits>
#include <map>
#include <set>
#include <utility>

#include "e2e/errors.hpp"
#include "e2e/text.hpp"

namespace e2e {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

bool is_contact_lemma(std::string_view lemma) {
  return lemma == "touch" || lemma == "hold" || lemma == "grip";
}

const Lexicon& gate_lexicon(const GateOptions& opts) {
  return opts.lexicon ? *opts.lexicon : bundled_lexicon();
}

// Token stream annotated with lemma, lexicon class, sentence index, and
// segment index (segments additionally break at commas).
struct Word {
  Token tok;
  std::string lemma;
  size_t sentence = 0;
  size_t segment = 0;
  bool noun = false;
  bool verb = false;
};

bool sentence_break(char c) {
  return c == '.' || c == ';' || c == '?' || c == '!' || c == ':';
}

std::vector<Word> analyze(const std::string& text, const Lexicon& lex) {
  std::vector<Word> out;
  size_t sentence = 0;
  size_t segment = 0;
  size_t cursor = 0;
  for (Token& tok : tokenize(text)) {
    for (; cursor < tok.begin; ++cursor) {
      if (sentence_break(text[cursor])) ++sentence;
      if (sentence_break(text[cursor]) || text[cursor] == ',') ++segment;
    }
    Word w;
    w.lemma = lex.lemmatize(tok.text);
    w.noun = lex.is_noun_lemma(w.lemma);
    w.verb = lex.is_verb_lemma(w.lemma);
    w.sentence = sentence;
    w.segment = segment;
    w.tok = std::move(tok);
    out.push_back(std::move(w));
  }
  return out;
}

Violation make_violation(ViolationCode code, std::string message, size_t begin,
                         size_t end, TextTarget target = TextTarget::kAnswer) {
  Violation v;
  v.code = code;
  v.message = std::move(message);
  v.begin = begin;
  v.end = end;
  v.target = target;
  return v;
}

void scan_placeholders(const std::string& text, TextTarget target,
                       std::vector<Violation>* out) {
  for (size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{') continue;
    size_t close = text.find('}', i);
    if (close == std::string::npos) break;
    std::string name = text.substr(i, close - i + 1);
    out->push_back(make_violation(
        ViolationCode::kPlaceholderUnresolved,
        "unresolved placeholder " + name + " in " +
            (target == TextTarget::kQuestion ? "question" : "answer"),
        i, close + 1, target));
    i = close;
  }
}

std::set<std::string> event_verb_lemmas(const EvidenceRecord& ev,
                                        const Lexicon& lex) {
  std::set<std::string> out;
  for (const InteractionEvent& e : ev.events)
    out.insert(lex.lemmatize(ascii_lower(e.verb)));
  return out;
}

// Does any event on this object lemma assert contact?
bool object_has_contact(const EvidenceRecord& ev, const Lexicon& lex,
                        std::string_view object_lemma) {
  for (const InteractionEvent& e : ev.events) {
    if (lex.lemmatize(ascii_lower(e.object)) == object_lemma && e.contact)
      return true;
  }
  return false;
}

bool object_has_events(const EvidenceRecord& ev, const Lexicon& lex,
                       std::string_view object_lemma) {
  for (const InteractionEvent& e : ev.events) {
    if (lex.lemmatize(ascii_lower(e.object)) == object_lemma) return true;
  }
  return false;
}

// Object a contact assertion at `pos` talks about: the next lexicon noun in
// the same comma-free segment and before any further verb, else the nearest
// preceding lexicon noun anywhere (this also resolves "holds it" to the
// object last named). The segment bound keeps the verb from capturing an
// object that belongs to the next clause.
std::optional<std::string> bind_contact_object(const std::vector<Word>& words,
                                               size_t pos) {
  for (size_t i = pos + 1;
       i < words.size() && words[i].segment == words[pos].segment; ++i) {
    if (words[i].noun) return words[i].lemma;
    if (words[i].verb) break;
  }
  for (size_t i = pos; i-- > 0;) {
    if (words[i].noun) return words[i].lemma;
  }
  return std::nullopt;
}

bool is_hand_token(const Word& w) {
  return w.tok.text == "hand" || w.tok.text == "hands";
}

bool is_side_token(const Word& w) {
  return w.tok.text == "left" || w.tok.text == "right";
}

struct Clause {
  enum class Marker { kDefault, kAfter, kBefore, kWhile };

  Marker marker = Marker::kDefault;
  size_t first = 0;  // word index range [first, last)
  size_t last = 0;
};

Clause::Marker marker_for(std::string_view connector) {
  if (connector == "after") return Clause::Marker::kAfter;
  if (connector == "before") return Clause::Marker::kBefore;
  if (connector == "while") return Clause::Marker::kWhile;
  return Clause::Marker::kDefault;
}

// Clause boundaries sit at connector words and at punctuation. The connector
// word itself belongs to no clause; it only sets the next clause's marker.
std::vector<Clause> split_clauses(const std::string& text,
                                  const std::vector<Word>& words,
                                  const std::set<std::string>& connectors) {
  std::vector<Clause> out;
  Clause current;
  bool open = false;
  auto close = [&](size_t end) {
    if (open && end > current.first) {
      current.last = end;
      out.push_back(current);
    }
    open = false;
  };
  Clause::Marker pending = Clause::Marker::kDefault;
  for (size_t i = 0; i < words.size(); ++i) {
    if (connectors.count(words[i].tok.text) != 0) {
      close(i);
      pending = marker_for(words[i].tok.text);
      continue;
    }
    if (open) {
      // Punctuation between the previous word and this one splits too.
      size_t prev_end = words[i - 1].tok.end;
      bool punct = false;
      for (size_t p = prev_end; p < words[i].tok.begin; ++p) {
        char c = text[p];
        if (c == ',' || sentence_break(c)) {
          punct = true;
          break;
        }
      }
      if (punct) {
        close(i);
        pending = Clause::Marker::kDefault;
      }
    }
    if (!open) {
      current = Clause{};
      current.marker = pending;
      current.first = i;
      open = true;
      pending = Clause::Marker::kDefault;
    }
  }
  close(words.size());
  return out;
}

struct MatchedClause {
  Clause clause;
  std::string verb;    // lemma
  std::string object;  // lemma
};

// Maps a clause to an event pattern: its first lexicon verb plus the first
// lexicon noun after that verb (a bare "it" falls back to the object most
// recently named anywhere before the clause's verb).
std::optional<MatchedClause> match_clause(const Clause& c,
                                          const std::vector<Word>& words) {
  size_t verb_at = c.last;
  for (size_t i = c.first; i < c.last; ++i) {
    if (words[i].verb) {
      verb_at = i;
      break;
    }
  }
  if (verb_at == c.last) return std::nullopt;
  std::string object;
  for (size_t i = verb_at + 1; i < c.last; ++i) {
    if (words[i].noun) {
      object = words[i].lemma;
      break;
    }
  }
  if (object.empty()) {
    bool has_it = false;
    for (size_t i = verb_at + 1; i < c.last; ++i) {
      if (words[i].tok.text == "it") {
        has_it = true;
        break;
      }
    }
    if (has_it) {
      for (size_t i = verb_at; i-- > 0;) {
        if (words[i].noun) {
          object = words[i].lemma;
          break;
        }
      }
    }
  }
  if (object.empty()) return std::nullopt;
  return MatchedClause{c, words[verb_at].lemma, object};
}

}  // namespace

bool grounding_whitelisted(std::string_view lemma) {
  return lemma == "person" || lemma == "hand" || lemma == "hands" ||
         lemma == "scene" || lemma == "table" || lemma == "camera" ||
         lemma == "view";
}

std::vector<Violation> check_placeholders(const QADraft& draft) {
  std::vector<Violation> out;
  scan_placeholders(draft.question, TextTarget::kQuestion, &out);
  scan_placeholders(draft.answer, TextTarget::kAnswer, &out);
  return out;
}

std::vector<Violation> check_evidence_grounding(const QADraft& draft,
                                                const EvidenceRecord& ev,
                                                const GateOptions& opts) {
  const Lexicon& lex = gate_lexicon(opts);
  const std::vector<Word> words = analyze(draft.answer, lex);
  const std::set<std::string> verbs = event_verb_lemmas(ev, lex);
  std::vector<Violation> out;

  for (const Word& w : words) {
    if (w.noun && !grounding_whitelisted(w.lemma) &&
        ev.object_lemmas.count(w.lemma) == 0) {
      out.push_back(make_violation(
          ViolationCode::kGroundingUnknownObject,
          "object '" + w.lemma + "' is not part of this clip's evidence",
          w.tok.begin, w.tok.end));
    }
    // Contact verbs are judged by the contact-state rule below, not here.
    if (w.verb && !is_contact_lemma(w.lemma) && verbs.count(w.lemma) == 0) {
      out.push_back(make_violation(
          ViolationCode::kGroundingUnknownAction,
          "action '" + w.lemma + "' does not match any event in this clip",
          w.tok.begin, w.tok.end));
    }
  }

  for (size_t i = 0; i < words.size(); ++i) {
    const bool contact_verb = words[i].verb && is_contact_lemma(words[i].lemma);
    const bool contact_bigram = words[i].tok.text == "contact" && i > 0 &&
                                words[i - 1].tok.text == "in";
    if (!contact_verb && !contact_bigram) continue;
    std::optional<std::string> object = bind_contact_object(words, i);
    if (!object) continue;
    if (!object_has_events(ev, lex, *object)) continue;
    if (!object_has_contact(ev, lex, *object)) {
      out.push_back(make_violation(
          ViolationCode::kGroundingFalseContact,
          "contact with '" + *object +
              "' is asserted but every event on it has contact=false",
          words[i].tok.begin, words[i].tok.end));
    }
  }
  return out;
}

std::vector<Violation> check_egocentric_consistency(const QADraft& draft,
                                                    const EvidenceRecord& ev,
                                                    const GateOptions& opts) {
  const Lexicon& lex = gate_lexicon(opts);
  const std::vector<Word> words = analyze(draft.answer, lex);
  std::vector<Violation> out;

  for (size_t i = 0; i < words.size(); ++i) {
    if (!is_side_token(words[i])) continue;
    const bool adjacent = (i > 0 && is_hand_token(words[i - 1])) ||
                          (i + 1 < words.size() && is_hand_token(words[i + 1]));
    if (!adjacent) continue;
    const Hand h =
        words[i].tok.text == "left" ? Hand::kLeft : Hand::kRight;
    if (!ev.visible_hands.contains(h)) {
      size_t begin = words[i].tok.begin;
      size_t end = words[i].tok.end;
      if (i + 1 < words.size() && is_hand_token(words[i + 1]))
        end = words[i + 1].tok.end;
      else if (i > 0 && is_hand_token(words[i - 1]))
        begin = words[i - 1].tok.begin;
      out.push_back(make_violation(
          ViolationCode::kEgoUnseenHand,
          "the " + words[i].tok.text + " hand is named but not visible in "
          "this clip",
          begin, end));
    }
  }

  // Attribution: a lexicon verb with an object, owned by the nearest side
  // word earlier in the same sentence. Two different single hands on the
  // same (verb, object) pattern contradict each other.
  struct Claim {
    bool left = false;
    bool right = false;
    size_t begin = 0;
    size_t end = 0;
  };
  std::map<std::pair<std::string, std::string>, Claim> claims;
  std::vector<Violation> contradictions;
  for (size_t i = 0; i < words.size(); ++i) {
    if (!words[i].verb) continue;
    std::string object;
    for (size_t k = i + 1;
         k < words.size() && words[k].sentence == words[i].sentence; ++k) {
      if (words[k].noun) {
        object = words[k].lemma;
        break;
      }
    }
    if (object.empty()) {
      bool has_it = false;
      for (size_t k = i + 1;
           k < words.size() && words[k].sentence == words[i].sentence; ++k) {
        if (words[k].tok.text == "it") {
          has_it = true;
          break;
        }
      }
      if (has_it) {
        for (size_t k = i; k-- > 0;) {
          if (words[k].noun) {
            object = words[k].lemma;
            break;
          }
        }
      }
    }
    if (object.empty()) continue;
    std::optional<Hand> hand;
    for (size_t k = i; k-- > 0;) {
      if (words[k].sentence != words[i].sentence) break;
      if (is_side_token(words[k]) &&
          ((k > 0 && is_hand_token(words[k - 1])) ||
           (k + 1 < words.size() && is_hand_token(words[k + 1])))) {
        hand = words[k].tok.text == "left" ? Hand::kLeft : Hand::kRight;
        break;
      }
    }
    if (!hand) continue;
    Claim& c = claims[{words[i].lemma, object}];
    const bool was_conflicted = c.left && c.right;
    if (*hand == Hand::kLeft) c.left = true;
    if (*hand == Hand::kRight) c.right = true;
    if (!was_conflicted && c.left && c.right) {
      contradictions.push_back(make_violation(
          ViolationCode::kEgoHandContradiction,
          "'" + words[i].lemma + " the " + object +
              "' is attributed to both the left and the right hand",
          words[i].tok.begin, words[i].tok.end));
    }
  }
  out.insert(out.end(), contradictions.begin(), contradictions.end());
  return out;
}

std::vector<Violation> check_temporal_logic(const QADraft& draft,
                                            const EvidenceRecord& ev,
                                            VqaMode mode,
                                            const GateOptions& opts) {
  if (!mode_temporal_sensitive(mode)) return {};
  const Lexicon& lex = gate_lexicon(opts);
  const std::vector<Word> words = analyze(draft.answer, lex);
  const std::set<std::string> connectors(opts.connectors.begin(),
                                         opts.connectors.end());
  std::vector<Violation> out;

  bool has_connector = false;
  for (const Word& w : words) {
    if (connectors.count(w.tok.text) != 0) {
      has_connector = true;
      break;
    }
  }
  if (!has_connector) {
    out.push_back(make_violation(
        ViolationCode::kTemporalNoConnector,
        "temporal-sensitive answer has no ordering connector", 0,
        draft.answer.size()));
  }

  auto min_t0 = [&](const MatchedClause& m) {
    double best = std::numeric_limits<double>::infinity();
    for (const InteractionEvent& e : ev.events) {
      if (lex.lemmatize(ascii_lower(e.verb)) == m.verb &&
          lex.lemmatize(ascii_lower(e.object)) == m.object)
        best = std::min(best, e.t0);
    }
    return best;
  };
  auto max_t0 = [&](const MatchedClause& m) {
    double best = -std::numeric_limits<double>::infinity();
    for (const InteractionEvent& e : ev.events) {
      if (lex.lemmatize(ascii_lower(e.verb)) == m.verb &&
          lex.lemmatize(ascii_lower(e.object)) == m.object)
        best = std::max(best, e.t0);
    }
    return best;
  };
  auto exists = [&](const MatchedClause& m) {
    return min_t0(m) != std::numeric_limits<double>::infinity();
  };

  // Matched clauses in narrative order. A clause with no backing event is
  // paraphrase, not contradiction: it drops out entirely, and constraints
  // form across it between its surviving neighbours. Only the first mention
  // of each (verb, object) pattern sequences; a restatement of an event the
  // narration already placed is commentary, not a new ordering claim.
  std::vector<MatchedClause> matched;
  std::set<std::pair<std::string, std::string>> seen;
  for (const Clause& c : split_clauses(draft.answer, words, connectors)) {
    if (auto m = match_clause(c, words)) {
      if (exists(*m) && seen.insert({m->verb, m->object}).second) {
        matched.push_back(std::move(*m));
      }
    }
  }

  for (size_t i = 0; i + 1 < matched.size(); ++i) {
    const MatchedClause& a = matched[i];
    const MatchedClause& b = matched[i + 1];
    if (a.clause.marker == Clause::Marker::kWhile ||
        b.clause.marker == Clause::Marker::kWhile)
      continue;
    // Narrative order claims a-then-b; "Y after X" and "before X, Y" invert.
    const bool invert = b.clause.marker == Clause::Marker::kAfter ||
                        a.clause.marker == Clause::Marker::kBefore;
    const MatchedClause& first = invert ? b : a;
    const MatchedClause& second = invert ? a : b;
    if (min_t0(first) <= max_t0(second)) continue;  // satisfiable
    const Word& anchor = words[b.clause.first];
    const Word& last = words[b.clause.last - 1];
    out.push_back(make_violation(
        ViolationCode::kTemporalOrder,
        "answer puts '" + first.verb + " the " + first.object + "' before '" +
            second.verb + " the " + second.object +
            "' but the clip orders them the other way",
        anchor.tok.begin, last.tok.end));
  }
  return out;
}

ValidationReport validate(const QADraft& draft, const EvidenceRecord& ev,
                          VqaMode mode, const GateOptions& opts) {
  ValidationReport report;
  report.clip_id = draft.clip_id;
  report.attempt = draft.attempt;
  auto append = [&report](std::vector<Violation> v) {
    report.violations.insert(report.violations.end(),
                             std::make_move_iterator(v.begin()),
                             std::make_move_iterator(v.end()));
  };
  append(check_placeholders(draft));
  append(check_evidence_grounding(draft, ev, opts));
  append(check_egocentric_consistency(draft, ev, opts));
  append(check_temporal_logic(draft, ev, mode, opts));
  report.passed = report.violations.empty();
  return report;
}

LoopResult run_loop(const AnnotationTask& task, VqaMode mode,
                    const Template& tmpl, const Engine& engine, uint64_t seed,
                    int max_retries, const GateOptions& opts) {
  LoopResult result;
  std::vector<ValidationReport> reports;
  std::vector<Violation> prior;
  std::exception_ptr last_engine_error;
  bool last_attempt_was_transport = false;

  AnnotationRequest req;
  req.clip_id = task.clip.clip_id;
  req.mode = mode;
  req.tmpl = tmpl;
  req.evidence = task.evidence;
  req.episode_metadata = task.episode_metadata;
  req.frame_refs = task.frame_refs;
  req.seed = seed;

  const int attempts = max_retries + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    req.prior_errors = prior;
    QADraft draft;
    try {
      draft = engine.annotate(req, attempt);
      last_attempt_was_transport = false;
    } catch (const EngineError&) {
      // Transport failures consume attempts from the same retry budget.
      last_engine_error = std::current_exception();
      last_attempt_was_transport = true;
      continue;
    }
    draft.attempt = attempt;
    result.drafts.push_back(draft);
    ValidationReport report = validate(draft, task.evidence, mode, opts);
    if (report.passed) {
      QASample sample;
      sample.clip_id = task.clip.clip_id;
      sample.frame_refs = task.frame_refs;
      sample.mode = mode;
      sample.template_id = tmpl.template_id;
      sample.question = draft.question;
      sample.answer = draft.answer;
      sample.engine_id = draft.engine_id;
      sample.attempt = attempt;
      sample.validation = report;
      sample.seed = seed;
      sample.domain = task.domain;
      sample.t_start = task.clip.t_start;
      sample.t_end = task.clip.t_end;
      result.sample = std::move(sample);
      return result;
    }
    prior = report.violations;
    reports.push_back(std::move(report));
  }

  if (last_attempt_was_transport && last_engine_error) {
    std::rethrow_exception(last_engine_error);
  }

  RejectedRecord rejected;
  rejected.clip_id = task.clip.clip_id;
  rejected.mode = mode;
  rejected.template_id = tmpl.template_id;
  rejected.drafts = result.drafts;
  rejected.reports = std::move(reports);
  result.rejected = std::move(rejected);
  return result;
}

nlohmann::ordered_json sample_to_json(const QASample& s) {
  ordered_json j;
  j["clip_id"] = s.clip_id;
  j["frame_refs"] = s.frame_refs;
  j["mode"] = mode_to_string(s.mode);
  j["template_id"] = s.template_id;
  j["question"] = s.question;
  j["answer"] = s.answer;
  j["engine_id"] = s.engine_id;
  j["attempt"] = s.attempt;
  ordered_json validation;
  validation["passed"] = s.validation.passed;
  ordered_json violations = ordered_json::array();
  for (const Violation& v : s.validation.violations)
    violations.push_back(violation_to_json(v));
  validation["violations"] = std::move(violations);
  j["validation"] = std::move(validation);
  j["seed"] = s.seed;
  j["domain"] = domain_to_string(s.domain);
  j["t_start"] = s.t_start;
  j["t_end"] = s.t_end;
  return j;
}

QASample sample_from_json(const nlohmann::json& j) {
  QASample s;
  s.clip_id = j.at("clip_id").get<std::string>();
  s.frame_refs = j.at("frame_refs").get<std::vector<std::string>>();
  s.mode = mode_from_string(j.at("mode").get<std::string>());
  s.template_id = j.at("template_id").get<std::string>();
  s.question = j.at("question").get<std::string>();
  s.answer = j.at("answer").get<std::string>();
  s.engine_id = j.at("engine_id").get<std::string>();
  s.attempt = j.at("attempt").get<int>();
  s.validation.clip_id = s.clip_id;
  s.validation.attempt = s.attempt;
  s.validation.passed = j.at("validation").at("passed").get<bool>();
  for (const json& v : j.at("validation").at("violations"))
    s.validation.violations.push_back(violation_from_json(v));
  s.seed = j.at("seed").get<uint64_t>();
  s.domain = domain_from_string(j.at("domain").get<std::string>());
  s.t_start = j.at("t_start").get<double>();
  s.t_end = j.at("t_end").get<double>();
  return s;
}

nlohmann::ordered_json rejected_to_json(const RejectedRecord& r) {
  ordered_json j;
  j["clip_id"] = r.clip_id;
  j["mode"] = mode_to_string(r.mode);
  j["template_id"] = r.template_id;
  ordered_json drafts = ordered_json::array();
  for (const QADraft& d : r.drafts) drafts.push_back(draft_to_json(d));
  j["drafts"] = std::move(drafts);
  ordered_json reports = ordered_json::array();
  for (const ValidationReport& rep : r.reports)
    reports.push_back(report_to_json(rep));
  j["reports"] = std::move(reports);
  return j;
}

RejectedRecord rejected_from_json(const nlohmann::json& j) {
  RejectedRecord r;
  r.clip_id = j.at("clip_id").get<std::string>();
  r.mode = mode_from_string(j.at("mode").get<std::string>());
  r.template_id = j.at("template_id").get<std::string>();
  for (const json& d : j.at("drafts")) r.drafts.push_back(draft_from_json(d));
  for (const json& rep : j.at("reports"))
    r.reports.push_back(report_from_json(rep));
  return r;
}

}  // namespace e2e
