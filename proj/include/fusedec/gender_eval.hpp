#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fusedec {

enum class Gender { F, M };

char gender_char(Gender g);
Gender opposite(Gender g);

// A speaker-dependent word annotated in the reference: its correct gendered
// form, the opposite-gender form, and the gender label. Single-token forms
// only.
struct AnnotatedTerm {
  std::string correct_form;
  std::string wrong_form;
  Gender gender = Gender::F;
};

struct AnnotatedSentence {
  std::string id;
  std::string source;
  std::string reference;
  std::vector<AnnotatedTerm> terms;  // may be empty: sentence counts for BLEU only
};

using AnnotatedEvalSet = std::vector<AnnotatedSentence>;

// MUSTSHE-LIKE v1: UTF-8 TSV with columns id, source, reference, terms;
// terms is a semicolon-separated list of correct|wrong|G triples.
AnnotatedEvalSet parse_eval_set(const std::string& path);
AnnotatedEvalSet parse_eval_set_stream(std::istream& in, const std::string& name);
void write_eval_set(const AnnotatedEvalSet& set, std::ostream& out);
void save_eval_set(const AnnotatedEvalSet& set, const std::string& path);

struct GenderCounts {
  int64_t total = 0;
  int64_t correct = 0;
  int64_t wrong = 0;

  int64_t measurable() const { return correct + wrong; }
  std::optional<double> coverage() const;  // measurable / total
  std::optional<double> accuracy() const;  // correct / measurable
};

struct GenderScores {
  GenderCounts f;
  GenderCounts m;

  const GenderCounts& of(Gender g) const { return g == Gender::F ? f : m; }
  GenderCounts& of(Gender g) { return g == Gender::F ? f : m; }
  // Accuracy pooled over both genders' measurable terms, the tuning signal.
  std::optional<double> pooled_accuracy() const;
};

// Term coverage and gender accuracy. Hypothesis tokens are lowercased and
// stripped of boundary punctuation; each token is consumable by at most one
// term per sentence. A term whose correct form appears counts as correct,
// else one with the wrong form as wrong, else it is unmeasured.
GenderScores score_gender(const std::vector<std::string>& hypotheses,
                          const AnnotatedEvalSet& eval_set);

// Normalized matching tokens of one hypothesis (exposed for tests).
std::vector<std::string> matching_tokens(const std::string& text);

// 2ab / (a + b); zero when both are zero. Inputs share a 0-100 scale.
double harmonic_mean(double a, double b);

}  // namespace fusedec
