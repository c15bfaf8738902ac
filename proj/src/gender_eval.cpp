#include "fusedec/gender_eval.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "fusedec/util.hpp"

namespace fusedec {

char gender_char(Gender g) { return g == Gender::F ? 'F' : 'M'; }

Gender opposite(Gender g) { return g == Gender::F ? Gender::M : Gender::F; }

std::optional<double> GenderCounts::coverage() const {
  if (total == 0) return std::nullopt;
  return static_cast<double>(measurable()) / static_cast<double>(total);
}

std::optional<double> GenderCounts::accuracy() const {
  if (measurable() == 0) return std::nullopt;
  return static_cast<double>(correct) / static_cast<double>(measurable());
}

std::optional<double> GenderScores::pooled_accuracy() const {
  int64_t measurable = f.measurable() + m.measurable();
  if (measurable == 0) return std::nullopt;
  return static_cast<double>(f.correct + m.correct) / static_cast<double>(measurable);
}

namespace {

std::string normalize_token(std::string_view tok) {
  size_t begin = 0;
  size_t end = tok.size();
  while (begin < end && std::ispunct(static_cast<unsigned char>(tok[begin]))) ++begin;
  while (end > begin && std::ispunct(static_cast<unsigned char>(tok[end - 1]))) --end;
  std::string out;
  out.reserve(end - begin);
  for (size_t i = begin; i < end; ++i) {
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(tok[i])));
  }
  return out;
}

std::vector<std::string> split_on(const std::string& text, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t pos = text.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

std::vector<std::string> matching_tokens(const std::string& text) {
  std::vector<std::string> out;
  for (const auto& tok : split_ws(text)) {
    std::string norm = normalize_token(tok);
    if (!norm.empty()) out.push_back(std::move(norm));
  }
  return out;
}

GenderScores score_gender(const std::vector<std::string>& hypotheses,
                          const AnnotatedEvalSet& eval_set) {
  if (hypotheses.size() != eval_set.size()) {
    throw std::invalid_argument("hypothesis count does not match eval set");
  }
  GenderScores scores;
  for (size_t i = 0; i < eval_set.size(); ++i) {
    std::unordered_map<std::string, int> available;
    for (const auto& tok : matching_tokens(hypotheses[i])) available[tok] += 1;
    for (const auto& term : eval_set[i].terms) {
      GenderCounts& counts = scores.of(term.gender);
      counts.total += 1;
      auto consume = [&available](const std::string& form) {
        auto it = available.find(form);
        if (it == available.end() || it->second == 0) return false;
        it->second -= 1;
        return true;
      };
      if (consume(normalize_token(term.correct_form))) {
        counts.correct += 1;
      } else if (consume(normalize_token(term.wrong_form))) {
        counts.wrong += 1;
      }
    }
  }
  return scores;
}

double harmonic_mean(double a, double b) {
  if (a < 0.0 || b < 0.0) throw std::invalid_argument("harmonic mean needs nonnegative inputs");
  if (a + b == 0.0) return 0.0;
  return 2.0 * a * b / (a + b);
}

// ---------------------------------------------------------------------------
// MUSTSHE-LIKE v1 eval set files

namespace {

Gender parse_gender_label(const std::string& text, const std::string& where) {
  if (text == "F") return Gender::F;
  if (text == "M") return Gender::M;
  throw DataError(where + ": bad gender label '" + text + "'");
}

void validate_form(const std::string& form, const std::string& where) {
  if (form.empty()) throw DataError(where + ": empty term form");
  for (char c : form) {
    if (c == '|' || c == ';' || c == '\t' || std::isspace(static_cast<unsigned char>(c))) {
      throw DataError(where + ": term form must be a single token without separators: '" +
                      form + "'");
    }
  }
}

}  // namespace

AnnotatedEvalSet parse_eval_set_stream(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(name + ": empty eval set file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "MUSTSHE-LIKE v1") throw DataError(name + ": bad eval set header");

  AnnotatedEvalSet set;
  std::set<std::string> seen_ids;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string where = name + ":" + std::to_string(line_no);
    auto cols = split_on(line, '\t');
    if (cols.size() != 4) {
      throw DataError(where + ": expected 4 tab-separated columns, got " +
                      std::to_string(cols.size()));
    }
    AnnotatedSentence sent;
    sent.id = cols[0];
    sent.source = cols[1];
    sent.reference = cols[2];
    if (sent.id.empty()) throw DataError(where + ": empty sentence id");
    if (!seen_ids.insert(sent.id).second) {
      throw DataError(where + ": duplicate sentence id '" + sent.id + "'");
    }
    if (!cols[3].empty()) {
      for (const auto& triple : split_on(cols[3], ';')) {
        auto parts = split_on(triple, '|');
        if (parts.size() != 3) {
          throw DataError(where + ": term must be correct|wrong|G, got '" + triple + "'");
        }
        AnnotatedTerm term;
        term.correct_form = parts[0];
        term.wrong_form = parts[1];
        validate_form(term.correct_form, where);
        validate_form(term.wrong_form, where);
        if (term.correct_form == term.wrong_form) {
          throw DataError(where + ": correct and wrong forms must differ");
        }
        term.gender = parse_gender_label(parts[2], where);
        sent.terms.push_back(std::move(term));
      }
    }
    set.push_back(std::move(sent));
  }
  return set;
}

AnnotatedEvalSet parse_eval_set(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  return parse_eval_set_stream(in, path);
}

void write_eval_set(const AnnotatedEvalSet& set, std::ostream& out) {
  out << "MUSTSHE-LIKE v1\n";
  for (const auto& sent : set) {
    if (sent.source.find('\t') != std::string::npos ||
        sent.reference.find('\t') != std::string::npos) {
      throw DataError("sentence text must not contain tabs: id " + sent.id);
    }
    out << sent.id << '\t' << sent.source << '\t' << sent.reference << '\t';
    for (size_t i = 0; i < sent.terms.size(); ++i) {
      const auto& term = sent.terms[i];
      validate_form(term.correct_form, "id " + sent.id);
      validate_form(term.wrong_form, "id " + sent.id);
      if (i) out << ';';
      out << term.correct_form << '|' << term.wrong_form << '|' << gender_char(term.gender);
    }
    out << '\n';
  }
}

void save_eval_set(const AnnotatedEvalSet& set, const std::string& path) {
  std::ostringstream out;
  write_eval_set(set, out);
  write_file(path, out.str());
}

}  // namespace fusedec
