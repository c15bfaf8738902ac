#include "fusedec/corpus_extract.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <sstream>

#include "fusedec/util.hpp"

namespace fusedec {

namespace {

// Array values are double-quoted; \" and \\ are unescaped, any other
// backslash is kept literally so regex escapes can be written directly.
std::vector<std::string> parse_string_array(const std::string& text, const std::string& where) {
  std::vector<std::string> out;
  size_t i = 0;
  auto skip_ws = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  skip_ws();
  if (i >= text.size() || text[i] != '[') throw DataError(where + ": expected '['");
  ++i;
  skip_ws();
  if (i < text.size() && text[i] == ']') return out;
  while (true) {
    skip_ws();
    if (i >= text.size() || text[i] != '"') throw DataError(where + ": expected '\"'");
    ++i;
    std::string value;
    while (i < text.size() && text[i] != '"') {
      if (text[i] == '\\' && i + 1 < text.size() &&
          (text[i + 1] == '"' || text[i + 1] == '\\')) {
        value += text[i + 1];
        i += 2;
      } else {
        value += text[i];
        ++i;
      }
    }
    if (i >= text.size()) throw DataError(where + ": unterminated string");
    ++i;  // closing quote
    out.push_back(std::move(value));
    skip_ws();
    if (i < text.size() && text[i] == ',') {
      ++i;
      continue;
    }
    if (i < text.size() && text[i] == ']') return out;
    throw DataError(where + ": expected ',' or ']'");
  }
}

std::regex compile_pattern(const std::string& text, const std::string& where) {
  std::string body = text;
  auto flags = std::regex::ECMAScript;
  if (body.rfind("(?i)", 0) == 0) {
    flags |= std::regex::icase;
    body = body.substr(4);
  }
  try {
    return std::regex(body, flags);
  } catch (const std::regex_error& e) {
    throw DataError(where + ": invalid regex '" + text + "': " + e.what());
  }
}

}  // namespace

PatternSet parse_patterns_stream(std::istream& in, const std::string& name) {
  PatternSet set;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string where = name + ":" + std::to_string(line_no);
    size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) throw DataError(where + ": expected 'key = value'");
    std::string key = line.substr(start, eq - start);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    std::string value = line.substr(eq + 1);
    if (key == "language") {
      auto parts = split_ws(value);
      if (parts.size() != 1) throw DataError(where + ": language must be one tag");
      set.language = parts[0];
      if (set.language.size() >= 2 && set.language.front() == '"' && set.language.back() == '"') {
        set.language = set.language.substr(1, set.language.size() - 2);
      }
    } else if (key == "f") {
      set.f_texts = parse_string_array(value, where);
    } else if (key == "m") {
      set.m_texts = parse_string_array(value, where);
    } else {
      throw DataError(where + ": unknown key '" + key + "'");
    }
  }
  if (set.f_texts.empty()) throw DataError(name + ": no feminine patterns");
  if (set.m_texts.empty()) throw DataError(name + ": no masculine patterns");
  for (size_t i = 0; i < set.f_texts.size(); ++i) {
    set.f_patterns.push_back(compile_pattern(set.f_texts[i], name + ": f pattern #" + std::to_string(i + 1)));
  }
  for (size_t i = 0; i < set.m_texts.size(); ++i) {
    set.m_patterns.push_back(compile_pattern(set.m_texts[i], name + ": m pattern #" + std::to_string(i + 1)));
  }
  return set;
}

PatternSet load_patterns(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  return parse_patterns_stream(in, path);
}

namespace {

bool matches_any(const std::string& line, const std::vector<std::regex>& patterns) {
  for (const auto& re : patterns) {
    if (std::regex_search(line, re)) return true;
  }
  return false;
}

}  // namespace

ExtractCounts extract(std::istream& input, const PatternSet& patterns, std::ostream& out_f,
                      std::ostream& out_m) {
  ExtractCounts counts;
  std::string line;
  size_t line_no = 0;
  while (std::getline(input, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool f = matches_any(line, patterns.f_patterns);
    bool m = matches_any(line, patterns.m_patterns);
    if (f && m) {
      ++counts.ambiguous;
    } else if (f) {
      out_f << line << '\n';
      ++counts.f;
    } else if (m) {
      out_m << line << '\n';
      ++counts.m;
    } else {
      ++counts.unmatched;
    }
  }
  if (input.bad()) throw DataError("read error near line " + std::to_string(line_no));
  if (!out_f || !out_m) throw DataError("write error at line " + std::to_string(line_no));
  return counts;
}

namespace {

void count_side(std::istream& in, int64_t& sentences, int64_t& words) {
  std::string line;
  while (std::getline(in, line)) {
    ++sentences;
    words += static_cast<int64_t>(split_ws(line).size());
  }
}

}  // namespace

CorpusStats corpus_stats(std::istream& f_corpus, std::istream& m_corpus) {
  CorpusStats stats;
  count_side(f_corpus, stats.sentences_f, stats.words_f);
  count_side(m_corpus, stats.sentences_m, stats.words_m);
  return stats;
}

std::string corpus_stats_text(const CorpusStats& stats) {
  std::ostringstream out;
  out << "       M          F\n";
  out << "Sent.  " << stats.sentences_m << "  " << stats.sentences_f << "\n";
  out << "Words  " << stats.words_m << "  " << stats.words_f << "\n";
  return out.str();
}

}  // namespace fusedec
