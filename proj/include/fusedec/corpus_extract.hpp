#pragma once

#include <cstdint>
#include <iosfwd>
#include <regex>
#include <string>
#include <vector>

namespace fusedec {

// User-supplied regex sets marking first-person feminine/masculine cues.
// A pattern string starting with "(?i)" is compiled case-insensitively.
struct PatternSet {
  std::string language;
  std::vector<std::string> f_texts;
  std::vector<std::string> m_texts;
  std::vector<std::regex> f_patterns;
  std::vector<std::regex> m_patterns;
};

PatternSet load_patterns(const std::string& path);
PatternSet parse_patterns_stream(std::istream& in, const std::string& name);

struct ExtractCounts {
  int64_t f = 0;
  int64_t m = 0;
  int64_t ambiguous = 0;  // matched both genders
  int64_t unmatched = 0;
};

// Streams the corpus line by line: F-only matches go to out_f, M-only to
// out_m, lines matching both or neither are dropped. Order-preserving.
ExtractCounts extract(std::istream& input, const PatternSet& patterns, std::ostream& out_f,
                      std::ostream& out_m);

struct CorpusStats {
  int64_t sentences_f = 0;
  int64_t words_f = 0;
  int64_t sentences_m = 0;
  int64_t words_m = 0;
};

CorpusStats corpus_stats(std::istream& f_corpus, std::istream& m_corpus);
std::string corpus_stats_text(const CorpusStats& stats);

}  // namespace fusedec
