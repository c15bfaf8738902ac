#include "doctest.h"

#include <sstream>

#include "fusedec/corpus_extract.hpp"
#include "fusedec/util.hpp"
#include "test_helpers.hpp"

using namespace fusedec;

namespace {

PatternSet es_patterns() {
  std::istringstream in(
      "language = es\n"
      "f = [\"(?i)\\bsoy nueva\\b\", \"(?i)\\bcansada\\b\"]\n"
      "m = [\"(?i)\\bsoy nuevo\\b\", \"(?i)\\bcansado\\b\"]\n");
  return parse_patterns_stream(in, "inline");
}

struct ExtractRun {
  ExtractCounts counts;
  std::string f;
  std::string m;
};

ExtractRun run_extract(const std::string& corpus, const PatternSet& patterns) {
  std::istringstream in(corpus);
  std::ostringstream out_f, out_m;
  ExtractCounts counts = extract(in, patterns, out_f, out_m);
  return {counts, out_f.str(), out_m.str()};
}

}  // namespace

TEST_CASE("pattern files parse and compile") {
  PatternSet set = es_patterns();
  CHECK(set.language == "es");
  CHECK(set.f_patterns.size() == 2);
  CHECK(set.m_patterns.size() == 2);
}

TEST_CASE("pattern validation errors name the culprit") {
  std::istringstream missing_f("language = x\nm = [\"a\"]\n");
  CHECK_THROWS_AS(parse_patterns_stream(missing_f, "t"), DataError);
  std::istringstream bad_regex("language = x\nf = [\"(unclosed\"]\nm = [\"ok\"]\n");
  CHECK_THROWS_WITH_AS(parse_patterns_stream(bad_regex, "t"),
                       doctest::Contains("f pattern #1"), DataError);
  std::istringstream bad_syntax("f [\"a\"]\n");
  CHECK_THROWS_AS(parse_patterns_stream(bad_syntax, "t"), DataError);
}

TEST_CASE("pattern text survives reload") {
  std::string dir = test_scratch_dir("patterns");
  std::string body =
      "language = syn\n"
      "f = [\"\\bw[0-9]+f\\b\"]\n"
      "m = [\"\\bw[0-9]+m\\b\"]\n";
  write_file(dir + "/p.patterns", body);
  PatternSet a = load_patterns(dir + "/p.patterns");
  PatternSet b = load_patterns(dir + "/p.patterns");
  CHECK(a.f_texts == b.f_texts);
  CHECK(a.m_texts == b.m_texts);
  CHECK(a.f_texts[0] == "\\bw[0-9]+f\\b");
}

TEST_CASE("lines are routed by gender match") {
  PatternSet patterns = es_patterns();
  // the first-person example sentence lands in the feminine corpus
  ExtractRun run = run_extract(
      "Soy nueva en esta zona\n"
      "soy nuevo en el barrio\n"
      "nada que ver\n"
      "cansada y cansado\n",
      patterns);
  CHECK(run.counts.f == 1);
  CHECK(run.counts.m == 1);
  CHECK(run.counts.unmatched == 1);
  CHECK(run.counts.ambiguous == 1);
  CHECK(run.f == "Soy nueva en esta zona\n");
  CHECK(run.m == "soy nuevo en el barrio\n");
}

TEST_CASE("every line lands in exactly one bucket") {
  PatternSet patterns = es_patterns();
  std::string corpus =
      "Soy nueva aqui\nmuy cansado\nhola\ncansada cansado\nsoy nuevo\nque tal\n";
  ExtractRun run = run_extract(corpus, patterns);
  int64_t lines = 6;
  CHECK(run.counts.f + run.counts.m + run.counts.ambiguous + run.counts.unmatched == lines);
}

TEST_CASE("extraction is idempotent on its own output") {
  PatternSet patterns = es_patterns();
  ExtractRun first = run_extract(
      "Soy nueva aqui\nestoy cansada\nsoy nuevo\nnada\n", patterns);
  ExtractRun second = run_extract(first.f, patterns);
  CHECK(second.f == first.f);
  CHECK(second.m.empty());
  CHECK(second.counts.m == 0);
  CHECK(second.counts.ambiguous == 0);
  CHECK(second.counts.unmatched == 0);
}

TEST_CASE("case-insensitive flag is honored per pattern") {
  std::istringstream in(
      "language = t\n"
      "f = [\"(?i)\\bAAA\\b\"]\n"
      "m = [\"\\bBBB\\b\"]\n");
  PatternSet patterns = parse_patterns_stream(in, "t");
  ExtractRun run = run_extract("aaa\nbbb\nBBB\n", patterns);
  CHECK(run.counts.f == 1);   // aaa matches case-insensitively
  CHECK(run.counts.m == 1);   // only the uppercase BBB matches
  CHECK(run.counts.unmatched == 1);
}

TEST_CASE("corpus statistics") {
  std::istringstream f("una dos tres\ncuatro\n");
  std::istringstream m("uno\n");
  CorpusStats stats = corpus_stats(f, m);
  CHECK(stats.sentences_f == 2);
  CHECK(stats.words_f == 4);
  CHECK(stats.sentences_m == 1);
  CHECK(stats.words_m == 1);
  std::istringstream empty_f(""), empty_m("");
  CorpusStats zero = corpus_stats(empty_f, empty_m);
  CHECK(zero.sentences_f == 0);
  CHECK(zero.words_m == 0);
}

TEST_CASE("stats are additive under concatenation") {
  std::istringstream f1("a b\n"), m1("c\n");
  std::istringstream f2("d\n"), m2("e f g\n");
  CorpusStats s1 = corpus_stats(f1, m1);
  CorpusStats s2 = corpus_stats(f2, m2);
  std::istringstream fc("a b\nd\n"), mc("c\ne f g\n");
  CorpusStats sc = corpus_stats(fc, mc);
  CHECK(sc.sentences_f == s1.sentences_f + s2.sentences_f);
  CHECK(sc.words_f == s1.words_f + s2.words_f);
  CHECK(sc.sentences_m == s1.sentences_m + s2.sentences_m);
  CHECK(sc.words_m == s1.words_m + s2.words_m);
}
