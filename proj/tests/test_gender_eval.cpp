#include "doctest.h"

#include <sstream>

#include "fusedec/gender_eval.hpp"
#include "fusedec/util.hpp"
#include "test_helpers.hpp"

using namespace fusedec;

namespace {

AnnotatedSentence sentence(const std::string& id,
                           std::vector<std::tuple<std::string, std::string, Gender>> terms) {
  AnnotatedSentence s;
  s.id = id;
  s.source = "src";
  s.reference = "ref";
  for (auto& [c, w, g] : terms) s.terms.push_back(AnnotatedTerm{c, w, g});
  return s;
}

}  // namespace

TEST_CASE("coverage and accuracy from the definitions") {
  AnnotatedEvalSet set{sentence("s1", {{"cansada", "cansado", Gender::F},
                                       {"sola", "solo", Gender::F}})};
  // one correct form present, the other term absent in both forms
  GenderScores scores = score_gender({"estoy cansada hoy"}, set);
  CHECK(scores.f.total == 2);
  CHECK(scores.f.correct == 1);
  CHECK(scores.f.wrong == 0);
  CHECK(*scores.f.coverage() == doctest::Approx(0.5));
  CHECK(*scores.f.accuracy() == doctest::Approx(1.0));
  CHECK_FALSE(scores.m.coverage().has_value());
  CHECK_FALSE(scores.m.accuracy().has_value());
}

TEST_CASE("wrong-gender forms count toward coverage, not accuracy") {
  AnnotatedEvalSet set{sentence("s1", {{"cansada", "cansado", Gender::F}})};
  GenderScores scores = score_gender({"estoy cansado"}, set);
  CHECK(scores.f.total == 1);
  CHECK(scores.f.correct == 0);
  CHECK(scores.f.wrong == 1);
  CHECK(*scores.f.coverage() == doctest::Approx(1.0));
  CHECK(*scores.f.accuracy() == doctest::Approx(0.0));
}

TEST_CASE("each hypothesis token is consumed at most once") {
  AnnotatedEvalSet set{sentence("s1", {{"sola", "solo", Gender::F},
                                       {"sola", "solo", Gender::F}})};
  // the single occurrence satisfies the first term; the second is unmeasured
  GenderScores scores = score_gender({"me siento sola"}, set);
  CHECK(scores.f.total == 2);
  CHECK(scores.f.correct == 1);
  CHECK(scores.f.wrong == 0);
  CHECK(*scores.f.coverage() == doctest::Approx(0.5));
}

TEST_CASE("matching lowercases and strips boundary punctuation") {
  AnnotatedEvalSet set{sentence("s1", {{"cansada", "cansado", Gender::F}})};
  GenderScores scores = score_gender({"Cansada, dije."}, set);
  CHECK(scores.f.correct == 1);
  CHECK(matching_tokens("Hola, mundo!") == std::vector<std::string>{"hola", "mundo"});
  CHECK(matching_tokens("...") == std::vector<std::string>{});
}

TEST_CASE("counts partition exactly") {
  AnnotatedEvalSet set{
      sentence("a", {{"x1", "y1", Gender::F}, {"x2", "y2", Gender::M}}),
      sentence("b", {{"x3", "y3", Gender::M}}),
  };
  GenderScores scores = score_gender({"x1 zzz", "y3"}, set);
  CHECK(scores.f.correct + scores.f.wrong <= scores.f.total);
  CHECK(scores.m.correct + scores.m.wrong <= scores.m.total);
  int64_t unmeasured_f = scores.f.total - scores.f.measurable();
  int64_t unmeasured_m = scores.m.total - scores.m.measurable();
  CHECK(scores.f.correct == 1);
  CHECK(unmeasured_f == 0);
  CHECK(scores.m.wrong == 1);
  CHECK(unmeasured_m == 1);
  CHECK(*scores.pooled_accuracy() == doctest::Approx(0.5));
}

TEST_CASE("hypothesis count must match the set") {
  AnnotatedEvalSet set{sentence("a", {})};
  CHECK_THROWS_AS(score_gender({"x", "y"}, set), std::invalid_argument);
}

TEST_CASE("harmonic mean") {
  CHECK(harmonic_mean(42.0, 42.0) == doctest::Approx(42.0));
  CHECK(harmonic_mean(0.0, 95.0) == 0.0);
  CHECK(harmonic_mean(0.0, 0.0) == 0.0);
  CHECK(harmonic_mean(30.0, 60.0) == doctest::Approx(40.0));
  CHECK_THROWS_AS(harmonic_mean(-1.0, 2.0), std::invalid_argument);
  // min <= hmean <= max, equality only at a == b
  for (double a : {1.0, 20.0, 55.0}) {
    for (double b : {3.0, 20.0, 90.0}) {
      double h = harmonic_mean(a, b);
      CHECK(h >= std::min(a, b) - 1e-12);
      CHECK(h <= std::max(a, b) + 1e-12);
      if (a != b) CHECK(h < std::max(a, b));
    }
  }
}

TEST_CASE("eval set files round-trip") {
  AnnotatedEvalSet set{
      sentence("id-1", {{"nueva", "nuevo", Gender::F}}),
      sentence("id-2", {}),
      sentence("id-3", {{"alta", "alto", Gender::F}, {"listo", "lista", Gender::M}}),
  };
  std::string dir = test_scratch_dir("evalset");
  save_eval_set(set, dir + "/set.tsv");
  AnnotatedEvalSet loaded = parse_eval_set(dir + "/set.tsv");
  REQUIRE(loaded.size() == set.size());
  for (size_t i = 0; i < set.size(); ++i) {
    CHECK(loaded[i].id == set[i].id);
    CHECK(loaded[i].source == set[i].source);
    CHECK(loaded[i].reference == set[i].reference);
    REQUIRE(loaded[i].terms.size() == set[i].terms.size());
    for (size_t t = 0; t < set[i].terms.size(); ++t) {
      CHECK(loaded[i].terms[t].correct_form == set[i].terms[t].correct_form);
      CHECK(loaded[i].terms[t].wrong_form == set[i].terms[t].wrong_form);
      CHECK(loaded[i].terms[t].gender == set[i].terms[t].gender);
    }
  }
  // serialize -> parse -> serialize is byte-stable
  std::ostringstream again;
  write_eval_set(loaded, again);
  CHECK(again.str() == read_file(dir + "/set.tsv"));
}

TEST_CASE("parser reports the offending line") {
  auto parse = [](const std::string& body) {
    std::istringstream in("MUSTSHE-LIKE v1\n" + body);
    return parse_eval_set_stream(in, "test");
  };
  CHECK_THROWS_WITH_AS(parse("a\tsrc\tref\tx|y|X\n"), "test:2: bad gender label 'X'", DataError);
  CHECK_THROWS_AS(parse("a\tsrc\tref\t\na\tsrc\tref\t\n"), DataError);   // duplicate id
  CHECK_THROWS_AS(parse("a\tsrc\tref\t|y|F\n"), DataError);              // empty form
  CHECK_THROWS_AS(parse("a\tsrc\tref\tx|x|F\n"), DataError);             // equal forms
  CHECK_THROWS_AS(parse("a\tsrc\tref\tx y|z|F\n"), DataError);           // multi-token form
  CHECK_THROWS_AS(parse("a\tsrc\tref\n"), DataError);                    // missing column
  std::istringstream bad_header("MUSTSHE v9\n");
  CHECK_THROWS_AS(parse_eval_set_stream(bad_header, "test"), DataError);
  // empty terms column parses to a BLEU-only sentence
  AnnotatedEvalSet ok = parse("a\tsrc\tref\t\n");
  CHECK(ok.size() == 1);
  CHECK(ok[0].terms.empty());
}
