#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "fusedec/bleu.hpp"

using namespace fusedec;

namespace {

// The fixture corpus scored by tests/tools/ref_bleu.py; expected values are
// frozen from its output.
const std::vector<std::string> kHyps = {
    "The quick brown fox jumps over the lazy dog.",
    "Hello, world! This is a small test.",
    "completely disjoint tokens everywhere",
    "It costs 3.14 dollars, roughly 2-3 times more than in 1999.",
    "the cat the cat on the mat",
};
const std::vector<std::string> kRefs = {
    "The quick brown fox jumps over the lazy dog.",
    "Hello there, world! That was a short test.",
    "nothing matches here at all, sadly.",
    "It costs 3.14 dollars, about 2-3 times more than it did in 1999.",
    "the cat is on the mat",
};

}  // namespace

TEST_CASE("13a tokenization") {
  CHECK(tokenize_13a("Hello, world!") ==
        std::vector<std::string>{"Hello", ",", "world", "!"});
  CHECK(tokenize_13a("3.14") == std::vector<std::string>{"3.14"});
  CHECK(tokenize_13a("abc") == std::vector<std::string>{"abc"});
  // digit-adjacent dash splits, word-internal dash does not
  CHECK(tokenize_13a("2-3 well-known") ==
        std::vector<std::string>{"2", "-", "3", "well-known"});
  // apostrophes are never padded
  CHECK(tokenize_13a("it's fine") == std::vector<std::string>{"it's", "fine"});
  CHECK(tokenize_13a("&quot;quoted&quot; &amp; more") ==
        std::vector<std::string>{"\"", "quoted", "\"", "&", "more"});
  CHECK(tokenize_13a("end. Next") == std::vector<std::string>{"end", ".", "Next"});
  CHECK(tokenize_13a("") == std::vector<std::string>{});
}

TEST_CASE("13a tokenization matches the reference on the fixtures") {
  CHECK(tokenize_13a(kHyps[1]) ==
        std::vector<std::string>{"Hello", ",", "world", "!", "This", "is", "a", "small", "test",
                                 "."});
  CHECK(tokenize_13a(kRefs[3]) ==
        std::vector<std::string>{"It", "costs", "3.14", "dollars", ",", "about", "2", "-", "3",
                                 "times", "more", "than", "it", "did", "in", "1999", "."});
}

TEST_CASE("corpus BLEU matches the reference implementation") {
  const double expected[5] = {100.0, 19.3312635814, 2.9381754016, 57.6306176152, 30.7394076476};
  for (size_t i = 0; i < kHyps.size(); ++i) {
    CHECK(bleu_corpus({kHyps[i]}, {kRefs[i]}) ==
          doctest::Approx(expected[i]).epsilon(1e-9));
  }
  CHECK(bleu_corpus(kHyps, kRefs) == doctest::Approx(48.8634157782).epsilon(1e-9));
}

TEST_CASE("identical corpus scores 100") {
  CHECK(bleu_corpus(kRefs, kRefs) == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("brevity penalty for a shorter hypothesis") {
  // all precisions are 1, so the score is exactly the brevity penalty
  CHECK(bleu_corpus({"a b c d"}, {"a b c d e"}) ==
        doctest::Approx(100.0 * std::exp(1.0 - 5.0 / 4.0)).epsilon(1e-12));
}

TEST_CASE("hypothesis shorter than the n-gram order scores zero under eff:no") {
  // brevity penalty e^(1 - 4/1) multiplies smoothed precisions, but the
  // 2..4-gram totals are zero and my_log drives the score to 0
  CHECK(bleu_corpus({"dog"}, {"the big red dog"}) == 0.0);
}

TEST_CASE("BLEU is permutation-invariant over sentence pairs") {
  std::vector<size_t> order{4, 2, 0, 3, 1};
  std::vector<std::string> hyps, refs;
  for (size_t i : order) {
    hyps.push_back(kHyps[i]);
    refs.push_back(kRefs[i]);
  }
  CHECK(bleu_corpus(hyps, refs) == bleu_corpus(kHyps, kRefs));
}

TEST_CASE("input validation") {
  CHECK_THROWS_WITH_AS(bleu_corpus({}, {}), "empty corpus", std::invalid_argument);
  CHECK_THROWS_AS(bleu_corpus({"a"}, {"a", "b"}), std::invalid_argument);
}
