#include "doctest.h"

#include "fusedec/util.hpp"
#include "fusedec/vocab.hpp"
#include "test_helpers.hpp"

using namespace fusedec;

namespace {

Vocabulary small_vocab() {
  return Vocabulary({"<bos>", "<eos>", "<unk>", "a", "b"}, 0, 1, 2);
}

}  // namespace

TEST_CASE("construction enforces invariants") {
  CHECK_THROWS_AS(Vocabulary({"<bos>", "<eos>", "<unk>", "a", "a"}, 0, 1, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(Vocabulary({"<bos>", "<eos>", "<unk>"}, 0, 0, 2), std::invalid_argument);
  CHECK_THROWS_AS(Vocabulary({"<bos>", "<eos>", "<unk>"}, 0, 1, 9), std::invalid_argument);
  CHECK_THROWS_AS(Vocabulary({"<bos>", "<eos>", "bad token"}, 0, 1, 2), std::invalid_argument);
}

TEST_CASE("encode maps unknown surfaces to unk") {
  Vocabulary v = small_vocab();
  TokenSeq seq = v.encode("a b zzz  a");
  CHECK(seq == TokenSeq{3, 4, 2, 3});
  CHECK(v.decode({3, 4}) == "a b");
}

TEST_CASE("serialization round-trips bit-exactly") {
  Vocabulary v = small_vocab();
  std::string dir = test_scratch_dir("vocab");
  v.save(dir + "/v.vocab");
  Vocabulary loaded = Vocabulary::load(dir + "/v.vocab");
  CHECK(loaded == v);
  // token order is preserved, not just the set
  CHECK(loaded.token(3) == "a");
  CHECK(loaded.token(4) == "b");
  // second round trip is byte-identical
  loaded.save(dir + "/v2.vocab");
  CHECK(read_file(dir + "/v.vocab") == read_file(dir + "/v2.vocab"));
}

TEST_CASE("load rejects malformed files") {
  std::string dir = test_scratch_dir("vocab_bad");
  write_file(dir + "/bad.vocab", "VOCAB v2 1 0 1 2\nx\n");
  CHECK_THROWS_AS(Vocabulary::load(dir + "/bad.vocab"), DataError);
  write_file(dir + "/short.vocab", "VOCAB v1 5 0 1 2\na\nb\n");
  CHECK_THROWS_AS(Vocabulary::load(dir + "/short.vocab"), DataError);
  CHECK_THROWS_AS(Vocabulary::load(dir + "/missing.vocab"), DataError);
}

TEST_CASE("valid_seq checks id range") {
  Vocabulary v = small_vocab();
  CHECK(v.valid_seq({0, 4}));
  CHECK_FALSE(v.valid_seq({5}));
  CHECK_FALSE(v.valid_seq({-1}));
}
