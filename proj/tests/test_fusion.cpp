#include "doctest.h"

#include <cmath>

#include "fusedec/fusion.hpp"
#include "fusedec/util.hpp"
#include "test_helpers.hpp"
#include "tiny_instance.hpp"

using namespace fusedec;

TEST_CASE("ILM context is the grand mean over frames, not over samples") {
  EncoderOutput a;
  a.frames.resize(1, 1);
  a.frames << 2.0;
  EncoderOutput b;
  b.frames.resize(3, 1);
  b.frames << 0.0, 0.0, 0.0;
  IlmContext ctx = ilm_context_from_outputs({a, b});
  // grand mean 2/4 = 0.5; the per-sample-mean average would be 1.0
  CHECK(ctx.c[0] == 0.5);
  CHECK(ctx.frames_total == 4);
  CHECK(ctx.samples_total == 2);
}

TEST_CASE("two-frame average") {
  EncoderOutput a;
  a.frames.resize(2, 2);
  a.frames << 1.0, 0.0, 0.0, 1.0;
  IlmContext ctx = ilm_context_from_outputs({a});
  CHECK(ctx.c[0] == 0.5);
  CHECK(ctx.c[1] == 0.5);
}

TEST_CASE("identical frames average to themselves") {
  EncoderOutput a;
  a.frames.resize(3, 2);
  a.frames << 0.25, -0.5, 0.25, -0.5, 0.25, -0.5;
  IlmContext ctx = ilm_context_from_outputs({a});
  CHECK(ctx.c[0] == 0.25);
  CHECK(ctx.c[1] == -0.5);
}

TEST_CASE("compute_ilm_context validates input") {
  TinyInstance inst = make_tiny_instance(1);
  CHECK_THROWS_AS(compute_ilm_context(inst.model, {}), std::invalid_argument);
}

TEST_CASE("ILM distribution is input-independent and matches the override") {
  TinyInstance inst = make_tiny_instance(2);
  TokenSeq prefix{3};
  LogProbDist direct = inst.model.decoder_logprob_dist(prefix, inst.ctx.as_encoder_output());
  LogProbDist via_op = ilm_logprob_dist(inst.model, inst.ctx, prefix);
  for (size_t i = 0; i < direct.size(); ++i) CHECK(via_op[i] == direct[i]);
  CHECK(via_op.normalization_error() < 1e-6);
}

TEST_CASE("ILM context serialization round-trips") {
  TinyInstance inst = make_tiny_instance(3);
  std::string dir = test_scratch_dir("ilmctx");
  inst.ctx.save(dir + "/c.ctx");
  IlmContext loaded = IlmContext::load(dir + "/c.ctx");
  CHECK(loaded.c == inst.ctx.c);
  CHECK(loaded.frames_total == inst.ctx.frames_total);
  CHECK(loaded.samples_total == inst.ctx.samples_total);
}

TEST_CASE("fused step scores") {
  LogProbDist base = LogProbDist::from_logits(
      {std::log(0.6), std::log(0.3), std::log(0.1)});
  LogProbDist ilm = LogProbDist::from_logits(
      {std::log(0.5), std::log(0.25), std::log(0.25)});
  LogProbDist elm = LogProbDist::from_logits(
      {std::log(0.2), std::log(0.7), std::log(0.1)});

  SUBCASE("zero weights reproduce the base entries exactly") {
    auto scores = fused_step_scores(base, ilm, elm, FusionWeights(0.0, 0.0));
    for (size_t i = 0; i < base.size(); ++i) CHECK(scores[i] == base[i]);
  }
  SUBCASE("a uniform ELM shifts scores without moving the argmax") {
    LogProbDist uniform = LogProbDist::from_logits({0.0, 0.0, 0.0});
    auto scores = fused_step_scores(base, ilm, uniform, FusionWeights(0.0, 1.0));
    for (size_t i = 0; i < base.size(); ++i) {
      CHECK(scores[i] == doctest::Approx(base[i] + std::log(1.0 / 3.0)).epsilon(1e-12));
    }
  }
  SUBCASE("hand-computed combination at (0.285, 0.390)") {
    auto scores = fused_step_scores(base, ilm, elm, FusionWeights(0.285, 0.390));
    CHECK(scores[0] == doctest::Approx(-0.94095946315570544).epsilon(1e-12));
    CHECK(scores[1] == doctest::Approx(-0.94798213954287303).epsilon(1e-12));
    CHECK(scores[2] == doctest::Approx(-2.8054993863425546).epsilon(1e-12));
  }
  SUBCASE("length mismatch is rejected") {
    LogProbDist two = LogProbDist::from_logits({0.0, 0.0});
    CHECK_THROWS_AS(fused_step_scores(base, ilm, two, FusionWeights(0.1, 0.1)),
                    std::invalid_argument);
  }
}

TEST_CASE("weight-zero fusion is identical to base-only search") {
  for (uint64_t seed = 10; seed < 25; ++seed) {
    TinyInstance inst = make_tiny_instance(seed);
    inst.opts.beam = 3;
    DecodeResult fused = beam_search(inst.model, inst.ctx, inst.elm, inst.source,
                                     FusionWeights(0.0, 0.0), inst.opts);
    DecodeResult base = beam_search_base(inst.model, inst.source, inst.opts);
    CHECK(fused.tokens == base.tokens);
    CHECK(fused.fused_score == base.fused_score);
    CHECK(fused.base_score == base.base_score);
  }
}

TEST_CASE("beam search is deterministic") {
  TinyInstance inst = make_tiny_instance(30);
  inst.opts.beam = 4;
  DecodeResult a = beam_search(inst.model, inst.ctx, inst.elm, inst.source, inst.weights, inst.opts);
  DecodeResult b = beam_search(inst.model, inst.ctx, inst.elm, inst.source, inst.weights, inst.opts);
  CHECK(a.tokens == b.tokens);
  CHECK(a.fused_score == b.fused_score);
}

TEST_CASE("full-width beam equals the exhaustive oracle") {
  for (uint64_t seed = 100; seed < 112; ++seed) {
    TinyInstance inst = make_tiny_instance(seed);
    inst.opts.beam = full_beam_width(inst);
    DecodeResult beam = beam_search(inst.model, inst.ctx, inst.elm, inst.source, inst.weights,
                                    inst.opts);
    DecodeResult oracle = exhaustive_decode(inst.model, inst.ctx, inst.elm, inst.source,
                                            inst.weights, inst.opts);
    CHECK(beam.tokens == oracle.tokens);
    CHECK(beam.fused_score == doctest::Approx(oracle.fused_score).epsilon(1e-9));
  }
}

TEST_CASE("oracle equivalence holds with length normalization and without EOS fusion") {
  for (uint64_t seed = 200; seed < 206; ++seed) {
    TinyInstance inst = make_tiny_instance(seed);
    inst.opts.beam = full_beam_width(inst);
    inst.opts.length_norm = (seed % 2 == 0);
    inst.opts.fuse_eos = (seed % 3 != 0);
    DecodeResult beam = beam_search(inst.model, inst.ctx, inst.elm, inst.source, inst.weights,
                                    inst.opts);
    DecodeResult oracle = exhaustive_decode(inst.model, inst.ctx, inst.elm, inst.source,
                                            inst.weights, inst.opts);
    CHECK(beam.tokens == oracle.tokens);
    CHECK(beam.fused_score == doctest::Approx(oracle.fused_score).epsilon(1e-9));
  }
}

TEST_CASE("exhaustive result is the argmax over all enumerated sequences") {
  TinyInstance inst = make_tiny_instance(300);
  inst.opts.max_len = 2;
  DecodeResult best = exhaustive_decode(inst.model, inst.ctx, inst.elm, inst.source, inst.weights,
                                        inst.opts);
  EncoderOutput enc = inst.model.encode(inst.source);
  EncoderOutput frame = inst.ctx.as_encoder_output();
  int v = inst.tgt_vocab.size();
  for (int a = -1; a < v; ++a) {
    for (int b = -1; b < v; ++b) {
      if (a == -1 && b >= 0) continue;
      TokenSeq seq;
      if (a >= 0) seq.push_back(a);
      if (b >= 0) seq.push_back(b);
      if (std::find(seq.begin(), seq.end(), 1) != seq.end()) continue;  // eos id
      double fused = inst.model.target_logprob_given(enc, seq, true) -
                     inst.weights.beta_ilm * inst.model.target_logprob_given(frame, seq, true) +
                     inst.weights.beta_elm * inst.elm.sequence_logprob(seq, true);
      CHECK(best.fused_score >= fused - 1e-9);
    }
  }
}

TEST_CASE("component scores recombine to the fused score") {
  for (uint64_t seed = 400; seed < 420; ++seed) {
    TinyInstance inst = make_tiny_instance(seed);
    inst.opts.beam = 3;
    DecodeResult r = beam_search(inst.model, inst.ctx, inst.elm, inst.source, inst.weights,
                                 inst.opts);
    double recombined = r.base_score - inst.weights.beta_ilm * r.ilm_score +
                        inst.weights.beta_elm * r.elm_score;
    CHECK(r.fused_score == doctest::Approx(recombined).epsilon(1e-9));
  }
}

TEST_CASE("score gap between two tokens is affine in beta_elm") {
  TinyInstance inst = make_tiny_instance(500);
  TokenSeq prefix{3};
  EncoderOutput enc = inst.model.encode(inst.source);
  LogProbDist base = inst.model.decoder_logprob_dist(prefix, enc);
  LogProbDist ilm = ilm_logprob_dist(inst.model, inst.ctx, prefix);
  LogProbDist elm = inst.elm.next_logprob(prefix);
  const size_t u = 0, v = 3;
  double slope = elm[u] - elm[v];
  double betas[3] = {0.1, 0.45, 0.9};
  double gaps[3];
  for (int i = 0; i < 3; ++i) {
    auto scores = fused_step_scores(base, ilm, elm, FusionWeights(0.2, betas[i]));
    gaps[i] = scores[u] - scores[v];
  }
  CHECK(gaps[1] - gaps[0] == doctest::Approx((betas[1] - betas[0]) * slope).epsilon(1e-12));
  CHECK(gaps[2] - gaps[1] == doctest::Approx((betas[2] - betas[1]) * slope).epsilon(1e-12));
}

TEST_CASE("ILM scoring is bit-identical across source inputs") {
  TinyInstance inst = make_tiny_instance(600);
  TokenSeq prefix{3, 3};
  LogProbDist a = ilm_logprob_dist(inst.model, inst.ctx, prefix);
  LogProbDist b = ilm_logprob_dist(inst.model, inst.ctx, prefix);
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("exhaustive search guards its search space") {
  TinyInstance inst = make_tiny_instance(700);
  inst.opts.max_len = 12;  // 4^12 or 5^12 both exceed 1e6
  CHECK_THROWS_WITH_AS(exhaustive_decode(inst.model, inst.ctx, inst.elm, inst.source,
                                         inst.weights, inst.opts),
                       "search space too large", std::invalid_argument);
}

TEST_CASE("decode options are validated") {
  TinyInstance inst = make_tiny_instance(800);
  DecodeOptions bad = inst.opts;
  bad.beam = 0;
  CHECK_THROWS_AS(beam_search_base(inst.model, inst.source, bad), std::invalid_argument);
  bad = inst.opts;
  bad.max_len = 0;
  CHECK_THROWS_AS(beam_search_base(inst.model, inst.source, bad), std::invalid_argument);
}
