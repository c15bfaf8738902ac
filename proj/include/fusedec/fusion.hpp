#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "fusedec/logprob.hpp"
#include "fusedec/ngram_lm.hpp"
#include "fusedec/seq2seq.hpp"
#include "fusedec/vocab.hpp"

namespace fusedec {

// Grand mean of encoder frames over the whole training set: the content-free
// decoder input used to estimate the internal language model. This is a
// single average over all frames of all samples, not an average of
// per-sample means.
struct IlmContext {
  Eigen::VectorXd c;
  int64_t frames_total = 0;
  int64_t samples_total = 0;

  // Single-frame encoder output carrying c, ready to feed the decoder.
  EncoderOutput as_encoder_output() const;

  void save(const std::string& path) const;
  static IlmContext load(const std::string& path);
};

IlmContext ilm_context_from_outputs(const std::vector<EncoderOutput>& outputs);
IlmContext compute_ilm_context(const ToySeq2Seq& model, const std::vector<TokenSeq>& training_sources);

// p_ILM(.|prefix): the base decoder fed the averaged context instead of a
// real encoding. Independent of any actual source input.
LogProbDist ilm_logprob_dist(const ToySeq2Seq& model, const IlmContext& ctx, const TokenSeq& prefix);

// Per-token fused scores  base - beta_ilm * ilm + beta_elm * elm.
// Deliberately unnormalized: beam ranking and the argmax operate on raw
// log-linear combinations.
std::vector<double> fused_step_scores(const LogProbDist& base, const LogProbDist& ilm,
                                      const LogProbDist& elm, const FusionWeights& w);

struct DecodeOptions {
  int beam = 5;
  int max_len = 12;
  bool length_norm = false;  // rank finished hypotheses by score / length
  bool fuse_eos = true;      // apply ELM/ILM scores at the EOS step
};

// Winning hypothesis with its component breakdown. Scores are raw sums over
// steps (length normalization affects ranking only); when fuse_eos is off,
// elm_score and ilm_score exclude the EOS step. Component sums always
// recombine: fused = base - beta_ilm * ilm + beta_elm * elm.
struct DecodeResult {
  TokenSeq tokens;  // surface form, EOS stripped
  double fused_score = 0.0;
  double base_score = 0.0;
  double elm_score = 0.0;
  double ilm_score = 0.0;
};

// Beam search over the fused objective. All V continuations of every live
// hypothesis are scored (no top-k pre-pruning); hypotheses finish on EOS;
// live hypotheses at max_len are force-terminated with the EOS step scored.
// Ties break toward the lexicographically smaller token sequence, which
// also prefers the shorter of two otherwise-equal sequences.
DecodeResult beam_search(const ToySeq2Seq& model, const IlmContext& ctx, const NGramLM& elm,
                         const TokenSeq& source, const FusionWeights& w, const DecodeOptions& opts);

// Base model only, same search and tie-break rules.
DecodeResult beam_search_base(const ToySeq2Seq& model, const TokenSeq& source,
                              const DecodeOptions& opts);

// Brute-force argmax over every EOS-terminated sequence of surface length
// <= max_len, scored by full fresh passes per sequence. Oracle for
// beam_search; guards V^max_len <= 1e6.
DecodeResult exhaustive_decode(const ToySeq2Seq& model, const IlmContext& ctx, const NGramLM& elm,
                               const TokenSeq& source, const FusionWeights& w,
                               const DecodeOptions& opts);

}  // namespace fusedec
