#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fusedec/logprob.hpp"
#include "fusedec/vocab.hpp"

namespace fusedec {

// Sequence of encoder frame vectors, one d-dimensional row per source
// position. Also the carrier for the averaged ILM context: the decoder
// accepts any EncoderOutput, including a synthetic single-frame one.
struct EncoderOutput {
  Eigen::MatrixXd frames;  // T x d

  int frame_count() const { return static_cast<int>(frames.rows()); }
  int dim() const { return static_cast<int>(frames.cols()); }
};

struct Seq2SeqDims {
  int src_vocab = 0;
  int tgt_vocab = 0;
  int embed = 16;   // d
  int hidden = 32;  // h
};

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 30;
  uint64_t rng_seed = 0;
  double grad_clip = 5.0;
};

struct TrainResult {
  std::vector<double> epoch_losses;  // mean per-token NLL per epoch
};

using TrainPair = std::pair<TokenSeq, TokenSeq>;

// Minimal attention encoder-decoder playing the base model role.
//
// Encoder: frame_t = tanh(W_enc * src_embed[s_t] + b_enc); one frame per
// source token, no cross-position mixing.
//
// Decoder: plain tanh recurrence over BOS + prefix,
//   state_i = tanh(W_prev * e_i + W_state * state_{i-1}),  state_{-1} = 0,
// where e_i is the embedding of the token consumed at step i. Attention is
// an unscaled dot product between the encoder frames and the current input
// embedding (the only d-dimensional query available with hidden != embed):
//   alpha = softmax(frames * e_i),  context = frames^T * alpha.
// Output distribution: softmax(W_out * [state; context] + b_out).
//
// The decoder never reads the encoder output except through attention,
// which is what makes single-frame overrides (ILM estimation) meaningful.
//
// Trained models are immutable for scoring purposes and safe to share
// across threads; train()/fine_tune() mutate this instance.
class ToySeq2Seq {
 public:
  // tgt_bos/tgt_eos are the target-vocabulary control ids; the model stores
  // them so scoring is self-contained.
  ToySeq2Seq(const Seq2SeqDims& dims, int tgt_bos, int tgt_eos, uint64_t rng_seed);
  ToySeq2Seq(const Vocabulary& src, const Vocabulary& tgt, int embed, int hidden,
             uint64_t rng_seed);

  const Seq2SeqDims& dims() const { return dims_; }
  int tgt_bos() const { return tgt_bos_; }
  int tgt_eos() const { return tgt_eos_; }

  EncoderOutput encode(const TokenSeq& source) const;

  // Distribution over the next target token after consuming BOS + prefix,
  // attending over enc. Throws on a dimension mismatch.
  LogProbDist decoder_logprob_dist(const TokenSeq& prefix, const EncoderOutput& enc) const;

  // log p(target, EOS | source) by the chain rule.
  double sequence_logprob(const TokenSeq& source, const TokenSeq& target) const;

  // Same, with a caller-supplied encoder output; include_eos drops the
  // final EOS step from the sum (used by fusion score bookkeeping).
  double target_logprob_given(const EncoderOutput& enc, const TokenSeq& target,
                              bool include_eos = true) const;

  // Incremental decoding interface. A state holds everything a beam
  // hypothesis needs to be extended by one token.
  struct DecoderState {
    Eigen::VectorXd state;  // h, post-recurrence
    Eigen::VectorXd query;  // d, embedding of the last consumed token
  };
  DecoderState initial_state() const;  // BOS consumed
  DecoderState advance(const DecoderState& prev, int token) const;
  LogProbDist output_dist(const DecoderState& s, const EncoderOutput& enc) const;

  Eigen::VectorXd attention_weights(const EncoderOutput& enc, const Eigen::VectorXd& query) const;

  TrainResult train(const std::vector<TrainPair>& data, const TrainConfig& config);
  // Continues training on a (gender-partitioned) subset at a constant rate;
  // produces the specialized-model baseline.
  TrainResult fine_tune(const std::vector<TrainPair>& subset, const TrainConfig& config);

  // Mean per-token NLL of one pair, the training objective.
  double pair_loss(const TokenSeq& source, const TokenSeq& target) const;

  // Central finite differences over every parameter against the analytic
  // gradient; returns the max relative error. epsilon in [1e-6, 1e-3].
  double numerical_grad_check(const TrainPair& pair, double epsilon);

  void save(const std::string& path) const;
  static ToySeq2Seq load(const std::string& path);

  bool operator==(const ToySeq2Seq& other) const;

 private:
  struct Gradients;
  double forward_backward(const TokenSeq& source, const TokenSeq& target, Gradients* grads) const;
  void apply_update(Gradients& grads, double lr, double grad_clip);
  std::vector<std::pair<const char*, Eigen::MatrixXd*>> param_list();

  Seq2SeqDims dims_;
  int tgt_bos_ = 0;
  int tgt_eos_ = 0;
  Eigen::MatrixXd src_embed_;  // E x d
  Eigen::MatrixXd enc_proj_;   // d x d
  Eigen::MatrixXd enc_bias_;   // d x 1
  Eigen::MatrixXd tgt_embed_;  // V x d
  Eigen::MatrixXd w_prev_;     // h x d
  Eigen::MatrixXd w_state_;    // h x h
  Eigen::MatrixXd w_out_;      // V x (h + d)
  Eigen::MatrixXd out_bias_;   // V x 1
};

}  // namespace fusedec
