#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fusedec/logprob.hpp"
#include "fusedec/vocab.hpp"

namespace fusedec {

// Count-based n-gram LM with add-k smoothing. Serves as the gender-specific
// external language model: trained on monolingual target-side text, queried
// for a full next-token distribution at every decoding step.
//
//   p(w | ctx) = (count(ctx, w) + k) / (count(ctx) + k * V)
//
// Sequences are padded with (order-1) BOS tokens and terminated with EOS
// during training, so the empty prefix and the final step are well defined.
// Immutable after training; concurrent scoring is safe.
class NGramLM {
 public:
  static NGramLM train(const std::vector<TokenSeq>& corpus, int order, double k,
                       const Vocabulary& vocab);
  // Same, over a bare id space (no Vocabulary attached).
  static NGramLM train(const std::vector<TokenSeq>& corpus, int order, double k, int vocab_size,
                       int bos_id, int eos_id);

  // Smoothed conditional over the next token given the last (order-1)
  // tokens of the BOS-padded prefix. Unseen contexts yield the uniform
  // add-k distribution.
  LogProbDist next_logprob(const TokenSeq& prefix) const;

  // Chain-rule sum of per-step conditionals; include_eos controls whether
  // the terminating EOS step contributes.
  double sequence_logprob(const TokenSeq& seq, bool include_eos = true) const;

  int order() const { return order_; }
  double smoothing_k() const { return k_; }
  int vocab_size() const { return vocab_size_; }
  int bos_id() const { return bos_id_; }
  int eos_id() const { return eos_id_; }

  void save(const std::string& path) const;
  static NGramLM load(const std::string& path);

 private:
  NGramLM(int order, double k, int vocab_size, int bos_id, int eos_id);

  TokenSeq context_of(const TokenSeq& prefix) const;
  void add_event(const TokenSeq& ctx, int token);
  double token_logprob(const TokenSeq& ctx, int token) const;

  int order_;
  double k_;
  int vocab_size_;
  int bos_id_;
  int eos_id_;
  std::map<TokenSeq, std::map<int, int64_t>> counts_;
  std::map<TokenSeq, int64_t> totals_;
};

}  // namespace fusedec
