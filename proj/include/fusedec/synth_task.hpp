#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fusedec/gender_eval.hpp"
#include "fusedec/util.hpp"
#include "fusedec/vocab.hpp"

namespace fusedec {

// Knobs of the controlled translation task. skew_rho biases training toward
// male speakers; voice_match_q is the probability that the leading voice
// token agrees with the speaker's gender. The default q < 1 keeps the voice
// marker an imperfect gender proxy: at q = 1 the base model learns the
// marker perfectly under the default training budget and no gender bias
// survives to be mitigated.
struct SynthTaskConfig {
  uint64_t rng_seed = 7;
  int n_train = 10000;
  double skew_rho = 0.8;
  double voice_match_q = 0.9;
  int lexicon_size = 20;    // content-word pairs
  int gendered_slots = 2;   // per-sentence slot count is uniform in 1..gendered_slots
  int n_eval = 300;
};

struct SynthSample {
  TokenSeq source;  // voice token + trigger tokens + content tokens
  TokenSeq target;  // gendered forms + translated content
  Gender speaker_gender = Gender::F;
  Gender voice = Gender::F;
};

enum class EvalCondition { aligned, swapped };

// Generator for the synthetic experiments: skewed parallel data, gender-pure
// monolingual ELM corpora, and annotated eval sets (aligned and swapped).
//
// Source sentences are a voice marker (vf/vm), one or two neutral trigger
// tokens (t1..t8), and sorted content tokens (s*). Targets render each
// trigger as its gendered form (w<i>f / w<i>m by speaker gender) followed by
// the bijective translations (c*) of the content tokens. No gendered token
// ever appears on the source side, so gender information reaches the decoder
// only through the voice marker and the learned target-side prior.
//
// Every generator is a pure function of the config: repeated calls return
// identical data.
class SynthTask {
 public:
  static constexpr int kGenderedPairs = 16;
  static constexpr int kMinContentWords = 2;
  static constexpr int kMaxContentWords = 6;

  explicit SynthTask(const SynthTaskConfig& cfg);

  const SynthTaskConfig& config() const { return cfg_; }
  const Vocabulary& source_vocab() const { return src_vocab_; }
  const Vocabulary& target_vocab() const { return tgt_vocab_; }

  std::vector<SynthSample> generate_parallel() const;

  // Target-side sentences whose gendered slots all carry the requested
  // gender, matched to the parallel targets in shape.
  std::vector<TokenSeq> generate_monolingual(Gender g) const;

  // aligned: reference gender equals the voice; swapped: references carry
  // the opposite gender while the voice token is unchanged. Both conditions
  // share sentence ids, sources and content; only gendered surface forms
  // and term annotations differ.
  AnnotatedEvalSet generate_eval(EvalCondition condition) const;

  std::string gendered_form(int pair_index, Gender g) const;
  std::string voice_token(Gender g) const;

 private:
  struct Shape {
    std::vector<int> triggers;  // gendered-pair indices, ascending
    std::vector<int> content;   // content-pair indices, ascending
  };
  Shape draw_shape(SeededRng& rng) const;
  TokenSeq render_source(Gender voice, const Shape& shape) const;
  TokenSeq render_target(Gender g, const Shape& shape) const;

  SynthTaskConfig cfg_;
  Vocabulary src_vocab_;
  Vocabulary tgt_vocab_;
};

}  // namespace fusedec
