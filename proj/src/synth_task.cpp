#include "fusedec/synth_task.hpp"

#include <cstdio>
#include <stdexcept>

namespace fusedec {

namespace {

Vocabulary build_source_vocab(int lexicon_size) {
  std::vector<std::string> tokens{"<bos>", "<eos>", "<unk>", "vf", "vm"};
  for (int i = 0; i < SynthTask::kGenderedPairs; ++i) {
    tokens.push_back("t" + std::to_string(i + 1));
  }
  for (int i = 0; i < lexicon_size; ++i) {
    tokens.push_back("s" + std::to_string(i + 1));
  }
  return Vocabulary(std::move(tokens), 0, 1, 2);
}

Vocabulary build_target_vocab(int lexicon_size) {
  std::vector<std::string> tokens{"<bos>", "<eos>", "<unk>"};
  for (int i = 0; i < SynthTask::kGenderedPairs; ++i) {
    tokens.push_back("w" + std::to_string(i + 1) + "f");
    tokens.push_back("w" + std::to_string(i + 1) + "m");
  }
  for (int i = 0; i < lexicon_size; ++i) {
    tokens.push_back("c" + std::to_string(i + 1));
  }
  return Vocabulary(std::move(tokens), 0, 1, 2);
}

uint64_t derive_seed(uint64_t base, std::string_view tag) {
  return base ^ fnv1a64(tag);
}

}  // namespace

SynthTask::SynthTask(const SynthTaskConfig& cfg)
    : cfg_(cfg),
      src_vocab_(build_source_vocab(cfg.lexicon_size)),
      tgt_vocab_(build_target_vocab(cfg.lexicon_size)) {
  if (cfg.n_train < 1 || cfg.n_eval < 1) throw std::invalid_argument("counts must be >= 1");
  if (!(cfg.skew_rho >= 0.0 && cfg.skew_rho <= 1.0)) {
    throw std::invalid_argument("skew_rho must lie in [0, 1]");
  }
  if (!(cfg.voice_match_q >= 0.0 && cfg.voice_match_q <= 1.0)) {
    throw std::invalid_argument("voice_match_q must lie in [0, 1]");
  }
  if (cfg.gendered_slots < 1 || cfg.gendered_slots > kGenderedPairs) {
    throw std::invalid_argument("gendered_slots must lie in [1, " +
                                std::to_string(kGenderedPairs) + "]");
  }
  if (cfg.lexicon_size < kMaxContentWords) {
    throw std::invalid_argument("lexicon_size must be >= " + std::to_string(kMaxContentWords));
  }
}

std::string SynthTask::gendered_form(int pair_index, Gender g) const {
  return "w" + std::to_string(pair_index + 1) + (g == Gender::F ? "f" : "m");
}

std::string SynthTask::voice_token(Gender g) const { return g == Gender::F ? "vf" : "vm"; }

SynthTask::Shape SynthTask::draw_shape(SeededRng& rng) const {
  Shape shape;
  int slots = rng.uniform_int(1, cfg_.gendered_slots);
  shape.triggers = rng.sample_sorted(kGenderedPairs, slots);
  int words = rng.uniform_int(kMinContentWords, kMaxContentWords);
  shape.content = rng.sample_sorted(cfg_.lexicon_size, words);
  return shape;
}

TokenSeq SynthTask::render_source(Gender voice, const Shape& shape) const {
  TokenSeq src{src_vocab_.id_of(voice_token(voice))};
  for (int t : shape.triggers) src.push_back(src_vocab_.id_of("t" + std::to_string(t + 1)));
  for (int c : shape.content) src.push_back(src_vocab_.id_of("s" + std::to_string(c + 1)));
  return src;
}

TokenSeq SynthTask::render_target(Gender g, const Shape& shape) const {
  TokenSeq tgt;
  for (int t : shape.triggers) tgt.push_back(tgt_vocab_.id_of(gendered_form(t, g)));
  for (int c : shape.content) tgt.push_back(tgt_vocab_.id_of("c" + std::to_string(c + 1)));
  return tgt;
}

std::vector<SynthSample> SynthTask::generate_parallel() const {
  SeededRng rng(derive_seed(cfg_.rng_seed, "parallel"));
  std::vector<SynthSample> samples;
  samples.reserve(static_cast<size_t>(cfg_.n_train));
  for (int i = 0; i < cfg_.n_train; ++i) {
    SynthSample s;
    s.speaker_gender = rng.bernoulli(cfg_.skew_rho) ? Gender::M : Gender::F;
    s.voice = rng.bernoulli(cfg_.voice_match_q) ? s.speaker_gender : opposite(s.speaker_gender);
    Shape shape = draw_shape(rng);
    s.source = render_source(s.voice, shape);
    s.target = render_target(s.speaker_gender, shape);
    samples.push_back(std::move(s));
  }
  return samples;
}

std::vector<TokenSeq> SynthTask::generate_monolingual(Gender g) const {
  SeededRng rng(derive_seed(cfg_.rng_seed, g == Gender::F ? "mono-f" : "mono-m"));
  std::vector<TokenSeq> corpus;
  corpus.reserve(static_cast<size_t>(cfg_.n_train));
  for (int i = 0; i < cfg_.n_train; ++i) {
    corpus.push_back(render_target(g, draw_shape(rng)));
  }
  return corpus;
}

AnnotatedEvalSet SynthTask::generate_eval(EvalCondition condition) const {
  SeededRng rng(derive_seed(cfg_.rng_seed, "eval"));
  AnnotatedEvalSet set;
  set.reserve(static_cast<size_t>(cfg_.n_eval));
  for (int i = 0; i < cfg_.n_eval; ++i) {
    // Voice alternates deterministically; the shape draw is shared by both
    // conditions so aligned and swapped sets differ only in gendered forms.
    Gender voice = (i % 2 == 0) ? Gender::F : Gender::M;
    Shape shape = draw_shape(rng);
    Gender ref_gender = (condition == EvalCondition::aligned) ? voice : opposite(voice);

    AnnotatedSentence sent;
    char id[24];
    std::snprintf(id, sizeof(id), "syn-%04d", i);
    sent.id = id;
    sent.source = src_vocab_.decode(render_source(voice, shape));
    sent.reference = tgt_vocab_.decode(render_target(ref_gender, shape));
    for (int t : shape.triggers) {
      AnnotatedTerm term;
      term.correct_form = gendered_form(t, ref_gender);
      term.wrong_form = gendered_form(t, opposite(ref_gender));
      term.gender = ref_gender;
      sent.terms.push_back(std::move(term));
    }
    set.push_back(std::move(sent));
  }
  return set;
}

}  // namespace fusedec
