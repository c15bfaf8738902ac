#include "fusedec/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "fusedec/util.hpp"

namespace fusedec {

EncoderOutput IlmContext::as_encoder_output() const {
  EncoderOutput out;
  out.frames = c.transpose();
  return out;
}

void IlmContext::save(const std::string& path) const {
  std::ostringstream out;
  out << "ILMCTX v1 " << c.size() << ' ' << frames_total << ' ' << samples_total << '\n';
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (i) out << ' ';
    out << fmt_g17(c[i]);
  }
  out << '\n';
  write_file(path, out.str());
}

IlmContext IlmContext::load(const std::string& path) {
  auto lines = read_lines(path);
  if (lines.size() < 2) throw DataError(path + ": truncated ILM context file");
  auto head = split_ws(lines[0]);
  if (head.size() != 5 || head[0] != "ILMCTX" || head[1] != "v1") {
    throw DataError(path + ": bad ILM context header");
  }
  auto d = parse_int(head[2], "dim");
  IlmContext ctx;
  ctx.frames_total = parse_int(head[3], "frames_total");
  ctx.samples_total = parse_int(head[4], "samples_total");
  auto vals = split_ws(lines[1]);
  if (vals.size() != static_cast<size_t>(d)) throw DataError(path + ": bad context width");
  ctx.c.resize(d);
  for (size_t i = 0; i < vals.size(); ++i) {
    ctx.c[static_cast<Eigen::Index>(i)] = parse_double(vals[i], "context value");
  }
  return ctx;
}

IlmContext ilm_context_from_outputs(const std::vector<EncoderOutput>& outputs) {
  if (outputs.empty()) throw std::invalid_argument("empty encoder output list");
  const int d = outputs.front().dim();
  IlmContext ctx;
  ctx.c = Eigen::VectorXd::Zero(d);
  for (const auto& out : outputs) {
    if (out.dim() != d) throw std::invalid_argument("encoder output dimension mismatch");
    if (out.frame_count() < 1) throw std::invalid_argument("empty encoder output");
    ctx.c += out.frames.colwise().sum().transpose();
    ctx.frames_total += out.frame_count();
    ctx.samples_total += 1;
  }
  ctx.c /= static_cast<double>(ctx.frames_total);
  return ctx;
}

IlmContext compute_ilm_context(const ToySeq2Seq& model,
                               const std::vector<TokenSeq>& training_sources) {
  if (training_sources.empty()) throw std::invalid_argument("empty training sources");
  std::vector<EncoderOutput> outputs;
  outputs.reserve(training_sources.size());
  for (const auto& src : training_sources) outputs.push_back(model.encode(src));
  return ilm_context_from_outputs(outputs);
}

LogProbDist ilm_logprob_dist(const ToySeq2Seq& model, const IlmContext& ctx,
                             const TokenSeq& prefix) {
  if (ctx.c.size() != model.dims().embed) {
    throw std::invalid_argument("ILM context dimension mismatch");
  }
  return model.decoder_logprob_dist(prefix, ctx.as_encoder_output());
}

std::vector<double> fused_step_scores(const LogProbDist& base, const LogProbDist& ilm,
                                      const LogProbDist& elm, const FusionWeights& w) {
  if (base.size() != ilm.size() || base.size() != elm.size()) {
    throw std::invalid_argument("distribution length mismatch");
  }
  std::vector<double> scores(base.size());
  for (size_t i = 0; i < scores.size(); ++i) {
    scores[i] = base[i] - w.beta_ilm * ilm[i] + w.beta_elm * elm[i];
  }
  return scores;
}

namespace {

struct Hyp {
  TokenSeq surface;
  ToySeq2Seq::DecoderState state;
  double base = 0.0, ilm = 0.0, elm = 0.0, fused = 0.0;
};

struct Finished {
  TokenSeq surface;
  double base = 0.0, ilm = 0.0, elm = 0.0, fused = 0.0;
};

struct Candidate {
  TokenSeq surface;  // including the new token unless it is EOS
  int parent = 0;
  int token = 0;
  double base = 0.0, ilm = 0.0, elm = 0.0, fused = 0.0;
};

// Higher fused score first; equal scores prefer the lexicographically
// smaller surface (which also prefers prefixes, i.e. shorter sequences).
bool candidate_better(const Candidate& a, const Candidate& b) {
  if (a.fused != b.fused) return a.fused > b.fused;
  return a.surface < b.surface;
}

// The search engine behind both fused and base-only decoding. ilm_frame and
// elm may be null; a component is scored only when present and its weight is
// nonzero, which keeps (0,0) fusion arithmetic bit-identical to base-only
// search.
DecodeResult run_beam(const ToySeq2Seq& model, const EncoderOutput& enc,
                      const EncoderOutput* ilm_frame, const NGramLM* elm,
                      const FusionWeights& w, const DecodeOptions& opts) {
  if (opts.beam < 1) throw std::invalid_argument("beam must be >= 1");
  if (opts.max_len < 1) throw std::invalid_argument("max_len must be >= 1");
  const int v = model.dims().tgt_vocab;
  const int eos = model.tgt_eos();
  const bool use_ilm = ilm_frame != nullptr && w.beta_ilm != 0.0;
  const bool use_elm = elm != nullptr && w.beta_elm != 0.0;

  std::vector<Hyp> live;
  live.push_back(Hyp{{}, model.initial_state(), 0.0, 0.0, 0.0, 0.0});
  std::vector<Finished> finished;

  auto finish_with_eos = [&](const Hyp& h) {
    LogProbDist base_dist = model.output_dist(h.state, enc);
    Finished f;
    f.surface = h.surface;
    f.base = h.base + base_dist[static_cast<size_t>(eos)];
    f.ilm = h.ilm;
    f.elm = h.elm;
    f.fused = h.fused + base_dist[static_cast<size_t>(eos)];
    if (opts.fuse_eos) {
      if (use_ilm) {
        double s = model.output_dist(h.state, *ilm_frame)[static_cast<size_t>(eos)];
        f.ilm += s;
        f.fused -= w.beta_ilm * s;
      }
      if (use_elm) {
        double s = elm->next_logprob(h.surface)[static_cast<size_t>(eos)];
        f.elm += s;
        f.fused += w.beta_elm * s;
      }
    }
    finished.push_back(std::move(f));
  };

  for (int pos = 0; pos < opts.max_len && !live.empty(); ++pos) {
    std::vector<Candidate> candidates;
    candidates.reserve(live.size() * static_cast<size_t>(v));
    for (size_t hi = 0; hi < live.size(); ++hi) {
      const Hyp& h = live[hi];
      LogProbDist base_dist = model.output_dist(h.state, enc);
      std::optional<LogProbDist> ilm_dist;
      std::optional<LogProbDist> elm_dist;
      if (use_ilm) ilm_dist = model.output_dist(h.state, *ilm_frame);
      if (use_elm) elm_dist = elm->next_logprob(h.surface);
      for (int tok = 0; tok < v; ++tok) {
        Candidate c;
        c.parent = static_cast<int>(hi);
        c.token = tok;
        c.surface = h.surface;
        if (tok != eos) c.surface.push_back(tok);
        const bool apply = opts.fuse_eos || tok != eos;
        double sb = base_dist[static_cast<size_t>(tok)];
        c.base = h.base + sb;
        c.ilm = h.ilm;
        c.elm = h.elm;
        c.fused = h.fused + sb;
        if (use_ilm && apply) {
          double s = (*ilm_dist)[static_cast<size_t>(tok)];
          c.ilm += s;
          c.fused -= w.beta_ilm * s;
        }
        if (use_elm && apply) {
          double s = (*elm_dist)[static_cast<size_t>(tok)];
          c.elm += s;
          c.fused += w.beta_elm * s;
        }
        candidates.push_back(std::move(c));
      }
    }
    std::sort(candidates.begin(), candidates.end(), candidate_better);
    std::vector<Hyp> next;
    size_t keep = std::min(candidates.size(), static_cast<size_t>(opts.beam));
    for (size_t i = 0; i < keep; ++i) {
      Candidate& c = candidates[i];
      if (c.token == eos) {
        finished.push_back(Finished{std::move(c.surface), c.base, c.ilm, c.elm, c.fused});
      } else {
        Hyp h;
        h.state = model.advance(live[static_cast<size_t>(c.parent)].state, c.token);
        h.surface = std::move(c.surface);
        h.base = c.base;
        h.ilm = c.ilm;
        h.elm = c.elm;
        h.fused = c.fused;
        next.push_back(std::move(h));
      }
    }
    live = std::move(next);
  }
  for (const Hyp& h : live) finish_with_eos(h);

  auto rank_key = [&](const Finished& f) {
    return opts.length_norm ? f.fused / static_cast<double>(f.surface.size() + 1) : f.fused;
  };
  const Finished* best = &finished.front();
  double best_key = rank_key(*best);
  for (const Finished& f : finished) {
    double key = rank_key(f);
    if (key > best_key || (key == best_key && f.surface < best->surface)) {
      best = &f;
      best_key = key;
    }
  }

  DecodeResult result;
  result.tokens = best->surface;
  result.base_score = best->base;
  result.ilm_score = best->ilm;
  result.elm_score = best->elm;
  result.fused_score = best->fused;
  // Components skipped during search (zero weight) are filled in by a fresh
  // pass so the breakdown is always meaningful.
  if (ilm_frame != nullptr && !use_ilm) {
    result.ilm_score = model.target_logprob_given(*ilm_frame, result.tokens, opts.fuse_eos);
  }
  if (elm != nullptr && !use_elm) {
    result.elm_score = elm->sequence_logprob(result.tokens, opts.fuse_eos);
  }
  return result;
}

}  // namespace

DecodeResult beam_search(const ToySeq2Seq& model, const IlmContext& ctx, const NGramLM& elm,
                         const TokenSeq& source, const FusionWeights& w,
                         const DecodeOptions& opts) {
  if (ctx.c.size() != model.dims().embed) {
    throw std::invalid_argument("ILM context dimension mismatch");
  }
  EncoderOutput enc = model.encode(source);
  EncoderOutput ilm_frame = ctx.as_encoder_output();
  return run_beam(model, enc, &ilm_frame, &elm, w, opts);
}

DecodeResult beam_search_base(const ToySeq2Seq& model, const TokenSeq& source,
                              const DecodeOptions& opts) {
  EncoderOutput enc = model.encode(source);
  return run_beam(model, enc, nullptr, nullptr, FusionWeights(), opts);
}

DecodeResult exhaustive_decode(const ToySeq2Seq& model, const IlmContext& ctx, const NGramLM& elm,
                               const TokenSeq& source, const FusionWeights& w,
                               const DecodeOptions& opts) {
  const int v = model.dims().tgt_vocab;
  double space = std::pow(static_cast<double>(v), static_cast<double>(opts.max_len));
  if (space > 1e6) throw std::invalid_argument("search space too large");

  EncoderOutput enc = model.encode(source);
  EncoderOutput ilm_frame = ctx.as_encoder_output();
  const int eos = model.tgt_eos();

  std::optional<DecodeResult> best;
  auto rank_key = [&](const DecodeResult& r) {
    return opts.length_norm ? r.fused_score / static_cast<double>(r.tokens.size() + 1)
                            : r.fused_score;
  };
  TokenSeq surface;

  auto score_current = [&]() {
    DecodeResult r;
    r.tokens = surface;
    r.base_score = model.target_logprob_given(enc, surface, true);
    r.ilm_score = model.target_logprob_given(ilm_frame, surface, opts.fuse_eos);
    r.elm_score = elm.sequence_logprob(surface, opts.fuse_eos);
    r.fused_score = r.base_score - w.beta_ilm * r.ilm_score + w.beta_elm * r.elm_score;
    if (!best || rank_key(r) > rank_key(*best) ||
        (rank_key(r) == rank_key(*best) && r.tokens < best->tokens)) {
      best = std::move(r);
    }
  };

  auto enumerate = [&](auto&& self, int depth) -> void {
    score_current();
    if (depth == opts.max_len) return;
    for (int tok = 0; tok < v; ++tok) {
      if (tok == eos) continue;
      surface.push_back(tok);
      self(self, depth + 1);
      surface.pop_back();
    }
  };
  enumerate(enumerate, 0);
  return *best;
}

}  // namespace fusedec
