#include "fusedec/ngram_lm.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fusedec/util.hpp"

namespace fusedec {

NGramLM::NGramLM(int order, double k, int vocab_size, int bos_id, int eos_id)
    : order_(order), k_(k), vocab_size_(vocab_size), bos_id_(bos_id), eos_id_(eos_id) {
  if (order_ < 1) throw std::invalid_argument("order must be >= 1");
  if (!(k_ > 0.0)) throw std::invalid_argument("smoothing k must be > 0");
  if (vocab_size_ < 2) throw std::invalid_argument("vocab too small");
}

NGramLM NGramLM::train(const std::vector<TokenSeq>& corpus, int order, double k,
                       const Vocabulary& vocab) {
  return train(corpus, order, k, vocab.size(), vocab.bos_id(), vocab.eos_id());
}

NGramLM NGramLM::train(const std::vector<TokenSeq>& corpus, int order, double k, int vocab_size,
                       int bos_id, int eos_id) {
  if (corpus.empty()) throw std::invalid_argument("empty corpus");
  NGramLM lm(order, k, vocab_size, bos_id, eos_id);
  for (const auto& seq : corpus) {
    for (int id : seq) {
      if (id < 0 || id >= vocab_size) {
        throw std::invalid_argument("token id out of range in corpus");
      }
    }
    TokenSeq padded(static_cast<size_t>(order - 1), bos_id);
    padded.insert(padded.end(), seq.begin(), seq.end());
    padded.push_back(eos_id);
    for (size_t i = static_cast<size_t>(order - 1); i < padded.size(); ++i) {
      TokenSeq ctx(padded.begin() + i - (order - 1), padded.begin() + i);
      lm.add_event(ctx, padded[i]);
    }
  }
  return lm;
}

void NGramLM::add_event(const TokenSeq& ctx, int token) {
  counts_[ctx][token] += 1;
  totals_[ctx] += 1;
}

TokenSeq NGramLM::context_of(const TokenSeq& prefix) const {
  size_t n = static_cast<size_t>(order_ - 1);
  TokenSeq ctx;
  ctx.reserve(n);
  if (prefix.size() >= n) {
    ctx.assign(prefix.end() - n, prefix.end());
  } else {
    ctx.assign(n - prefix.size(), bos_id_);
    ctx.insert(ctx.end(), prefix.begin(), prefix.end());
  }
  return ctx;
}

double NGramLM::token_logprob(const TokenSeq& ctx, int token) const {
  int64_t total = 0;
  int64_t count = 0;
  auto t = totals_.find(ctx);
  if (t != totals_.end()) {
    total = t->second;
    const auto& per_token = counts_.at(ctx);
    auto c = per_token.find(token);
    if (c != per_token.end()) count = c->second;
  }
  return std::log((static_cast<double>(count) + k_) /
                  (static_cast<double>(total) + k_ * vocab_size_));
}

LogProbDist NGramLM::next_logprob(const TokenSeq& prefix) const {
  TokenSeq ctx = context_of(prefix);
  std::vector<double> logp(static_cast<size_t>(vocab_size_));
  for (int w = 0; w < vocab_size_; ++w) logp[w] = token_logprob(ctx, w);
  return LogProbDist::from_normalized(std::move(logp));
}

double NGramLM::sequence_logprob(const TokenSeq& seq, bool include_eos) const {
  double sum = 0.0;
  TokenSeq prefix;
  prefix.reserve(seq.size());
  for (int tok : seq) {
    sum += token_logprob(context_of(prefix), tok);
    prefix.push_back(tok);
  }
  if (include_eos) sum += token_logprob(context_of(prefix), eos_id_);
  return sum;
}

void NGramLM::save(const std::string& path) const {
  std::ostringstream out;
  out << "NGRAM v1 " << order_ << ' ' << fmt_g17(k_) << ' ' << vocab_size_ << ' '
      << bos_id_ << ' ' << eos_id_ << '\n';
  for (const auto& [ctx, per_token] : counts_) {
    for (const auto& [token, count] : per_token) {
      for (int id : ctx) out << id << ' ';
      out << token << ' ' << count << '\n';
    }
  }
  write_file(path, out.str());
}

NGramLM NGramLM::load(const std::string& path) {
  auto lines = read_lines(path);
  if (lines.empty()) throw DataError(path + ": empty model file");
  auto head = split_ws(lines[0]);
  if (head.size() != 7 || head[0] != "NGRAM" || head[1] != "v1") {
    throw DataError(path + ": bad n-gram header");
  }
  int order = static_cast<int>(parse_int(head[2], "order"));
  double k = parse_double(head[3], "k");
  int v = static_cast<int>(parse_int(head[4], "vocab size"));
  int bos = static_cast<int>(parse_int(head[5], "bos id"));
  int eos = static_cast<int>(parse_int(head[6], "eos id"));
  NGramLM lm(order, k, v, bos, eos);
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto fields = split_ws(lines[i]);
    if (fields.size() != static_cast<size_t>(order + 1)) {
      throw DataError(path + ": bad entry at line " + std::to_string(i + 1));
    }
    TokenSeq ctx;
    for (int j = 0; j < order - 1; ++j) {
      ctx.push_back(static_cast<int>(parse_int(fields[j], "context id")));
    }
    int token = static_cast<int>(parse_int(fields[order - 1], "token id"));
    int64_t count = parse_int(fields[order], "count");
    if (count < 1) throw DataError(path + ": nonpositive count at line " + std::to_string(i + 1));
    lm.counts_[ctx][token] = count;
    lm.totals_[ctx] += count;
  }
  return lm;
}

}  // namespace fusedec
