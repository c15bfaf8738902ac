#include "fusedec/seq2seq.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fusedec/util.hpp"

namespace fusedec {

namespace {

Eigen::VectorXd softmax(const Eigen::VectorXd& scores) {
  double mx = scores.maxCoeff();
  Eigen::VectorXd w = (scores.array() - mx).exp();
  return w / w.sum();
}

void glorot_init(Eigen::MatrixXd& m, SeededRng& rng) {
  double bound = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = rng.uniform(-bound, bound);
    }
  }
}

}  // namespace

ToySeq2Seq::ToySeq2Seq(const Seq2SeqDims& dims, int tgt_bos, int tgt_eos, uint64_t rng_seed)
    : dims_(dims), tgt_bos_(tgt_bos), tgt_eos_(tgt_eos) {
  if (dims.src_vocab < 1 || dims.tgt_vocab < 2 || dims.embed < 1 || dims.hidden < 1) {
    throw std::invalid_argument("bad model dimensions");
  }
  if (tgt_bos < 0 || tgt_bos >= dims.tgt_vocab || tgt_eos < 0 || tgt_eos >= dims.tgt_vocab ||
      tgt_bos == tgt_eos) {
    throw std::invalid_argument("bad target bos/eos ids");
  }
  src_embed_.resize(dims.src_vocab, dims.embed);
  enc_proj_.resize(dims.embed, dims.embed);
  enc_bias_ = Eigen::MatrixXd::Zero(dims.embed, 1);
  tgt_embed_.resize(dims.tgt_vocab, dims.embed);
  w_prev_.resize(dims.hidden, dims.embed);
  w_state_.resize(dims.hidden, dims.hidden);
  w_out_.resize(dims.tgt_vocab, dims.hidden + dims.embed);
  out_bias_ = Eigen::MatrixXd::Zero(dims.tgt_vocab, 1);

  SeededRng rng(rng_seed);
  glorot_init(src_embed_, rng);
  glorot_init(enc_proj_, rng);
  glorot_init(tgt_embed_, rng);
  glorot_init(w_prev_, rng);
  glorot_init(w_state_, rng);
  glorot_init(w_out_, rng);
}

ToySeq2Seq::ToySeq2Seq(const Vocabulary& src, const Vocabulary& tgt, int embed, int hidden,
                       uint64_t rng_seed)
    : ToySeq2Seq(Seq2SeqDims{src.size(), tgt.size(), embed, hidden},
                 tgt.bos_id(), tgt.eos_id(), rng_seed) {}

EncoderOutput ToySeq2Seq::encode(const TokenSeq& source) const {
  if (source.empty()) throw std::invalid_argument("empty source");
  EncoderOutput out;
  out.frames.resize(static_cast<Eigen::Index>(source.size()), dims_.embed);
  for (size_t t = 0; t < source.size(); ++t) {
    if (source[t] < 0 || source[t] >= dims_.src_vocab) {
      throw std::invalid_argument("source token id out of range");
    }
    Eigen::VectorXd x = src_embed_.row(source[t]).transpose();
    out.frames.row(static_cast<Eigen::Index>(t)) =
        (enc_proj_ * x + enc_bias_.col(0)).array().tanh().matrix().transpose();
  }
  return out;
}

ToySeq2Seq::DecoderState ToySeq2Seq::initial_state() const {
  DecoderState s;
  s.query = tgt_embed_.row(tgt_bos_).transpose();
  s.state = (w_prev_ * s.query).array().tanh().matrix();
  return s;
}

ToySeq2Seq::DecoderState ToySeq2Seq::advance(const DecoderState& prev, int token) const {
  if (token < 0 || token >= dims_.tgt_vocab) {
    throw std::invalid_argument("target token id out of range");
  }
  DecoderState s;
  s.query = tgt_embed_.row(token).transpose();
  s.state = (w_prev_ * s.query + w_state_ * prev.state).array().tanh().matrix();
  return s;
}

Eigen::VectorXd ToySeq2Seq::attention_weights(const EncoderOutput& enc,
                                              const Eigen::VectorXd& query) const {
  if (enc.dim() != dims_.embed) throw std::invalid_argument("encoder output dimension mismatch");
  if (enc.frame_count() < 1) throw std::invalid_argument("empty encoder output");
  return softmax(enc.frames * query);
}

LogProbDist ToySeq2Seq::output_dist(const DecoderState& s, const EncoderOutput& enc) const {
  Eigen::VectorXd alpha = attention_weights(enc, s.query);
  Eigen::VectorXd ctx = enc.frames.transpose() * alpha;
  Eigen::VectorXd cat(dims_.hidden + dims_.embed);
  cat << s.state, ctx;
  Eigen::VectorXd z = w_out_ * cat + out_bias_.col(0);
  std::vector<double> logits(z.data(), z.data() + z.size());
  return LogProbDist::from_logits(std::move(logits));
}

LogProbDist ToySeq2Seq::decoder_logprob_dist(const TokenSeq& prefix,
                                             const EncoderOutput& enc) const {
  DecoderState s = initial_state();
  for (int tok : prefix) s = advance(s, tok);
  return output_dist(s, enc);
}

double ToySeq2Seq::target_logprob_given(const EncoderOutput& enc, const TokenSeq& target,
                                        bool include_eos) const {
  DecoderState s = initial_state();
  double sum = 0.0;
  for (int tok : target) {
    sum += output_dist(s, enc)[static_cast<size_t>(tok)];
    s = advance(s, tok);
  }
  if (include_eos) sum += output_dist(s, enc)[static_cast<size_t>(tgt_eos_)];
  return sum;
}

double ToySeq2Seq::sequence_logprob(const TokenSeq& source, const TokenSeq& target) const {
  return target_logprob_given(encode(source), target, true);
}

// ---------------------------------------------------------------------------
// Training

struct ToySeq2Seq::Gradients {
  Eigen::MatrixXd src_embed, enc_proj, enc_bias, tgt_embed, w_prev, w_state, w_out, out_bias;

  explicit Gradients(const ToySeq2Seq& m)
      : src_embed(Eigen::MatrixXd::Zero(m.src_embed_.rows(), m.src_embed_.cols())),
        enc_proj(Eigen::MatrixXd::Zero(m.enc_proj_.rows(), m.enc_proj_.cols())),
        enc_bias(Eigen::MatrixXd::Zero(m.enc_bias_.rows(), 1)),
        tgt_embed(Eigen::MatrixXd::Zero(m.tgt_embed_.rows(), m.tgt_embed_.cols())),
        w_prev(Eigen::MatrixXd::Zero(m.w_prev_.rows(), m.w_prev_.cols())),
        w_state(Eigen::MatrixXd::Zero(m.w_state_.rows(), m.w_state_.cols())),
        w_out(Eigen::MatrixXd::Zero(m.w_out_.rows(), m.w_out_.cols())),
        out_bias(Eigen::MatrixXd::Zero(m.out_bias_.rows(), 1)) {}

  std::vector<Eigen::MatrixXd*> list() {
    return {&src_embed, &enc_proj, &enc_bias, &tgt_embed, &w_prev, &w_state, &w_out, &out_bias};
  }
};

std::vector<std::pair<const char*, Eigen::MatrixXd*>> ToySeq2Seq::param_list() {
  return {{"src_embed", &src_embed_}, {"enc_proj", &enc_proj_}, {"enc_bias", &enc_bias_},
          {"tgt_embed", &tgt_embed_}, {"w_prev", &w_prev_},     {"w_state", &w_state_},
          {"w_out", &w_out_},         {"out_bias", &out_bias_}};
}

double ToySeq2Seq::forward_backward(const TokenSeq& source, const TokenSeq& target,
                                    Gradients* grads) const {
  const int d = dims_.embed;
  const int h = dims_.hidden;
  EncoderOutput enc = encode(source);
  const Eigen::MatrixXd& frames = enc.frames;
  const int t_frames = enc.frame_count();

  // Step i consumes inputs[i] and predicts outputs[i].
  TokenSeq inputs{tgt_bos_};
  inputs.insert(inputs.end(), target.begin(), target.end());
  TokenSeq outputs = target;
  outputs.push_back(tgt_eos_);
  const int steps = static_cast<int>(inputs.size());

  std::vector<Eigen::VectorXd> e(steps), state(steps), alpha(steps), ctx(steps), prob(steps);
  double loss = 0.0;
  Eigen::VectorXd prev_state = Eigen::VectorXd::Zero(h);
  for (int i = 0; i < steps; ++i) {
    if (inputs[i] < 0 || inputs[i] >= dims_.tgt_vocab) {
      throw std::invalid_argument("target token id out of range");
    }
    e[i] = tgt_embed_.row(inputs[i]).transpose();
    state[i] = (w_prev_ * e[i] + w_state_ * prev_state).array().tanh().matrix();
    alpha[i] = softmax(frames * e[i]);
    ctx[i] = frames.transpose() * alpha[i];
    Eigen::VectorXd cat(h + d);
    cat << state[i], ctx[i];
    Eigen::VectorXd z = w_out_ * cat + out_bias_.col(0);
    double zmax = z.maxCoeff();
    double lse = zmax + std::log((z.array() - zmax).exp().sum());
    loss -= z[outputs[i]] - lse;
    prob[i] = (z.array() - lse).exp().matrix();
    prev_state = state[i];
  }
  const double inv_steps = 1.0 / steps;
  loss *= inv_steps;
  if (grads == nullptr) return loss;

  Eigen::MatrixXd d_frames = Eigen::MatrixXd::Zero(t_frames, d);
  Eigen::VectorXd d_pre_next = Eigen::VectorXd::Zero(h);  // via W_state from step i+1
  std::vector<Eigen::VectorXd> d_e(steps, Eigen::VectorXd::Zero(d));

  for (int i = steps - 1; i >= 0; --i) {
    Eigen::VectorXd dz = prob[i] * inv_steps;
    dz[outputs[i]] -= inv_steps;

    Eigen::VectorXd cat(h + d);
    cat << state[i], ctx[i];
    grads->w_out.noalias() += dz * cat.transpose();
    grads->out_bias.col(0) += dz;

    Eigen::VectorXd d_cat = w_out_.transpose() * dz;
    Eigen::VectorXd d_state = d_cat.head(h) + w_state_.transpose() * d_pre_next;
    Eigen::VectorXd d_ctx = d_cat.tail(d);

    // context and attention softmax
    Eigen::VectorXd d_alpha = frames * d_ctx;
    d_frames.noalias() += alpha[i] * d_ctx.transpose();
    Eigen::VectorXd d_scores = alpha[i].cwiseProduct(
        d_alpha - Eigen::VectorXd::Constant(alpha[i].size(), alpha[i].dot(d_alpha)));
    d_frames.noalias() += d_scores * e[i].transpose();
    d_e[i] += frames.transpose() * d_scores;

    // recurrence; state[-1] is zero, so step 0 contributes nothing to W_state
    Eigen::VectorXd d_pre = d_state.cwiseProduct(
        (1.0 - state[i].array().square()).matrix());
    grads->w_prev.noalias() += d_pre * e[i].transpose();
    if (i > 0) grads->w_state.noalias() += d_pre * state[i - 1].transpose();
    d_e[i] += w_prev_.transpose() * d_pre;
    d_pre_next = d_pre;
  }
  for (int i = 0; i < steps; ++i) grads->tgt_embed.row(inputs[i]) += d_e[i].transpose();

  // encoder
  for (int t = 0; t < t_frames; ++t) {
    Eigen::VectorXd f = frames.row(t).transpose();
    Eigen::VectorXd d_f = d_frames.row(t).transpose();
    Eigen::VectorXd d_u = d_f.cwiseProduct((1.0 - f.array().square()).matrix());
    Eigen::VectorXd x = src_embed_.row(source[t]).transpose();
    grads->enc_proj.noalias() += d_u * x.transpose();
    grads->enc_bias.col(0) += d_u;
    grads->src_embed.row(source[t]) += (enc_proj_.transpose() * d_u).transpose();
  }
  return loss;
}

void ToySeq2Seq::apply_update(Gradients& g, double lr, double grad_clip) {
  double sq = 0.0;
  for (auto* m : g.list()) sq += m->squaredNorm();
  double norm = std::sqrt(sq);
  double scale = (norm > grad_clip) ? grad_clip / norm : 1.0;
  auto params = param_list();
  auto gs = g.list();
  for (size_t i = 0; i < params.size(); ++i) {
    *params[i].second -= (lr * scale) * (*gs[i]);
  }
}

TrainResult ToySeq2Seq::train(const std::vector<TrainPair>& data, const TrainConfig& config) {
  if (data.empty()) throw std::invalid_argument("empty training data");
  if (config.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (!(config.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be > 0");
  if (!(config.grad_clip > 0.0)) throw std::invalid_argument("grad_clip must be > 0");

  SeededRng rng(config.rng_seed);
  std::vector<int> order(data.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  TrainResult result;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    int64_t token_count = 0;
    for (int idx : order) {
      const auto& [src, tgt] = data[static_cast<size_t>(idx)];
      Gradients grads(*this);
      double loss = forward_backward(src, tgt, &grads);
      if (!std::isfinite(loss)) throw NumericError("training diverged");
      apply_update(grads, config.learning_rate, config.grad_clip);
      int64_t steps = static_cast<int64_t>(tgt.size()) + 1;
      loss_sum += loss * static_cast<double>(steps);
      token_count += steps;
    }
    result.epoch_losses.push_back(loss_sum / static_cast<double>(token_count));
  }
  return result;
}

TrainResult ToySeq2Seq::fine_tune(const std::vector<TrainPair>& subset, const TrainConfig& config) {
  if (subset.empty()) throw std::invalid_argument("empty fine-tuning subset");
  return train(subset, config);
}

double ToySeq2Seq::pair_loss(const TokenSeq& source, const TokenSeq& target) const {
  return forward_backward(source, target, nullptr);
}

double ToySeq2Seq::numerical_grad_check(const TrainPair& pair, double epsilon) {
  if (!(epsilon >= 1e-6 && epsilon <= 1e-3)) {
    throw std::invalid_argument("epsilon must lie in [1e-6, 1e-3]");
  }
  Gradients analytic(*this);
  forward_backward(pair.first, pair.second, &analytic);
  auto params = param_list();
  auto gs = analytic.list();
  double max_rel = 0.0;
  for (size_t p = 0; p < params.size(); ++p) {
    Eigen::MatrixXd& m = *params[p].second;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        double orig = m(r, c);
        m(r, c) = orig + epsilon;
        double lp = forward_backward(pair.first, pair.second, nullptr);
        m(r, c) = orig - epsilon;
        double lm = forward_backward(pair.first, pair.second, nullptr);
        m(r, c) = orig;
        double g_n = (lp - lm) / (2.0 * epsilon);
        double g_a = (*gs[p])(r, c);
        double rel = std::abs(g_a - g_n) / std::max({std::abs(g_a), std::abs(g_n), 1e-8});
        max_rel = std::max(max_rel, rel);
      }
    }
  }
  return max_rel;
}

// ---------------------------------------------------------------------------
// Serialization: TOYS2S v1, decimal with 17 significant digits.

void ToySeq2Seq::save(const std::string& path) const {
  std::ostringstream out;
  out << "TOYS2S v1 " << dims_.src_vocab << ' ' << dims_.tgt_vocab << ' ' << dims_.embed << ' '
      << dims_.hidden << ' ' << tgt_bos_ << ' ' << tgt_eos_ << '\n';
  auto params = const_cast<ToySeq2Seq*>(this)->param_list();
  for (auto& [name, m] : params) {
    out << "param " << name << ' ' << m->rows() << ' ' << m->cols() << '\n';
    for (Eigen::Index r = 0; r < m->rows(); ++r) {
      for (Eigen::Index c = 0; c < m->cols(); ++c) {
        if (c) out << ' ';
        out << fmt_g17((*m)(r, c));
      }
      out << '\n';
    }
  }
  write_file(path, out.str());
}

ToySeq2Seq ToySeq2Seq::load(const std::string& path) {
  auto lines = read_lines(path);
  if (lines.empty()) throw DataError(path + ": empty model file");
  auto head = split_ws(lines[0]);
  if (head.size() != 8 || head[0] != "TOYS2S" || head[1] != "v1") {
    throw DataError(path + ": bad model header");
  }
  Seq2SeqDims dims;
  dims.src_vocab = static_cast<int>(parse_int(head[2], "src vocab"));
  dims.tgt_vocab = static_cast<int>(parse_int(head[3], "tgt vocab"));
  dims.embed = static_cast<int>(parse_int(head[4], "embed dim"));
  dims.hidden = static_cast<int>(parse_int(head[5], "hidden dim"));
  int bos = static_cast<int>(parse_int(head[6], "tgt bos"));
  int eos = static_cast<int>(parse_int(head[7], "tgt eos"));
  ToySeq2Seq model(dims, bos, eos, 0);

  size_t ln = 1;
  for (auto& [name, m] : model.param_list()) {
    if (ln >= lines.size()) throw DataError(path + ": truncated model file");
    auto fields = split_ws(lines[ln]);
    if (fields.size() != 4 || fields[0] != "param" || fields[1] != name) {
      throw DataError(path + ": expected param " + name + " at line " + std::to_string(ln + 1));
    }
    auto rows = parse_int(fields[2], "rows");
    auto cols = parse_int(fields[3], "cols");
    if (rows != m->rows() || cols != m->cols()) {
      throw DataError(path + ": dimension mismatch for param " + name);
    }
    ++ln;
    for (Eigen::Index r = 0; r < m->rows(); ++r, ++ln) {
      if (ln >= lines.size()) throw DataError(path + ": truncated model file");
      auto vals = split_ws(lines[ln]);
      if (vals.size() != static_cast<size_t>(m->cols())) {
        throw DataError(path + ": bad row width at line " + std::to_string(ln + 1));
      }
      for (Eigen::Index c = 0; c < m->cols(); ++c) {
        (*m)(r, c) = parse_double(vals[static_cast<size_t>(c)], name);
      }
    }
  }
  return model;
}

bool ToySeq2Seq::operator==(const ToySeq2Seq& other) const {
  auto a = const_cast<ToySeq2Seq*>(this)->param_list();
  auto b = const_cast<ToySeq2Seq&>(other).param_list();
  if (dims_.src_vocab != other.dims_.src_vocab || dims_.tgt_vocab != other.dims_.tgt_vocab ||
      dims_.embed != other.dims_.embed || dims_.hidden != other.dims_.hidden ||
      tgt_bos_ != other.tgt_bos_ || tgt_eos_ != other.tgt_eos_) {
    return false;
  }
  for (size_t i = 0; i < a.size(); ++i) {
    if (*a[i].second != *b[i].second) return false;
  }
  return true;
}

}  // namespace fusedec
