// fusedec: gender-controlled fusion decoding toolkit.
//
// Subcommands cover the full experimental pipeline: synthetic task
// generation, base/specialized model training, ELM training, ILM context
// estimation, fused decoding, evaluation, beta tuning, corpus extraction,
// and the end-to-end experiment.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "fusedec/beta_tuner.hpp"
#include "fusedec/bleu.hpp"
#include "fusedec/corpus_extract.hpp"
#include "fusedec/experiment.hpp"
#include "fusedec/fusion.hpp"
#include "fusedec/gender_eval.hpp"
#include "fusedec/ngram_lm.hpp"
#include "fusedec/seq2seq.hpp"
#include "fusedec/synth_task.hpp"
#include "fusedec/util.hpp"
#include "fusedec/vocab.hpp"

namespace {

using namespace fusedec;
using nlohmann::ordered_json;

std::vector<TrainPair> load_pairs(const std::string& src_path, const std::string& tgt_path,
                                  const Vocabulary& src_vocab, const Vocabulary& tgt_vocab) {
  auto src_lines = read_lines(src_path);
  auto tgt_lines = read_lines(tgt_path);
  if (src_lines.size() != tgt_lines.size()) {
    throw DataError("parallel files differ in length: " + src_path + " vs " + tgt_path);
  }
  if (src_lines.empty()) throw DataError("empty parallel data: " + src_path);
  std::vector<TrainPair> pairs;
  pairs.reserve(src_lines.size());
  for (size_t i = 0; i < src_lines.size(); ++i) {
    pairs.emplace_back(src_vocab.encode(src_lines[i]), tgt_vocab.encode(tgt_lines[i]));
  }
  return pairs;
}

struct TrainFlags {
  std::string src, tgt, src_vocab, tgt_vocab, out;
  double lr = 0.1;
  int epochs = 30;
  uint64_t seed = 7;
  double grad_clip = 5.0;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--src", f.src, "source-side training text")->required();
  cmd->add_option("--tgt", f.tgt, "target-side training text")->required();
  cmd->add_option("--src-vocab", f.src_vocab, "source vocabulary file")->required();
  cmd->add_option("--tgt-vocab", f.tgt_vocab, "target vocabulary file")->required();
  cmd->add_option("--out", f.out, "output model path")->required();
  cmd->add_option("--lr", f.lr, "learning rate");
  cmd->add_option("--epochs", f.epochs, "training epochs");
  cmd->add_option("--seed", f.seed, "rng seed");
  cmd->add_option("--grad-clip", f.grad_clip, "gradient norm clip");
}

void finish_train(const TrainFlags& f, ToySeq2Seq& model, const TrainResult& result,
                  const std::string& command) {
  model.save(f.out);
  ordered_json manifest = manifest_base(command);
  manifest["config"] = {{"lr", f.lr},
                        {"epochs", f.epochs},
                        {"seed", f.seed},
                        {"grad_clip", f.grad_clip}};
  manifest["metrics"]["final_epoch_loss"] = result.epoch_losses.back();
  manifest_add_file(manifest, "inputs", f.src);
  manifest_add_file(manifest, "inputs", f.tgt);
  manifest_add_file(manifest, "outputs", f.out);
  write_manifest(manifest, f.out + ".manifest.json");
  std::printf("final mean per-token loss: %s\n", fmt_g17(result.epoch_losses.back()).c_str());
}

int cmd_gen_task(const SynthTaskConfig& cfg, const std::string& out_dir) {
  SynthTask task(cfg);
  auto paths = emit_task_files(task, out_dir);
  std::printf("wrote %zu files under %s\n", paths.size(), out_dir.c_str());
  return 0;
}

int cmd_decode(const std::string& model_path, const std::string& ctx_path,
               const std::string& elm_path, const std::string& src_vocab_path,
               const std::string& tgt_vocab_path, double beta_ilm, double beta_elm,
               const DecodeOptions& opts, const std::string& input, const std::string& output) {
  ToySeq2Seq model = ToySeq2Seq::load(model_path);
  IlmContext ctx = IlmContext::load(ctx_path);
  NGramLM elm = NGramLM::load(elm_path);
  Vocabulary src_vocab = Vocabulary::load(src_vocab_path);
  Vocabulary tgt_vocab = Vocabulary::load(tgt_vocab_path);
  FusionWeights weights(beta_ilm, beta_elm);

  std::vector<std::string> hyps;
  for (const auto& line : read_lines(input)) {
    DecodeResult r = beam_search(model, ctx, elm, src_vocab.encode(line), weights, opts);
    hyps.push_back(tgt_vocab.decode(r.tokens));
  }
  write_lines(output, hyps);

  ordered_json manifest = manifest_base("decode");
  manifest["config"] = {{"beta_ilm", beta_ilm},     {"beta_elm", beta_elm},
                        {"beam", opts.beam},        {"max_len", opts.max_len},
                        {"length_norm", opts.length_norm}, {"fuse_eos", opts.fuse_eos}};
  manifest_add_file(manifest, "inputs", model_path);
  manifest_add_file(manifest, "inputs", ctx_path);
  manifest_add_file(manifest, "inputs", elm_path);
  manifest_add_file(manifest, "inputs", input);
  manifest_add_file(manifest, "outputs", output);
  write_manifest(manifest, output + ".manifest.json");
  return 0;
}

std::string opt_pct(const std::optional<double>& v) {
  return v ? fmt_g17(*v * 100.0) : std::string("-");
}

int cmd_evaluate(const std::string& hyp_path, const std::string& set_path,
                 const std::string& prefix) {
  auto hyps = read_lines(hyp_path);
  AnnotatedEvalSet set = parse_eval_set(set_path);
  if (hyps.size() != set.size()) {
    throw DataError("hypothesis count (" + std::to_string(hyps.size()) +
                    ") does not match eval set (" + std::to_string(set.size()) + ")");
  }
  std::vector<std::string> refs;
  for (const auto& s : set) refs.push_back(s.reference);
  double bleu = bleu_corpus(hyps, refs);
  GenderScores scores = score_gender(hyps, set);

  std::ostringstream txt;
  txt << "bleu=" << fmt_g17(bleu) << '\n';
  txt << "bleu_signature=" << kBleuSignature << '\n';
  txt << "coverage_f=" << opt_pct(scores.f.coverage()) << '\n';
  txt << "coverage_m=" << opt_pct(scores.m.coverage()) << '\n';
  txt << "accuracy_f=" << opt_pct(scores.f.accuracy()) << '\n';
  txt << "accuracy_m=" << opt_pct(scores.m.accuracy()) << '\n';
  txt << "pooled_accuracy=" << opt_pct(scores.pooled_accuracy()) << '\n';
  txt << "terms_f=" << scores.f.total << " correct_f=" << scores.f.correct
      << " wrong_f=" << scores.f.wrong << '\n';
  txt << "terms_m=" << scores.m.total << " correct_m=" << scores.m.correct
      << " wrong_m=" << scores.m.wrong << '\n';
  write_file(prefix + ".txt", txt.str());

  ordered_json manifest = manifest_base("evaluate");
  manifest_add_file(manifest, "inputs", hyp_path);
  manifest_add_file(manifest, "inputs", set_path);
  ordered_json record;
  record["type"] = "evaluation";
  record["bleu"] = bleu;
  record["bleu_signature"] = kBleuSignature;
  auto counts_json = [](const GenderCounts& c) {
    ordered_json j;
    j["total"] = c.total;
    j["correct"] = c.correct;
    j["wrong"] = c.wrong;
    j["coverage"] = c.coverage() ? ordered_json(*c.coverage()) : ordered_json(nullptr);
    j["accuracy"] = c.accuracy() ? ordered_json(*c.accuracy()) : ordered_json(nullptr);
    return j;
  };
  record["gender_f"] = counts_json(scores.f);
  record["gender_m"] = counts_json(scores.m);
  record["pooled_accuracy"] =
      scores.pooled_accuracy() ? ordered_json(*scores.pooled_accuracy()) : ordered_json(nullptr);
  std::ostringstream jsonl;
  ordered_json mrec = manifest;
  mrec["type"] = "manifest";
  jsonl << mrec.dump() << '\n' << record.dump() << '\n';
  write_file(prefix + ".jsonl", jsonl.str());
  std::printf("%s", txt.str().c_str());
  return 0;
}

int cmd_tune_betas(const std::string& model_path, const std::string& ctx_path,
                   const std::string& elm_path, const std::string& src_vocab_path,
                   const std::string& tgt_vocab_path, const std::string& set_path,
                   double grid_step, int folds, int threads, const DecodeOptions& opts,
                   const std::string& prefix) {
  ToySeq2Seq model = ToySeq2Seq::load(model_path);
  IlmContext ctx = IlmContext::load(ctx_path);
  NGramLM elm = NGramLM::load(elm_path);
  Vocabulary src_vocab = Vocabulary::load(src_vocab_path);
  Vocabulary tgt_vocab = Vocabulary::load(tgt_vocab_path);
  AnnotatedEvalSet set = parse_eval_set(set_path);

  DecoderBundle bundle{&model, &ctx, &elm, &src_vocab, &tgt_vocab, opts};
  DecodeMatrix matrix = build_decode_matrix(bundle, set, grid_step, threads);
  std::vector<GridPoint> points = score_matrix(matrix, set);

  std::ostringstream csv;
  write_heatmap_csv(points, csv);
  write_file(prefix + ".heatmap.csv", csv.str());

  TuneResult tuned = cross_validated_tune(matrix, set, folds);
  write_lines(prefix + ".stitched.txt", tuned.stitched_hyps);
  std::vector<std::string> refs;
  for (const auto& s : set) refs.push_back(s.reference);
  double stitched_bleu = bleu_corpus(tuned.stitched_hyps, refs);
  double stitched_acc = score_gender(tuned.stitched_hyps, set).pooled_accuracy().value_or(0.0);

  ordered_json manifest = manifest_base("tune-betas");
  manifest["config"] = {{"grid_step", grid_step},
                        {"folds", folds},
                        {"beam", opts.beam},
                        {"max_len", opts.max_len},
                        {"length_norm", opts.length_norm},
                        {"fuse_eos", opts.fuse_eos}};
  manifest_add_file(manifest, "inputs", model_path);
  manifest_add_file(manifest, "inputs", ctx_path);
  manifest_add_file(manifest, "inputs", elm_path);
  manifest_add_file(manifest, "inputs", set_path);
  manifest_add_file(manifest, "outputs", prefix + ".heatmap.csv");
  manifest_add_file(manifest, "outputs", prefix + ".stitched.txt");

  std::ostringstream jsonl;
  ordered_json mrec = manifest;
  mrec["type"] = "manifest";
  jsonl << mrec.dump() << '\n';
  ordered_json rec;
  rec["type"] = "tuning";
  ordered_json fold_sel = ordered_json::array();
  for (const auto& w : tuned.fold_selections) {
    fold_sel.push_back({{"beta_ilm", w.beta_ilm}, {"beta_elm", w.beta_elm}});
  }
  rec["fold_selections"] = fold_sel;
  rec["mean_betas"] = {{"beta_ilm", tuned.mean_weights.beta_ilm},
                       {"beta_elm", tuned.mean_weights.beta_elm}};
  rec["stitched_bleu"] = stitched_bleu;
  rec["stitched_pooled_accuracy"] = stitched_acc;
  const GridPoint& best = select_best(points);
  rec["full_set_best"] = {{"beta_ilm", best.weights.beta_ilm},
                          {"beta_elm", best.weights.beta_elm},
                          {"bleu", best.bleu},
                          {"accuracy", best.accuracy},
                          {"hmean", best.hmean}};
  jsonl << rec.dump() << '\n';
  write_file(prefix + ".tuning.jsonl", jsonl.str());

  std::printf("grid points: %zu\n", points.size());
  std::printf("mean betas: beta_ilm=%s beta_elm=%s\n", fmt_g17(tuned.mean_weights.beta_ilm).c_str(),
              fmt_g17(tuned.mean_weights.beta_elm).c_str());
  std::printf("stitched: bleu=%s pooled_accuracy=%s\n", fmt_g17(stitched_bleu).c_str(),
              fmt_g17(stitched_acc).c_str());
  return 0;
}

int cmd_extract(const std::string& patterns_path, const std::string& input,
                const std::string& out_f, const std::string& out_m, const std::string& stats_path) {
  PatternSet patterns = load_patterns(patterns_path);
  std::ifstream in(input, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + input);
  std::ofstream f_out(out_f, std::ios::binary);
  std::ofstream m_out(out_m, std::ios::binary);
  if (!f_out || !m_out) throw DataError("cannot open output corpus files");
  ExtractCounts counts = extract(in, patterns, f_out, m_out);
  f_out.close();
  m_out.close();

  std::ifstream f_in(out_f, std::ios::binary);
  std::ifstream m_in(out_m, std::ios::binary);
  CorpusStats stats = corpus_stats(f_in, m_in);
  std::ostringstream txt;
  txt << corpus_stats_text(stats);
  txt << "ambiguous " << counts.ambiguous << "\n";
  txt << "unmatched " << counts.unmatched << "\n";
  write_file(stats_path, txt.str());
  std::printf("%s", txt.str().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gender-controlled fusion decoding toolkit"};
  app.require_subcommand(1);

  // gen-task
  SynthTaskConfig task_cfg;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-task", "generate a synthetic translation task");
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--seed", task_cfg.rng_seed, "rng seed");
  gen->add_option("--n-train", task_cfg.n_train, "training sentence count");
  gen->add_option("--n-eval", task_cfg.n_eval, "eval sentence count");
  gen->add_option("--skew-rho", task_cfg.skew_rho, "male-speaker training fraction");
  gen->add_option("--voice-match-q", task_cfg.voice_match_q, "voice/gender agreement probability");
  gen->add_option("--lexicon-size", task_cfg.lexicon_size, "content-word pairs");
  gen->add_option("--gendered-slots", task_cfg.gendered_slots, "max gendered slots per sentence");

  // train-base / fine-tune
  TrainFlags train_flags;
  int embed = 16, hidden = 32;
  auto* train_base = app.add_subcommand("train-base", "train the base model");
  add_train_flags(train_base, train_flags);
  train_base->add_option("--embed", embed, "embedding dim");
  train_base->add_option("--hidden", hidden, "hidden dim");

  TrainFlags ft_flags;
  ft_flags.lr = 0.05;
  ft_flags.epochs = 5;
  std::string ft_model_in;
  auto* fine_tune = app.add_subcommand("fine-tune", "fine-tune a model on a gender subset");
  fine_tune->add_option("--model", ft_model_in, "input model path")->required();
  add_train_flags(fine_tune, ft_flags);

  // train-elm
  std::string elm_corpus, elm_vocab, elm_out;
  int elm_order = 3;
  double elm_k = 0.1;
  auto* train_elm = app.add_subcommand("train-elm", "train an n-gram external language model");
  train_elm->add_option("--corpus", elm_corpus, "monolingual text")->required();
  train_elm->add_option("--vocab", elm_vocab, "target vocabulary file")->required();
  train_elm->add_option("--order", elm_order, "n-gram order");
  train_elm->add_option("--k", elm_k, "add-k smoothing constant");
  train_elm->add_option("--out", elm_out, "output model path")->required();

  // estimate-ilm
  std::string ilm_model, ilm_sources, ilm_src_vocab, ilm_out;
  auto* est_ilm = app.add_subcommand("estimate-ilm", "estimate the ILM context vector");
  est_ilm->add_option("--model", ilm_model, "base model path")->required();
  est_ilm->add_option("--sources", ilm_sources, "training source text")->required();
  est_ilm->add_option("--src-vocab", ilm_src_vocab, "source vocabulary file")->required();
  est_ilm->add_option("--out", ilm_out, "output context path")->required();

  // decode
  std::string dec_model, dec_ctx, dec_elm, dec_src_vocab, dec_tgt_vocab, dec_in, dec_out;
  double dec_bi = 0.0, dec_be = 0.0;
  DecodeOptions dec_opts;
  bool dec_no_fuse_eos = false;
  auto* dec = app.add_subcommand("decode", "fused beam decoding");
  dec->add_option("--model", dec_model)->required();
  dec->add_option("--ilm-context", dec_ctx)->required();
  dec->add_option("--elm", dec_elm)->required();
  dec->add_option("--src-vocab", dec_src_vocab)->required();
  dec->add_option("--tgt-vocab", dec_tgt_vocab)->required();
  dec->add_option("--beta-ilm", dec_bi, "ILM removal weight");
  dec->add_option("--beta-elm", dec_be, "ELM integration weight");
  dec->add_option("--beam", dec_opts.beam, "beam width");
  dec->add_option("--max-len", dec_opts.max_len, "max output length");
  dec->add_flag("--length-norm", dec_opts.length_norm, "rank by score / length");
  dec->add_flag("--no-fuse-eos", dec_no_fuse_eos, "skip ELM/ILM scores at the EOS step");
  dec->add_option("--input", dec_in, "source text, one sentence per line")->required();
  dec->add_option("--output", dec_out, "hypothesis output path")->required();

  // evaluate
  std::string eval_hyp, eval_set, eval_prefix;
  auto* ev = app.add_subcommand("evaluate", "score hypotheses against an annotated eval set");
  ev->add_option("--hyp", eval_hyp, "hypothesis file")->required();
  ev->add_option("--eval-set", eval_set, "MUSTSHE-LIKE v1 TSV")->required();
  ev->add_option("--report-prefix", eval_prefix, "report path prefix")->required();

  // tune-betas
  std::string tb_model, tb_ctx, tb_elm, tb_src_vocab, tb_tgt_vocab, tb_set, tb_prefix;
  double tb_step = 0.05;
  int tb_folds = 10, tb_threads = 0;
  DecodeOptions tb_opts;
  bool tb_no_fuse_eos = false;
  auto* tb = app.add_subcommand("tune-betas", "grid sweep + cross-validated beta selection");
  tb->add_option("--model", tb_model)->required();
  tb->add_option("--ilm-context", tb_ctx)->required();
  tb->add_option("--elm", tb_elm)->required();
  tb->add_option("--src-vocab", tb_src_vocab)->required();
  tb->add_option("--tgt-vocab", tb_tgt_vocab)->required();
  tb->add_option("--eval-set", tb_set)->required();
  tb->add_option("--grid-step", tb_step, "beta grid step");
  tb->add_option("--folds", tb_folds, "cross-validation folds");
  tb->add_option("--threads", tb_threads, "sweep worker threads (0 = auto)");
  tb->add_option("--beam", tb_opts.beam);
  tb->add_option("--max-len", tb_opts.max_len);
  tb->add_flag("--length-norm", tb_opts.length_norm);
  tb->add_flag("--no-fuse-eos", tb_no_fuse_eos);
  tb->add_option("--out-prefix", tb_prefix, "output path prefix")->required();

  // extract-corpus
  std::string ex_patterns, ex_in, ex_f, ex_m, ex_stats;
  auto* ex = app.add_subcommand("extract-corpus", "regex-filter a corpus into F/M partitions");
  ex->add_option("--patterns", ex_patterns, "pattern file")->required();
  ex->add_option("--input", ex_in, "input corpus, one sentence per line")->required();
  ex->add_option("--out-f", ex_f, "feminine output corpus")->required();
  ex->add_option("--out-m", ex_m, "masculine output corpus")->required();
  ex->add_option("--stats", ex_stats, "statistics output path")->required();

  // run-experiment
  ExperimentConfig exp_cfg;
  bool exp_no_fuse_eos = false;
  auto* exp = app.add_subcommand("run-experiment", "end-to-end synthetic bias experiment");
  exp->add_option("--out", exp_cfg.out_dir, "output directory")->required();
  exp->add_option("--seed", exp_cfg.task.rng_seed, "task rng seed");
  exp->add_option("--n-train", exp_cfg.task.n_train);
  exp->add_option("--n-eval", exp_cfg.task.n_eval);
  exp->add_option("--skew-rho", exp_cfg.task.skew_rho);
  exp->add_option("--voice-match-q", exp_cfg.task.voice_match_q);
  exp->add_option("--lexicon-size", exp_cfg.task.lexicon_size);
  exp->add_option("--gendered-slots", exp_cfg.task.gendered_slots);
  exp->add_option("--embed", exp_cfg.embed);
  exp->add_option("--hidden", exp_cfg.hidden);
  exp->add_option("--base-lr", exp_cfg.base_train.learning_rate);
  exp->add_option("--base-epochs", exp_cfg.base_train.epochs);
  exp->add_option("--ft-lr", exp_cfg.fine_tune.learning_rate);
  exp->add_option("--ft-epochs", exp_cfg.fine_tune.epochs);
  exp->add_option("--order", exp_cfg.ngram_order);
  exp->add_option("--k", exp_cfg.ngram_k);
  exp->add_option("--beam", exp_cfg.decode.beam);
  exp->add_option("--max-len", exp_cfg.decode.max_len);
  exp->add_flag("--no-fuse-eos", exp_no_fuse_eos);
  exp->add_option("--grid-step", exp_cfg.grid_step);
  exp->add_option("--folds", exp_cfg.cv_folds);
  exp->add_option("--threads", exp_cfg.threads);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return cmd_gen_task(task_cfg, gen_out);
    if (train_base->parsed()) {
      Vocabulary sv = Vocabulary::load(train_flags.src_vocab);
      Vocabulary tv = Vocabulary::load(train_flags.tgt_vocab);
      auto pairs = load_pairs(train_flags.src, train_flags.tgt, sv, tv);
      ToySeq2Seq model(sv, tv, embed, hidden, train_flags.seed);
      TrainConfig cfg{train_flags.lr, train_flags.epochs,
                      train_flags.seed ^ fnv1a64("train"), train_flags.grad_clip};
      TrainResult result = model.train(pairs, cfg);
      finish_train(train_flags, model, result, "train-base");
      return 0;
    }
    if (fine_tune->parsed()) {
      Vocabulary sv = Vocabulary::load(ft_flags.src_vocab);
      Vocabulary tv = Vocabulary::load(ft_flags.tgt_vocab);
      auto pairs = load_pairs(ft_flags.src, ft_flags.tgt, sv, tv);
      ToySeq2Seq model = ToySeq2Seq::load(ft_model_in);
      TrainConfig cfg{ft_flags.lr, ft_flags.epochs, ft_flags.seed ^ fnv1a64("fine-tune"),
                      ft_flags.grad_clip};
      TrainResult result = model.fine_tune(pairs, cfg);
      finish_train(ft_flags, model, result, "fine-tune");
      return 0;
    }
    if (train_elm->parsed()) {
      Vocabulary vocab = Vocabulary::load(elm_vocab);
      std::vector<TokenSeq> corpus;
      for (const auto& line : read_lines(elm_corpus)) corpus.push_back(vocab.encode(line));
      NGramLM lm = NGramLM::train(corpus, elm_order, elm_k, vocab);
      lm.save(elm_out);
      ordered_json manifest = manifest_base("train-elm");
      manifest["config"] = {{"order", elm_order}, {"k", elm_k}};
      manifest_add_file(manifest, "inputs", elm_corpus);
      manifest_add_file(manifest, "outputs", elm_out);
      write_manifest(manifest, elm_out + ".manifest.json");
      return 0;
    }
    if (est_ilm->parsed()) {
      ToySeq2Seq model = ToySeq2Seq::load(ilm_model);
      Vocabulary sv = Vocabulary::load(ilm_src_vocab);
      std::vector<TokenSeq> sources;
      for (const auto& line : read_lines(ilm_sources)) sources.push_back(sv.encode(line));
      IlmContext ctx = compute_ilm_context(model, sources);
      ctx.save(ilm_out);
      ordered_json manifest = manifest_base("estimate-ilm");
      manifest_add_file(manifest, "inputs", ilm_model);
      manifest_add_file(manifest, "inputs", ilm_sources);
      manifest_add_file(manifest, "outputs", ilm_out);
      write_manifest(manifest, ilm_out + ".manifest.json");
      std::printf("frames_total=%lld samples_total=%lld\n",
                  static_cast<long long>(ctx.frames_total),
                  static_cast<long long>(ctx.samples_total));
      return 0;
    }
    if (dec->parsed()) {
      dec_opts.fuse_eos = !dec_no_fuse_eos;
      return cmd_decode(dec_model, dec_ctx, dec_elm, dec_src_vocab, dec_tgt_vocab, dec_bi,
                        dec_be, dec_opts, dec_in, dec_out);
    }
    if (ev->parsed()) return cmd_evaluate(eval_hyp, eval_set, eval_prefix);
    if (tb->parsed()) {
      tb_opts.fuse_eos = !tb_no_fuse_eos;
      return cmd_tune_betas(tb_model, tb_ctx, tb_elm, tb_src_vocab, tb_tgt_vocab, tb_set,
                            tb_step, tb_folds, tb_threads, tb_opts, tb_prefix);
    }
    if (ex->parsed()) return cmd_extract(ex_patterns, ex_in, ex_f, ex_m, ex_stats);
    if (exp->parsed()) {
      exp_cfg.decode.fuse_eos = !exp_no_fuse_eos;
      ExperimentReport report = run_experiment(exp_cfg);
      std::string txt = read_file((std::filesystem::path(exp_cfg.out_dir) / "report.txt").string());
      std::printf("%s", txt.c_str());
      return 0;
    }
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
