#include "fusedec/experiment.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "fusedec/bleu.hpp"
#include "fusedec/util.hpp"

namespace fusedec {

namespace fs = std::filesystem;

using nlohmann::ordered_json;

Gender required_gender(const AnnotatedSentence& sentence) {
  if (sentence.terms.empty()) {
    throw std::invalid_argument("sentence has no annotated terms: " + sentence.id);
  }
  Gender g = sentence.terms.front().gender;
  for (const auto& term : sentence.terms) {
    if (term.gender != g) {
      throw std::invalid_argument("mixed-gender sentence: " + sentence.id);
    }
  }
  return g;
}

std::vector<TrainPair> to_train_pairs(const std::vector<SynthSample>& samples) {
  std::vector<TrainPair> pairs;
  pairs.reserve(samples.size());
  for (const auto& s : samples) pairs.emplace_back(s.source, s.target);
  return pairs;
}

// ---------------------------------------------------------------------------
// Manifests

ordered_json manifest_base(const std::string& command) {
  ordered_json m;
  m["command"] = command;
  int64_t ts = 0;
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) ts = std::atoll(env);
  m["timestamp"] = ts;
  m["inputs"] = ordered_json::object();
  m["outputs"] = ordered_json::object();
  return m;
}

void manifest_add_file(ordered_json& manifest, const std::string& role, const std::string& path) {
  manifest[role][fs::path(path).filename().string()] = file_hash_hex(path);
}

void write_manifest(const ordered_json& manifest, const std::string& path) {
  write_file(path, manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Task file emission

namespace {

ordered_json task_config_json(const SynthTaskConfig& cfg) {
  ordered_json j;
  j["rng_seed"] = cfg.rng_seed;
  j["n_train"] = cfg.n_train;
  j["skew_rho"] = cfg.skew_rho;
  j["voice_match_q"] = cfg.voice_match_q;
  j["lexicon_size"] = cfg.lexicon_size;
  j["gendered_slots"] = cfg.gendered_slots;
  j["n_eval"] = cfg.n_eval;
  return j;
}

std::string path_in(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

}  // namespace

std::vector<std::string> emit_task_files(const SynthTask& task, const std::string& dir) {
  fs::create_directories(dir);
  std::vector<std::string> paths;
  auto emit_lines = [&](const std::string& name, const std::vector<std::string>& lines) {
    std::string p = path_in(dir, name);
    write_lines(p, lines);
    paths.push_back(p);
  };

  task.source_vocab().save(path_in(dir, "src.vocab"));
  paths.push_back(path_in(dir, "src.vocab"));
  task.target_vocab().save(path_in(dir, "tgt.vocab"));
  paths.push_back(path_in(dir, "tgt.vocab"));

  auto samples = task.generate_parallel();
  std::vector<std::string> src_all, tgt_all, src_f, tgt_f, src_m, tgt_m;
  for (const auto& s : samples) {
    std::string src = task.source_vocab().decode(s.source);
    std::string tgt = task.target_vocab().decode(s.target);
    src_all.push_back(src);
    tgt_all.push_back(tgt);
    if (s.speaker_gender == Gender::F) {
      src_f.push_back(src);
      tgt_f.push_back(tgt);
    } else {
      src_m.push_back(src);
      tgt_m.push_back(tgt);
    }
  }
  emit_lines("train.src.txt", src_all);
  emit_lines("train.tgt.txt", tgt_all);
  emit_lines("train_f.src.txt", src_f);
  emit_lines("train_f.tgt.txt", tgt_f);
  emit_lines("train_m.src.txt", src_m);
  emit_lines("train_m.tgt.txt", tgt_m);

  for (Gender g : {Gender::F, Gender::M}) {
    std::vector<std::string> mono;
    for (const auto& seq : task.generate_monolingual(g)) {
      mono.push_back(task.target_vocab().decode(seq));
    }
    emit_lines(g == Gender::F ? "mono_f.txt" : "mono_m.txt", mono);
  }

  AnnotatedEvalSet aligned = task.generate_eval(EvalCondition::aligned);
  AnnotatedEvalSet swapped = task.generate_eval(EvalCondition::swapped);
  save_eval_set(aligned, path_in(dir, "eval_aligned.tsv"));
  paths.push_back(path_in(dir, "eval_aligned.tsv"));
  save_eval_set(swapped, path_in(dir, "eval_swapped.tsv"));
  paths.push_back(path_in(dir, "eval_swapped.tsv"));
  std::vector<std::string> eval_src;
  for (const auto& s : aligned) eval_src.push_back(s.source);
  emit_lines("eval.src.txt", eval_src);

  ordered_json manifest = manifest_base("gen-task");
  manifest["config"] = task_config_json(task.config());
  for (const auto& p : paths) manifest_add_file(manifest, "outputs", p);
  std::string mpath = path_in(dir, "task_manifest.json");
  write_manifest(manifest, mpath);
  paths.push_back(mpath);
  return paths;
}

// ---------------------------------------------------------------------------
// The experiment pipeline

namespace {

uint64_t mix_seed(uint64_t base, std::string_view tag) { return base ^ fnv1a64(tag); }

std::vector<int> subset_indices(const AnnotatedEvalSet& set, Gender g) {
  std::vector<int> idx;
  for (size_t i = 0; i < set.size(); ++i) {
    if (required_gender(set[i]) == g) idx.push_back(static_cast<int>(i));
  }
  return idx;
}

AnnotatedEvalSet subset_of(const AnnotatedEvalSet& set, const std::vector<int>& idx) {
  AnnotatedEvalSet sub;
  sub.reserve(idx.size());
  for (int i : idx) sub.push_back(set[static_cast<size_t>(i)]);
  return sub;
}

DecodeMatrix filter_ilm_zero(const DecodeMatrix& matrix) {
  DecodeMatrix out;
  for (size_t p = 0; p < matrix.points.size(); ++p) {
    if (matrix.points[p].beta_ilm == 0.0) {
      out.points.push_back(matrix.points[p]);
      out.hyps.push_back(matrix.hyps[p]);
    }
  }
  return out;
}

double subset_bleu(const std::vector<std::string>& hyps, const AnnotatedEvalSet& set) {
  std::vector<std::string> refs;
  refs.reserve(set.size());
  for (const auto& s : set) refs.push_back(s.reference);
  return bleu_corpus(hyps, refs);
}

}  // namespace

const SystemResult& ConditionResults::system(const std::string& name) const {
  for (const auto& s : systems) {
    if (s.name == name) return s;
  }
  throw std::invalid_argument("unknown system: " + name);
}

ExperimentReport run_experiment(const ExperimentConfig& config_in) {
  ExperimentConfig config = config_in;
  if (config.out_dir.empty()) throw std::invalid_argument("out_dir is required");
  if (config.base_train.rng_seed == 0) {
    config.base_train.rng_seed = mix_seed(config.task.rng_seed, "train-base");
  }
  if (config.fine_tune.rng_seed == 0) {
    config.fine_tune.rng_seed = mix_seed(config.task.rng_seed, "fine-tune");
  }
  fs::create_directories(config.out_dir);

  SynthTask task(config.task);
  emit_task_files(task, config.out_dir);

  auto samples = task.generate_parallel();
  auto pairs = to_train_pairs(samples);
  std::vector<TrainPair> pairs_f, pairs_m;
  for (const auto& s : samples) {
    (s.speaker_gender == Gender::F ? pairs_f : pairs_m).emplace_back(s.source, s.target);
  }
  std::vector<TokenSeq> train_sources;
  train_sources.reserve(pairs.size());
  for (const auto& [src, tgt] : pairs) train_sources.push_back(src);

  ExperimentReport report;
  report.config = config;

  ToySeq2Seq base(task.source_vocab(), task.target_vocab(), config.embed, config.hidden,
                  mix_seed(config.task.rng_seed, "model-init"));
  report.base_epoch_losses = base.train(pairs, config.base_train).epoch_losses;

  ToySeq2Seq sp_f = base;
  ToySeq2Seq sp_m = base;
  TrainConfig ft_f = config.fine_tune;
  ft_f.rng_seed = mix_seed(config.fine_tune.rng_seed, "f");
  TrainConfig ft_m = config.fine_tune;
  ft_m.rng_seed = mix_seed(config.fine_tune.rng_seed, "m");
  sp_f.fine_tune(pairs_f, ft_f);
  sp_m.fine_tune(pairs_m, ft_m);

  NGramLM elm_f = NGramLM::train(task.generate_monolingual(Gender::F), config.ngram_order,
                                 config.ngram_k, task.target_vocab());
  NGramLM elm_m = NGramLM::train(task.generate_monolingual(Gender::M), config.ngram_order,
                                 config.ngram_k, task.target_vocab());
  IlmContext ctx = compute_ilm_context(base, train_sources);

  base.save(path_in(config.out_dir, "base.model"));
  sp_f.save(path_in(config.out_dir, "sp_f.model"));
  sp_m.save(path_in(config.out_dir, "sp_m.model"));
  elm_f.save(path_in(config.out_dir, "elm_f.ngram"));
  elm_m.save(path_in(config.out_dir, "elm_m.ngram"));
  ctx.save(path_in(config.out_dir, "ilm.ctx"));

  AnnotatedEvalSet aligned = task.generate_eval(EvalCondition::aligned);
  AnnotatedEvalSet swapped = task.generate_eval(EvalCondition::swapped);

  auto elm_of = [&](Gender g) -> const NGramLM& { return g == Gender::F ? elm_f : elm_m; };
  auto sp_of = [&](Gender g) -> const ToySeq2Seq& { return g == Gender::F ? sp_f : sp_m; };

  // Per-gender weight tuning on the aligned condition.
  for (Gender g : {Gender::F, Gender::M}) {
    auto idx = subset_indices(aligned, g);
    AnnotatedEvalSet sub = subset_of(aligned, idx);
    DecoderBundle bundle{&base, &ctx, &elm_of(g), &task.source_vocab(), &task.target_vocab(),
                         config.decode};
    DecodeMatrix matrix = build_decode_matrix(bundle, sub, config.grid_step, config.threads);

    GenderTuning tuning;
    tuning.gender = g;
    TuneResult full = cross_validated_tune(matrix, sub, config.cv_folds);
    tuning.fold_selections = full.fold_selections;
    tuning.mean_full = full.mean_weights;
    TuneResult elm_only = cross_validated_tune(filter_ilm_zero(matrix), sub, config.cv_folds);
    tuning.fold_selections_elm_only = elm_only.fold_selections;
    tuning.mean_elm_only = elm_only.mean_weights;
    tuning.stitched_bleu = subset_bleu(full.stitched_hyps, sub);
    tuning.stitched_accuracy =
        score_gender(full.stitched_hyps, sub).pooled_accuracy().value_or(0.0);

    std::string heatmap_path =
        path_in(config.out_dir, g == Gender::F ? "heatmap_f.csv" : "heatmap_m.csv");
    std::ostringstream csv;
    write_heatmap_csv(score_matrix(matrix, sub), csv);
    write_file(heatmap_path, csv.str());

    (g == Gender::F ? report.tuning_f : report.tuning_m) = tuning;
  }

  // Final system decodes; each sentence uses the ELM / specialized model /
  // mean weights of its required output gender.
  auto run_condition = [&](const AnnotatedEvalSet& set, const std::string& name) {
    ConditionResults results;
    results.condition = name;
    std::vector<std::string> refs;
    for (const auto& s : set) refs.push_back(s.reference);

    struct SystemSpec {
      std::string name;
      std::string file_tag;
    };
    const std::vector<SystemSpec> specs = {{"M_B", "m_b"},
                                           {"M_SP", "m_sp"},
                                           {"M_B+ELM", "m_b_elm"},
                                           {"M_B-ILM+ELM", "m_b_ilm_elm"}};
    for (const auto& spec : specs) {
      std::vector<std::string> hyps;
      hyps.reserve(set.size());
      for (const auto& sent : set) {
        Gender g = required_gender(sent);
        TokenSeq source = task.source_vocab().encode(sent.source);
        DecodeResult r;
        if (spec.name == "M_B") {
          r = beam_search(base, ctx, elm_of(g), source, FusionWeights(0.0, 0.0), config.decode);
        } else if (spec.name == "M_SP") {
          r = beam_search_base(sp_of(g), source, config.decode);
        } else if (spec.name == "M_B+ELM") {
          r = beam_search(base, ctx, elm_of(g), source,
                          FusionWeights(0.0, report.tuning(g).mean_elm_only.beta_elm),
                          config.decode);
        } else {
          r = beam_search(base, ctx, elm_of(g), source, report.tuning(g).mean_full,
                          config.decode);
        }
        hyps.push_back(task.target_vocab().decode(r.tokens));
      }
      write_lines(path_in(config.out_dir, "hyp_" + name + "_" + spec.file_tag + ".txt"), hyps);
      SystemResult sys;
      sys.name = spec.name;
      sys.bleu = bleu_corpus(hyps, refs);
      sys.gender = score_gender(hyps, set);
      results.systems.push_back(std::move(sys));
    }
    return results;
  };

  report.aligned = run_condition(aligned, "aligned");
  report.swapped = run_condition(swapped, "swapped");

  ordered_json manifest = manifest_base("run-experiment");
  manifest["config"] = report_json(report)["config"];
  for (const auto& name :
       {"src.vocab", "tgt.vocab", "base.model", "sp_f.model", "sp_m.model", "elm_f.ngram",
        "elm_m.ngram", "ilm.ctx", "heatmap_f.csv", "heatmap_m.csv"}) {
    manifest_add_file(manifest, "outputs", path_in(config.out_dir, name));
  }
  write_manifest(manifest, path_in(config.out_dir, "manifest.json"));

  write_file(path_in(config.out_dir, "report.txt"), report_text(report, manifest));
  std::ostringstream jsonl;
  ordered_json mrec = manifest;
  mrec["type"] = "manifest";
  jsonl << mrec.dump() << '\n';
  ordered_json rrec = report_json(report);
  rrec["type"] = "report";
  jsonl << rrec.dump() << '\n';
  write_file(path_in(config.out_dir, "report.jsonl"), jsonl.str());
  return report;
}

// ---------------------------------------------------------------------------
// Report rendering

namespace {

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_opt_pct(const std::optional<double>& v) {
  if (!v) return "-";
  return fmt2(*v * 100.0);
}

std::string pad(const std::string& s, size_t width) {
  std::string out = s;
  while (out.size() < width) out += ' ';
  return out;
}

std::string condition_table(const ConditionResults& results) {
  std::ostringstream out;
  out << "condition: " << results.condition << '\n';
  out << pad("system", 14) << pad("BLEU", 8) << pad("cov_M", 8) << pad("cov_F", 8)
      << pad("acc_M", 8) << pad("acc_F", 8) << '\n';
  for (const auto& sys : results.systems) {
    out << pad(sys.name, 14) << pad(fmt2(sys.bleu), 8)
        << pad(fmt_opt_pct(sys.gender.m.coverage()), 8)
        << pad(fmt_opt_pct(sys.gender.f.coverage()), 8)
        << pad(fmt_opt_pct(sys.gender.m.accuracy()), 8)
        << pad(fmt_opt_pct(sys.gender.f.accuracy()), 8) << '\n';
  }
  return out.str();
}

std::string weights_str(const FusionWeights& w) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "(%.4f, %.4f)", w.beta_ilm, w.beta_elm);
  return buf;
}

std::string tuning_block(const GenderTuning& t) {
  std::ostringstream out;
  out << "gender " << gender_char(t.gender) << ": mean (beta_ilm, beta_elm) = "
      << weights_str(t.mean_full) << " full, beta_elm = " << fmt2(t.mean_elm_only.beta_elm)
      << " elm-only; cv-stitched bleu = " << fmt2(t.stitched_bleu)
      << ", accuracy = " << fmt2(t.stitched_accuracy * 100.0) << '\n';
  out << "  fold selections:";
  for (const auto& w : t.fold_selections) out << ' ' << weights_str(w);
  out << '\n';
  return out.str();
}

ordered_json gender_counts_json(const GenderCounts& c) {
  ordered_json j;
  j["total"] = c.total;
  j["correct"] = c.correct;
  j["wrong"] = c.wrong;
  j["coverage"] = c.coverage() ? ordered_json(*c.coverage()) : ordered_json(nullptr);
  j["accuracy"] = c.accuracy() ? ordered_json(*c.accuracy()) : ordered_json(nullptr);
  return j;
}

ordered_json weights_json(const FusionWeights& w) {
  ordered_json j;
  j["beta_ilm"] = w.beta_ilm;
  j["beta_elm"] = w.beta_elm;
  return j;
}

ordered_json condition_json(const ConditionResults& results) {
  ordered_json systems = ordered_json::array();
  for (const auto& sys : results.systems) {
    ordered_json j;
    j["name"] = sys.name;
    j["bleu"] = sys.bleu;
    j["gender_f"] = gender_counts_json(sys.gender.f);
    j["gender_m"] = gender_counts_json(sys.gender.m);
    systems.push_back(j);
  }
  return systems;
}

ordered_json tuning_json(const GenderTuning& t) {
  ordered_json j;
  j["gender"] = std::string(1, gender_char(t.gender));
  ordered_json folds = ordered_json::array();
  for (const auto& w : t.fold_selections) folds.push_back(weights_json(w));
  j["fold_selections"] = folds;
  j["mean_full"] = weights_json(t.mean_full);
  ordered_json folds_elm = ordered_json::array();
  for (const auto& w : t.fold_selections_elm_only) folds_elm.push_back(weights_json(w));
  j["fold_selections_elm_only"] = folds_elm;
  j["mean_elm_only"] = weights_json(t.mean_elm_only);
  j["stitched_bleu"] = t.stitched_bleu;
  j["stitched_accuracy"] = t.stitched_accuracy;
  return j;
}

}  // namespace

std::string report_text(const ExperimentReport& report, const ordered_json& manifest) {
  const ExperimentConfig& c = report.config;
  std::ostringstream out;
  out << "fusedec experiment report\n";
  out << "=========================\n";
  out << "task: seed=" << c.task.rng_seed << " n_train=" << c.task.n_train
      << " skew_rho=" << fmt2(c.task.skew_rho) << " voice_match_q=" << fmt2(c.task.voice_match_q)
      << " lexicon=" << c.task.lexicon_size << " slots=" << c.task.gendered_slots
      << " n_eval=" << c.task.n_eval << '\n';
  out << "model: embed=" << c.embed << " hidden=" << c.hidden
      << " | base: lr=" << fmt_g17(c.base_train.learning_rate)
      << " epochs=" << c.base_train.epochs
      << " | fine-tune: lr=" << fmt_g17(c.fine_tune.learning_rate)
      << " epochs=" << c.fine_tune.epochs << '\n';
  out << "elm: order=" << c.ngram_order << " k=" << fmt_g17(c.ngram_k)
      << " | decode: beam=" << c.decode.beam << " max_len=" << c.decode.max_len
      << " fuse_eos=" << (c.decode.fuse_eos ? "on" : "off")
      << " length_norm=" << (c.decode.length_norm ? "on" : "off") << '\n';
  out << "tuning: grid_step=" << fmt_g17(c.grid_step) << " folds=" << c.cv_folds << '\n';
  out << "bleu signature: " << kBleuSignature << '\n';
  out << '\n';
  out << condition_table(report.aligned) << '\n';
  out << condition_table(report.swapped) << '\n';
  out << "tuning (aligned cross-validation):\n";
  out << tuning_block(report.tuning_f);
  out << tuning_block(report.tuning_m);
  out << '\n';
  out << "manifest " << manifest.dump() << '\n';
  return out.str();
}

ordered_json report_json(const ExperimentReport& report) {
  const ExperimentConfig& c = report.config;
  ordered_json j;
  ordered_json cfg;
  cfg["task"] = task_config_json(c.task);
  cfg["embed"] = c.embed;
  cfg["hidden"] = c.hidden;
  cfg["base_train"] = {{"learning_rate", c.base_train.learning_rate},
                       {"epochs", c.base_train.epochs},
                       {"rng_seed", c.base_train.rng_seed},
                       {"grad_clip", c.base_train.grad_clip}};
  cfg["fine_tune"] = {{"learning_rate", c.fine_tune.learning_rate},
                      {"epochs", c.fine_tune.epochs},
                      {"rng_seed", c.fine_tune.rng_seed},
                      {"grad_clip", c.fine_tune.grad_clip}};
  cfg["ngram_order"] = c.ngram_order;
  cfg["ngram_k"] = c.ngram_k;
  cfg["decode"] = {{"beam", c.decode.beam},
                   {"max_len", c.decode.max_len},
                   {"length_norm", c.decode.length_norm},
                   {"fuse_eos", c.decode.fuse_eos}};
  cfg["grid_step"] = c.grid_step;
  cfg["cv_folds"] = c.cv_folds;
  j["config"] = cfg;
  j["aligned"] = condition_json(report.aligned);
  j["swapped"] = condition_json(report.swapped);
  j["tuning_f"] = tuning_json(report.tuning_f);
  j["tuning_m"] = tuning_json(report.tuning_m);
  j["base_epoch_losses"] = report.base_epoch_losses;
  return j;
}

}  // namespace fusedec
