#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fusedec/beta_tuner.hpp"
#include "fusedec/fusion.hpp"
#include "fusedec/gender_eval.hpp"
#include "fusedec/ngram_lm.hpp"
#include "fusedec/seq2seq.hpp"
#include "fusedec/synth_task.hpp"

#include "json.hpp"

namespace fusedec {

// The end-to-end pipeline: generate the synthetic task, train the base and
// specialized models and the two gender ELMs, estimate the ILM context,
// cross-validate the fusion weights per gender, then score the four systems
// (M_B, M_SP, M_B+ELM, M_B-ILM+ELM) on the aligned and swapped conditions.
struct ExperimentConfig {
  SynthTaskConfig task;
  int embed = 16;
  int hidden = 32;
  TrainConfig base_train{0.1, 30, 0, 5.0};      // seed 0 => derived from task seed
  TrainConfig fine_tune{0.05, 5, 0, 5.0};
  int ngram_order = 3;
  double ngram_k = 0.1;
  DecodeOptions decode;
  double grid_step = 0.05;
  int cv_folds = 10;
  int threads = 0;  // 0 = FUSEDEC_THREADS or hardware concurrency
  std::string out_dir;
};

struct SystemResult {
  std::string name;
  double bleu = 0.0;
  GenderScores gender;
};

struct ConditionResults {
  std::string condition;
  std::vector<SystemResult> systems;  // M_B, M_SP, M_B+ELM, M_B-ILM+ELM

  const SystemResult& system(const std::string& name) const;
};

// Per-gender tuning outcome on the aligned set. mean_full drives the
// M_B-ILM+ELM rows; mean_elm_only (beta_ilm pinned to 0) drives M_B+ELM.
// Stitched metrics come from the cross-validation held-out decodes and are
// reported separately from the mean-weight runs.
struct GenderTuning {
  Gender gender = Gender::F;
  std::vector<FusionWeights> fold_selections;
  FusionWeights mean_full;
  std::vector<FusionWeights> fold_selections_elm_only;
  FusionWeights mean_elm_only;
  double stitched_bleu = 0.0;
  double stitched_accuracy = 0.0;  // pooled, in [0, 1]
};

struct ExperimentReport {
  ExperimentConfig config;
  ConditionResults aligned;
  ConditionResults swapped;
  GenderTuning tuning_f;
  GenderTuning tuning_m;
  std::vector<double> base_epoch_losses;

  const GenderTuning& tuning(Gender g) const { return g == Gender::F ? tuning_f : tuning_m; }
};

ExperimentReport run_experiment(const ExperimentConfig& config);

// Writes the synthetic task's files under dir: vocabularies, line-aligned
// parallel data (full and per-gender), monolingual corpora, both eval TSVs,
// decode sources, and a manifest with the full config and seed. Returns the
// emitted paths.
std::vector<std::string> emit_task_files(const SynthTask& task, const std::string& dir);

// Gender required of the output for a sentence: the gender its annotated
// terms carry. Sentences in the synthetic sets always carry at least one
// term of a single gender.
Gender required_gender(const AnnotatedSentence& sentence);

std::vector<TrainPair> to_train_pairs(const std::vector<SynthSample>& samples);

// Manifest plumbing shared by the CLI. The timestamp honors
// SOURCE_DATE_EPOCH so outputs are byte-reproducible; without it the field
// is 0.
nlohmann::ordered_json manifest_base(const std::string& command);
void manifest_add_file(nlohmann::ordered_json& manifest, const std::string& role,
                       const std::string& path);
void write_manifest(const nlohmann::ordered_json& manifest, const std::string& path);

std::string report_text(const ExperimentReport& report, const nlohmann::ordered_json& manifest);
nlohmann::ordered_json report_json(const ExperimentReport& report);

}  // namespace fusedec
