#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "fusedec/fusion.hpp"
#include "fusedec/gender_eval.hpp"

namespace fusedec {

// Everything needed to decode one sentence of an eval set.
struct DecoderBundle {
  const ToySeq2Seq* model = nullptr;
  const IlmContext* ctx = nullptr;
  const NGramLM* elm = nullptr;
  const Vocabulary* src_vocab = nullptr;
  const Vocabulary* tgt_vocab = nullptr;
  DecodeOptions opts;
};

struct GridPoint {
  FusionWeights weights;
  double bleu = 0.0;
  double accuracy = 0.0;  // pooled gender accuracy in [0, 1]
  double hmean = 0.0;     // harmonic_mean(bleu, accuracy * 100)
};

// Grid values {0, step, 2*step, ..., 1}; step must divide 1 evenly.
std::vector<double> beta_grid(double step);

// All decodes behind a sweep: hyps[point][sentence]. Grid points are
// enumerated sorted by (beta_ilm, beta_elm); sentences follow eval-set
// order. Decoding is deterministic, so any later aggregation (full-set
// sweep, per-fold selection, held-out stitching) can reuse these hypotheses
// without re-decoding. Points are evaluated concurrently across `threads`
// workers; assembly is index-based and order-independent.
struct DecodeMatrix {
  std::vector<FusionWeights> points;
  std::vector<std::vector<std::string>> hyps;
};

DecodeMatrix build_decode_matrix(const DecoderBundle& bundle, const AnnotatedEvalSet& eval_set,
                                 double grid_step, int threads);

// BLEU + pooled accuracy + harmonic mean for one cached grid point over a
// subset of sentences (empty subset list means the whole set).
GridPoint score_point(const DecodeMatrix& matrix, size_t point_index,
                      const AnnotatedEvalSet& eval_set, const std::vector<int>& sentence_indices);

std::vector<GridPoint> grid_sweep(const DecoderBundle& bundle, const AnnotatedEvalSet& eval_set,
                                  double grid_step, int threads);
std::vector<GridPoint> score_matrix(const DecodeMatrix& matrix, const AnnotatedEvalSet& eval_set);

// Argmax by harmonic mean; ties prefer lower beta_elm, then lower beta_ilm.
const GridPoint& select_best(const std::vector<GridPoint>& points);

struct FoldAssignment {
  int k = 0;
  std::map<std::string, int> fold_of;  // sentence id -> fold
  static FoldAssignment round_robin(const AnnotatedEvalSet& eval_set, int k);
};

struct TuneResult {
  std::vector<FusionWeights> fold_selections;   // one per fold
  std::vector<std::string> stitched_hyps;       // eval-set order
  FusionWeights mean_weights;
};

// K-fold cross-validated selection: each fold is decoded with the grid
// point that maximizes the harmonic mean on the other K-1 folds; the
// stitched output covers the whole set.
TuneResult cross_validated_tune(const DecoderBundle& bundle, const AnnotatedEvalSet& eval_set,
                                int k_folds, double grid_step, int threads);
TuneResult cross_validated_tune(const DecodeMatrix& matrix, const AnnotatedEvalSet& eval_set,
                                int k_folds);

FusionWeights mean_betas(const std::vector<FusionWeights>& selections);

// beta_ilm,beta_elm,bleu,accuracy,hmean rows sorted by (beta_ilm, beta_elm),
// 4 decimal places.
void write_heatmap_csv(const std::vector<GridPoint>& points, std::ostream& out);

// Worker count for sweeps: explicit argument, else FUSEDEC_THREADS, else
// hardware concurrency.
int resolve_threads(int requested);

}  // namespace fusedec
