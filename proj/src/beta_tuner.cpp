#include "fusedec/beta_tuner.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "fusedec/bleu.hpp"
#include "fusedec/util.hpp"

namespace fusedec {

std::vector<double> beta_grid(double step) {
  if (!(step > 0.0 && step <= 1.0)) throw std::invalid_argument("grid step must be in (0, 1]");
  long long n = std::llround(1.0 / step);
  if (n < 1 || std::abs(static_cast<double>(n) * step - 1.0) > 1e-9) {
    throw std::invalid_argument("grid step must divide 1.0 evenly");
  }
  std::vector<double> values;
  values.reserve(static_cast<size_t>(n) + 1);
  for (long long i = 0; i <= n; ++i) {
    values.push_back(static_cast<double>(i) / static_cast<double>(n));
  }
  return values;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("FUSEDEC_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace {

void check_bundle(const DecoderBundle& bundle) {
  if (!bundle.model || !bundle.ctx || !bundle.elm || !bundle.src_vocab || !bundle.tgt_vocab) {
    throw std::invalid_argument("incomplete decoder bundle");
  }
}

std::string decode_sentence(const DecoderBundle& bundle, const AnnotatedSentence& sent,
                            const FusionWeights& w) {
  TokenSeq source = bundle.src_vocab->encode(sent.source);
  DecodeResult result = beam_search(*bundle.model, *bundle.ctx, *bundle.elm, source, w, bundle.opts);
  return bundle.tgt_vocab->decode(result.tokens);
}

}  // namespace

DecodeMatrix build_decode_matrix(const DecoderBundle& bundle, const AnnotatedEvalSet& eval_set,
                                 double grid_step, int threads) {
  check_bundle(bundle);
  DecodeMatrix matrix;
  for (double bi : beta_grid(grid_step)) {
    for (double be : beta_grid(grid_step)) {
      matrix.points.emplace_back(bi, be);
    }
  }
  matrix.hyps.assign(matrix.points.size(), std::vector<std::string>(eval_set.size()));

  int workers = std::min<int>(resolve_threads(threads), static_cast<int>(matrix.points.size()));
  std::atomic<size_t> next_point{0};
  std::atomic<bool> failed{false};
  std::string error_message;
  std::mutex error_mutex;

  auto work = [&]() {
    while (true) {
      size_t p = next_point.fetch_add(1);
      if (p >= matrix.points.size() || failed.load()) return;
      try {
        for (size_t s = 0; s < eval_set.size(); ++s) {
          matrix.hyps[p][s] = decode_sentence(bundle, eval_set[s], matrix.points[p]);
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failed.exchange(true)) error_message = e.what();
        return;
      }
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) throw NumericError("grid decode failed: " + error_message);
  return matrix;
}

GridPoint score_point(const DecodeMatrix& matrix, size_t point_index,
                      const AnnotatedEvalSet& eval_set,
                      const std::vector<int>& sentence_indices) {
  const auto& hyps = matrix.hyps.at(point_index);
  std::vector<std::string> sub_hyps;
  std::vector<std::string> sub_refs;
  AnnotatedEvalSet sub_set;
  auto add = [&](size_t s) {
    sub_hyps.push_back(hyps[s]);
    sub_refs.push_back(eval_set[s].reference);
    sub_set.push_back(eval_set[s]);
  };
  if (sentence_indices.empty()) {
    for (size_t s = 0; s < eval_set.size(); ++s) add(s);
  } else {
    for (int s : sentence_indices) add(static_cast<size_t>(s));
  }
  GridPoint point;
  point.weights = matrix.points.at(point_index);
  point.bleu = bleu_corpus(sub_hyps, sub_refs);
  point.accuracy = score_gender(sub_hyps, sub_set).pooled_accuracy().value_or(0.0);
  point.hmean = harmonic_mean(point.bleu, point.accuracy * 100.0);
  return point;
}

std::vector<GridPoint> score_matrix(const DecodeMatrix& matrix, const AnnotatedEvalSet& eval_set) {
  std::vector<GridPoint> points;
  points.reserve(matrix.points.size());
  for (size_t p = 0; p < matrix.points.size(); ++p) {
    points.push_back(score_point(matrix, p, eval_set, {}));
  }
  return points;
}

std::vector<GridPoint> grid_sweep(const DecoderBundle& bundle, const AnnotatedEvalSet& eval_set,
                                  double grid_step, int threads) {
  return score_matrix(build_decode_matrix(bundle, eval_set, grid_step, threads), eval_set);
}

const GridPoint& select_best(const std::vector<GridPoint>& points) {
  if (points.empty()) throw std::invalid_argument("empty grid");
  const GridPoint* best = &points.front();
  for (const auto& p : points) {
    if (p.hmean > best->hmean ||
        (p.hmean == best->hmean &&
         (p.weights.beta_elm < best->weights.beta_elm ||
          (p.weights.beta_elm == best->weights.beta_elm &&
           p.weights.beta_ilm < best->weights.beta_ilm)))) {
      best = &p;
    }
  }
  return *best;
}

FoldAssignment FoldAssignment::round_robin(const AnnotatedEvalSet& eval_set, int k) {
  if (k < 2) throw std::invalid_argument("fold count must be >= 2");
  if (static_cast<size_t>(k) > eval_set.size()) {
    throw std::invalid_argument("fold count exceeds eval set size");
  }
  FoldAssignment assignment;
  assignment.k = k;
  for (size_t i = 0; i < eval_set.size(); ++i) {
    assignment.fold_of[eval_set[i].id] = static_cast<int>(i % static_cast<size_t>(k));
  }
  return assignment;
}

TuneResult cross_validated_tune(const DecodeMatrix& matrix, const AnnotatedEvalSet& eval_set,
                                int k_folds) {
  FoldAssignment folds = FoldAssignment::round_robin(eval_set, k_folds);
  TuneResult result;
  result.stitched_hyps.assign(eval_set.size(), "");
  for (int fold = 0; fold < k_folds; ++fold) {
    std::vector<int> train_indices;
    std::vector<int> heldout_indices;
    for (size_t s = 0; s < eval_set.size(); ++s) {
      if (folds.fold_of.at(eval_set[s].id) == fold) {
        heldout_indices.push_back(static_cast<int>(s));
      } else {
        train_indices.push_back(static_cast<int>(s));
      }
    }
    std::vector<GridPoint> points;
    points.reserve(matrix.points.size());
    for (size_t p = 0; p < matrix.points.size(); ++p) {
      points.push_back(score_point(matrix, p, eval_set, train_indices));
    }
    const GridPoint& best = select_best(points);
    result.fold_selections.push_back(best.weights);
    size_t best_index = 0;
    for (size_t p = 0; p < matrix.points.size(); ++p) {
      if (matrix.points[p].beta_ilm == best.weights.beta_ilm &&
          matrix.points[p].beta_elm == best.weights.beta_elm) {
        best_index = p;
        break;
      }
    }
    for (int s : heldout_indices) {
      result.stitched_hyps[static_cast<size_t>(s)] = matrix.hyps[best_index][static_cast<size_t>(s)];
    }
  }
  result.mean_weights = mean_betas(result.fold_selections);
  return result;
}

TuneResult cross_validated_tune(const DecoderBundle& bundle, const AnnotatedEvalSet& eval_set,
                                int k_folds, double grid_step, int threads) {
  DecodeMatrix matrix = build_decode_matrix(bundle, eval_set, grid_step, threads);
  return cross_validated_tune(matrix, eval_set, k_folds);
}

FusionWeights mean_betas(const std::vector<FusionWeights>& selections) {
  if (selections.empty()) throw std::invalid_argument("no selections");
  double ilm = 0.0;
  double elm = 0.0;
  for (const auto& w : selections) {
    ilm += w.beta_ilm;
    elm += w.beta_elm;
  }
  double n = static_cast<double>(selections.size());
  return FusionWeights(ilm / n, elm / n);
}

void write_heatmap_csv(const std::vector<GridPoint>& points, std::ostream& out) {
  out << "beta_ilm,beta_elm,bleu,accuracy,hmean\n";
  char buf[128];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof(buf), "%.4f,%.4f,%.4f,%.4f,%.4f\n", p.weights.beta_ilm,
                  p.weights.beta_elm, p.bleu, p.accuracy, p.hmean);
    out << buf;
  }
}

}  // namespace fusedec
