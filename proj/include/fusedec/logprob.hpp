#pragma once

#include <span>
#include <vector>

namespace fusedec {

// Finite stand-in for log(0). Entries at the floor are exempt from the
// normalization check; they carry no probability mass.
inline constexpr double kLogFloor = -1e9;

// log sum_i exp(v_i), computed with the max-shift trick so that large
// magnitudes do not overflow. Throws std::invalid_argument on empty input.
double log_sum_exp(std::span<const double> values);

// A normalized distribution over a vocabulary, stored as natural-log
// probabilities. All probability arithmetic in this codebase stays in the
// log domain; linear-space probabilities appear only in tests.
class LogProbDist {
 public:
  // Shifts arbitrary finite logits/log-probs so they sum to one, then
  // floors anything below kLogFloor (including -inf inputs).
  static LogProbDist from_logits(std::vector<double> logits);

  // Wraps values that are already normalized; validates |log_sum_exp| < 1e-6
  // and entries <= 1e-9 (floored entries exempt).
  static LogProbDist from_normalized(std::vector<double> logprobs);

  double operator[](size_t i) const { return logp_[i]; }
  size_t size() const { return logp_.size(); }
  const std::vector<double>& values() const { return logp_; }

  // |log_sum_exp(entries)|; < 1e-6 for every distribution in the system.
  double normalization_error() const;

 private:
  explicit LogProbDist(std::vector<double> v) : logp_(std::move(v)) {}
  std::vector<double> logp_;
};

// The (beta_ilm, beta_elm) pair weighting ILM subtraction and ELM addition
// in the fused decoding objective. Both must lie in [0, 1].
struct FusionWeights {
  double beta_ilm = 0.0;
  double beta_elm = 0.0;

  FusionWeights() = default;
  FusionWeights(double ilm, double elm);
};

}  // namespace fusedec
