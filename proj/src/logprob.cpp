#include "fusedec/logprob.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fusedec {

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("empty vector");
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : values) mx = std::max(mx, v);
  if (std::isinf(mx) && mx < 0) return mx;  // all entries are -inf
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - mx);
  return mx + std::log(acc);
}

LogProbDist LogProbDist::from_logits(std::vector<double> logits) {
  double lse = log_sum_exp(logits);
  if (!std::isfinite(lse)) throw std::invalid_argument("logits have no finite mass");
  for (double& v : logits) {
    v -= lse;
    if (!(v >= kLogFloor)) v = kLogFloor;  // also catches -inf and NaN
  }
  return LogProbDist(std::move(logits));
}

LogProbDist LogProbDist::from_normalized(std::vector<double> logprobs) {
  for (double v : logprobs) {
    if (v == kLogFloor) continue;
    if (!std::isfinite(v) || v > 1e-9) {
      throw std::invalid_argument("log-prob entry out of range: " + std::to_string(v));
    }
  }
  double err = std::abs(log_sum_exp(logprobs));
  if (!(err < 1e-6)) {
    throw std::invalid_argument("distribution not normalized, |lse| = " + std::to_string(err));
  }
  return LogProbDist(std::move(logprobs));
}

double LogProbDist::normalization_error() const {
  return std::abs(log_sum_exp(logp_));
}

FusionWeights::FusionWeights(double ilm, double elm) : beta_ilm(ilm), beta_elm(elm) {
  if (!(ilm >= 0.0 && ilm <= 1.0) || !(elm >= 0.0 && elm <= 1.0)) {
    throw std::invalid_argument("fusion weights must lie in [0, 1]");
  }
}

}  // namespace fusedec
