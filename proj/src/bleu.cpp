#include "fusedec/bleu.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "fusedec/util.hpp"

namespace fusedec {

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

bool is_padded_punct(unsigned char c) {
  return (c >= 0x20 && c <= 0x26) ||  // space ! " # $ % &
         (c >= 0x28 && c <= 0x2B) ||  // ( ) * +
         c == 0x2F ||                 // /
         (c >= 0x3A && c <= 0x40) ||  // : ; < = > ? @
         (c >= 0x5B && c <= 0x60) ||  // [ \ ] ^ _ `
         (c >= 0x7B && c <= 0x7E);    // { | } ~
}

bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }
bool is_period_comma(unsigned char c) { return c == '.' || c == ','; }

// Left-to-right non-overlapping pair rewrite, mirroring regex sub semantics.
std::string rewrite_pairs(const std::string& s, bool (*first)(unsigned char),
                          bool (*second)(unsigned char), const char* fmt) {
  std::string out;
  out.reserve(s.size() + 16);
  size_t i = 0;
  while (i < s.size()) {
    if (i + 1 < s.size() && first(static_cast<unsigned char>(s[i])) &&
        second(static_cast<unsigned char>(s[i + 1]))) {
      for (const char* p = fmt; *p; ++p) {
        if (*p == '1') out += s[i];
        else if (*p == '2') out += s[i + 1];
        else out += *p;
      }
      i += 2;
    } else {
      out += s[i];
      ++i;
    }
  }
  return out;
}

bool not_digit(unsigned char c) { return !is_digit(c); }

}  // namespace

std::vector<std::string> tokenize_13a(std::string_view text) {
  std::string norm(text);
  replace_all(norm, "<skipped>", "");
  replace_all(norm, "-\n", "");
  replace_all(norm, "\n", " ");
  replace_all(norm, "&quot;", "\"");
  replace_all(norm, "&amp;", "&");
  replace_all(norm, "&lt;", "<");
  replace_all(norm, "&gt;", ">");
  norm = " " + norm + " ";

  std::string padded;
  padded.reserve(norm.size() * 2);
  for (char c : norm) {
    if (is_padded_punct(static_cast<unsigned char>(c))) {
      padded += ' ';
      padded += c;
      padded += ' ';
    } else {
      padded += c;
    }
  }
  padded = rewrite_pairs(padded, not_digit, is_period_comma, "1 2 ");
  padded = rewrite_pairs(padded, is_period_comma, not_digit, " 1 2");
  padded = rewrite_pairs(padded, is_digit, [](unsigned char c) { return c == '-'; }, "1 2 ");
  return split_ws(padded);
}

namespace {

constexpr int kMaxOrder = 4;

// N-gram keys as separator-joined token runs.
void count_ngrams(const std::vector<std::string>& tokens, int n,
                  std::unordered_map<std::string, int64_t>& out) {
  if (static_cast<int>(tokens.size()) < n) return;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (int j = 1; j < n; ++j) {
      key += '\x01';
      key += tokens[i + j];
    }
    out[key] += 1;
  }
}

}  // namespace

double bleu_corpus(const std::vector<std::string>& hypotheses,
                   const std::vector<std::string>& references) {
  if (hypotheses.empty()) throw std::invalid_argument("empty corpus");
  if (hypotheses.size() != references.size()) {
    throw std::invalid_argument("hypothesis/reference count mismatch");
  }

  int64_t correct[kMaxOrder] = {0, 0, 0, 0};
  int64_t total[kMaxOrder] = {0, 0, 0, 0};
  int64_t sys_len = 0;
  int64_t ref_len = 0;

  for (size_t i = 0; i < hypotheses.size(); ++i) {
    auto hyp = tokenize_13a(hypotheses[i]);
    auto ref = tokenize_13a(references[i]);
    sys_len += static_cast<int64_t>(hyp.size());
    ref_len += static_cast<int64_t>(ref.size());
    for (int n = 1; n <= kMaxOrder; ++n) {
      std::unordered_map<std::string, int64_t> hyp_ng, ref_ng;
      count_ngrams(hyp, n, hyp_ng);
      count_ngrams(ref, n, ref_ng);
      total[n - 1] += std::max<int64_t>(static_cast<int64_t>(hyp.size()) - n + 1, 0);
      for (const auto& [key, cnt] : hyp_ng) {
        auto it = ref_ng.find(key);
        if (it != ref_ng.end()) correct[n - 1] += std::min(cnt, it->second);
      }
    }
  }

  double precisions[kMaxOrder] = {0.0, 0.0, 0.0, 0.0};
  double smooth = 1.0;
  for (int n = 1; n <= kMaxOrder; ++n) {
    if (total[n - 1] == 0) break;
    if (correct[n - 1] == 0) {
      smooth *= 2.0;
      precisions[n - 1] = 100.0 / (smooth * static_cast<double>(total[n - 1]));
    } else {
      precisions[n - 1] =
          100.0 * static_cast<double>(correct[n - 1]) / static_cast<double>(total[n - 1]);
    }
  }

  if (sys_len == 0) return 0.0;
  double bp = 1.0;
  if (sys_len < ref_len) {
    bp = std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(sys_len));
  }
  double log_sum = 0.0;
  for (double p : precisions) {
    log_sum += (p > 0.0) ? std::log(p) : -9999999999.0;
  }
  return bp * std::exp(log_sum / kMaxOrder);
}

}  // namespace fusedec
