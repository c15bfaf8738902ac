#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fusedec {

// Corpus BLEU with the WMT signature case:mixed|eff:no|tok:13a|smooth:exp.
inline constexpr const char* kBleuSignature = "case:mixed|eff:no|tok:13a|smooth:exp";

// mteval-v13a tokenization. Rules, applied in order over the space-wrapped
// line after SGML entity unescaping:
//
//   1. pad every character in  { | } ~ [ \ ] ^ _ ` space ! " # $ % &
//      ( ) * + : ; < = > ? @ /  with spaces  (. , - and apostrophe exempt)
//   2. "X." / "X,"  ->  "X . " / "X , "   when X is not a digit
//   3. ".X" / ",X"  ->  " . X" / " , X"   when X is not a digit
//   4. "D-"         ->  "D - "            when D is a digit
//   5. collapse whitespace and split
//
// Rules 2-4 scan left to right over non-overlapping pairs, matching the
// reference implementation's sequential substitution.
std::vector<std::string> tokenize_13a(std::string_view text);

// 4-gram corpus BLEU in [0, 100]: modified precisions over 13a tokens,
// case-sensitive, exponential smoothing for zero match counts (the k-th
// zero-count precision becomes 1 / (2^k * total)), no effective-order
// reduction, standard brevity penalty.
double bleu_corpus(const std::vector<std::string>& hypotheses,
                   const std::vector<std::string>& references);

}  // namespace fusedec
