#include "fusedec/vocab.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fusedec/util.hpp"

namespace fusedec {

Vocabulary::Vocabulary(std::vector<std::string> tokens, int bos_id, int eos_id, int unk_id)
    : tokens_(std::move(tokens)), bos_id_(bos_id), eos_id_(eos_id), unk_id_(unk_id) {
  int v = size();
  if (v == 0) throw std::invalid_argument("empty vocabulary");
  auto check_id = [v](int id, const char* name) {
    if (id < 0 || id >= v) {
      throw std::invalid_argument(std::string(name) + " id out of range");
    }
  };
  check_id(bos_id_, "bos");
  check_id(eos_id_, "eos");
  check_id(unk_id_, "unk");
  if (bos_id_ == eos_id_ || bos_id_ == unk_id_ || eos_id_ == unk_id_) {
    throw std::invalid_argument("bos/eos/unk ids must be distinct");
  }
  for (int i = 0; i < v; ++i) {
    const std::string& t = tokens_[i];
    if (t.empty()) throw std::invalid_argument("empty token surface");
    for (char c : t) {
      if (c == '\n' || c == '\r' || c == ' ' || c == '\t') {
        throw std::invalid_argument("token contains whitespace: '" + t + "'");
      }
    }
    if (!index_.emplace(t, i).second) {
      throw std::invalid_argument("duplicate token: '" + t + "'");
    }
  }
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) throw std::invalid_argument("token id out of range");
  return tokens_[id];
}

int Vocabulary::id_of(std::string_view surface) const {
  auto it = index_.find(std::string(surface));
  return it == index_.end() ? unk_id_ : it->second;
}

bool Vocabulary::contains(std::string_view surface) const {
  return index_.find(std::string(surface)) != index_.end();
}

TokenSeq Vocabulary::encode(std::string_view text) const {
  TokenSeq seq;
  for (const auto& tok : split_ws(text)) seq.push_back(id_of(tok));
  return seq;
}

std::string Vocabulary::decode(const TokenSeq& seq) const {
  std::string out;
  for (size_t i = 0; i < seq.size(); ++i) {
    if (i) out += ' ';
    out += token(seq[i]);
  }
  return out;
}

bool Vocabulary::valid_seq(const TokenSeq& seq) const {
  for (int id : seq) {
    if (id < 0 || id >= size()) return false;
  }
  return true;
}

void Vocabulary::save(const std::string& path) const {
  std::ostringstream out;
  out << "VOCAB v1 " << size() << ' ' << bos_id_ << ' ' << eos_id_ << ' ' << unk_id_ << '\n';
  for (const auto& t : tokens_) out << t << '\n';
  write_file(path, out.str());
}

Vocabulary Vocabulary::load(const std::string& path) {
  auto lines = read_lines(path);
  if (lines.empty()) throw DataError(path + ": empty vocabulary file");
  auto head = split_ws(lines[0]);
  if (head.size() != 6 || head[0] != "VOCAB" || head[1] != "v1") {
    throw DataError(path + ": bad vocabulary header");
  }
  int v = static_cast<int>(parse_int(head[2], "vocab size"));
  int bos = static_cast<int>(parse_int(head[3], "bos id"));
  int eos = static_cast<int>(parse_int(head[4], "eos id"));
  int unk = static_cast<int>(parse_int(head[5], "unk id"));
  if (static_cast<int>(lines.size()) - 1 != v) {
    throw DataError(path + ": token count does not match header");
  }
  std::vector<std::string> tokens(lines.begin() + 1, lines.end());
  try {
    return Vocabulary(std::move(tokens), bos, eos, unk);
  } catch (const std::invalid_argument& e) {
    throw DataError(path + ": " + e.what());
  }
}

bool Vocabulary::operator==(const Vocabulary& other) const {
  return tokens_ == other.tokens_ && bos_id_ == other.bos_id_ &&
         eos_id_ == other.eos_id_ && unk_id_ == other.unk_id_;
}

}  // namespace fusedec
