#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fusedec {

using TokenSeq = std::vector<int>;

// Closed vocabulary with dense ids and reserved BOS/EOS/UNK entries.
// Immutable after construction.
class Vocabulary {
 public:
  Vocabulary(std::vector<std::string> tokens, int bos_id, int eos_id, int unk_id);

  int size() const { return static_cast<int>(tokens_.size()); }
  int bos_id() const { return bos_id_; }
  int eos_id() const { return eos_id_; }
  int unk_id() const { return unk_id_; }

  const std::string& token(int id) const;
  // Id of a surface string, unk_id when unknown.
  int id_of(std::string_view surface) const;
  bool contains(std::string_view surface) const;

  // Whitespace tokenization; unknown surface strings map to unk_id.
  TokenSeq encode(std::string_view text) const;
  std::string decode(const TokenSeq& seq) const;

  bool valid_seq(const TokenSeq& seq) const;

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

  bool operator==(const Vocabulary& other) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  int bos_id_, eos_id_, unk_id_;
};

}  // namespace fusedec
