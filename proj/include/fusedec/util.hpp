#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fusedec {

// Malformed inputs: bad files, invariant violations in data. CLI exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failures (diverged training, non-finite scores). CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Formats a double with 17 significant digits, enough for exact round-trip.
std::string fmt_g17(double v);

double parse_double(const std::string& text, const std::string& what);
long long parse_int(const std::string& text, const std::string& what);

std::vector<std::string> split_ws(std::string_view text);
std::string join(const std::vector<std::string>& parts, const std::string& sep);

std::string read_file(const std::string& path);
std::vector<std::string> read_lines(const std::string& path);
void write_file(const std::string& path, std::string_view content);
void write_lines(const std::string& path, const std::vector<std::string>& lines);

uint64_t fnv1a64(std::string_view bytes);
// FNV-1a of the file's bytes as a fixed-width hex string.
std::string file_hash_hex(const std::string& path);

// Deterministic RNG with portable value derivation. std::mt19937_64 has a
// standard-defined output sequence; the distribution mappings here are our
// own so results do not depend on the standard library build.
class SeededRng {
 public:
  explicit SeededRng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64();
  double uniform01();                      // [0, 1)
  double uniform(double lo, double hi);
  int uniform_int(int lo, int hi);         // inclusive bounds
  bool bernoulli(double p);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      std::swap(v[i], v[uniform_int(0, i)]);
    }
  }

  // k distinct values from [0, n), ascending.
  std::vector<int> sample_sorted(int n, int k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace fusedec
