#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace csforge {

// Error categories; the CLI maps each to a distinct exit code.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GraphError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deterministic RNG. All draw helpers are implemented on top of the raw
// mt19937_64 stream so sequences are identical across platforms and
// standard-library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // uniform in [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n)
  std::size_t index(std::size_t n) {
    if (n == 0) throw ContractError("Rng::index: n must be positive");
    // rejection sampling to avoid modulo bias
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return static_cast<std::size_t>(x % n);
  }

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

  std::vector<std::size_t> permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    shuffle(p);
    return p;
  }

 private:
  std::mt19937_64 engine_;
};

// FNV-1a 64-bit digest, used for input fingerprints in run manifests.
std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);
std::string file_digest_hex(const std::string& path);

// Worker cap from CSFORGE_THREADS; defaults to 1 for determinism.
unsigned worker_count();

// Decodes one UTF-8 codepoint starting at byte offset `i`; advances `i`.
// Throws FormatError naming the byte offset on malformed input.
char32_t utf8_next(std::string_view s, std::size_t& i);

// Appends a codepoint to a UTF-8 string.
void utf8_append(std::string& out, char32_t cp);

std::vector<std::string> split_ws(std::string_view line);
std::vector<std::string> split_char(std::string_view line, char sep);
std::string join(const std::vector<std::string>& tokens, std::string_view sep);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);
std::vector<std::string> read_lines(const std::string& path);
void write_lines(const std::string& path, const std::vector<std::string>& lines);

// Fixed-format float for text reports: deterministic, locale-free.
std::string format_double(double v, int precision = 6);

}  // namespace csforge
