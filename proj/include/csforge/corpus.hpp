#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "csforge/util.hpp"

namespace csforge {

enum class Lang { L1, L2, Other };

using TokenLines = std::vector<std::vector<std::string>>;

// L2 is identified by CJK content, L1 by Latin letters. CJK wins on mixed
// tokens so "check一下" counts as a switch into L2.
Lang language_id(std::string_view token);

bool is_cjk(char32_t cp);

inline const std::vector<std::string>& default_hesitations() {
  static const std::vector<std::string> kList = {"uh", "um", "erm",
                                                 "hmm", "ah", "er"};
  return kList;
}

// Whitespace split, punctuation stripped except apostrophe, hesitation
// tokens dropped (case-insensitive), CJK runs split into single characters.
std::vector<std::string> tokenize_and_clean(
    std::string_view line,
    const std::vector<std::string>& hesitations = default_hesitations());

class Vocabulary {
 public:
  static constexpr std::uint32_t kPad = 0;
  static constexpr std::uint32_t kUnk = 1;
  static constexpr std::uint32_t kBos = 2;
  static constexpr std::uint32_t kEos = 3;

  Vocabulary();

  // Frequency-ranked construction, ties broken lexicographically. `cap`
  // bounds the total size including specials. `extra_specials` (e.g. the
  // source-separator token) are reserved right after the four fixed ids.
  static Vocabulary build(const std::vector<std::vector<std::string>>& corpus,
                          std::size_t cap = 50000,
                          const std::vector<std::string>& extra_specials = {});

  std::uint32_t id_of(std::string_view token) const;  // kUnk when absent
  const std::string& token_of(std::uint32_t id) const;
  bool contains(std::string_view token) const;
  std::size_t size() const { return tokens_.size(); }

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::uint32_t add(const std::string& token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::uint32_t> ids_;
};

struct ParallelExample {
  std::vector<std::string> l1_tokens;
  std::vector<std::string> l2_tokens;
  std::vector<std::string> cs_tokens;  // empty when absent

  bool has_cs() const { return !cs_tokens.empty(); }
};

// Source is l1 (+) separator (+) l2; OOV source tokens get extended ids
// vocab_size + k in first-occurrence order, shared with target OOVs.
struct EncodedExample {
  std::vector<std::uint32_t> src_ids;
  std::vector<std::uint32_t> src_extended_ids;
  std::vector<std::string> src_oovs;
  std::vector<std::uint32_t> tgt_ids;           // BOS ... EOS framed
  std::vector<std::uint32_t> tgt_extended_ids;  // same framing
};

inline const std::string kSepToken = "<sep>";

EncodedExample encode_example(const ParallelExample& ex, const Vocabulary& vocab);

// Maps an extended id back to text given the example's OOV list.
std::string extended_token(std::uint32_t ext_id, const Vocabulary& vocab,
                           const std::vector<std::string>& src_oovs);

// TSV reader: l1<TAB>l2[<TAB>cs]. Columns are tokenized+cleaned unless
// `clean` is false (pre-tokenized corpora split on whitespace only).
std::vector<ParallelExample> load_parallel_tsv(
    const std::string& path, bool clean = true,
    const std::vector<std::string>& hesitations = default_hesitations());

void save_parallel_tsv(const std::string& path,
                       const std::vector<ParallelExample>& examples);

// One utterance per line, whitespace-tokenized (no cleaning).
std::vector<std::vector<std::string>> load_token_lines(const std::string& path);

// POS sidecar: one space-separated tag line per corpus line. Throws when a
// line's tag count differs from the token count of `corpus`.
std::vector<std::vector<std::string>> load_pos_file(
    const std::string& path, const std::vector<std::vector<std::string>>& corpus);

// N-best decode record: example_index<TAB>rank<TAB>logprob<TAB>tokens.
// Ranks are 1-based within an example.
struct NbestEntry {
  std::size_t example_index = 0;
  std::size_t rank = 1;
  double logprob = 0.0;
  std::vector<std::string> tokens;
};

void save_nbest(const std::string& path, const std::vector<NbestEntry>& entries);
std::vector<NbestEntry> load_nbest(const std::string& path);

}  // namespace csforge
