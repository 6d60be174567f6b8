#include "csforge/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace csforge {

bool is_cjk(char32_t cp) {
  return (cp >= 0x4E00 && cp <= 0x9FFF) ||   // unified ideographs
         (cp >= 0x3400 && cp <= 0x4DBF) ||   // extension A
         (cp >= 0xF900 && cp <= 0xFAFF);     // compatibility ideographs
}

namespace {

bool is_latin(char32_t cp) {
  return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') ||
         (cp >= 0x00C0 && cp <= 0x024F);  // Latin-1 supplement + extended
}

bool is_apostrophe(char32_t cp) { return cp == '\'' || cp == 0x2019; }

bool is_punct(char32_t cp) {
  if (is_apostrophe(cp)) return false;
  if (cp < 0x80) return std::ispunct(static_cast<int>(cp)) != 0;
  // common CJK punctuation and fullwidth forms
  if (cp >= 0x3000 && cp <= 0x303F) return true;
  if (cp >= 0xFF01 && cp <= 0xFF0F) return true;
  if (cp >= 0xFF1A && cp <= 0xFF20) return true;
  if (cp >= 0xFF3B && cp <= 0xFF40) return true;
  if (cp >= 0xFF5B && cp <= 0xFF65) return true;
  if (cp == 0x2026 || cp == 0x2014 || cp == 0x2013) return true;  // … — –
  if (cp >= 0x201C && cp <= 0x201D) return true;                  // curly quotes
  return false;
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

Lang language_id(std::string_view token) {
  if (token.empty()) throw ContractError("language_id: empty token");
  bool latin = false;
  std::size_t i = 0;
  while (i < token.size()) {
    const char32_t cp = utf8_next(token, i);
    if (is_cjk(cp)) return Lang::L2;
    if (is_latin(cp)) latin = true;
  }
  return latin ? Lang::L1 : Lang::Other;
}

std::vector<std::string> tokenize_and_clean(
    std::string_view line, const std::vector<std::string>& hesitations) {
  std::vector<std::string> out;
  for (const std::string& raw : split_ws(line)) {
    // strip punctuation, keep apostrophes
    std::string kept;
    std::size_t i = 0;
    while (i < raw.size()) {
      const char32_t cp = utf8_next(raw, i);
      if (!is_punct(cp)) utf8_append(kept, cp);
    }
    if (kept.empty()) continue;
    const std::string low = lower_ascii(kept);
    if (std::find(hesitations.begin(), hesitations.end(), low) !=
        hesitations.end()) {
      continue;
    }
    // split CJK runs into single-character tokens
    std::string pending;
    i = 0;
    while (i < kept.size()) {
      std::size_t start = i;
      const char32_t cp = utf8_next(kept, i);
      if (is_cjk(cp)) {
        if (!pending.empty()) {
          out.push_back(pending);
          pending.clear();
        }
        out.push_back(std::string(kept.substr(start, i - start)));
      } else {
        pending += kept.substr(start, i - start);
      }
    }
    if (!pending.empty()) out.push_back(pending);
  }
  return out;
}

Vocabulary::Vocabulary() {
  add("<pad>");
  add("<unk>");
  add("<bos>");
  add("<eos>");
}

std::uint32_t Vocabulary::add(const std::string& token) {
  const auto id = static_cast<std::uint32_t>(tokens_.size());
  tokens_.push_back(token);
  ids_.emplace(token, id);
  return id;
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& corpus,
                             std::size_t cap,
                             const std::vector<std::string>& extra_specials) {
  if (cap < 5 || cap < 4 + extra_specials.size()) {
    throw ContractError("Vocabulary::build: cap too small");
  }
  Vocabulary v;
  for (const auto& t : extra_specials) {
    if (v.contains(t)) throw ContractError("duplicate special token: " + t);
    v.add(t);
  }
  std::map<std::string, std::size_t> freq;
  for (const auto& utt : corpus) {
    for (const auto& tok : utt) {
      if (!v.contains(tok)) ++freq[tok];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  // by frequency desc, lexicographic asc on ties (map order gives the latter)
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  for (const auto& [tok, count] : ranked) {
    if (v.size() >= cap) break;
    v.add(tok);
  }
  return v;
}

std::uint32_t Vocabulary::id_of(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token_of(std::uint32_t id) const {
  if (id >= tokens_.size()) {
    throw ContractError("Vocabulary: id out of range: " + std::to_string(id));
  }
  return tokens_[id];
}

bool Vocabulary::contains(std::string_view token) const {
  return ids_.count(std::string(token)) > 0;
}

void Vocabulary::save(const std::string& path) const {
  write_lines(path, tokens_);
}

Vocabulary Vocabulary::load(const std::string& path) {
  const auto lines = read_lines(path);
  Vocabulary v;
  if (lines.size() < 4 || lines[0] != "<pad>" || lines[1] != "<unk>" ||
      lines[2] != "<bos>" || lines[3] != "<eos>") {
    throw FormatError("vocabulary file must start with the four special tokens: " + path);
  }
  for (std::size_t i = 4; i < lines.size(); ++i) {
    if (lines[i].empty()) throw FormatError("empty vocabulary entry at line " + std::to_string(i + 1));
    if (v.contains(lines[i])) throw FormatError("duplicate vocabulary entry at line " + std::to_string(i + 1));
    v.add(lines[i]);
  }
  return v;
}

EncodedExample encode_example(const ParallelExample& ex, const Vocabulary& vocab) {
  if (ex.l1_tokens.empty() || ex.l2_tokens.empty()) {
    throw ContractError("encode_example: both monolingual sides must be present");
  }
  EncodedExample out;
  const auto vsize = static_cast<std::uint32_t>(vocab.size());
  auto extended_id = [&](const std::string& tok, bool register_oov) -> std::uint32_t {
    const std::uint32_t id = vocab.id_of(tok);
    if (id != Vocabulary::kUnk) return id;
    for (std::size_t k = 0; k < out.src_oovs.size(); ++k) {
      if (out.src_oovs[k] == tok) return vsize + static_cast<std::uint32_t>(k);
    }
    if (!register_oov) return Vocabulary::kUnk;
    out.src_oovs.push_back(tok);
    return vsize + static_cast<std::uint32_t>(out.src_oovs.size() - 1);
  };

  std::vector<std::string> src = ex.l1_tokens;
  src.push_back(kSepToken);
  src.insert(src.end(), ex.l2_tokens.begin(), ex.l2_tokens.end());
  for (const auto& tok : src) {
    out.src_ids.push_back(vocab.id_of(tok));
    out.src_extended_ids.push_back(extended_id(tok, true));
  }

  if (ex.has_cs()) {
    out.tgt_ids.push_back(Vocabulary::kBos);
    out.tgt_extended_ids.push_back(Vocabulary::kBos);
    for (const auto& tok : ex.cs_tokens) {
      out.tgt_ids.push_back(vocab.id_of(tok));
      out.tgt_extended_ids.push_back(extended_id(tok, false));
    }
    out.tgt_ids.push_back(Vocabulary::kEos);
    out.tgt_extended_ids.push_back(Vocabulary::kEos);
  }
  return out;
}

std::string extended_token(std::uint32_t ext_id, const Vocabulary& vocab,
                           const std::vector<std::string>& src_oovs) {
  const auto vsize = static_cast<std::uint32_t>(vocab.size());
  if (ext_id < vsize) return vocab.token_of(ext_id);
  const std::size_t k = ext_id - vsize;
  if (k >= src_oovs.size()) {
    throw ContractError("extended id out of range: " + std::to_string(ext_id));
  }
  return src_oovs[k];
}

std::vector<ParallelExample> load_parallel_tsv(
    const std::string& path, bool clean,
    const std::vector<std::string>& hesitations) {
  std::vector<ParallelExample> out;
  const auto lines = read_lines(path);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const auto cols = split_char(lines[ln], '\t');
    if (cols.size() != 2 && cols.size() != 3) {
      throw FormatError(path + ":" + std::to_string(ln + 1) + ": expected 2 or 3 columns, got " +
                        std::to_string(cols.size()));
    }
    ParallelExample ex;
    auto toks = [&](const std::string& col) {
      return clean ? tokenize_and_clean(col, hesitations) : split_ws(col);
    };
    ex.l1_tokens = toks(cols[0]);
    ex.l2_tokens = toks(cols[1]);
    if (cols.size() == 3) ex.cs_tokens = toks(cols[2]);
    if (ex.l1_tokens.empty() || ex.l2_tokens.empty()) {
      throw FormatError(path + ":" + std::to_string(ln + 1) +
                        ": monolingual column empty after cleaning");
    }
    out.push_back(std::move(ex));
  }
  return out;
}

void save_parallel_tsv(const std::string& path,
                       const std::vector<ParallelExample>& examples) {
  std::vector<std::string> lines;
  lines.reserve(examples.size());
  for (const auto& ex : examples) {
    std::string line = join(ex.l1_tokens, " ");
    line += '\t';
    line += join(ex.l2_tokens, " ");
    if (ex.has_cs()) {
      line += '\t';
      line += join(ex.cs_tokens, " ");
    }
    lines.push_back(std::move(line));
  }
  write_lines(path, lines);
}

std::vector<std::vector<std::string>> load_token_lines(const std::string& path) {
  std::vector<std::vector<std::string>> out;
  for (const auto& line : read_lines(path)) {
    out.push_back(split_ws(line));
  }
  return out;
}

void save_nbest(const std::string& path, const std::vector<NbestEntry>& entries) {
  std::vector<std::string> lines;
  lines.reserve(entries.size());
  for (const auto& e : entries) {
    lines.push_back(std::to_string(e.example_index) + "\t" +
                    std::to_string(e.rank) + "\t" + format_double(e.logprob, 6) +
                    "\t" + join(e.tokens, " "));
  }
  write_lines(path, lines);
}

std::vector<NbestEntry> load_nbest(const std::string& path) {
  std::vector<NbestEntry> out;
  const auto lines = read_lines(path);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const auto cols = split_char(lines[ln], '\t');
    if (cols.size() != 4) {
      throw FormatError(path + ":" + std::to_string(ln + 1) +
                        ": expected 4 tab-separated fields");
    }
    NbestEntry e;
    e.example_index = static_cast<std::size_t>(std::stoull(cols[0]));
    e.rank = static_cast<std::size_t>(std::stoull(cols[1]));
    e.logprob = std::stod(cols[2]);
    e.tokens = split_ws(cols[3]);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<std::vector<std::string>> load_pos_file(
    const std::string& path, const std::vector<std::vector<std::string>>& corpus) {
  const auto lines = read_lines(path);
  if (lines.size() != corpus.size()) {
    throw FormatError(path + ": " + std::to_string(lines.size()) +
                      " tag lines for " + std::to_string(corpus.size()) +
                      " corpus lines");
  }
  std::vector<std::vector<std::string>> out;
  out.reserve(lines.size());
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    auto tags = split_ws(lines[ln]);
    if (tags.size() != corpus[ln].size()) {
      throw FormatError(path + ":" + std::to_string(ln + 1) + ": " +
                        std::to_string(tags.size()) + " tags for " +
                        std::to_string(corpus[ln].size()) + " tokens");
    }
    out.push_back(std::move(tags));
  }
  return out;
}

}  // namespace csforge
