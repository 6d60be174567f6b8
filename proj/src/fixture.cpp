#include "csforge/fixture.hpp"

#include <algorithm>
#include <set>

namespace csforge {

namespace {

// Pronounceable deterministic word stock for the open classes.
std::vector<std::string> synth_words(std::size_t count, std::string_view suffix,
                                     Rng& rng, std::set<std::string>& taken) {
  static const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m",
                                  "n", "p", "r", "s", "t", "v", "z",
                                  "ch", "st", "br", "tr", "pl", "gr"};
  static const char* kVowels[] = {"a", "e", "i", "o", "u", "ai", "ee", "oo"};
  std::vector<std::string> out;
  while (out.size() < count) {
    std::string w;
    const std::size_t syllables = 2 + rng.index(2);
    for (std::size_t s = 0; s < syllables; ++s) {
      w += kOnsets[rng.index(std::size(kOnsets))];
      w += kVowels[rng.index(std::size(kVowels))];
    }
    w += suffix;
    if (taken.insert(w).second) out.push_back(w);
  }
  return out;
}

}  // namespace

ToyGrammar ToyGrammar::standard(std::uint64_t seed, std::size_t n_nouns,
                                std::size_t n_adjs, std::size_t n_verbs) {
  ToyGrammar g;
  g.seed = seed;
  Rng rng(seed ^ 0x5eedf1f7u);

  g.words["PRON"] = {"we", "you", "they", "i", "he", "she"};
  g.words["DET"] = {"the", "a", "this", "that", "some"};
  g.words["PREP"] = {"in", "on", "at", "near", "with", "from"};
  g.words["ADV"] = {"now", "today", "here", "soon", "often", "again"};
  std::set<std::string> taken;
  for (const auto& [cat, list] : g.words) {
    taken.insert(list.begin(), list.end());
  }
  g.words["N"] = synth_words(n_nouns, "", rng, taken);
  g.words["ADJ"] = synth_words(n_adjs, "y", rng, taken);
  g.words["V"] = synth_words(n_verbs, "", rng, taken);

  // single CJK character per L1 word, assigned in a fixed category order
  char32_t next_cp = 0x4E00;
  for (const char* cat : {"PRON", "DET", "PREP", "ADV", "N", "ADJ", "V"}) {
    for (const auto& w : g.words[cat]) {
      std::string l2;
      utf8_append(l2, next_cp++);
      g.lexicon[w] = l2;
      g.category_of[w] = cat;
    }
  }

  using T = Template;
  g.templates = {
      // monotone templates
      T{{"PRON", "V", "N"}, {0, 1, 2}, {{0}, {1}, {2}}},
      T{{"PRON", "V", "DET", "N"}, {0, 1, 2, 3}, {{0}, {1}, {2, 3}}},
      T{{"PRON", "V", "PREP", "DET", "N"}, {0, 1, 2, 3, 4}, {{0}, {1}, {2, 3, 4}}},
      T{{"PRON", "V", "ADV", "PREP", "DET", "N"},
        {0, 1, 2, 3, 4, 5},
        {{0}, {1}, {2}, {3, 4, 5}}},
      // adjective-noun inversion (crossing inside the NP)
      T{{"PRON", "V", "DET", "ADJ", "N"}, {0, 1, 2, 4, 3}, {{0}, {1}, {2, 3, 4}}},
      T{{"DET", "ADJ", "N", "V", "DET", "N"},
        {0, 2, 1, 3, 4, 5},
        {{0, 1, 2}, {3}, {4, 5}}},
      T{{"PRON", "ADV", "V", "DET", "ADJ", "N"},
        {0, 1, 2, 3, 5, 4},
        {{0}, {1}, {2}, {3, 4, 5}}},
      // verb-adverb inversion (crossing across constituents)
      T{{"DET", "N", "V", "ADV"}, {0, 1, 3, 2}, {{0, 1}, {2}, {3}}},
      // longer sentence with two noun phrases
      T{{"PRON", "V", "DET", "N", "PREP", "DET", "ADJ", "N"},
        {0, 1, 2, 3, 4, 5, 7, 6},
        {{0}, {1}, {2, 3}, {4, 5, 6, 7}}},
      T{{"DET", "ADJ", "N", "V", "PREP", "DET", "ADJ", "N", "ADV"},
        {0, 2, 1, 3, 4, 5, 7, 6, 8},
        {{0, 1, 2}, {3}, {4, 5, 6, 7}, {8}}},
  };
  return g;
}

std::string ToyGrammar::pos_of(const std::string& token) const {
  auto it = category_of.find(token);
  if (it != category_of.end()) return it->second;
  // L2 side: invert through the lexicon (bijective)
  for (const auto& [l1, l2] : lexicon) {
    if (l2 == token) return category_of.at(l1);
  }
  return "X";
}

FixtureData generate_fixture(const ToyGrammar& grammar, std::size_t size) {
  if (size < 1) throw ContractError("generate_fixture: size must be >= 1");
  if (grammar.templates.empty()) throw ContractError("generate_fixture: no templates");
  FixtureData out;
  Rng rng(grammar.seed);
  for (std::size_t n = 0; n < size; ++n) {
    const auto& tpl = grammar.templates[rng.index(grammar.templates.size())];
    const std::size_t len = tpl.slots.size();

    std::vector<std::string> l1(len);
    for (std::size_t i = 0; i < len; ++i) {
      const auto& list = grammar.words.at(tpl.slots[i]);
      l1[i] = list[rng.index(list.size())];
    }
    std::vector<std::string> l2(len);
    std::vector<std::size_t> l2_pos_of(len);  // L1 slot -> L2 position
    for (std::size_t j = 0; j < len; ++j) {
      const std::size_t slot = tpl.l2_order[j];
      l2[j] = grammar.lexicon.at(l1[slot]);
      l2_pos_of[slot] = j;
    }

    Alignment gold;
    for (std::size_t i = 0; i < len; ++i) gold.links.insert({i, l2_pos_of[i]});

    // constituent-wise switching; a switched constituent renders its slots'
    // L2 words in their L2-internal order
    std::vector<std::string> cs;
    std::vector<std::string> pos;
    for (const auto& span : tpl.constituents) {
      const bool switched = rng.bernoulli(grammar.switch_prob);
      if (!switched) {
        for (std::size_t slot : span) {
          cs.push_back(l1[slot]);
          pos.push_back(tpl.slots[slot]);
        }
      } else {
        std::vector<std::size_t> ordered(span.begin(), span.end());
        std::sort(ordered.begin(), ordered.end(),
                  [&](std::size_t a, std::size_t b) {
                    return l2_pos_of[a] < l2_pos_of[b];
                  });
        for (std::size_t slot : ordered) {
          cs.push_back(l2[l2_pos_of[slot]]);
          pos.push_back(tpl.slots[slot]);
        }
      }
    }

    ParallelExample ex;
    ex.l1_tokens = std::move(l1);
    ex.l2_tokens = std::move(l2);
    ex.cs_tokens = std::move(cs);
    out.examples.push_back(std::move(ex));
    out.gold_alignments.push_back(std::move(gold));
    out.cs_pos.push_back(std::move(pos));
  }
  return out;
}

void write_fixture(const std::string& stem, const ToyGrammar& grammar,
                   const FixtureData& data) {
  save_parallel_tsv(stem + ".tsv", data.examples);
  save_pharaoh(stem + ".align", data.gold_alignments);
  std::vector<std::string> cs_lines, pos_lines;
  for (std::size_t i = 0; i < data.examples.size(); ++i) {
    cs_lines.push_back(join(data.examples[i].cs_tokens, " "));
    pos_lines.push_back(join(data.cs_pos[i], " "));
  }
  write_lines(stem + ".cs.txt", cs_lines);
  write_lines(stem + ".cs.pos", pos_lines);
  std::vector<std::string> lex_lines;
  for (const auto& [l1, l2] : grammar.lexicon) {
    lex_lines.push_back(l1 + "\t" + l2 + "\t" + grammar.category_of.at(l1));
  }
  write_lines(stem + ".lexicon.tsv", lex_lines);
}

std::vector<std::vector<std::string>> tag_with_lexicon(
    const ToyGrammar& grammar, const std::vector<std::vector<std::string>>& corpus) {
  std::map<std::string, std::string> tag;
  for (const auto& [l1, l2] : grammar.lexicon) {
    tag[l1] = grammar.category_of.at(l1);
    tag[l2] = grammar.category_of.at(l1);
  }
  std::vector<std::vector<std::string>> out;
  out.reserve(corpus.size());
  for (const auto& utt : corpus) {
    std::vector<std::string> tags;
    tags.reserve(utt.size());
    for (const auto& tok : utt) {
      auto it = tag.find(tok);
      tags.push_back(it == tag.end() ? "X" : it->second);
    }
    out.push_back(std::move(tags));
  }
  return out;
}

RenamingCorpus make_renaming_corpus(std::size_t n_pairs, std::size_t vocab_size,
                                    std::size_t max_len, std::uint64_t seed) {
  if (max_len < 1 || vocab_size < max_len) {
    throw ContractError("make_renaming_corpus: need vocab_size >= max_len >= 1");
  }
  RenamingCorpus out;
  Rng rng(seed);
  for (std::size_t s = 0; s < n_pairs; ++s) {
    const std::size_t len = 1 + rng.index(max_len);
    // distinct word ids within the sentence keep the gold alignment unambiguous
    std::set<std::size_t> used;
    SentencePair pair;
    Alignment gold;
    while (pair.src.size() < len) {
      const std::size_t w = rng.index(vocab_size);
      if (!used.insert(w).second) continue;
      pair.src.push_back("e" + std::to_string(w));
      pair.tgt.push_back("f" + std::to_string(w));
      gold.links.insert({pair.src.size() - 1, pair.tgt.size() - 1});
    }
    out.pairs.push_back(std::move(pair));
    out.gold.push_back(std::move(gold));
  }
  return out;
}

}  // namespace csforge
