#pragma once

#include <map>
#include <string>
#include <vector>

#include "csforge/aligner.hpp"
#include "csforge/corpus.hpp"

namespace csforge {

// Synthetic bilingual grammar: slot templates over word categories, a
// bijective L1->L2 lexicon (Latin words vs. single CJK characters so
// language_id works unchanged), and constituent-wise switching.
struct ToyGrammar {
  struct Template {
    std::vector<std::string> slots;          // category per L1 position
    std::vector<std::size_t> l2_order;       // L1 slot index at each L2 position
    std::vector<std::vector<std::size_t>> constituents;  // spans of L1 slots
  };

  std::map<std::string, std::vector<std::string>> words;  // category -> L1 words
  std::map<std::string, std::string> lexicon;             // L1 word -> L2 word
  std::map<std::string, std::string> category_of;         // L1 word -> category
  std::vector<Template> templates;
  double switch_prob = 0.35;
  std::uint64_t seed = 1;

  // Wider open classes make rarer words; used to steer fixture OOV rates.
  static ToyGrammar standard(std::uint64_t seed, std::size_t n_nouns = 40,
                             std::size_t n_adjs = 16, std::size_t n_verbs = 20);

  // Category for any token of either language (gold POS for generated text).
  std::string pos_of(const std::string& token) const;
};

struct FixtureData {
  std::vector<ParallelExample> examples;  // l1, l2, cs
  std::vector<Alignment> gold_alignments; // l1 -> l2 links
  std::vector<std::vector<std::string>> cs_pos;  // tags per cs token
};

FixtureData generate_fixture(const ToyGrammar& grammar, std::size_t size);

// Writes <stem>.tsv, <stem>.align, <stem>.cs.txt, <stem>.cs.pos and
// <stem>.lexicon.tsv (l1 word, l2 word, category).
void write_fixture(const std::string& stem, const ToyGrammar& grammar,
                   const FixtureData& data);

// Tags an arbitrary corpus with the grammar lexicon, one tag per token;
// tokens outside the lexicon get "X".
std::vector<std::vector<std::string>> tag_with_lexicon(
    const ToyGrammar& grammar, const std::vector<std::vector<std::string>>& corpus);

// Sentences paired with themselves through a bijective token renaming;
// the gold alignment is the identity permutation. Tokens within one
// sentence are distinct, so the alignment is unambiguous.
struct RenamingCorpus {
  std::vector<SentencePair> pairs;
  std::vector<Alignment> gold;
};
RenamingCorpus make_renaming_corpus(std::size_t n_pairs, std::size_t vocab_size,
                                    std::size_t max_len, std::uint64_t seed);

}  // namespace csforge
