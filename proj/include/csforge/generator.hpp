#pragma once

#include <string>
#include <vector>

#include "csforge/aligner.hpp"
#include "csforge/corpus.hpp"

namespace csforge {

struct SwitchCandidate {
  std::vector<std::string> tokens;
  std::vector<Lang> source_of;              // per token: which side it came from
  std::vector<std::size_t> segmentation;    // chosen switch-point indices

  bool operator==(const SwitchCandidate& o) const { return tokens == o.tokens; }
};

// A switch between L1 positions k and k+1 is permitted iff no alignment
// link pair crosses the boundary: max{j : (i,j), i<=k} < min{j : (i,j), i>k}.
bool switch_point_permitted(const Alignment& alignment, std::size_t k);

// Equivalence-constraint generation over the L1 frame: every subset of
// permitted switch points, both alternate colorings; a switched segment
// renders the L2 words aligned to it in L2 order. Pure monolingual
// renderings are dropped; output is deduplicated, ordered fewest switches
// first then lexicographically, and capped at max_outputs.
std::vector<SwitchCandidate> equivalence_generate(const ParallelExample& pair,
                                                  const Alignment& alignment,
                                                  std::size_t max_outputs = 16);

// Unconstrained baseline: a random subset of L1 positions is replaced by
// the aligned L2 words, substituted groups randomly permuted among the
// chosen slots. `count` draws, deduplicated, deterministic per seed.
std::vector<SwitchCandidate> random_switch_generate(const ParallelExample& pair,
                                                    const Alignment& alignment,
                                                    std::size_t count,
                                                    std::uint64_t seed);

enum class AssemblePolicy { OneBest, ThreeBest };

struct AssembledCorpus {
  std::vector<std::vector<std::string>> utterances;
  std::size_t real_count = 0;
  std::size_t generated_count = 0;
  // provenance per utterance: source example (or npos for real), method, rank
  struct Provenance {
    std::size_t source_example = static_cast<std::size_t>(-1);
    std::string method;
    std::size_t rank = 0;
  };
  std::vector<Provenance> provenance;
};

// Concatenates real utterances with the requested N-best hypotheses.
// Throws when an example lacks the requested rank.
AssembledCorpus assemble_augmented_corpus(
    const std::vector<std::vector<std::string>>& real,
    const std::vector<NbestEntry>& generated, AssemblePolicy policy,
    const std::string& method_label = "pointer-generator");

}  // namespace csforge
