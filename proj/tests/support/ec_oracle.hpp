#pragma once

// Brute-force oracle for the equivalence-constraint generator: enumerates
// all 2^(n-1) segmentations of the L1 frame, tests the crossing predicate
// directly on every pair of alignment links, renders both alternate
// colorings, and drops pure monolingual renderings. Independent of the
// production prefix-max/suffix-min implementation.

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "csforge/aligner.hpp"
#include "csforge/corpus.hpp"

namespace csforge::testing {

inline bool oracle_boundary_blocked(const Alignment& alignment, std::size_t k) {
  for (const auto& [i1, j1] : alignment.links) {
    for (const auto& [i2, j2] : alignment.links) {
      const bool spans = i1 <= k && k < i2;
      if (spans && j1 >= j2) return true;
    }
  }
  return false;
}

inline std::set<std::vector<std::string>> ec_oracle(const ParallelExample& pair,
                                                    const Alignment& alignment) {
  std::set<std::vector<std::string>> out;
  const std::size_t n = pair.l1_tokens.size();
  if (n == 0) return out;
  const std::size_t boundaries = n - 1;
  for (std::size_t mask = 0; mask < (1ull << boundaries); ++mask) {
    bool valid = true;
    for (std::size_t k = 0; k < boundaries; ++k) {
      if ((mask >> k & 1) && oracle_boundary_blocked(alignment, k)) valid = false;
    }
    if (!valid) continue;
    for (bool l1_first : {true, false}) {
      std::vector<std::string> tokens;
      bool any_l1 = false, any_l2 = false;
      std::size_t seg_start = 0, seg_index = 0;
      for (std::size_t end = 0; end < n; ++end) {
        const bool close = end == n - 1 || (mask >> end & 1);
        if (!close) continue;
        const bool use_l1 = ((seg_index % 2 == 0) == l1_first);
        if (use_l1) {
          for (std::size_t i = seg_start; i <= end; ++i) {
            tokens.push_back(pair.l1_tokens[i]);
            any_l1 = true;
          }
        } else {
          std::vector<std::size_t> targets;
          for (const auto& [i, j] : alignment.links) {
            if (i >= seg_start && i <= end) targets.push_back(j);
          }
          std::sort(targets.begin(), targets.end());
          targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
          for (std::size_t j : targets) {
            tokens.push_back(pair.l2_tokens[j]);
            any_l2 = true;
          }
        }
        seg_start = end + 1;
        ++seg_index;
      }
      if (any_l1 && any_l2) out.insert(tokens);
    }
  }
  return out;
}

}  // namespace csforge::testing
