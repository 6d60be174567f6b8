#include "csforge/generator.hpp"

#include <algorithm>
#include <map>

namespace csforge {

bool switch_point_permitted(const Alignment& alignment, std::size_t k) {
  bool have_left = false, have_right = false;
  std::size_t left_max = 0, right_min = 0;
  for (const auto& [i, j] : alignment.links) {
    if (i <= k) {
      if (!have_left || j > left_max) left_max = j;
      have_left = true;
    } else {
      if (!have_right || j < right_min) right_min = j;
      have_right = true;
    }
  }
  if (!have_left || !have_right) return true;
  return left_max < right_min;
}

namespace {

struct Rendering {
  SwitchCandidate cand;
  bool any_l1 = false, any_l2 = false;
};

// Renders one segmentation+coloring. Segment p covers L1 positions
// [bounds[p], bounds[p+1]); a switched segment emits its aligned target
// indices in L2 order, an unswitched one its L1 tokens.
Rendering render(const ParallelExample& pair, const Alignment& alignment,
                 const std::vector<std::size_t>& switch_points, bool l1_first) {
  Rendering r;
  r.cand.segmentation = switch_points;
  std::vector<std::size_t> bounds;
  bounds.push_back(0);
  for (std::size_t k : switch_points) bounds.push_back(k + 1);
  bounds.push_back(pair.l1_tokens.size());
  for (std::size_t p = 0; p + 1 < bounds.size(); ++p) {
    const bool use_l1 = ((p % 2 == 0) == l1_first);
    if (use_l1) {
      for (std::size_t i = bounds[p]; i < bounds[p + 1]; ++i) {
        r.cand.tokens.push_back(pair.l1_tokens[i]);
        r.cand.source_of.push_back(Lang::L1);
        r.any_l1 = true;
      }
    } else {
      std::vector<std::size_t> targets;
      for (const auto& [i, j] : alignment.links) {
        if (i >= bounds[p] && i < bounds[p + 1]) targets.push_back(j);
      }
      std::sort(targets.begin(), targets.end());
      targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
      for (std::size_t j : targets) {
        r.cand.tokens.push_back(pair.l2_tokens[j]);
        r.cand.source_of.push_back(Lang::L2);
        r.any_l2 = true;
      }
    }
  }
  return r;
}

void sort_and_dedup(std::vector<SwitchCandidate>& out) {
  std::stable_sort(out.begin(), out.end(),
                   [](const SwitchCandidate& a, const SwitchCandidate& b) {
                     if (a.segmentation.size() != b.segmentation.size()) {
                       return a.segmentation.size() < b.segmentation.size();
                     }
                     return a.tokens < b.tokens;
                   });
  std::vector<SwitchCandidate> dedup;
  for (auto& c : out) {
    bool seen = false;
    for (const auto& d : dedup) {
      if (d.tokens == c.tokens) {
        seen = true;
        break;
      }
    }
    if (!seen) dedup.push_back(std::move(c));
  }
  out = std::move(dedup);
}

}  // namespace

std::vector<SwitchCandidate> equivalence_generate(const ParallelExample& pair,
                                                  const Alignment& alignment,
                                                  std::size_t max_outputs) {
  std::vector<SwitchCandidate> out;
  const std::size_t n = pair.l1_tokens.size();
  if (n == 0) return out;
  for (const auto& [i, j] : alignment.links) {
    if (i >= n || j >= pair.l2_tokens.size()) {
      throw ContractError("equivalence_generate: link out of sentence bounds");
    }
  }
  std::vector<std::size_t> permitted;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (switch_point_permitted(alignment, k)) permitted.push_back(k);
  }
  // enumerate subsets by size so the fewest-switches cap never needs the
  // full 2^p sweep on long sentences
  std::vector<std::size_t> pick;
  for (std::size_t size = 1; size <= permitted.size(); ++size) {
    std::vector<SwitchCandidate> level;
    pick.assign(size, 0);
    // lexicographically next combination of `size` indices into `permitted`
    for (std::size_t i = 0; i < size; ++i) pick[i] = i;
    while (true) {
      std::vector<std::size_t> points(size);
      for (std::size_t i = 0; i < size; ++i) points[i] = permitted[pick[i]];
      for (bool l1_first : {true, false}) {
        Rendering r = render(pair, alignment, points, l1_first);
        if (r.any_l1 && r.any_l2) level.push_back(std::move(r.cand));
      }
      std::size_t i = size;
      while (i-- > 0) {
        if (pick[i] + (size - i) < permitted.size()) {
          ++pick[i];
          for (std::size_t l = i + 1; l < size; ++l) pick[l] = pick[l - 1] + 1;
          break;
        }
        if (i == 0) {
          i = static_cast<std::size_t>(-1);
          break;
        }
      }
      if (i == static_cast<std::size_t>(-1)) break;
    }
    out.insert(out.end(), level.begin(), level.end());
    sort_and_dedup(out);
    if (out.size() >= max_outputs) break;
  }
  if (out.size() > max_outputs) out.resize(max_outputs);
  return out;
}

std::vector<SwitchCandidate> random_switch_generate(const ParallelExample& pair,
                                                    const Alignment& alignment,
                                                    std::size_t count,
                                                    std::uint64_t seed) {
  if (count < 1) throw ContractError("random_switch_generate: count must be >= 1");
  Rng rng(seed);
  const std::size_t n = pair.l1_tokens.size();
  std::map<std::size_t, std::vector<std::size_t>> groups;  // L1 pos -> target js
  for (const auto& [i, j] : alignment.links) {
    if (i >= n || j >= pair.l2_tokens.size()) {
      throw ContractError("random_switch_generate: link out of sentence bounds");
    }
    groups[i].push_back(j);
  }
  for (auto& [i, js] : groups) std::sort(js.begin(), js.end());

  std::vector<SwitchCandidate> out;
  for (std::size_t draw = 0; draw < count; ++draw) {
    std::vector<std::size_t> chosen;  // positions substituted this draw
    std::vector<bool> substituted(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      if (rng.bernoulli(0.5) && groups.count(i)) {
        chosen.push_back(i);
        substituted[i] = true;
      }
    }
    const auto perm = rng.permutation(chosen.size());
    SwitchCandidate cand;
    std::size_t slot = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!substituted[i]) {
        cand.tokens.push_back(pair.l1_tokens[i]);
        cand.source_of.push_back(Lang::L1);
        continue;
      }
      const auto& js = groups.at(chosen[perm[slot]]);
      ++slot;
      for (std::size_t j : js) {
        cand.tokens.push_back(pair.l2_tokens[j]);
        cand.source_of.push_back(Lang::L2);
      }
    }
    bool seen = false;
    for (const auto& d : out) {
      if (d.tokens == cand.tokens) {
        seen = true;
        break;
      }
    }
    if (!seen && !cand.tokens.empty()) out.push_back(std::move(cand));
  }
  return out;
}

AssembledCorpus assemble_augmented_corpus(
    const std::vector<std::vector<std::string>>& real,
    const std::vector<NbestEntry>& generated, AssemblePolicy policy,
    const std::string& method_label) {
  const std::size_t want = policy == AssemblePolicy::OneBest ? 1 : 3;
  AssembledCorpus out;
  for (const auto& utt : real) {
    out.utterances.push_back(utt);
    out.provenance.push_back({});
    ++out.real_count;
  }
  std::map<std::size_t, std::map<std::size_t, const NbestEntry*>> by_example;
  for (const auto& e : generated) by_example[e.example_index][e.rank] = &e;
  for (const auto& [example, ranks] : by_example) {
    for (std::size_t r = 1; r <= want; ++r) {
      auto it = ranks.find(r);
      if (it == ranks.end()) {
        throw ContractError("assemble: example " + std::to_string(example) +
                            " has no rank-" + std::to_string(r) + " hypothesis");
      }
      out.utterances.push_back(it->second->tokens);
      out.provenance.push_back({example, method_label, r});
      ++out.generated_count;
    }
  }
  return out;
}

}  // namespace csforge
