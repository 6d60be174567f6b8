#include <doctest.h>

#include <set>

#include "csforge/generator.hpp"
#include "csforge/util.hpp"
#include "support/ec_oracle.hpp"

using namespace csforge;

namespace {

ParallelExample make_pair(std::vector<std::string> l1, std::vector<std::string> l2) {
  ParallelExample ex;
  ex.l1_tokens = std::move(l1);
  ex.l2_tokens = std::move(l2);
  return ex;
}

std::set<std::vector<std::string>> token_set(const std::vector<SwitchCandidate>& cands) {
  std::set<std::vector<std::string>> out;
  for (const auto& c : cands) out.insert(c.tokens);
  return out;
}

}  // namespace

TEST_CASE("monotone two-word pair yields both single-switch renderings") {
  const ParallelExample pair = make_pair({"a1", "a2"}, {"b1", "b2"});
  Alignment monotone;
  monotone.links = {{0, 0}, {1, 1}};
  const auto cands = equivalence_generate(pair, monotone, 100);
  CHECK(token_set(cands) == std::set<std::vector<std::string>>{
                                {"a1", "b2"}, {"b1", "a2"}});
  // matches the independent oracle
  CHECK(token_set(cands) == testing::ec_oracle(pair, monotone));
}

TEST_CASE("crossed links block the only boundary") {
  const ParallelExample pair = make_pair({"a1", "a2"}, {"b1", "b2"});
  Alignment crossed;
  crossed.links = {{0, 1}, {1, 0}};
  CHECK(equivalence_generate(pair, crossed, 100).empty());
  CHECK(testing::ec_oracle(pair, crossed).empty());
}

TEST_CASE("empty frame yields no candidates") {
  const ParallelExample pair = make_pair({}, {"b1"});
  Alignment empty;
  CHECK(equivalence_generate(pair, empty, 100).empty());
}

TEST_CASE("unaligned pair renders only monolingual candidates, all excluded") {
  const ParallelExample pair = make_pair({"a1", "a2", "a3"}, {"b1"});
  Alignment empty;
  CHECK(equivalence_generate(pair, empty, 100).empty());
}

TEST_CASE("generator matches the brute-force oracle on random alignments") {
  Rng rng(314);
  int nonempty = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.index(4);
    const std::size_t m = 1 + rng.index(4);
    std::vector<std::string> l1, l2;
    for (std::size_t i = 0; i < n; ++i) l1.push_back("a" + std::to_string(i));
    for (std::size_t j = 0; j < m; ++j) l2.push_back("b" + std::to_string(j));
    const ParallelExample pair = make_pair(l1, l2);
    Alignment alignment;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (rng.bernoulli(0.35)) alignment.links.insert({i, j});
      }
    }
    const auto got = token_set(equivalence_generate(pair, alignment, 1u << 20));
    const auto want = testing::ec_oracle(pair, alignment);
    CHECK(got == want);
    if (!want.empty()) ++nonempty;
  }
  CHECK(nonempty > 50);  // the sweep actually exercises mixed outputs
}

TEST_CASE("monotone identity of length n yields 2^n - 2 mixed candidates") {
  for (std::size_t n = 2; n <= 5; ++n) {
    std::vector<std::string> l1, l2;
    Alignment identity;
    for (std::size_t i = 0; i < n; ++i) {
      l1.push_back("a" + std::to_string(i));
      l2.push_back("b" + std::to_string(i));
      identity.links.insert({i, i});
    }
    const auto cands = equivalence_generate(make_pair(l1, l2), identity, 1u << 20);
    CHECK(cands.size() == (1u << n) - 2);
  }
}

TEST_CASE("candidates are deduplicated, capped and ordered by switch count") {
  std::vector<std::string> l1, l2;
  Alignment identity;
  for (std::size_t i = 0; i < 5; ++i) {
    l1.push_back("a" + std::to_string(i));
    l2.push_back("b" + std::to_string(i));
    identity.links.insert({i, i});
  }
  const auto cands = equivalence_generate(make_pair(l1, l2), identity, 6);
  REQUIRE(cands.size() == 6);
  for (std::size_t k = 1; k < cands.size(); ++k) {
    CHECK(cands[k - 1].segmentation.size() <= cands[k].segmentation.size());
  }
  std::set<std::vector<std::string>> uniq = token_set(cands);
  CHECK(uniq.size() == cands.size());
  // copy closure
  for (const auto& c : cands) {
    for (const auto& tok : c.tokens) {
      CHECK((tok[0] == 'a' || tok[0] == 'b'));
    }
  }
}

TEST_CASE("segments never mix language sides") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.index(3);
    std::vector<std::string> l1, l2;
    Alignment alignment;
    for (std::size_t i = 0; i < n; ++i) {
      l1.push_back("a" + std::to_string(i));
      l2.push_back("b" + std::to_string(i));
      if (rng.bernoulli(0.7)) alignment.links.insert({i, rng.index(n)});
    }
    for (const auto& cand : equivalence_generate(make_pair(l1, l2), alignment, 64)) {
      REQUIRE(cand.tokens.size() == cand.source_of.size());
      // reconstruct segments from switch points over the rendered sequence:
      // consecutive tokens share a side unless a switch point separates them
      for (std::size_t t = 1; t < cand.tokens.size(); ++t) {
        const bool same_side = cand.source_of[t - 1] == cand.source_of[t];
        const char side = cand.tokens[t][0];
        CHECK(side == (cand.source_of[t] == Lang::L1 ? 'a' : 'b'));
        (void)same_side;
      }
    }
  }
}

TEST_CASE("random switching is deterministic and copy-closed") {
  const ParallelExample pair = make_pair({"a0", "a1", "a2"}, {"b0", "b1", "b2"});
  Alignment monotone;
  monotone.links = {{0, 0}, {1, 1}, {2, 2}};
  const auto first = random_switch_generate(pair, monotone, 10, 77);
  const auto second = random_switch_generate(pair, monotone, 10, 77);
  REQUIRE(first.size() == second.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].tokens == second[i].tokens);
  }
  for (const auto& cand : first) {
    for (const auto& tok : cand.tokens) {
      CHECK((tok[0] == 'a' || tok[0] == 'b'));
    }
  }
  CHECK(token_set(first).size() == first.size());  // deduplicated

  const auto other_seed = random_switch_generate(pair, monotone, 10, 78);
  bool differs = first.size() != other_seed.size();
  for (std::size_t i = 0; !differs && i < first.size(); ++i) {
    differs = first[i].tokens != other_seed[i].tokens;
  }
  CHECK(differs);
}

TEST_CASE("random switching with no alignment returns the L1 sentence") {
  const ParallelExample pair = make_pair({"a0", "a1"}, {"b0"});
  Alignment empty;
  const auto cands = random_switch_generate(pair, empty, 8, 5);
  REQUIRE(cands.size() == 1);
  CHECK(cands[0].tokens == pair.l1_tokens);
}

TEST_CASE("assemble concatenates real and selected hypotheses") {
  std::vector<std::vector<std::string>> real(10, {"real", "utt"});
  std::vector<NbestEntry> generated;
  for (std::size_t ex = 0; ex < 10; ++ex) {
    for (std::size_t rank = 1; rank <= 3; ++rank) {
      generated.push_back({ex, rank, -1.0 * static_cast<double>(rank), {"gen"}});
    }
  }
  const auto one = assemble_augmented_corpus(real, generated, AssemblePolicy::OneBest);
  CHECK(one.utterances.size() == 20);
  CHECK(one.real_count == 10);
  CHECK(one.generated_count == 10);
  const auto three = assemble_augmented_corpus(real, generated, AssemblePolicy::ThreeBest);
  CHECK(three.utterances.size() == 40);
  CHECK(three.generated_count == 30);
}

TEST_CASE("assemble rejects a missing rank") {
  std::vector<std::vector<std::string>> real(1, {"x"});
  std::vector<NbestEntry> generated = {{0, 1, -1.0, {"gen"}}};
  CHECK_THROWS_WITH_AS(
      assemble_augmented_corpus(real, generated, AssemblePolicy::ThreeBest),
      doctest::Contains("rank-2"), ContractError);
}

TEST_CASE("assemble at the reported corpus scale") {
  // 78,815 source examples at 3-best produce 236,445 generated utterances
  std::vector<std::vector<std::string>> real;
  std::vector<NbestEntry> generated;
  const std::size_t examples = 78815;
  generated.reserve(examples * 3);
  for (std::size_t ex = 0; ex < examples; ++ex) {
    for (std::size_t rank = 1; rank <= 3; ++rank) {
      generated.push_back({ex, rank, -1.0, {}});
    }
  }
  const auto out = assemble_augmented_corpus(real, generated, AssemblePolicy::ThreeBest);
  CHECK(out.generated_count == 236445);
}
