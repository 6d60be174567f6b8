#include <doctest.h>

#include <filesystem>
#include <set>

#include "csforge/fixture.hpp"
#include "csforge/metrics.hpp"

using namespace csforge;

TEST_CASE("fixture generation is deterministic per seed") {
  ToyGrammar g1 = ToyGrammar::standard(42);
  ToyGrammar g2 = ToyGrammar::standard(42);
  const FixtureData a = generate_fixture(g1, 100);
  const FixtureData b = generate_fixture(g2, 100);
  REQUIRE(a.examples.size() == 100);
  for (std::size_t i = 0; i < 100; ++i) {
    CHECK(a.examples[i].l1_tokens == b.examples[i].l1_tokens);
    CHECK(a.examples[i].l2_tokens == b.examples[i].l2_tokens);
    CHECK(a.examples[i].cs_tokens == b.examples[i].cs_tokens);
    CHECK(a.gold_alignments[i] == b.gold_alignments[i]);
  }

  ToyGrammar g3 = ToyGrammar::standard(43);
  const FixtureData c = generate_fixture(g3, 100);
  bool any_diff = false;
  for (std::size_t i = 0; i < 100; ++i) {
    if (c.examples[i].l1_tokens != a.examples[i].l1_tokens) any_diff = true;
  }
  CHECK(any_diff);
}

TEST_CASE("switch probability zero leaves the reference monolingual") {
  ToyGrammar g = ToyGrammar::standard(7);
  g.switch_prob = 0.0;
  const FixtureData data = generate_fixture(g, 50);
  for (const auto& ex : data.examples) {
    CHECK(ex.cs_tokens == ex.l1_tokens);
  }
}

TEST_CASE("copy closure and alignment consistency hold by construction") {
  ToyGrammar g = ToyGrammar::standard(11);
  const FixtureData data = generate_fixture(g, 200);
  for (std::size_t i = 0; i < data.examples.size(); ++i) {
    const auto& ex = data.examples[i];
    CHECK(ex.l1_tokens.size() >= 3);
    CHECK(ex.l1_tokens.size() <= 12);
    std::set<std::string> sources(ex.l1_tokens.begin(), ex.l1_tokens.end());
    sources.insert(ex.l2_tokens.begin(), ex.l2_tokens.end());
    for (const auto& tok : ex.cs_tokens) CHECK(sources.count(tok) == 1);
    // every gold link is a lexicon pair
    for (const auto& [si, tj] : data.gold_alignments[i].links) {
      REQUIRE(si < ex.l1_tokens.size());
      REQUIRE(tj < ex.l2_tokens.size());
      CHECK(g.lexicon.at(ex.l1_tokens[si]) == ex.l2_tokens[tj]);
    }
    CHECK(data.cs_pos[i].size() == ex.cs_tokens.size());
  }
}

TEST_CASE("the two scripts keep language_id unambiguous") {
  ToyGrammar g = ToyGrammar::standard(3);
  for (const auto& [l1, l2] : g.lexicon) {
    CHECK(language_id(l1) == Lang::L1);
    CHECK(language_id(l2) == Lang::L2);
  }
}

TEST_CASE("at least one template produces crossing alignments") {
  ToyGrammar g = ToyGrammar::standard(5);
  const FixtureData data = generate_fixture(g, 300);
  bool found_crossing = false;
  for (const auto& a : data.gold_alignments) {
    for (const auto& [i1, j1] : a.links) {
      for (const auto& [i2, j2] : a.links) {
        if (i1 < i2 && j1 > j2) found_crossing = true;
      }
    }
  }
  CHECK(found_crossing);
}

TEST_CASE("fixture files are written and byte-stable") {
  namespace fs = std::filesystem;
  const std::string stem1 = (fs::temp_directory_path() / "fx_a").string();
  const std::string stem2 = (fs::temp_directory_path() / "fx_b").string();
  ToyGrammar g = ToyGrammar::standard(9);
  const FixtureData data = generate_fixture(g, 30);
  write_fixture(stem1, g, data);
  write_fixture(stem2, g, data);
  for (const char* suffix : {".tsv", ".align", ".cs.txt", ".cs.pos", ".lexicon.tsv"}) {
    CHECK(read_file(stem1 + suffix) == read_file(stem2 + suffix));
  }
  // cs corpus re-tags exactly through the lexicon
  const auto cs = load_token_lines(stem1 + ".cs.txt");
  const auto tags = tag_with_lexicon(g, cs);
  const auto gold_tags = load_token_lines(stem1 + ".cs.pos");
  CHECK(tags == gold_tags);
}

TEST_CASE("renaming corpus has identity gold and distinct tokens") {
  const RenamingCorpus corpus = make_renaming_corpus(20, 15, 8, 2);
  REQUIRE(corpus.pairs.size() == 20);
  for (std::size_t s = 0; s < corpus.pairs.size(); ++s) {
    const auto& pair = corpus.pairs[s];
    CHECK(pair.src.size() == pair.tgt.size());
    std::set<std::string> uniq(pair.src.begin(), pair.src.end());
    CHECK(uniq.size() == pair.src.size());
    for (std::size_t i = 0; i < pair.src.size(); ++i) {
      CHECK(corpus.gold[s].links.count({i, i}) == 1);
    }
  }
}
