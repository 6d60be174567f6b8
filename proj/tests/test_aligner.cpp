#include <doctest.h>

#include <filesystem>

#include "csforge/aligner.hpp"
#include "csforge/fixture.hpp"

using namespace csforge;

TEST_CASE("single-candidate pair converges to certainty") {
  std::vector<SentencePair> corpus = {{{"a"}, {"x"}}};
  TranslationTable table = TranslationTable::init_uniform(corpus);
  auto [updated, ll] = em_iteration(corpus, table);
  // the "a" row only ever sees "x", so row normalization pins it at 1
  CHECK(updated.prob("a", "x") == doctest::Approx(1.0));
  CHECK(updated.max_row_deviation() < 1e-9);
}

TEST_CASE("hand-run EM on the two-pair house/book corpus") {
  std::vector<SentencePair> corpus = {
      {{"the", "house"}, {"das", "haus"}},
      {{"the", "book"}, {"das", "buch"}},
  };
  TranslationTable table = TranslationTable::init_uniform(corpus);
  CHECK(table.prob("the", "das") == doctest::Approx(1.0 / 3));
  CHECK(table.prob("house", "haus") == doctest::Approx(0.5));

  // iteration 1 posteriors give count(the,das) = 2 * 2/7, counts for
  // haus/buch 2/7 each; the row normalizes to das = 1/2
  auto [t1, ll1] = em_iteration(corpus, table);
  CHECK(t1.prob("the", "das") == doctest::Approx(0.5));

  double prev = table.prob("the", "das");
  TranslationTable current = table;
  for (int it = 0; it < 3; ++it) {
    auto [next, ll] = em_iteration(corpus, current);
    CHECK(next.prob("the", "das") > prev);
    prev = next.prob("the", "das");
    current = std::move(next);
  }
}

TEST_CASE("log-likelihood is non-decreasing over EM iterations") {
  const RenamingCorpus corpus = make_renaming_corpus(40, 25, 7, 123);
  TranslationTable table = TranslationTable::init_uniform(corpus.pairs);
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < 10; ++it) {
    auto [next, ll] = em_iteration(corpus.pairs, table);
    CHECK(ll >= prev_ll - 1e-9);
    prev_ll = ll;
    table = std::move(next);
    CHECK(table.max_row_deviation() < 1e-9);
  }
}

TEST_CASE("empty corpus and zero iterations are rejected") {
  std::vector<SentencePair> empty;
  TranslationTable table;
  CHECK_THROWS_AS(em_iteration(empty, table), ContractError);
  std::vector<SentencePair> corpus = {{{"a"}, {"x"}}};
  CHECK_THROWS_AS(train_aligner(corpus, 0), ContractError);
}

TEST_CASE("viterbi alignment on the renaming corpus recovers identity") {
  const RenamingCorpus corpus = make_renaming_corpus(50, 30, 8, 7);
  const AlignerResult aligner = train_aligner(corpus.pairs, 5, AlignModel::Ibm1);
  std::size_t correct = 0, gold_total = 0;
  for (std::size_t s = 0; s < corpus.pairs.size(); ++s) {
    const Alignment pred = viterbi_align(corpus.pairs[s], aligner);
    for (const auto& link : corpus.gold[s].links) {
      ++gold_total;
      if (pred.links.count(link)) ++correct;
    }
  }
  CHECK(static_cast<double>(correct) / static_cast<double>(gold_total) >= 0.95);
}

TEST_CASE("viterbi ties break toward the smaller source index") {
  AlignerResult res;
  res.model = AlignModel::Ibm1;
  res.table.rows()["a"]["x"] = 0.5;
  res.table.rows()["b"]["x"] = 0.25;
  res.table.rows()["c"]["x"] = 0.5;
  res.table.rows()[TranslationTable::kNull]["x"] = 0.1;
  SentencePair pair{{"b", "a", "b", "c"}, {"x"}};  // sources 1 and 3 tie
  const Alignment out = viterbi_align(pair, res);
  CHECK(out.links == std::set<std::pair<std::size_t, std::size_t>>{{1, 0}});
}

TEST_CASE("words best explained by NULL stay unlinked") {
  AlignerResult res;
  res.model = AlignModel::Ibm1;
  res.table.rows()["a"]["x"] = 0.01;
  res.table.rows()[TranslationTable::kNull]["x"] = 0.9;
  SentencePair pair{{"a"}, {"x"}};
  CHECK(viterbi_align(pair, res).links.empty());
}

TEST_CASE("diagonal prior mass and grid-searched tension") {
  // NULL keeps its fixed share; the rest sums to 1 over real positions
  const std::size_t n = 4, m = 3;
  for (std::size_t j = 0; j < m; ++j) {
    double total = alignment_prior(AlignModel::Diagonal, 4.0, kNullIndex, j, n, m);
    CHECK(total == doctest::Approx(1.0 / (n + 1)));
    for (std::size_t i = 0; i < n; ++i) {
      total += alignment_prior(AlignModel::Diagonal, 4.0, i, j, n, m);
    }
    CHECK(total == doctest::Approx(1.0));
  }

  const RenamingCorpus corpus = make_renaming_corpus(30, 20, 6, 21);
  const AlignerResult diag = train_aligner(corpus.pairs, 3, AlignModel::Diagonal);
  CHECK((diag.lambda == 2.0 || diag.lambda == 4.0 || diag.lambda == 6.0 ||
         diag.lambda == 8.0));
}

TEST_CASE("diagonal model is at least as accurate as ibm1 on monotone data") {
  const RenamingCorpus corpus = make_renaming_corpus(40, 24, 7, 33);
  const AlignerResult ibm1 = train_aligner(corpus.pairs, 3, AlignModel::Ibm1);
  const AlignerResult diag = train_aligner(corpus.pairs, 3, AlignModel::Diagonal);
  auto accuracy = [&](const AlignerResult& res) {
    std::size_t correct = 0, total = 0;
    for (std::size_t s = 0; s < corpus.pairs.size(); ++s) {
      const Alignment pred = viterbi_align(corpus.pairs[s], res);
      for (const auto& link : corpus.gold[s].links) {
        ++total;
        if (pred.links.count(link)) ++correct;
      }
    }
    return static_cast<double>(correct) / static_cast<double>(total);
  };
  CHECK(accuracy(diag) >= accuracy(ibm1));
}

TEST_CASE("symmetrization set semantics") {
  Alignment fwd, rev;
  fwd.links = {{0, 0}, {1, 1}};
  rev.links = {{0, 0}};  // transposed form also {(0,0)}
  CHECK(symmetrize(fwd, rev, SymMethod::Intersection).links ==
        std::set<std::pair<std::size_t, std::size_t>>{{0, 0}});
  CHECK(symmetrize(fwd, rev, SymMethod::Union).links ==
        std::set<std::pair<std::size_t, std::size_t>>{{0, 0}, {1, 1}});

  Alignment empty;
  CHECK(symmetrize(empty, rev, SymMethod::Intersection).links.empty());

  // symmetric alignment is a fixed point of intersection
  Alignment sym;
  sym.links = {{0, 1}, {1, 0}};
  CHECK(symmetrize(sym, sym, SymMethod::Intersection) == sym);
}

TEST_CASE("pharaoh and table files round trip") {
  Alignment a;
  a.links = {{0, 2}, {3, 1}};
  CHECK(to_pharaoh(a) == "0-2 3-1");
  CHECK(from_pharaoh("0-2 3-1") == a);
  CHECK(from_pharaoh("").links.empty());
  CHECK_THROWS_AS(from_pharaoh("junk"), FormatError);

  const auto path =
      (std::filesystem::temp_directory_path() / "table_rt.tsv").string();
  TranslationTable table;
  table.rows()["a"]["x"] = 0.75;
  table.rows()["a"]["y"] = 0.25;
  table.save_tsv(path);
  const TranslationTable loaded = TranslationTable::load_tsv(path);
  CHECK(loaded.prob("a", "x") == doctest::Approx(0.75));
  CHECK(loaded.prob("a", "y") == doctest::Approx(0.25));
}
