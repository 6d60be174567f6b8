#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "csforge/corpus.hpp"

namespace csforge {

// Corpus-level BLEU in [0,100]: geometric mean of clipped n-gram precisions
// (n = 1..4) times the brevity penalty, single reference, no smoothing.
// Any zero precision zeroes the score.
double bleu(const TokenLines& hypotheses, const TokenLines& references);

struct BleuBreakdown {
  double score = 0.0;
  double precisions[4] = {0, 0, 0, 0};
  double brevity_penalty = 0.0;
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;
};
BleuBreakdown bleu_breakdown(const TokenLines& hypotheses,
                             const TokenLines& references);

struct CorpusStats {
  std::size_t utterances = 0;
  std::size_t tokens = 0;
  std::size_t segments = 0;
  double avg_segment_length = 0.0;  // tokens per maximal same-language run
  double avg_switches = 0.0;        // language boundaries per utterance
  bool empty = false;               // degenerate corpus flag
};

// Segments are maximal same-language runs; Other-class tokens attach to the
// current segment and never open a switch by themselves.
CorpusStats corpus_stats(const TokenLines& corpus);

// Per-utterance segment lengths, exposed for the stats invariants.
std::vector<std::size_t> segment_lengths(const std::vector<std::string>& utterance);

struct NGramHistogram {
  std::size_t n = 1;
  std::map<std::vector<std::string>, std::size_t> counts;
  double mean = 0.0;
  double median = 0.0;
  double skewness = 0.0;  // Pearson moment skewness of the count values
  std::size_t total = 0;  // number of n-gram tokens
};

NGramHistogram ngram_histogram(const TokenLines& corpus, std::size_t n);

}  // namespace csforge
