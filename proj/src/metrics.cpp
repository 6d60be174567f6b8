#include "csforge/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace csforge {

namespace {

std::map<std::vector<std::string>, std::size_t> ngram_counts(
    const std::vector<std::string>& tokens, std::size_t n) {
  std::map<std::vector<std::string>, std::size_t> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    counts[std::vector<std::string>(tokens.begin() + static_cast<long>(i),
                                    tokens.begin() + static_cast<long>(i + n))]++;
  }
  return counts;
}

}  // namespace

BleuBreakdown bleu_breakdown(const TokenLines& hypotheses,
                             const TokenLines& references) {
  if (hypotheses.size() != references.size()) {
    throw ContractError("bleu: hypothesis/reference count mismatch: " +
                        std::to_string(hypotheses.size()) + " vs " +
                        std::to_string(references.size()));
  }
  if (hypotheses.empty()) throw ContractError("bleu: empty corpus");

  BleuBreakdown out;
  std::size_t clipped[4] = {0, 0, 0, 0};
  std::size_t totals[4] = {0, 0, 0, 0};
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    const auto& hyp = hypotheses[s];
    const auto& ref = references[s];
    out.hyp_len += hyp.size();
    out.ref_len += ref.size();
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto hyp_counts = ngram_counts(hyp, n);
      const auto ref_counts = ngram_counts(ref, n);
      for (const auto& [gram, count] : hyp_counts) {
        totals[n - 1] += count;
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) {
          clipped[n - 1] += std::min(count, it->second);
        }
      }
    }
  }
  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t n = 0; n < 4; ++n) {
    out.precisions[n] = totals[n] > 0
                            ? static_cast<double>(clipped[n]) /
                                  static_cast<double>(totals[n])
                            : 0.0;
    if (out.precisions[n] <= 0.0) {
      zero = true;
    } else {
      log_sum += std::log(out.precisions[n]);
    }
  }
  out.brevity_penalty =
      out.hyp_len == 0
          ? 0.0
          : std::exp(std::min(0.0, 1.0 - static_cast<double>(out.ref_len) /
                                             static_cast<double>(out.hyp_len)));
  out.score = zero ? 0.0 : 100.0 * out.brevity_penalty * std::exp(log_sum / 4.0);
  return out;
}

double bleu(const TokenLines& hypotheses, const TokenLines& references) {
  return bleu_breakdown(hypotheses, references).score;
}

std::vector<std::size_t> segment_lengths(const std::vector<std::string>& utterance) {
  std::vector<std::size_t> lengths;
  Lang current = Lang::Other;
  std::size_t pending_other = 0;  // leading Other tokens join the first segment
  for (const auto& tok : utterance) {
    const Lang lang = language_id(tok);
    if (lang == Lang::Other) {
      if (lengths.empty() && current == Lang::Other) {
        ++pending_other;
      } else {
        ++lengths.back();
      }
      continue;
    }
    if (current == Lang::Other) {  // first language-bearing token
      lengths.push_back(pending_other + 1);
      pending_other = 0;
      current = lang;
    } else if (lang == current) {
      ++lengths.back();
    } else {
      lengths.push_back(1);
      current = lang;
    }
  }
  if (pending_other > 0) lengths.push_back(pending_other);  // all-Other utterance
  return lengths;
}

CorpusStats corpus_stats(const TokenLines& corpus) {
  CorpusStats out;
  double switch_sum = 0.0;
  for (const auto& utt : corpus) {
    if (utt.empty()) continue;
    const auto lengths = segment_lengths(utt);
    ++out.utterances;
    out.tokens += utt.size();
    out.segments += lengths.size();
    switch_sum += static_cast<double>(lengths.size() - 1);
  }
  if (out.utterances == 0 || out.segments == 0) {
    out.empty = true;
    return out;
  }
  out.avg_segment_length =
      static_cast<double>(out.tokens) / static_cast<double>(out.segments);
  out.avg_switches = switch_sum / static_cast<double>(out.utterances);
  return out;
}

NGramHistogram ngram_histogram(const TokenLines& corpus, std::size_t n) {
  if (n < 1 || n > 4) throw ContractError("ngram_histogram: n must be in 1..4");
  NGramHistogram out;
  out.n = n;
  for (const auto& utt : corpus) {
    for (auto& [gram, count] : ngram_counts(utt, n)) {
      out.counts[gram] += count;
      out.total += count;
    }
  }
  if (out.counts.empty()) return out;

  std::vector<double> freqs;
  freqs.reserve(out.counts.size());
  for (const auto& [gram, count] : out.counts) {
    freqs.push_back(static_cast<double>(count));
  }
  std::sort(freqs.begin(), freqs.end());
  const std::size_t k = freqs.size();
  out.median = (k % 2 == 1) ? freqs[k / 2]
                            : 0.5 * (freqs[k / 2 - 1] + freqs[k / 2]);
  double mean = 0.0;
  for (double f : freqs) mean += f;
  mean /= static_cast<double>(k);
  out.mean = mean;
  double m2 = 0.0, m3 = 0.0;
  for (double f : freqs) {
    const double d = f - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= static_cast<double>(k);
  m3 /= static_cast<double>(k);
  out.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  return out;
}

}  // namespace csforge
