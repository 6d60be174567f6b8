#include "csforge/aligner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace csforge {

const std::string TranslationTable::kNull = "<null>";

TranslationTable TranslationTable::init_uniform(
    const std::vector<SentencePair>& corpus) {
  TranslationTable table;
  for (const auto& pair : corpus) {
    for (const auto& f : pair.tgt) {
      table.t_[kNull][f] = 1.0;
      for (const auto& e : pair.src) table.t_[e][f] = 1.0;
    }
  }
  table.normalize_rows();
  return table;
}

double TranslationTable::prob(const std::string& e, const std::string& f) const {
  auto row = t_.find(e);
  if (row == t_.end()) return 0.0;
  auto cell = row->second.find(f);
  return cell == row->second.end() ? 0.0 : cell->second;
}

void TranslationTable::normalize_rows() {
  for (auto& [e, row] : t_) {
    double z = 0.0;
    for (const auto& [f, v] : row) z += v;
    if (z <= 0.0) continue;
    for (auto& [f, v] : row) v /= z;
  }
}

double TranslationTable::max_row_deviation() const {
  double worst = 0.0;
  for (const auto& [e, row] : t_) {
    double z = 0.0;
    for (const auto& [f, v] : row) z += v;
    worst = std::max(worst, std::fabs(z - 1.0));
  }
  return worst;
}

void TranslationTable::save_tsv(const std::string& path) const {
  std::vector<std::string> lines;
  for (const auto& [e, row] : t_) {
    for (const auto& [f, v] : row) {
      lines.push_back(e + "\t" + f + "\t" + format_double(v, 12));
    }
  }
  write_lines(path, lines);
}

TranslationTable TranslationTable::load_tsv(const std::string& path) {
  TranslationTable table;
  const auto lines = read_lines(path);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const auto cols = split_char(lines[ln], '\t');
    if (cols.size() != 3) {
      throw FormatError(path + ":" + std::to_string(ln + 1) +
                        ": expected e<TAB>f<TAB>prob");
    }
    table.t_[cols[0]][cols[1]] = std::stod(cols[2]);
  }
  return table;
}

double alignment_prior(AlignModel model, double lambda, std::size_t i,
                       std::size_t j, std::size_t n, std::size_t m) {
  const double null_share = 1.0 / static_cast<double>(n + 1);
  if (i == kNullIndex) return null_share;
  if (model == AlignModel::Ibm1) return null_share;
  // diagonal: remaining mass over real positions, weights
  // exp(-lambda * |i/n - j/m|) with 1-based positions
  double z = 0.0;
  auto weight = [&](std::size_t ii) {
    const double d = std::fabs(static_cast<double>(ii + 1) / static_cast<double>(n) -
                               static_cast<double>(j + 1) / static_cast<double>(m));
    return std::exp(-lambda * d);
  };
  for (std::size_t ii = 0; ii < n; ++ii) z += weight(ii);
  return (1.0 - null_share) * weight(i) / z;
}

namespace {

struct Counts {
  std::map<std::string, std::map<std::string, double>> c;

  void merge(const Counts& other) {
    for (const auto& [e, row] : other.c) {
      auto& dst = c[e];
      for (const auto& [f, v] : row) dst[f] += v;
    }
  }
};

// E-step over one pair; returns the pair's log-likelihood under `table`.
double accumulate_pair(const SentencePair& pair, const TranslationTable& table,
                       AlignModel model, double lambda, Counts& counts) {
  const std::size_t n = pair.src.size();
  const std::size_t m = pair.tgt.size();
  double ll = 0.0;
  std::vector<double> post(n + 1);
  for (std::size_t j = 0; j < m; ++j) {
    const std::string& f = pair.tgt[j];
    double z = 0.0;
    post[0] = alignment_prior(model, lambda, kNullIndex, j, n, m) *
              table.prob(TranslationTable::kNull, f);
    z += post[0];
    for (std::size_t i = 0; i < n; ++i) {
      post[i + 1] = alignment_prior(model, lambda, i, j, n, m) *
                    table.prob(pair.src[i], f);
      z += post[i + 1];
    }
    if (z <= 0.0) {
      throw ContractError("em_iteration: zero probability for target word '" + f + "'");
    }
    ll += std::log(z);
    counts.c[TranslationTable::kNull][f] += post[0] / z;
    for (std::size_t i = 0; i < n; ++i) {
      counts.c[pair.src[i]][f] += post[i + 1] / z;
    }
  }
  return ll;
}

}  // namespace

std::pair<TranslationTable, double> em_iteration(
    const std::vector<SentencePair>& corpus, const TranslationTable& table,
    AlignModel model, double lambda) {
  if (corpus.empty()) throw ContractError("em_iteration: empty corpus");
  const unsigned workers = std::min<unsigned>(
      worker_count(), static_cast<unsigned>(corpus.size()));
  std::vector<Counts> chunk_counts(workers);
  std::vector<double> chunk_ll(workers, 0.0);
  if (workers <= 1) {
    for (const auto& pair : corpus) {
      chunk_ll[0] += accumulate_pair(pair, table, model, lambda, chunk_counts[0]);
    }
  } else {
    // fixed partition + ordered merge keeps results run-to-run identical
    std::vector<std::thread> threads;
    const std::size_t per = (corpus.size() + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      threads.emplace_back([&, w]() {
        const std::size_t lo = w * per;
        const std::size_t hi = std::min(corpus.size(), lo + per);
        for (std::size_t s = lo; s < hi; ++s) {
          chunk_ll[w] += accumulate_pair(corpus[s], table, model, lambda,
                                         chunk_counts[w]);
        }
      });
    }
    for (auto& t : threads) t.join();
  }
  Counts total;
  double ll = 0.0;
  for (unsigned w = 0; w < workers; ++w) {
    total.merge(chunk_counts[w]);
    ll += chunk_ll[w];
  }
  TranslationTable updated;
  updated.rows() = std::move(total.c);
  updated.normalize_rows();
  return {std::move(updated), ll};
}

namespace {

AlignerResult train_one(const std::vector<SentencePair>& corpus,
                        std::size_t iters, AlignModel model, double lambda) {
  AlignerResult res;
  res.model = model;
  res.lambda = lambda;
  res.table = TranslationTable::init_uniform(corpus);
  for (std::size_t it = 0; it < iters; ++it) {
    auto [updated, ll] = em_iteration(corpus, res.table, model, lambda);
    res.table = std::move(updated);
    res.log_likelihoods.push_back(ll);
  }
  return res;
}

double corpus_ll(const std::vector<SentencePair>& corpus,
                 const AlignerResult& res) {
  // likelihood under the final table (one E-step without keeping counts)
  Counts scratch;
  double ll = 0.0;
  for (const auto& pair : corpus) {
    ll += accumulate_pair(pair, res.table, res.model, res.lambda, scratch);
  }
  return ll;
}

}  // namespace

AlignerResult train_aligner(const std::vector<SentencePair>& corpus,
                            std::size_t iters, AlignModel model) {
  if (iters < 1) throw ContractError("train_aligner: iters must be >= 1");
  if (corpus.empty()) throw ContractError("train_aligner: empty corpus");
  if (model == AlignModel::Ibm1) {
    return train_one(corpus, iters, model, 0.0);
  }
  AlignerResult best;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (double lambda : {2.0, 4.0, 6.0, 8.0}) {
    AlignerResult cand = train_one(corpus, iters, model, lambda);
    const double ll = corpus_ll(corpus, cand);
    if (ll > best_ll) {
      best_ll = ll;
      best = std::move(cand);
    }
  }
  return best;
}

Alignment viterbi_align(const SentencePair& pair, const AlignerResult& aligner) {
  Alignment out;
  const std::size_t n = pair.src.size();
  const std::size_t m = pair.tgt.size();
  for (std::size_t j = 0; j < m; ++j) {
    const std::string& f = pair.tgt[j];
    double best = alignment_prior(aligner.model, aligner.lambda, kNullIndex, j, n, m) *
                  aligner.table.prob(TranslationTable::kNull, f);
    std::size_t best_i = kNullIndex;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = alignment_prior(aligner.model, aligner.lambda, i, j, n, m) *
                       aligner.table.prob(pair.src[i], f);
      // strictly greater keeps the smaller index on real-real ties and
      // prefers a real link over an equal NULL score
      if (p > best || (best_i == kNullIndex && p == best && p > 0.0)) {
        best = p;
        best_i = i;
      }
    }
    if (best_i != kNullIndex) out.links.insert({best_i, j});
  }
  return out;
}

Alignment transpose(const Alignment& a) {
  Alignment out;
  for (const auto& [i, j] : a.links) out.links.insert({j, i});
  return out;
}

Alignment symmetrize(const Alignment& fwd, const Alignment& rev, SymMethod method) {
  const Alignment rev_t = transpose(rev);
  Alignment out;
  if (method == SymMethod::Intersection) {
    std::set_intersection(fwd.links.begin(), fwd.links.end(),
                          rev_t.links.begin(), rev_t.links.end(),
                          std::inserter(out.links, out.links.begin()));
  } else {
    std::set_union(fwd.links.begin(), fwd.links.end(), rev_t.links.begin(),
                   rev_t.links.end(),
                   std::inserter(out.links, out.links.begin()));
  }
  return out;
}

std::string to_pharaoh(const Alignment& a) {
  std::vector<std::string> parts;
  parts.reserve(a.links.size());
  for (const auto& [i, j] : a.links) {
    parts.push_back(std::to_string(i) + "-" + std::to_string(j));
  }
  return join(parts, " ");
}

Alignment from_pharaoh(std::string_view line) {
  Alignment out;
  for (const auto& part : split_ws(line)) {
    const auto dash = part.find('-');
    if (dash == std::string::npos) {
      throw FormatError("bad Pharaoh pair: " + part);
    }
    out.links.insert({static_cast<std::size_t>(std::stoull(part.substr(0, dash))),
                      static_cast<std::size_t>(std::stoull(part.substr(dash + 1)))});
  }
  return out;
}

void save_pharaoh(const std::string& path, const std::vector<Alignment>& alignments) {
  std::vector<std::string> lines;
  lines.reserve(alignments.size());
  for (const auto& a : alignments) lines.push_back(to_pharaoh(a));
  write_lines(path, lines);
}

std::vector<Alignment> load_pharaoh(const std::string& path) {
  std::vector<Alignment> out;
  for (const auto& line : read_lines(path)) out.push_back(from_pharaoh(line));
  return out;
}

}  // namespace csforge
