#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "csforge/util.hpp"

namespace csforge {

// One sentence pair for alignment training: source e, target f.
struct SentencePair {
  std::vector<std::string> src;
  std::vector<std::string> tgt;
};

struct Alignment {
  std::set<std::pair<std::size_t, std::size_t>> links;  // (src i, tgt j)

  bool operator==(const Alignment&) const = default;
};

enum class AlignModel { Ibm1, Diagonal };
enum class SymMethod { Intersection, Union };

// IBM Model 1 translation table t(f|e), sparse over co-occurring pairs.
// A NULL source word takes the fixed prior share 1/(n+1); the diagonal
// variant redistributes the remaining mass toward |i/n - j/m| = 0.
class TranslationTable {
 public:
  static const std::string kNull;

  // Row-uniform initialization over co-occurring (e, f) pairs.
  static TranslationTable init_uniform(const std::vector<SentencePair>& corpus);

  double prob(const std::string& e, const std::string& f) const;
  void normalize_rows();

  // Rows sum to 1 within tolerance after every M-step.
  double max_row_deviation() const;

  const std::map<std::string, std::map<std::string, double>>& rows() const {
    return t_;
  }
  std::map<std::string, std::map<std::string, double>>& rows() { return t_; }

  void save_tsv(const std::string& path) const;
  static TranslationTable load_tsv(const std::string& path);

 private:
  std::map<std::string, std::map<std::string, double>> t_;
};

// Positional prior over source index i (0-based; kNullIndex selects NULL)
// for target position j. lambda is ignored by the IBM-1 prior.
inline constexpr std::size_t kNullIndex = static_cast<std::size_t>(-1);
double alignment_prior(AlignModel model, double lambda, std::size_t i,
                       std::size_t j, std::size_t n, std::size_t m);

// One EM step: returns the re-estimated table and the corpus log-likelihood
// under the *input* table.
std::pair<TranslationTable, double> em_iteration(
    const std::vector<SentencePair>& corpus, const TranslationTable& table,
    AlignModel model = AlignModel::Ibm1, double lambda = 0.0);

struct AlignerResult {
  TranslationTable table;
  AlignModel model = AlignModel::Ibm1;
  double lambda = 0.0;                 // chosen tension (diagonal only)
  std::vector<double> log_likelihoods; // per EM iteration
};

// iters EM iterations; the diagonal variant grid-searches lambda over
// {2,4,6,8} and keeps the best final likelihood.
AlignerResult train_aligner(const std::vector<SentencePair>& corpus,
                            std::size_t iters = 5,
                            AlignModel model = AlignModel::Ibm1);

// Each target word links to its argmax source (ties toward the smaller
// source index; NULL only when strictly best, leaving j unlinked).
Alignment viterbi_align(const SentencePair& pair, const AlignerResult& aligner);

Alignment symmetrize(const Alignment& fwd, const Alignment& rev, SymMethod method);
Alignment transpose(const Alignment& a);

// Pharaoh format: space-separated "i-j" pairs per line, 0-based.
std::string to_pharaoh(const Alignment& a);
Alignment from_pharaoh(std::string_view line);
void save_pharaoh(const std::string& path, const std::vector<Alignment>& alignments);
std::vector<Alignment> load_pharaoh(const std::string& path);

}  // namespace csforge
