#pragma once

#include <optional>
#include <string>
#include <vector>

#include "csforge/corpus.hpp"
#include "csforge/graph.hpp"
#include "csforge/nn.hpp"

namespace csforge {

enum class Seq2SeqMode { AttentionOnly, PointerGenerator };

struct Seq2SeqConfig {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 500;
  std::size_t hidden_dim = 500;
  Seq2SeqMode mode = Seq2SeqMode::PointerGenerator;
  std::size_t beam_size = 5;
  double max_decode_ratio = 1.5;  // length cap as a multiple of source length
  std::uint64_t seed = 1;
};

// Per-decoder-step distributions, all on the probability simplex; p_final
// ranges over the extended vocabulary (vocab + per-example source OOVs).
struct StepDistribution {
  Tensor attention;
  Tensor p_vocab;
  double p_gen = 1.0;
  Tensor p_final;
};

struct Hypothesis {
  std::vector<std::uint32_t> ext_ids;  // emitted tokens, BOS excluded
  double logprob = 0.0;
  Tensor state_h, state_c;
  bool complete = false;
  std::size_t completed_step = 0;
};

// Eq-style mixture over the extended vocabulary:
//   p_final(w) = p_gen * p_vocab(w) + (1 - p_gen) * sum_{i: src_i = w} a_t[i]
// In-vocab source tokens accumulate onto their vocabulary id, OOVs onto
// their extended slot; repeated source tokens sum their attention.
Tensor final_distribution(const Tensor& p_vocab, const Tensor& attention,
                          double p_gen,
                          const std::vector<std::uint32_t>& src_extended_ids,
                          std::size_t n_oovs);

// Bidirectional-encoder / attention-decoder model, pointer-generator or
// plain attention head. Single-layer each side; embeddings shared between
// encoder and decoder.
class Seq2SeqModel {
 public:
  explicit Seq2SeqModel(const Seq2SeqConfig& config);

  const Seq2SeqConfig& config() const { return config_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }

  void save(const std::string& path) const;
  static Seq2SeqModel load(const std::string& path);

  // Value-level encoder snapshot used by decoding.
  struct Encoded {
    Tensor enc_matrix;  // (src_len, hidden)
    Tensor h0, c0;      // decoder initial state
  };
  Encoded encode(const std::vector<std::uint32_t>& src_ids) const;

  // One decoder step against an immutable encoder snapshot. `prev_ext_id`
  // is the previously emitted extended id (BOS to start); OOV ids fall back
  // to the UNK embedding. `forced_p_gen` overrides the learned gate.
  struct StepResult {
    StepDistribution dist;
    Tensor h, c;
  };
  StepResult decode_step(const Encoded& enc, const Tensor& h, const Tensor& c,
                         std::uint32_t prev_ext_id, const EncodedExample& ex,
                         std::optional<double> forced_p_gen = {}) const;

  // Teacher-forced totals for one example: (sum NLL, target token count).
  // `collect` captures per-step distributions (evaluation paths only).
  std::pair<double, std::size_t> example_nll(
      const EncodedExample& ex,
      std::vector<StepDistribution>* collect = nullptr) const;

  // Forward + backward + clipped SGD on one example; returns mean NLL.
  double train_step(const EncodedExample& ex, double lr, double clip);

  // Forward + backward without an update; gradients accumulate into the
  // store. Returns the summed NLL (the finite-difference objective).
  double accumulate_gradients(const EncodedExample& ex);

  std::vector<Hypothesis> beam_search(const EncodedExample& ex,
                                      std::size_t beam_size, std::size_t n_best,
                                      std::optional<double> forced_p_gen = {}) const;

  std::size_t max_decode_len(std::size_t src_len) const;

 private:
  Seq2SeqModel(const Seq2SeqConfig& config, bool init);
  void build_params();

  // Graph-level pieces shared by training and decoding.
  struct GraphEncode {
    NodeId enc_matrix, h0, c0;
  };
  GraphEncode build_encoder(Graph& g, const std::vector<std::uint32_t>& src_ids) const;
  struct GraphStep {
    NodeId p_final, attention, p_vocab, p_gen, h, c;
    bool has_gate = false;
  };
  GraphStep build_step(Graph& g, const GraphEncode& enc, NodeId h, NodeId c,
                       std::uint32_t input_id, const EncodedExample& ex,
                       std::optional<double> forced_p_gen) const;
  std::uint32_t embedding_id(std::uint32_t ext_id) const;
  std::uint32_t step_target(const EncodedExample& ex, std::size_t t) const;

  Seq2SeqConfig config_;
  ParameterStore params_;
};

struct GenTrainConfig {
  std::size_t epochs = 10;
  double lr = 1.0;
  double clip = 0.25;
  bool halve_on_stall = true;
  std::uint64_t seed = 1;
};

struct GenEpochLog {
  std::size_t epoch = 0;
  double lr = 0.0;
  double train_nll = 0.0;
  double dev_ppl = 0.0;  // 0 when no dev set
};

// One pass over the corpus in a seeded shuffle order; returns mean NLL per
// target token.
double train_epoch(Seq2SeqModel& model, const std::vector<EncodedExample>& corpus,
                   double lr, double clip, Rng& rng);

// Full schedule: per-epoch shuffles, lr halving on dev stalls, best-dev
// parameters restored at the end.
std::vector<GenEpochLog> train_generator(Seq2SeqModel& model,
                                         const std::vector<EncodedExample>& train,
                                         const std::vector<EncodedExample>* dev,
                                         const GenTrainConfig& cfg);

// Teacher-forced perplexity, exp of mean NLL per target token.
double generator_perplexity(const Seq2SeqModel& model,
                            const std::vector<EncodedExample>& corpus);

std::vector<std::string> detokenize_hypothesis(const Hypothesis& hyp,
                                               const Vocabulary& vocab,
                                               const EncodedExample& ex);

// Beam decode over a corpus (parallel across examples when CSFORGE_THREADS
// allows), producing rank-ordered N-best entries. `drop_monolingual`
// filters hypotheses that never switch languages.
std::vector<NbestEntry> decode_nbest(const Seq2SeqModel& model,
                                     const Vocabulary& vocab,
                                     const std::vector<EncodedExample>& examples,
                                     std::size_t beam_size, std::size_t n_best,
                                     bool drop_monolingual = false);

}  // namespace csforge
