#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "csforge/corpus.hpp"
#include "csforge/graph.hpp"
#include "csforge/nn.hpp"

namespace csforge {

enum class LMCell { Lstm, SimpleRnn };

struct LMConfig {
  LMCell cell = LMCell::Lstm;
  std::size_t layers = 2;
  std::size_t hidden = 500;        // word embedding size is tied to this
  std::size_t pos_embed_dim = 64;  // 0 disables the syntax channel
  std::size_t n_pos_tags = 0;      // required when pos_embed_dim > 0
  std::size_t vocab_size = 0;
  std::size_t bptt_unroll = 35;
  double lr_init = 20.0;           // paper setting; {10, 20} both exposed
  double lr_decay = 0.75;
  double dropout = 0.3;
  double clip = 0.25;
  std::uint64_t seed = 1;

  bool has_pos() const { return pos_embed_dim > 0; }
};

struct PerplexityReport {
  std::size_t tokens = 0;
  double total_nll = 0.0;  // nats
  double perplexity = 1.0;
  std::map<std::string, double> splits;  // optional per-split breakdown

  static PerplexityReport from(double total_nll, std::size_t tokens);
};

// POS tag inventory; id 0 is the reserved boundary tag fed at BOS/EOS
// input positions.
class PosVocab {
 public:
  static const std::string kBoundary;

  PosVocab();
  std::uint32_t intern(const std::string& tag);
  std::uint32_t id_of(const std::string& tag) const;  // throws on unknown
  const std::string& tag_of(std::uint32_t id) const;
  std::size_t size() const { return tags_.size(); }

  void save(const std::string& path) const;
  static PosVocab load(const std::string& path);

 private:
  std::vector<std::string> tags_;
  std::map<std::string, std::uint32_t> ids_;
};

// Word-id utterances plus an optional aligned POS channel.
struct LMDataset {
  std::vector<std::vector<std::uint32_t>> utterances;
  std::vector<std::vector<std::uint32_t>> pos;  // empty when unused

  bool has_pos() const { return !pos.empty(); }
};

LMDataset encode_lm_corpus(const Vocabulary& vocab, const TokenLines& corpus,
                           const TokenLines* pos_tags = nullptr,
                           PosVocab* pos_vocab = nullptr,
                           bool grow_pos_vocab = false);

// 2-layer recurrent LM with the output projection sharing storage with the
// word embedding matrix.
class LanguageModel {
 public:
  explicit LanguageModel(const LMConfig& config);

  const LMConfig& config() const { return config_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }

  void save(const std::string& path) const;
  static LanguageModel load(const std::string& path);

  struct State {
    std::vector<Tensor> h, c;
  };
  State initial_state() const;

  // Distribution over the vocabulary given one input token (and its POS id
  // when the syntax channel is on). Deterministic; no dropout.
  std::pair<Tensor, State> next_word_distribution(
      const State& state, std::uint32_t word_id,
      std::optional<std::uint32_t> pos_id = {}) const;

  // Per-utterance evaluation: state reset at each utterance, EOS counted.
  PerplexityReport perplexity(const LMDataset& data) const;

  // One epoch of truncated BPTT over the concatenated utterance stream,
  // state carried across chunks. Returns train perplexity.
  double train_stream_epoch(const LMDataset& data, double lr, Rng& dropout_rng);

  // Whole-stream forward + backward without an update (no dropout);
  // returns the summed NLL. Finite-difference objective for small data.
  double accumulate_gradients(const LMDataset& data);

 private:
  LanguageModel(const LMConfig& config, bool init);
  void build_params();

  struct StreamPos {
    std::vector<std::uint32_t> words, pos;
  };
  StreamPos make_stream(const LMDataset& data) const;

  struct GraphState {
    std::vector<NodeId> h, c;
  };
  // One recurrent step; when `dropout_rng` is set, fresh inverted-dropout
  // masks are applied to the embedding output and between layers.
  NodeId step(Graph& g, GraphState& state, std::uint32_t word_id,
              std::optional<std::uint32_t> pos_id, Rng* dropout_rng) const;

  LMConfig config_;
  ParameterStore params_;
};

struct LMEpochLog {
  std::size_t epoch = 0;
  double lr = 0.0;
  double train_ppl = 0.0;
  double dev_ppl = 0.0;
};

// SGD with the paper schedule: lr multiplied by lr_decay after any epoch
// whose dev perplexity fails to improve; best-dev parameters restored.
std::vector<LMEpochLog> train_lm(LanguageModel& model, const LMDataset& train,
                                 const LMDataset* dev, std::size_t epochs);

void save_lm_log(const std::string& path, const std::vector<LMEpochLog>& logs);

}  // namespace csforge
