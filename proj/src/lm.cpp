#include "csforge/lm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "csforge/checkpoint.hpp"

namespace csforge {

PerplexityReport PerplexityReport::from(double total_nll, std::size_t tokens) {
  PerplexityReport r;
  r.tokens = tokens;
  r.total_nll = total_nll;
  r.perplexity = tokens == 0 ? 1.0 : std::exp(total_nll / static_cast<double>(tokens));
  return r;
}

const std::string PosVocab::kBoundary = "<s>";

PosVocab::PosVocab() { intern(kBoundary); }

std::uint32_t PosVocab::intern(const std::string& tag) {
  auto it = ids_.find(tag);
  if (it != ids_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(tags_.size());
  tags_.push_back(tag);
  ids_.emplace(tag, id);
  return id;
}

std::uint32_t PosVocab::id_of(const std::string& tag) const {
  auto it = ids_.find(tag);
  if (it == ids_.end()) throw ContractError("unknown POS tag: " + tag);
  return it->second;
}

const std::string& PosVocab::tag_of(std::uint32_t id) const {
  if (id >= tags_.size()) throw ContractError("POS id out of range");
  return tags_[id];
}

void PosVocab::save(const std::string& path) const { write_lines(path, tags_); }

PosVocab PosVocab::load(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines[0] != kBoundary) {
    throw FormatError("POS vocabulary must start with " + kBoundary + ": " + path);
  }
  PosVocab v;
  for (std::size_t i = 1; i < lines.size(); ++i) v.intern(lines[i]);
  return v;
}

LMDataset encode_lm_corpus(const Vocabulary& vocab, const TokenLines& corpus,
                           const TokenLines* pos_tags, PosVocab* pos_vocab,
                           bool grow_pos_vocab) {
  LMDataset out;
  for (const auto& utt : corpus) {
    std::vector<std::uint32_t> ids;
    ids.reserve(utt.size());
    for (const auto& tok : utt) ids.push_back(vocab.id_of(tok));
    out.utterances.push_back(std::move(ids));
  }
  if (pos_tags != nullptr) {
    if (pos_vocab == nullptr) throw ContractError("encode_lm_corpus: POS vocab required");
    if (pos_tags->size() != corpus.size()) {
      throw ContractError("encode_lm_corpus: POS/word line count mismatch");
    }
    for (std::size_t ln = 0; ln < pos_tags->size(); ++ln) {
      const auto& tags = (*pos_tags)[ln];
      if (tags.size() != corpus[ln].size()) {
        throw FormatError("POS line " + std::to_string(ln + 1) + ": " +
                          std::to_string(tags.size()) + " tags for " +
                          std::to_string(corpus[ln].size()) + " tokens");
      }
      std::vector<std::uint32_t> ids;
      ids.reserve(tags.size());
      for (const auto& tag : tags) {
        ids.push_back(grow_pos_vocab ? pos_vocab->intern(tag)
                                     : pos_vocab->id_of(tag));
      }
      out.pos.push_back(std::move(ids));
    }
  }
  return out;
}

LanguageModel::LanguageModel(const LMConfig& config)
    : LanguageModel(config, true) {}

LanguageModel::LanguageModel(const LMConfig& config, bool init)
    : config_(config) {
  if (config_.vocab_size < 5) {
    throw ContractError("LanguageModel: vocab_size must cover the specials");
  }
  if (config_.layers < 1) throw ContractError("LanguageModel: layers >= 1");
  if (config_.bptt_unroll < 1) throw ContractError("LanguageModel: bptt_unroll >= 1");
  if (config_.has_pos() && config_.n_pos_tags < 1) {
    throw ContractError("LanguageModel: syntax channel needs n_pos_tags");
  }
  if (init) build_params();
}

void LanguageModel::build_params() {
  Rng rng(config_.seed);
  const std::size_t V = config_.vocab_size;
  const std::size_t H = config_.hidden;
  params_.create_xavier("embed", V, H, rng);
  params_.create("out/b", {V});
  if (config_.has_pos()) {
    params_.create_xavier("pos_embed", config_.n_pos_tags, config_.pos_embed_dim, rng);
  }
  const bool lstm = config_.cell == LMCell::Lstm;
  for (std::size_t l = 0; l < config_.layers; ++l) {
    const std::size_t in_dim =
        l == 0 ? H + (config_.has_pos() ? config_.pos_embed_dim : 0) : H;
    LstmParams::create(params_, "l" + std::to_string(l), in_dim, H, rng, lstm);
  }
}

void LanguageModel::save(const std::string& path) const {
  std::map<std::string, double> meta;
  meta["kind"] = 2.0;  // 2 = language model
  meta["cell"] = config_.cell == LMCell::Lstm ? 1.0 : 0.0;
  meta["layers"] = static_cast<double>(config_.layers);
  meta["hidden"] = static_cast<double>(config_.hidden);
  meta["pos_embed_dim"] = static_cast<double>(config_.pos_embed_dim);
  meta["n_pos_tags"] = static_cast<double>(config_.n_pos_tags);
  meta["vocab_size"] = static_cast<double>(config_.vocab_size);
  meta["bptt_unroll"] = static_cast<double>(config_.bptt_unroll);
  meta["lr_init"] = config_.lr_init;
  meta["lr_decay"] = config_.lr_decay;
  meta["dropout"] = config_.dropout;
  meta["clip"] = config_.clip;
  meta["seed"] = static_cast<double>(config_.seed);
  save_params(path, params_, meta);
}

LanguageModel LanguageModel::load(const std::string& path) {
  ParameterStore store;
  const auto meta = load_params(path, store);
  auto need = [&](const std::string& key) {
    auto it = meta.find(key);
    if (it == meta.end()) {
      throw CheckpointError("checkpoint missing meta/" + key + ": " + path);
    }
    return it->second;
  };
  if (static_cast<int>(need("kind")) != 2) {
    throw CheckpointError("not a language model checkpoint: " + path);
  }
  LMConfig cfg;
  cfg.cell = need("cell") > 0.5 ? LMCell::Lstm : LMCell::SimpleRnn;
  cfg.layers = static_cast<std::size_t>(need("layers"));
  cfg.hidden = static_cast<std::size_t>(need("hidden"));
  cfg.pos_embed_dim = static_cast<std::size_t>(need("pos_embed_dim"));
  cfg.n_pos_tags = static_cast<std::size_t>(need("n_pos_tags"));
  cfg.vocab_size = static_cast<std::size_t>(need("vocab_size"));
  cfg.bptt_unroll = static_cast<std::size_t>(need("bptt_unroll"));
  cfg.lr_init = need("lr_init");
  cfg.lr_decay = need("lr_decay");
  cfg.dropout = need("dropout");
  cfg.clip = need("clip");
  cfg.seed = static_cast<std::uint64_t>(need("seed"));
  LanguageModel model(cfg, false);
  model.params_ = std::move(store);
  return model;
}

LanguageModel::State LanguageModel::initial_state() const {
  State s;
  for (std::size_t l = 0; l < config_.layers; ++l) {
    s.h.push_back(zero_vec(config_.hidden));
    s.c.push_back(zero_vec(config_.hidden));
  }
  return s;
}

NodeId LanguageModel::step(Graph& g, GraphState& state, std::uint32_t word_id,
                           std::optional<std::uint32_t> pos_id,
                           Rng* dropout_rng) const {
  NodeId emb = g.param("embed");
  if (word_id >= config_.vocab_size) {
    throw ContractError("LanguageModel: word id out of range");
  }
  NodeId x = g.row(emb, word_id);
  if (config_.has_pos()) {
    if (!pos_id.has_value()) {
      throw ContractError("LanguageModel: model has a syntax channel, POS id required");
    }
    if (*pos_id >= config_.n_pos_tags) {
      throw ContractError("LanguageModel: POS id out of range");
    }
    x = g.concat(x, g.row(g.param("pos_embed"), *pos_id));
  } else if (pos_id.has_value()) {
    throw ContractError("LanguageModel: POS id given to a model without syntax channel");
  }
  if (dropout_rng != nullptr && config_.dropout > 0.0) {
    x = g.mul(x, dropout_mask(g, g.value(x).size(), config_.dropout, *dropout_rng));
  }
  NodeId input = x;
  for (std::size_t l = 0; l < config_.layers; ++l) {
    const std::string prefix = "l" + std::to_string(l);
    LstmNodes cell = lstm_nodes(g, {prefix + "/wx", prefix + "/wh", prefix + "/b"});
    if (config_.cell == LMCell::Lstm) {
      LstmState next = lstm_step(g, cell, input, {state.h[l], state.c[l]},
                                 config_.hidden);
      state.h[l] = next.h;
      state.c[l] = next.c;
    } else {
      state.h[l] = rnn_step(g, cell, input, state.h[l]);
    }
    input = state.h[l];
    const bool between_layers = l + 1 < config_.layers;
    if (between_layers && dropout_rng != nullptr && config_.dropout > 0.0) {
      input = g.mul(input, dropout_mask(g, config_.hidden, config_.dropout,
                                        *dropout_rng));
    }
  }
  // weight tying: the output projection IS the embedding matrix
  NodeId logits = g.add(g.matmul(emb, input), g.param("out/b"));
  return g.softmax(logits);
}

std::pair<Tensor, LanguageModel::State> LanguageModel::next_word_distribution(
    const State& state, std::uint32_t word_id,
    std::optional<std::uint32_t> pos_id) const {
  Graph g(&params_);
  GraphState gs;
  for (std::size_t l = 0; l < config_.layers; ++l) {
    gs.h.push_back(g.constant(state.h[l]));
    gs.c.push_back(g.constant(state.c[l]));
  }
  NodeId dist = step(g, gs, word_id, pos_id, nullptr);
  State out;
  for (std::size_t l = 0; l < config_.layers; ++l) {
    out.h.push_back(g.value(gs.h[l]));
    out.c.push_back(config_.cell == LMCell::Lstm ? g.value(gs.c[l])
                                                 : zero_vec(config_.hidden));
  }
  return {g.value(dist), std::move(out)};
}

LanguageModel::StreamPos LanguageModel::make_stream(const LMDataset& data) const {
  if (data.has_pos() != config_.has_pos()) {
    throw ContractError("LanguageModel: dataset POS channel does not match model");
  }
  StreamPos s;
  for (std::size_t u = 0; u < data.utterances.size(); ++u) {
    s.words.push_back(Vocabulary::kBos);
    if (config_.has_pos()) s.pos.push_back(0);
    for (std::size_t t = 0; t < data.utterances[u].size(); ++t) {
      s.words.push_back(data.utterances[u][t]);
      if (config_.has_pos()) s.pos.push_back(data.pos[u][t]);
    }
    s.words.push_back(Vocabulary::kEos);
    if (config_.has_pos()) s.pos.push_back(0);
  }
  return s;
}

double LanguageModel::train_stream_epoch(const LMDataset& data, double lr,
                                         Rng& dropout_rng) {
  if (data.utterances.empty()) throw ContractError("train_stream_epoch: empty corpus");
  const StreamPos stream = make_stream(data);
  const std::size_t S = stream.words.size();
  double total_nll = 0.0;
  std::size_t predicted = 0;

  State carry = initial_state();
  std::size_t start = 0;
  while (start + 1 < S) {
    const std::size_t T = std::min(config_.bptt_unroll, S - 1 - start);
    Graph g(&params_);
    GraphState gs;
    for (std::size_t l = 0; l < config_.layers; ++l) {
      gs.h.push_back(g.constant(carry.h[l]));
      gs.c.push_back(g.constant(carry.c[l]));
    }
    NodeId loss = 0;
    bool have_loss = false;
    for (std::size_t t = 0; t < T; ++t) {
      const std::size_t pos_idx = start + t;
      std::optional<std::uint32_t> pid;
      if (config_.has_pos()) pid = stream.pos[pos_idx];
      NodeId dist = step(g, gs, stream.words[pos_idx], pid, &dropout_rng);
      NodeId nll = g.neg(g.log_(g.pick(dist, stream.words[pos_idx + 1])));
      loss = have_loss ? g.add(loss, nll) : nll;
      have_loss = true;
    }
    NodeId mean_loss = g.scale_const(loss, 1.0 / static_cast<double>(T));
    const double chunk_nll = g.value(loss).scalar_value();
    if (!std::isfinite(chunk_nll)) {
      throw GraphError("train_stream_epoch: non-finite loss");
    }
    total_nll += chunk_nll;
    predicted += T;
    params_.zero_grads();
    g.backward(mean_loss, params_);
    sgd_update(params_, lr, config_.clip);
    for (std::size_t l = 0; l < config_.layers; ++l) {
      carry.h[l] = g.value(gs.h[l]);
      carry.c[l] = config_.cell == LMCell::Lstm ? g.value(gs.c[l])
                                                : zero_vec(config_.hidden);
    }
    start += T;
  }
  return std::exp(total_nll / static_cast<double>(predicted));
}

double LanguageModel::accumulate_gradients(const LMDataset& data) {
  const StreamPos stream = make_stream(data);
  const std::size_t S = stream.words.size();
  if (S < 2) throw ContractError("accumulate_gradients: empty stream");
  Graph g(&params_);
  GraphState gs;
  for (std::size_t l = 0; l < config_.layers; ++l) {
    gs.h.push_back(g.constant(zero_vec(config_.hidden)));
    gs.c.push_back(g.constant(zero_vec(config_.hidden)));
  }
  NodeId loss = 0;
  bool have_loss = false;
  for (std::size_t t = 0; t + 1 < S; ++t) {
    std::optional<std::uint32_t> pid;
    if (config_.has_pos()) pid = stream.pos[t];
    NodeId dist = step(g, gs, stream.words[t], pid, nullptr);
    NodeId nll = g.neg(g.log_(g.pick(dist, stream.words[t + 1])));
    loss = have_loss ? g.add(loss, nll) : nll;
    have_loss = true;
  }
  g.backward(loss, params_);
  return g.value(loss).scalar_value();
}

PerplexityReport LanguageModel::perplexity(const LMDataset& data) const {
  if (data.utterances.empty()) throw ContractError("perplexity: empty corpus");
  if (data.has_pos() != config_.has_pos()) {
    throw ContractError("perplexity: dataset POS channel does not match model");
  }
  double total = 0.0;
  std::size_t tokens = 0;
  for (std::size_t u = 0; u < data.utterances.size(); ++u) {
    const auto& utt = data.utterances[u];
    Graph g(&params_);
    GraphState gs;
    for (std::size_t l = 0; l < config_.layers; ++l) {
      gs.h.push_back(g.constant(zero_vec(config_.hidden)));
      gs.c.push_back(g.constant(zero_vec(config_.hidden)));
    }
    // inputs BOS w1..wn, targets w1..wn EOS
    for (std::size_t t = 0; t <= utt.size(); ++t) {
      const std::uint32_t input = t == 0 ? Vocabulary::kBos : utt[t - 1];
      const std::uint32_t target = t == utt.size() ? Vocabulary::kEos : utt[t];
      std::optional<std::uint32_t> pid;
      if (config_.has_pos()) pid = t == 0 ? 0 : data.pos[u][t - 1];
      NodeId dist = step(g, gs, input, pid, nullptr);
      total += -std::log(g.value(dist).data[target]);
      ++tokens;
    }
  }
  return PerplexityReport::from(total, tokens);
}

std::vector<LMEpochLog> train_lm(LanguageModel& model, const LMDataset& train,
                                 const LMDataset* dev, std::size_t epochs) {
  Rng dropout_rng(model.config().seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<LMEpochLog> logs;
  double lr = model.config().lr_init;
  const double decay = model.config().lr_decay;
  double best_dev = std::numeric_limits<double>::infinity();
  std::map<std::string, Tensor> best_snapshot;
  for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
    LMEpochLog log;
    log.epoch = epoch;
    log.lr = lr;
    log.train_ppl = model.train_stream_epoch(train, lr, dropout_rng);
    if (dev != nullptr && !dev->utterances.empty()) {
      log.dev_ppl = model.perplexity(*dev).perplexity;
      if (log.dev_ppl < best_dev) {
        best_dev = log.dev_ppl;
        best_snapshot.clear();
        for (const auto& name : model.params().names()) {
          best_snapshot.emplace(name, model.params().value(name));
        }
      } else {
        lr *= decay;
      }
    }
    logs.push_back(log);
  }
  if (!best_snapshot.empty()) {
    for (auto& [name, value] : best_snapshot) {
      model.params().value(name) = value;
    }
  }
  return logs;
}

void save_lm_log(const std::string& path, const std::vector<LMEpochLog>& logs) {
  std::vector<std::string> lines;
  lines.reserve(logs.size());
  for (const auto& log : logs) {
    lines.push_back(std::to_string(log.epoch) + "\t" + format_double(log.lr, 6) +
                    "\t" + format_double(log.train_ppl, 4) + "\t" +
                    format_double(log.dev_ppl, 4));
  }
  write_lines(path, lines);
}

}  // namespace csforge
