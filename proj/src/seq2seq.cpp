#include "csforge/seq2seq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include "csforge/checkpoint.hpp"

namespace csforge {

namespace {

std::vector<std::size_t> ext_indices(const EncodedExample& ex) {
  std::vector<std::size_t> ids(ex.src_extended_ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = ex.src_extended_ids[i];
  return ids;
}

}  // namespace

Tensor final_distribution(const Tensor& p_vocab, const Tensor& attention,
                          double p_gen,
                          const std::vector<std::uint32_t>& src_extended_ids,
                          std::size_t n_oovs) {
  if (attention.size() != src_extended_ids.size()) {
    throw ContractError("final_distribution: attention/source length mismatch");
  }
  if (p_gen <= 0.0 || p_gen >= 1.0) {
    if (p_gen != 0.0 && p_gen != 1.0) {  // forced limits are allowed
      throw ContractError("final_distribution: p_gen must be in (0,1)");
    }
  }
  Tensor out = Tensor::zeros({p_vocab.size() + n_oovs});
  for (std::size_t w = 0; w < p_vocab.size(); ++w) {
    out.data[w] = p_gen * p_vocab.data[w];
  }
  for (std::size_t i = 0; i < src_extended_ids.size(); ++i) {
    out.data[src_extended_ids[i]] += (1.0 - p_gen) * attention.data[i];
  }
  return out;
}

Seq2SeqModel::Seq2SeqModel(const Seq2SeqConfig& config)
    : Seq2SeqModel(config, true) {}

Seq2SeqModel::Seq2SeqModel(const Seq2SeqConfig& config, bool init)
    : config_(config) {
  if (config_.vocab_size < 5) {
    throw ContractError("Seq2SeqModel: vocab_size must cover the specials");
  }
  if (config_.beam_size < 1) throw ContractError("Seq2SeqModel: beam_size >= 1");
  if (init) build_params();
}

void Seq2SeqModel::build_params() {
  Rng rng(config_.seed);
  const std::size_t V = config_.vocab_size;
  const std::size_t D = config_.embed_dim;
  const std::size_t H = config_.hidden_dim;
  params_.create_xavier("embed", V, D, rng);
  LstmParams::create(params_, "enc_fwd", D, H, rng);
  LstmParams::create(params_, "enc_bwd", D, H, rng);
  params_.create_xavier("enc_proj/w", H, 2 * H, rng);
  params_.create("enc_proj/b", {H});
  params_.create_xavier("dec_init_h/w", H, 2 * H, rng);
  params_.create("dec_init_h/b", {H});
  params_.create_xavier("dec_init_c/w", H, 2 * H, rng);
  params_.create("dec_init_c/b", {H});
  LstmParams::create(params_, "dec", D, H, rng);
  params_.create_xavier("attn/w", H, H, rng);
  params_.create_xavier("out1/w", H, 2 * H, rng);
  params_.create("out1/b", {H});
  params_.create_xavier("out2/w", V, H, rng);
  params_.create("out2/b", {V});
  if (config_.mode == Seq2SeqMode::PointerGenerator) {
    // gate weight vectors drawn like 1-row matrices, scalar bias at zero
    auto vec_init = [&](const std::string& name, std::size_t len) {
      Tensor& t = params_.create(name, {len});
      const double bound = std::sqrt(6.0 / static_cast<double>(1 + len));
      for (double& v : t.data) v = rng.uniform(-bound, bound);
    };
    vec_init("gate/wh", H);
    vec_init("gate/ws", H);
    vec_init("gate/wx", D);
    params_.create("gate/b", {});
  }
}

void Seq2SeqModel::save(const std::string& path) const {
  std::map<std::string, double> meta;
  meta["kind"] = 1.0;  // 1 = seq2seq generator
  meta["vocab_size"] = static_cast<double>(config_.vocab_size);
  meta["embed_dim"] = static_cast<double>(config_.embed_dim);
  meta["hidden_dim"] = static_cast<double>(config_.hidden_dim);
  meta["mode"] = config_.mode == Seq2SeqMode::PointerGenerator ? 1.0 : 0.0;
  meta["beam_size"] = static_cast<double>(config_.beam_size);
  meta["max_decode_ratio"] = config_.max_decode_ratio;
  meta["seed"] = static_cast<double>(config_.seed);
  save_params(path, params_, meta);
}

Seq2SeqModel Seq2SeqModel::load(const std::string& path) {
  ParameterStore store;
  const auto meta = load_params(path, store);
  auto need = [&](const std::string& key) {
    auto it = meta.find(key);
    if (it == meta.end()) {
      throw CheckpointError("checkpoint missing meta/" + key + ": " + path);
    }
    return it->second;
  };
  if (static_cast<int>(need("kind")) != 1) {
    throw CheckpointError("not a generator checkpoint: " + path);
  }
  Seq2SeqConfig cfg;
  cfg.vocab_size = static_cast<std::size_t>(need("vocab_size"));
  cfg.embed_dim = static_cast<std::size_t>(need("embed_dim"));
  cfg.hidden_dim = static_cast<std::size_t>(need("hidden_dim"));
  cfg.mode = need("mode") > 0.5 ? Seq2SeqMode::PointerGenerator
                                : Seq2SeqMode::AttentionOnly;
  cfg.beam_size = static_cast<std::size_t>(need("beam_size"));
  cfg.max_decode_ratio = need("max_decode_ratio");
  cfg.seed = static_cast<std::uint64_t>(need("seed"));
  Seq2SeqModel model(cfg, false);
  model.params_ = std::move(store);
  return model;
}

std::uint32_t Seq2SeqModel::embedding_id(std::uint32_t ext_id) const {
  return ext_id < config_.vocab_size ? ext_id : Vocabulary::kUnk;
}

std::uint32_t Seq2SeqModel::step_target(const EncodedExample& ex,
                                        std::size_t t) const {
  return config_.mode == Seq2SeqMode::PointerGenerator ? ex.tgt_extended_ids[t]
                                                       : ex.tgt_ids[t];
}

Seq2SeqModel::GraphEncode Seq2SeqModel::build_encoder(
    Graph& g, const std::vector<std::uint32_t>& src_ids) const {
  if (src_ids.empty()) throw ContractError("encode: empty source");
  const std::size_t L = src_ids.size();
  const std::size_t H = config_.hidden_dim;
  NodeId emb = g.param("embed");
  std::vector<NodeId> xs(L);
  for (std::size_t i = 0; i < L; ++i) xs[i] = g.row(emb, src_ids[i]);

  LstmNodes fwd = lstm_nodes(g, {"enc_fwd/wx", "enc_fwd/wh", "enc_fwd/b"});
  LstmNodes bwd = lstm_nodes(g, {"enc_bwd/wx", "enc_bwd/wh", "enc_bwd/b"});
  LstmState fstate{g.constant(zero_vec(H)), g.constant(zero_vec(H))};
  LstmState bstate{g.constant(zero_vec(H)), g.constant(zero_vec(H))};
  std::vector<NodeId> fh(L), bh(L);
  for (std::size_t i = 0; i < L; ++i) {
    fstate = lstm_step(g, fwd, xs[i], fstate, H);
    fh[i] = fstate.h;
  }
  for (std::size_t i = L; i-- > 0;) {
    bstate = lstm_step(g, bwd, xs[i], bstate, H);
    bh[i] = bstate.h;
  }

  NodeId proj_w = g.param("enc_proj/w");
  NodeId proj_b = g.param("enc_proj/b");
  std::vector<NodeId> rows(L);
  for (std::size_t i = 0; i < L; ++i) {
    rows[i] = g.add(g.matmul(proj_w, g.concat(fh[i], bh[i])), proj_b);
  }
  GraphEncode out;
  out.enc_matrix = g.stack_rows(rows);
  NodeId hcat = g.concat(fstate.h, bstate.h);
  NodeId ccat = g.concat(fstate.c, bstate.c);
  out.h0 = g.add(g.matmul(g.param("dec_init_h/w"), hcat), g.param("dec_init_h/b"));
  out.c0 = g.add(g.matmul(g.param("dec_init_c/w"), ccat), g.param("dec_init_c/b"));
  return out;
}

Seq2SeqModel::GraphStep Seq2SeqModel::build_step(
    Graph& g, const GraphEncode& enc, NodeId h, NodeId c, std::uint32_t input_id,
    const EncodedExample& ex, std::optional<double> forced_p_gen) const {
  const std::size_t V = config_.vocab_size;
  NodeId x = g.row(g.param("embed"), embedding_id(input_id));
  LstmNodes dec = lstm_nodes(g, {"dec/wx", "dec/wh", "dec/b"});
  LstmState state = lstm_step(g, dec, x, {h, c}, config_.hidden_dim);
  NodeId s_t = state.h;

  // general scoring: score_i = s_t^T W_a h_i
  NodeId u = g.matvec_t(g.param("attn/w"), s_t);
  NodeId scores = g.matmul(enc.enc_matrix, u);
  NodeId attention = g.softmax(scores);
  NodeId hstar = g.matvec_t(enc.enc_matrix, attention);

  NodeId feat = g.concat(s_t, hstar);
  NodeId pre = g.add(g.matmul(g.param("out1/w"), feat), g.param("out1/b"));
  NodeId logits = g.add(g.matmul(g.param("out2/w"), pre), g.param("out2/b"));
  NodeId p_vocab = g.softmax(logits);

  GraphStep out;
  out.attention = attention;
  out.p_vocab = p_vocab;
  out.h = state.h;
  out.c = state.c;
  if (config_.mode == Seq2SeqMode::AttentionOnly) {
    out.p_final = p_vocab;
    out.p_gen = g.constant(Tensor::scalar(1.0));
    return out;
  }

  out.has_gate = true;
  NodeId p_gen;
  if (forced_p_gen.has_value()) {
    p_gen = g.constant(Tensor::scalar(*forced_p_gen));
  } else {
    NodeId gate_pre =
        g.add(g.add(g.dot(g.param("gate/wh"), hstar), g.dot(g.param("gate/ws"), s_t)),
              g.add(g.dot(g.param("gate/wx"), x), g.param("gate/b")));
    p_gen = g.sigmoid(gate_pre);
  }
  out.p_gen = p_gen;

  const std::size_t ext_size = V + ex.src_oovs.size();
  NodeId copy_dist = g.scatter_add(attention, ext_indices(ex), ext_size);
  NodeId padded = ex.src_oovs.empty()
                      ? p_vocab
                      : g.concat(p_vocab, g.constant(zero_vec(ex.src_oovs.size())));
  NodeId gen_part = g.scale(padded, p_gen);
  NodeId copy_part = g.scale(copy_dist, g.sub(g.constant(Tensor::scalar(1.0)), p_gen));
  out.p_final = g.add(gen_part, copy_part);
  return out;
}

Seq2SeqModel::Encoded Seq2SeqModel::encode(
    const std::vector<std::uint32_t>& src_ids) const {
  Graph g(&params_);
  GraphEncode enc = build_encoder(g, src_ids);
  Encoded out;
  out.enc_matrix = g.value(enc.enc_matrix);
  out.h0 = g.value(enc.h0);
  out.c0 = g.value(enc.c0);
  return out;
}

Seq2SeqModel::StepResult Seq2SeqModel::decode_step(
    const Encoded& enc, const Tensor& h, const Tensor& c,
    std::uint32_t prev_ext_id, const EncodedExample& ex,
    std::optional<double> forced_p_gen) const {
  Graph g(&params_);
  GraphEncode genc;
  genc.enc_matrix = g.constant(enc.enc_matrix);
  genc.h0 = g.constant(enc.h0);
  genc.c0 = g.constant(enc.c0);
  GraphStep step = build_step(g, genc, g.constant(h), g.constant(c), prev_ext_id,
                              ex, forced_p_gen);
  StepResult out;
  out.dist.attention = g.value(step.attention);
  out.dist.p_vocab = g.value(step.p_vocab);
  out.dist.p_gen = g.value(step.p_gen).scalar_value();
  out.dist.p_final = g.value(step.p_final);
  out.h = g.value(step.h);
  out.c = g.value(step.c);
  return out;
}

std::pair<double, std::size_t> Seq2SeqModel::example_nll(
    const EncodedExample& ex, std::vector<StepDistribution>* collect) const {
  if (ex.tgt_ids.size() < 2) {
    throw ContractError("example_nll: example has no code-switched target");
  }
  Graph g(&params_);
  GraphEncode enc = build_encoder(g, ex.src_ids);
  NodeId h = enc.h0, c = enc.c0;
  double total = 0.0;
  const std::size_t steps = ex.tgt_ids.size() - 1;
  for (std::size_t t = 0; t < steps; ++t) {
    GraphStep step = build_step(g, enc, h, c, ex.tgt_ids[t], ex, {});
    const Tensor& pf = g.value(step.p_final);
    total += -std::log(pf.data[step_target(ex, t + 1)]);
    if (collect != nullptr) {
      StepDistribution d;
      d.attention = g.value(step.attention);
      d.p_vocab = g.value(step.p_vocab);
      d.p_gen = g.value(step.p_gen).scalar_value();
      d.p_final = pf;
      collect->push_back(std::move(d));
    }
    h = step.h;
    c = step.c;
  }
  return {total, steps};
}

double Seq2SeqModel::train_step(const EncodedExample& ex, double lr, double clip) {
  if (ex.tgt_ids.size() < 2) {
    throw ContractError("train_step: example has no code-switched target");
  }
  Graph g(&params_);
  GraphEncode enc = build_encoder(g, ex.src_ids);
  NodeId h = enc.h0, c = enc.c0;
  const std::size_t steps = ex.tgt_ids.size() - 1;
  NodeId loss = 0;
  bool have_loss = false;
  for (std::size_t t = 0; t < steps; ++t) {
    GraphStep step = build_step(g, enc, h, c, ex.tgt_ids[t], ex, {});
    NodeId nll = g.neg(g.log_(g.pick(step.p_final, step_target(ex, t + 1))));
    loss = have_loss ? g.add(loss, nll) : nll;
    have_loss = true;
    h = step.h;
    c = step.c;
  }
  loss = g.scale_const(loss, 1.0 / static_cast<double>(steps));
  const double value = g.value(loss).scalar_value();
  if (!std::isfinite(value)) throw GraphError("train_step: non-finite loss");
  params_.zero_grads();
  g.backward(loss, params_);
  sgd_update(params_, lr, clip);
  return value;
}

double Seq2SeqModel::accumulate_gradients(const EncodedExample& ex) {
  if (ex.tgt_ids.size() < 2) {
    throw ContractError("accumulate_gradients: example has no target");
  }
  Graph g(&params_);
  GraphEncode enc = build_encoder(g, ex.src_ids);
  NodeId h = enc.h0, c = enc.c0;
  const std::size_t steps = ex.tgt_ids.size() - 1;
  NodeId loss = 0;
  bool have_loss = false;
  for (std::size_t t = 0; t < steps; ++t) {
    GraphStep step = build_step(g, enc, h, c, ex.tgt_ids[t], ex, {});
    NodeId nll = g.neg(g.log_(g.pick(step.p_final, step_target(ex, t + 1))));
    loss = have_loss ? g.add(loss, nll) : nll;
    have_loss = true;
    h = step.h;
    c = step.c;
  }
  g.backward(loss, params_);
  return g.value(loss).scalar_value();
}

std::size_t Seq2SeqModel::max_decode_len(std::size_t src_len) const {
  const double cap = config_.max_decode_ratio * static_cast<double>(src_len);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(cap)));
}

std::vector<Hypothesis> Seq2SeqModel::beam_search(
    const EncodedExample& ex, std::size_t beam_size, std::size_t n_best,
    std::optional<double> forced_p_gen) const {
  if (n_best < 1 || n_best > beam_size) {
    throw ContractError("beam_search: need 1 <= n_best <= beam_size");
  }
  const Encoded enc = encode(ex.src_ids);
  const std::size_t cap = max_decode_len(ex.src_ids.size());

  Hypothesis root;
  root.state_h = enc.h0;
  root.state_c = enc.c0;
  std::vector<Hypothesis> live{root};
  std::vector<Hypothesis> completed;

  for (std::size_t step = 0; step < cap && !live.empty(); ++step) {
    struct Cand {
      std::size_t parent;
      std::uint32_t token;
      double logprob;
    };
    std::vector<StepResult> results(live.size());
    std::vector<Cand> candidates;
    for (std::size_t p = 0; p < live.size(); ++p) {
      const Hypothesis& hyp = live[p];
      const std::uint32_t prev =
          hyp.ext_ids.empty() ? Vocabulary::kBos : hyp.ext_ids.back();
      results[p] = decode_step(enc, hyp.state_h, hyp.state_c, prev, ex,
                               forced_p_gen);
      const Tensor& pf = results[p].dist.p_final;
      for (std::uint32_t w = 0; w < pf.size(); ++w) {
        if (pf.data[w] <= 0.0) continue;
        candidates.push_back({p, w, hyp.logprob + std::log(pf.data[w])});
      }
    }
    // lexicographic order over the would-be sequences parent ++ [token]
    auto seq_less = [&](const Cand& a, const Cand& b) {
      const auto& sa = live[a.parent].ext_ids;
      const auto& sb = live[b.parent].ext_ids;
      const std::size_t la = sa.size() + 1, lb = sb.size() + 1;
      for (std::size_t i = 0; i < std::min(la, lb); ++i) {
        const std::uint32_t va = i < sa.size() ? sa[i] : a.token;
        const std::uint32_t vb = i < sb.size() ? sb[i] : b.token;
        if (va != vb) return va < vb;
      }
      return la < lb;
    };
    std::sort(candidates.begin(), candidates.end(),
              [&](const Cand& a, const Cand& b) {
                if (a.logprob != b.logprob) return a.logprob > b.logprob;
                return seq_less(a, b);
              });
    std::vector<Hypothesis> next_live;
    for (std::size_t k = 0; k < candidates.size() && k < beam_size; ++k) {
      const Cand& cand = candidates[k];
      Hypothesis next = live[cand.parent];
      next.ext_ids.push_back(cand.token);
      next.logprob = cand.logprob;
      next.state_h = results[cand.parent].h;
      next.state_c = results[cand.parent].c;
      if (cand.token == Vocabulary::kEos) {
        next.complete = true;
        next.completed_step = step;
        completed.push_back(std::move(next));
      } else {
        next_live.push_back(std::move(next));
      }
    }
    live = std::move(next_live);
  }
  // length-capped hypotheses retire as-is
  for (auto& hyp : live) {
    hyp.complete = true;
    hyp.completed_step = cap;
    completed.push_back(std::move(hyp));
  }
  std::sort(completed.begin(), completed.end(),
            [](const Hypothesis& a, const Hypothesis& b) {
              if (a.logprob != b.logprob) return a.logprob > b.logprob;
              if (a.completed_step != b.completed_step) {
                return a.completed_step < b.completed_step;
              }
              return a.ext_ids < b.ext_ids;
            });
  if (completed.size() > n_best) completed.resize(n_best);
  return completed;
}

double train_epoch(Seq2SeqModel& model, const std::vector<EncodedExample>& corpus,
                   double lr, double clip, Rng& rng) {
  if (corpus.empty()) throw ContractError("train_epoch: empty corpus");
  auto order = rng.permutation(corpus.size());
  double total = 0.0;
  std::size_t tokens = 0;
  for (std::size_t idx : order) {
    const EncodedExample& ex = corpus[idx];
    if (ex.tgt_ids.size() < 2) {
      throw ContractError("train_epoch: example without target");
    }
    const std::size_t steps = ex.tgt_ids.size() - 1;
    total += model.train_step(ex, lr, clip) * static_cast<double>(steps);
    tokens += steps;
  }
  return total / static_cast<double>(tokens);
}

std::vector<GenEpochLog> train_generator(Seq2SeqModel& model,
                                         const std::vector<EncodedExample>& train,
                                         const std::vector<EncodedExample>* dev,
                                         const GenTrainConfig& cfg) {
  Rng rng(cfg.seed);
  std::vector<GenEpochLog> logs;
  double lr = cfg.lr;
  double best_dev = std::numeric_limits<double>::infinity();
  std::map<std::string, Tensor> best_snapshot;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    GenEpochLog log;
    log.epoch = epoch;
    log.lr = lr;
    log.train_nll = train_epoch(model, train, lr, cfg.clip, rng);
    if (dev != nullptr && !dev->empty()) {
      log.dev_ppl = generator_perplexity(model, *dev);
      if (log.dev_ppl < best_dev) {
        best_dev = log.dev_ppl;
        best_snapshot.clear();
        for (const auto& name : model.params().names()) {
          best_snapshot.emplace(name, model.params().value(name));
        }
      } else if (cfg.halve_on_stall) {
        lr *= 0.5;
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

double generator_perplexity(const Seq2SeqModel& model,
                            const std::vector<EncodedExample>& corpus) {
  if (corpus.empty()) throw ContractError("generator_perplexity: empty corpus");
  double total = 0.0;
  std::size_t tokens = 0;
  for (const auto& ex : corpus) {
    auto [nll, count] = model.example_nll(ex);
    total += nll;
    tokens += count;
  }
  return std::exp(total / static_cast<double>(tokens));
}

std::vector<std::string> detokenize_hypothesis(const Hypothesis& hyp,
                                               const Vocabulary& vocab,
                                               const EncodedExample& ex) {
  std::vector<std::string> out;
  for (std::uint32_t id : hyp.ext_ids) {
    if (id == Vocabulary::kEos) break;
    out.push_back(extended_token(id, vocab, ex.src_oovs));
  }
  return out;
}

std::vector<NbestEntry> decode_nbest(const Seq2SeqModel& model,
                                     const Vocabulary& vocab,
                                     const std::vector<EncodedExample>& examples,
                                     std::size_t beam_size, std::size_t n_best,
                                     bool drop_monolingual) {
  std::vector<std::vector<NbestEntry>> per_example(examples.size());
  auto decode_one = [&](std::size_t idx) {
    const auto hyps = model.beam_search(examples[idx], beam_size, n_best);
    std::size_t rank = 1;
    for (const auto& hyp : hyps) {
      NbestEntry entry;
      entry.example_index = idx;
      entry.logprob = hyp.logprob;
      entry.tokens = detokenize_hypothesis(hyp, vocab, examples[idx]);
      if (drop_monolingual) {
        bool has_l1 = false, has_l2 = false;
        for (const auto& tok : entry.tokens) {
          const Lang lang = language_id(tok);
          has_l1 |= lang == Lang::L1;
          has_l2 |= lang == Lang::L2;
        }
        if (!has_l1 || !has_l2) continue;
      }
      entry.rank = rank++;
      per_example[idx].push_back(std::move(entry));
    }
  };

  const unsigned workers =
      std::min<unsigned>(worker_count(), static_cast<unsigned>(examples.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < examples.size(); ++i) decode_one(i);
  } else {
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < workers; ++w) {
      threads.emplace_back([&, w]() {
        for (std::size_t i = w; i < examples.size(); i += workers) decode_one(i);
      });
    }
    for (auto& t : threads) t.join();
  }
  std::vector<NbestEntry> out;
  for (auto& entries : per_example) {
    for (auto& e : entries) out.push_back(std::move(e));
  }
  return out;
}

}  // namespace csforge
