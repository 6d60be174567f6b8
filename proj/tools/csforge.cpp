// csforge: batch pipeline for learning to generate code-switching text from
// parallel corpora and validating the augmentation with a language model.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "csforge/aligner.hpp"
#include "csforge/checkpoint.hpp"
#include "csforge/corpus.hpp"
#include "csforge/fixture.hpp"
#include "csforge/generator.hpp"
#include "csforge/lm.hpp"
#include "csforge/manifest.hpp"
#include "csforge/metrics.hpp"
#include "csforge/seq2seq.hpp"
#include "csforge/util.hpp"

namespace {

using namespace csforge;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitMissingInput = 2;
constexpr int kExitBadFlags = 3;
constexpr int kExitBadCheckpoint = 4;
constexpr int kExitBadData = 5;
constexpr int kExitContract = 6;

void require_inputs(const std::vector<std::string>& paths) {
  for (const auto& p : paths) {
    if (!std::filesystem::exists(p)) throw IoError("input file not found: " + p);
  }
}

std::vector<std::string> hesitations_from(const std::string& path) {
  if (path.empty()) return default_hesitations();
  std::vector<std::string> out;
  for (const auto& line : read_lines(path)) {
    for (const auto& tok : split_ws(line)) out.push_back(tok);
  }
  return out;
}

TokenLines cs_column(const std::vector<ParallelExample>& examples) {
  TokenLines out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(ex.cs_tokens);
  return out;
}

Vocabulary build_gen_vocab(const std::vector<ParallelExample>& examples,
                           std::size_t cap) {
  TokenLines streams;
  for (const auto& ex : examples) {
    streams.push_back(ex.l1_tokens);
    streams.push_back(ex.l2_tokens);
    if (ex.has_cs()) streams.push_back(ex.cs_tokens);
  }
  return Vocabulary::build(streams, cap, {kSepToken});
}

std::vector<EncodedExample> encode_all(const std::vector<ParallelExample>& examples,
                                       const Vocabulary& vocab) {
  std::vector<EncodedExample> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(encode_example(ex, vocab));
  return out;
}

void write_gen_log(const std::string& path, const std::vector<GenEpochLog>& logs) {
  std::vector<std::string> lines;
  for (const auto& log : logs) {
    lines.push_back(std::to_string(log.epoch) + "\t" + format_double(log.lr, 6) +
                    "\t" + format_double(log.train_nll, 6) + "\t" +
                    format_double(log.dev_ppl, 4));
  }
  write_lines(path, lines);
}

void write_candidates(const std::string& out_path, const std::string& method,
                      const std::vector<std::vector<SwitchCandidate>>& per_pair) {
  std::vector<std::string> lines, prov;
  std::size_t line_no = 0;
  for (std::size_t ex = 0; ex < per_pair.size(); ++ex) {
    for (std::size_t r = 0; r < per_pair[ex].size(); ++r) {
      lines.push_back(join(per_pair[ex][r].tokens, " "));
      prov.push_back(std::to_string(line_no) + "\t" + std::to_string(ex) + "\t" +
                     method + "\t" + std::to_string(r + 1));
      ++line_no;
    }
  }
  write_lines(out_path, lines);
  write_lines(out_path + ".prov", prov);
}

// --- subcommand implementations -------------------------------------------

struct FixtureGenArgs {
  std::string out;
  std::size_t size = 2000;
  std::uint64_t seed = 1;
  double switch_prob = 0.35;
  std::size_t nouns = 40, adjs = 16, verbs = 20;
};

int run_fixture_gen(const FixtureGenArgs& a) {
  ToyGrammar grammar = ToyGrammar::standard(a.seed, a.nouns, a.adjs, a.verbs);
  grammar.switch_prob = a.switch_prob;
  FixtureData data = generate_fixture(grammar, a.size);
  write_fixture(a.out, grammar, data);

  Manifest m;
  m.subcommand = "fixture-gen";
  m.threads = worker_count();
  m.set("size", a.size);
  m.set("seed", a.seed);
  m.set("switch_prob", a.switch_prob);
  m.set("nouns", a.nouns);
  m.set("adjs", a.adjs);
  m.set("verbs", a.verbs);
  for (const char* suffix : {".tsv", ".align", ".cs.txt", ".cs.pos", ".lexicon.tsv"}) {
    m.outputs.push_back(a.out + suffix);
  }
  m.write(a.out + ".manifest.jsonl");
  std::cout << "fixture-gen: wrote " << a.size << " examples to " << a.out
            << ".tsv\n";
  return kExitOk;
}

struct AlignArgs {
  std::string input, out, table_out, hesitation_file;
  std::size_t iters = 5;
  std::string model = "ibm1";
  std::string sym = "intersection";
};

int run_align(const AlignArgs& a) {
  require_inputs({a.input});
  const auto examples = load_parallel_tsv(a.input, true, hesitations_from(a.hesitation_file));
  if (examples.empty()) throw FormatError("empty parallel corpus: " + a.input);
  std::vector<SentencePair> fwd_pairs, rev_pairs;
  for (const auto& ex : examples) {
    fwd_pairs.push_back({ex.l1_tokens, ex.l2_tokens});
    rev_pairs.push_back({ex.l2_tokens, ex.l1_tokens});
  }
  const AlignModel model = a.model == "diagonal" ? AlignModel::Diagonal : AlignModel::Ibm1;
  const AlignerResult fwd = train_aligner(fwd_pairs, a.iters, model);
  const AlignerResult rev = train_aligner(rev_pairs, a.iters, model);
  const SymMethod sym = a.sym == "union" ? SymMethod::Union : SymMethod::Intersection;
  std::vector<Alignment> alignments;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const Alignment f = viterbi_align(fwd_pairs[i], fwd);
    const Alignment r = viterbi_align(rev_pairs[i], rev);
    alignments.push_back(symmetrize(f, r, sym));
  }
  save_pharaoh(a.out, alignments);
  if (!a.table_out.empty()) fwd.table.save_tsv(a.table_out);

  Manifest m;
  m.subcommand = "align";
  m.threads = worker_count();
  m.set("iters", a.iters);
  m.set("model", a.model);
  m.set("sym", a.sym);
  m.inputs.push_back(a.input);
  m.outputs.push_back(a.out);
  if (!a.table_out.empty()) m.outputs.push_back(a.table_out);
  m.write(a.out + ".manifest.jsonl");
  std::cout << "align: " << examples.size() << " pairs, final log-likelihood "
            << format_double(fwd.log_likelihoods.back(), 4) << "\n";
  return kExitOk;
}

struct GenerateArgs {
  std::string input, alignments, out, hesitation_file;
  std::size_t max_outputs = 16;
  std::string frame = "l1";
  std::size_t count = 3;  // random-generate draws per pair
  std::uint64_t seed = 1;
};

int run_ec_generate(const GenerateArgs& a) {
  require_inputs({a.input, a.alignments});
  const auto examples = load_parallel_tsv(a.input, true, hesitations_from(a.hesitation_file));
  const auto alignments = load_pharaoh(a.alignments);
  if (alignments.size() != examples.size()) {
    throw FormatError("alignment count " + std::to_string(alignments.size()) +
                      " does not match corpus size " + std::to_string(examples.size()));
  }
  std::vector<std::vector<SwitchCandidate>> per_pair(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    ParallelExample pair = examples[i];
    Alignment alignment = alignments[i];
    if (a.frame == "l2") {
      std::swap(pair.l1_tokens, pair.l2_tokens);
      alignment = transpose(alignment);
    }
    per_pair[i] = equivalence_generate(pair, alignment, a.max_outputs);
  }
  write_candidates(a.out, "equivalence-constraint", per_pair);

  Manifest m;
  m.subcommand = "ec-generate";
  m.threads = worker_count();
  m.set("max_outputs", a.max_outputs);
  m.set("frame", a.frame);
  m.inputs = {a.input, a.alignments};
  m.outputs = {a.out, a.out + ".prov"};
  m.write(a.out + ".manifest.jsonl");
  std::size_t total = 0;
  for (const auto& c : per_pair) total += c.size();
  std::cout << "ec-generate: " << total << " candidates from " << examples.size()
            << " pairs\n";
  return kExitOk;
}

int run_random_generate(const GenerateArgs& a) {
  require_inputs({a.input, a.alignments});
  const auto examples = load_parallel_tsv(a.input, true, hesitations_from(a.hesitation_file));
  const auto alignments = load_pharaoh(a.alignments);
  if (alignments.size() != examples.size()) {
    throw FormatError("alignment count " + std::to_string(alignments.size()) +
                      " does not match corpus size " + std::to_string(examples.size()));
  }
  std::vector<std::vector<SwitchCandidate>> per_pair(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    per_pair[i] = random_switch_generate(examples[i], alignments[i], a.count,
                                         a.seed + i);
  }
  write_candidates(a.out, "random-switch", per_pair);

  Manifest m;
  m.subcommand = "random-generate";
  m.threads = worker_count();
  m.set("count", a.count);
  m.set("seed", a.seed);
  m.inputs = {a.input, a.alignments};
  m.outputs = {a.out, a.out + ".prov"};
  m.write(a.out + ".manifest.jsonl");
  std::cout << "random-generate: done\n";
  return kExitOk;
}

struct TrainGenArgs {
  std::string input, dev, out, vocab_out, log_out, hesitation_file;
  std::string mode = "pointer-generator";
  std::size_t embed_dim = 500, hidden_dim = 500, vocab_cap = 50000;
  std::size_t epochs = 10, beam_size = 5;
  double lr = 1.0, clip = 0.25, max_decode_ratio = 1.5;
  bool no_halve = false;
  std::uint64_t seed = 1;
};

int run_train_gen(const TrainGenArgs& a) {
  require_inputs({a.input});
  if (!a.dev.empty()) require_inputs({a.dev});
  const auto hes = hesitations_from(a.hesitation_file);
  const auto train_examples = load_parallel_tsv(a.input, true, hes);
  for (std::size_t i = 0; i < train_examples.size(); ++i) {
    if (!train_examples[i].has_cs()) {
      throw FormatError(a.input + ": example " + std::to_string(i) +
                        " has no code-switched reference column");
    }
  }
  const Vocabulary vocab = build_gen_vocab(train_examples, a.vocab_cap);
  const auto train_enc = encode_all(train_examples, vocab);
  std::vector<EncodedExample> dev_enc;
  if (!a.dev.empty()) {
    dev_enc = encode_all(load_parallel_tsv(a.dev, true, hes), vocab);
  }

  Seq2SeqConfig cfg;
  cfg.vocab_size = vocab.size();
  cfg.embed_dim = a.embed_dim;
  cfg.hidden_dim = a.hidden_dim;
  cfg.mode = a.mode == "attention" ? Seq2SeqMode::AttentionOnly
                                   : Seq2SeqMode::PointerGenerator;
  cfg.beam_size = a.beam_size;
  cfg.max_decode_ratio = a.max_decode_ratio;
  cfg.seed = a.seed;
  Seq2SeqModel model(cfg);

  GenTrainConfig tcfg;
  tcfg.epochs = a.epochs;
  tcfg.lr = a.lr;
  tcfg.clip = a.clip;
  tcfg.halve_on_stall = !a.no_halve;
  tcfg.seed = a.seed;
  const auto logs = train_generator(model, train_enc,
                                    dev_enc.empty() ? nullptr : &dev_enc, tcfg);

  model.save(a.out);
  const std::string vocab_path = a.vocab_out.empty() ? a.out + ".vocab" : a.vocab_out;
  vocab.save(vocab_path);
  if (!a.log_out.empty()) write_gen_log(a.log_out, logs);

  Manifest m;
  m.subcommand = "train-gen";
  m.threads = worker_count();
  m.set("mode", a.mode);
  m.set("embed_dim", a.embed_dim);
  m.set("hidden_dim", a.hidden_dim);
  m.set("vocab_cap", a.vocab_cap);
  m.set("epochs", a.epochs);
  m.set("lr", a.lr);
  m.set("clip", a.clip);
  m.set("seed", a.seed);
  m.inputs.push_back(a.input);
  if (!a.dev.empty()) m.inputs.push_back(a.dev);
  m.outputs = {a.out, vocab_path};
  if (!a.log_out.empty()) m.outputs.push_back(a.log_out);
  m.write(a.out + ".manifest.jsonl");
  std::cout << "train-gen: " << logs.size() << " epochs, final train NLL "
            << format_double(logs.empty() ? 0.0 : logs.back().train_nll, 4) << "\n";
  return kExitOk;
}

struct DecodeArgs {
  std::string model, vocab, input, out, hesitation_file;
  std::size_t beam = 5, nbest = 3;
  bool drop_monolingual = false;
};

int run_decode_nbest(const DecodeArgs& a) {
  require_inputs({a.model, a.vocab, a.input});
  if (a.nbest > a.beam) {
    throw ContractError("decode-nbest: --nbest must not exceed --beam");
  }
  const Seq2SeqModel model = Seq2SeqModel::load(a.model);
  const Vocabulary vocab = Vocabulary::load(a.vocab);
  const auto examples = load_parallel_tsv(a.input, true, hesitations_from(a.hesitation_file));
  const auto encoded = encode_all(examples, vocab);
  const auto entries = decode_nbest(model, vocab, encoded, a.beam, a.nbest,
                                    a.drop_monolingual);
  save_nbest(a.out, entries);

  Manifest m;
  m.subcommand = "decode-nbest";
  m.threads = worker_count();
  m.set("beam", a.beam);
  m.set("nbest", a.nbest);
  m.set("drop_monolingual", a.drop_monolingual ? 1.0 : 0.0);
  m.inputs = {a.model, a.vocab, a.input};
  m.outputs = {a.out};
  m.write(a.out + ".manifest.jsonl");
  std::cout << "decode-nbest: " << entries.size() << " hypotheses for "
            << examples.size() << " examples\n";
  return kExitOk;
}

struct AssembleArgs {
  std::string real, nbest, out, lexicon;
  std::string policy = "3best";
};

int run_assemble(const AssembleArgs& a) {
  require_inputs({a.real, a.nbest});
  const auto real = load_token_lines(a.real);
  const auto generated = load_nbest(a.nbest);
  const AssemblePolicy policy =
      a.policy == "1best" ? AssemblePolicy::OneBest : AssemblePolicy::ThreeBest;
  const AssembledCorpus corpus = assemble_augmented_corpus(real, generated, policy);

  std::vector<std::string> lines, prov;
  for (std::size_t i = 0; i < corpus.utterances.size(); ++i) {
    lines.push_back(join(corpus.utterances[i], " "));
    const auto& p = corpus.provenance[i];
    if (p.method.empty()) {
      prov.push_back(std::to_string(i) + "\t" + std::to_string(i) + "\treal\t0");
    } else {
      prov.push_back(std::to_string(i) + "\t" + std::to_string(p.source_example) +
                     "\t" + p.method + "\t" + std::to_string(p.rank));
    }
  }
  write_lines(a.out, lines);
  write_lines(a.out + ".prov", prov);
  if (!a.lexicon.empty()) {
    require_inputs({a.lexicon});
    ToyGrammar grammar;
    for (const auto& line : read_lines(a.lexicon)) {
      const auto cols = split_char(line, '\t');
      if (cols.size() != 3) throw FormatError("lexicon line needs 3 columns: " + line);
      grammar.lexicon[cols[0]] = cols[1];
      grammar.category_of[cols[0]] = cols[2];
    }
    const auto tags = tag_with_lexicon(grammar, corpus.utterances);
    std::vector<std::string> tag_lines;
    for (const auto& t : tags) tag_lines.push_back(join(t, " "));
    write_lines(a.out + ".pos", tag_lines);
  }

  Manifest m;
  m.subcommand = "assemble";
  m.threads = worker_count();
  m.set("policy", a.policy);
  m.set("real_count", corpus.real_count);
  m.set("generated_count", corpus.generated_count);
  m.inputs = {a.real, a.nbest};
  if (!a.lexicon.empty()) m.inputs.push_back(a.lexicon);
  m.outputs = {a.out, a.out + ".prov"};
  if (!a.lexicon.empty()) m.outputs.push_back(a.out + ".pos");
  m.write(a.out + ".manifest.jsonl");
  std::cout << "assemble: " << corpus.real_count << " real + "
            << corpus.generated_count << " generated utterances\n";
  return kExitOk;
}

struct TrainLmArgs {
  std::string input, dev, pos, dev_pos, out, vocab_out, pos_vocab_out, log_out;
  std::string cell = "lstm";
  std::size_t layers = 2, hidden = 500, pos_dim = 64, vocab_cap = 50000;
  std::size_t unroll = 35, epochs = 10;
  double lr = 20.0, lr_decay = 0.75, dropout = 0.3, clip = 0.25;
  bool lr_sweep = false;
  std::uint64_t seed = 1;
};

int run_train_lm(const TrainLmArgs& a) {
  require_inputs({a.input});
  if (!a.dev.empty()) require_inputs({a.dev});
  if (!a.pos.empty()) require_inputs({a.pos});
  const auto corpus = load_token_lines(a.input);
  if (corpus.empty()) throw FormatError("empty corpus: " + a.input);
  const Vocabulary vocab = Vocabulary::build(corpus, a.vocab_cap);

  const bool use_pos = !a.pos.empty();
  PosVocab pos_vocab;
  TokenLines pos_tags, dev_pos_tags;
  if (use_pos) pos_tags = load_pos_file(a.pos, corpus);
  const LMDataset train = encode_lm_corpus(vocab, corpus,
                                           use_pos ? &pos_tags : nullptr,
                                           use_pos ? &pos_vocab : nullptr, true);
  LMDataset dev;
  TokenLines dev_corpus;
  if (!a.dev.empty()) {
    dev_corpus = load_token_lines(a.dev);
    if (use_pos) {
      if (a.dev_pos.empty()) {
        throw ContractError("train-lm: --dev-pos required when --pos is given");
      }
      require_inputs({a.dev_pos});
      dev_pos_tags = load_pos_file(a.dev_pos, dev_corpus);
    }
    dev = encode_lm_corpus(vocab, dev_corpus, use_pos ? &dev_pos_tags : nullptr,
                           use_pos ? &pos_vocab : nullptr, true);
  }

  LMConfig cfg;
  cfg.cell = a.cell == "rnn" ? LMCell::SimpleRnn : LMCell::Lstm;
  cfg.layers = a.layers;
  cfg.hidden = a.hidden;
  cfg.pos_embed_dim = use_pos ? a.pos_dim : 0;
  cfg.n_pos_tags = use_pos ? pos_vocab.size() : 0;
  cfg.vocab_size = vocab.size();
  cfg.bptt_unroll = a.unroll;
  cfg.lr_decay = a.lr_decay;
  cfg.dropout = a.dropout;
  cfg.clip = a.clip;
  cfg.seed = a.seed;

  // paper exposes two initial learning rates; sweep selects by dev perplexity
  std::vector<double> lrs = a.lr_sweep ? std::vector<double>{10.0, 20.0}
                                       : std::vector<double>{a.lr};
  double best_ppl = std::numeric_limits<double>::infinity();
  std::optional<LanguageModel> best_model;
  std::vector<LMEpochLog> best_logs;
  for (double lr : lrs) {
    cfg.lr_init = lr;
    LanguageModel model(cfg);
    auto logs = train_lm(model, train, dev.utterances.empty() ? nullptr : &dev,
                         a.epochs);
    const double ppl = dev.utterances.empty()
                           ? model.perplexity(train).perplexity
                           : model.perplexity(dev).perplexity;
    if (ppl < best_ppl) {
      best_ppl = ppl;
      best_model.emplace(std::move(model));
      best_logs = std::move(logs);
    }
  }

  best_model->save(a.out);
  const std::string vocab_path = a.vocab_out.empty() ? a.out + ".vocab" : a.vocab_out;
  vocab.save(vocab_path);
  std::string pos_vocab_path;
  if (use_pos) {
    pos_vocab_path = a.pos_vocab_out.empty() ? a.out + ".posvocab" : a.pos_vocab_out;
    pos_vocab.save(pos_vocab_path);
  }
  if (!a.log_out.empty()) save_lm_log(a.log_out, best_logs);

  Manifest m;
  m.subcommand = "train-lm";
  m.threads = worker_count();
  m.set("cell", a.cell);
  m.set("layers", a.layers);
  m.set("hidden", a.hidden);
  m.set("pos_dim", use_pos ? a.pos_dim : 0);
  m.set("vocab_cap", a.vocab_cap);
  m.set("unroll", a.unroll);
  m.set("lr", a.lr);
  m.set("lr_sweep", a.lr_sweep ? 1.0 : 0.0);
  m.set("epochs", a.epochs);
  m.set("dropout", a.dropout);
  m.set("seed", a.seed);
  m.inputs.push_back(a.input);
  if (!a.dev.empty()) m.inputs.push_back(a.dev);
  if (use_pos) m.inputs.push_back(a.pos);
  if (!a.dev_pos.empty()) m.inputs.push_back(a.dev_pos);
  m.outputs = {a.out, vocab_path};
  if (use_pos) m.outputs.push_back(pos_vocab_path);
  if (!a.log_out.empty()) m.outputs.push_back(a.log_out);
  m.write(a.out + ".manifest.jsonl");
  std::cout << "train-lm: best dev perplexity " << format_double(best_ppl, 4) << "\n";
  return kExitOk;
}

struct EvalPplArgs {
  std::string model, vocab, input, pos, pos_vocab, out;
};

int run_eval_ppl(const EvalPplArgs& a) {
  require_inputs({a.model, a.vocab, a.input});
  const LanguageModel model = LanguageModel::load(a.model);
  const Vocabulary vocab = Vocabulary::load(a.vocab);
  const auto corpus = load_token_lines(a.input);
  if (corpus.empty()) throw FormatError("empty corpus: " + a.input);

  LMDataset data;
  if (model.config().has_pos()) {
    if (a.pos.empty() || a.pos_vocab.empty()) {
      throw ContractError("eval-ppl: model has a syntax channel; --pos and --pos-vocab required");
    }
    require_inputs({a.pos, a.pos_vocab});
    PosVocab pv = PosVocab::load(a.pos_vocab);
    const auto tags = load_pos_file(a.pos, corpus);
    data = encode_lm_corpus(vocab, corpus, &tags, &pv, false);
  } else {
    data = encode_lm_corpus(vocab, corpus);
  }
  const PerplexityReport report = model.perplexity(data);

  std::vector<std::string> lines = {
      "tokens\t" + std::to_string(report.tokens),
      "total_nll\t" + format_double(report.total_nll, 6),
      "perplexity\t" + format_double(report.perplexity, 6),
  };
  write_lines(a.out, lines);

  Manifest m;
  m.subcommand = "eval-ppl";
  m.threads = worker_count();
  m.inputs = {a.model, a.vocab, a.input};
  if (!a.pos.empty()) m.inputs.push_back(a.pos);
  m.outputs = {a.out};
  m.write(a.out + ".manifest.jsonl");
  std::cout << "eval-ppl: perplexity " << format_double(report.perplexity, 4)
            << " over " << report.tokens << " tokens\n";
  return kExitOk;
}

struct EvalBleuArgs {
  std::string hyp, ref, out;
};

int run_eval_bleu(const EvalBleuArgs& a) {
  require_inputs({a.hyp, a.ref});
  const auto hyps = load_token_lines(a.hyp);
  const auto refs = load_token_lines(a.ref);
  const BleuBreakdown breakdown = bleu_breakdown(hyps, refs);

  std::vector<std::string> lines = {
      "bleu\t" + format_double(breakdown.score, 4),
      "brevity_penalty\t" + format_double(breakdown.brevity_penalty, 6),
      "hyp_len\t" + std::to_string(breakdown.hyp_len),
      "ref_len\t" + std::to_string(breakdown.ref_len),
  };
  for (int n = 0; n < 4; ++n) {
    lines.push_back("p" + std::to_string(n + 1) + "\t" +
                    format_double(breakdown.precisions[n], 6));
  }
  write_lines(a.out, lines);

  Manifest m;
  m.subcommand = "eval-bleu";
  m.threads = worker_count();
  m.inputs = {a.hyp, a.ref};
  m.outputs = {a.out};
  m.write(a.out + ".manifest.jsonl");
  std::cout << "eval-bleu: " << format_double(breakdown.score, 2) << "\n";
  return kExitOk;
}

struct StatsArgs {
  std::string input, out, ngram_out;
};

int run_stats(const StatsArgs& a) {
  require_inputs({a.input});
  const auto corpus = load_token_lines(a.input);
  const CorpusStats stats = corpus_stats(corpus);

  std::vector<std::string> lines = {
      "utterances\t" + std::to_string(stats.utterances),
      "tokens\t" + std::to_string(stats.tokens),
      "segments\t" + std::to_string(stats.segments),
      "avg_segment\t" + format_double(stats.avg_segment_length, 4),
      "avg_switches\t" + format_double(stats.avg_switches, 4),
      "empty\t" + std::string(stats.empty ? "1" : "0"),
  };

  Manifest m;
  m.subcommand = "stats";
  m.threads = worker_count();
  m.inputs = {a.input};
  m.outputs = {a.out};

  if (!a.ngram_out.empty()) {
    for (std::size_t n = 1; n <= 4; ++n) {
      const NGramHistogram hist = ngram_histogram(corpus, n);
      std::vector<std::string> hl;
      for (const auto& [gram, count] : hist.counts) {
        hl.push_back(join(gram, " ") + "\t" + std::to_string(count));
      }
      const std::string path = a.ngram_out + "." + std::to_string(n) + "gram.tsv";
      write_lines(path, hl);
      m.outputs.push_back(path);
      lines.push_back(std::to_string(n) + "gram_types\t" + std::to_string(hist.counts.size()));
      lines.push_back(std::to_string(n) + "gram_mean\t" + format_double(hist.mean, 4));
      lines.push_back(std::to_string(n) + "gram_median\t" + format_double(hist.median, 4));
      lines.push_back(std::to_string(n) + "gram_skewness\t" + format_double(hist.skewness, 4));
    }
  }
  write_lines(a.out, lines);
  m.write(a.out + ".manifest.jsonl");
  std::cout << "stats: avg segment " << format_double(stats.avg_segment_length, 2)
            << ", avg switches " << format_double(stats.avg_switches, 2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"csforge: code-switching sentence generation and LM augmentation"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value config file (flags win)");

  FixtureGenArgs fixture_args;
  auto* fixture = app.add_subcommand("fixture-gen", "generate a synthetic bilingual fixture");
  fixture->add_option("--out", fixture_args.out, "output stem")->required();
  fixture->add_option("--size", fixture_args.size, "number of examples");
  fixture->add_option("--seed", fixture_args.seed, "rng seed");
  fixture->add_option("--switch-prob", fixture_args.switch_prob, "per-constituent switch probability");
  fixture->add_option("--nouns", fixture_args.nouns, "noun inventory size");
  fixture->add_option("--adjs", fixture_args.adjs, "adjective inventory size");
  fixture->add_option("--verbs", fixture_args.verbs, "verb inventory size");

  AlignArgs align_args;
  auto* align = app.add_subcommand("align", "train the EM aligner and write Pharaoh alignments");
  align->add_option("--input", align_args.input, "parallel TSV")->required();
  align->add_option("--out", align_args.out, "Pharaoh output")->required();
  align->add_option("--iters", align_args.iters, "EM iterations");
  align->add_option("--model", align_args.model, "ibm1|diagonal")
      ->check(CLI::IsMember({"ibm1", "diagonal"}));
  align->add_option("--sym", align_args.sym, "intersection|union")
      ->check(CLI::IsMember({"intersection", "union"}));
  align->add_option("--table-out", align_args.table_out, "write t(f|e) TSV");
  align->add_option("--hesitations", align_args.hesitation_file, "hesitation list file");

  GenerateArgs ec_args;
  auto* ec = app.add_subcommand("ec-generate", "equivalence-constraint generation");
  ec->add_option("--input", ec_args.input, "parallel TSV")->required();
  ec->add_option("--alignments", ec_args.alignments, "Pharaoh alignments")->required();
  ec->add_option("--out", ec_args.out, "generated corpus")->required();
  ec->add_option("--max-outputs", ec_args.max_outputs, "cap per pair (fewest switches first)");
  ec->add_option("--frame", ec_args.frame, "segmentation frame l1|l2")
      ->check(CLI::IsMember({"l1", "l2"}));
  ec->add_option("--hesitations", ec_args.hesitation_file, "hesitation list file");

  GenerateArgs rnd_args;
  auto* rnd = app.add_subcommand("random-generate", "unconstrained random-switch generation");
  rnd->add_option("--input", rnd_args.input, "parallel TSV")->required();
  rnd->add_option("--alignments", rnd_args.alignments, "Pharaoh alignments")->required();
  rnd->add_option("--out", rnd_args.out, "generated corpus")->required();
  rnd->add_option("--count", rnd_args.count, "draws per pair");
  rnd->add_option("--seed", rnd_args.seed, "rng seed");
  rnd->add_option("--hesitations", rnd_args.hesitation_file, "hesitation list file");

  TrainGenArgs tg_args;
  auto* tg = app.add_subcommand("train-gen", "train the code-switching generator");
  tg->add_option("--input", tg_args.input, "training TSV (l1, l2, cs)")->required();
  tg->add_option("--dev", tg_args.dev, "dev TSV for the lr schedule");
  tg->add_option("--out", tg_args.out, "checkpoint path")->required();
  tg->add_option("--mode", tg_args.mode, "pointer-generator|attention")
      ->check(CLI::IsMember({"pointer-generator", "attention"}));
  tg->add_option("--embed-dim", tg_args.embed_dim, "embedding size");
  tg->add_option("--hidden-dim", tg_args.hidden_dim, "hidden size");
  tg->add_option("--vocab-cap", tg_args.vocab_cap, "vocabulary cap");
  tg->add_option("--epochs", tg_args.epochs, "training epochs");
  tg->add_option("--lr", tg_args.lr, "initial learning rate");
  tg->add_option("--clip", tg_args.clip, "gradient clip norm");
  tg->add_flag("--no-halve", tg_args.no_halve, "disable lr halving on dev stalls");
  tg->add_option("--beam-size", tg_args.beam_size, "default decode beam");
  tg->add_option("--max-decode-ratio", tg_args.max_decode_ratio, "decode length cap ratio");
  tg->add_option("--seed", tg_args.seed, "rng seed");
  tg->add_option("--vocab-out", tg_args.vocab_out, "vocabulary output path");
  tg->add_option("--log-out", tg_args.log_out, "training log TSV");
  tg->add_option("--hesitations", tg_args.hesitation_file, "hesitation list file");

  DecodeArgs dec_args;
  auto* dec = app.add_subcommand("decode-nbest", "beam-search N-best decoding");
  dec->add_option("--model", dec_args.model, "generator checkpoint")->required();
  dec->add_option("--vocab", dec_args.vocab, "vocabulary file")->required();
  dec->add_option("--input", dec_args.input, "parallel TSV")->required();
  dec->add_option("--out", dec_args.out, "N-best output")->required();
  dec->add_option("--beam", dec_args.beam, "beam size");
  dec->add_option("--nbest", dec_args.nbest, "hypotheses per example");
  dec->add_flag("--drop-monolingual", dec_args.drop_monolingual,
                "filter hypotheses that never switch");
  dec->add_option("--hesitations", dec_args.hesitation_file, "hesitation list file");

  AssembleArgs asm_args;
  auto* asmb = app.add_subcommand("assemble", "concatenate real and generated corpora");
  asmb->add_option("--real", asm_args.real, "real corpus, one utterance per line")->required();
  asmb->add_option("--nbest", asm_args.nbest, "N-best file")->required();
  asmb->add_option("--out", asm_args.out, "assembled corpus")->required();
  asmb->add_option("--policy", asm_args.policy, "1best|3best")
      ->check(CLI::IsMember({"1best", "3best"}));
  asmb->add_option("--lexicon", asm_args.lexicon, "fixture lexicon for POS tagging the output");

  TrainLmArgs lm_args;
  auto* lm = app.add_subcommand("train-lm", "train the recurrent language model");
  lm->add_option("--input", lm_args.input, "training corpus")->required();
  lm->add_option("--dev", lm_args.dev, "dev corpus for the lr schedule");
  lm->add_option("--pos", lm_args.pos, "POS sidecar for --input");
  lm->add_option("--dev-pos", lm_args.dev_pos, "POS sidecar for --dev");
  lm->add_option("--out", lm_args.out, "checkpoint path")->required();
  lm->add_option("--cell", lm_args.cell, "lstm|rnn")
      ->check(CLI::IsMember({"lstm", "rnn"}));
  lm->add_option("--layers", lm_args.layers, "recurrent layers");
  lm->add_option("--hidden", lm_args.hidden, "hidden size (tied embedding size)");
  lm->add_option("--pos-dim", lm_args.pos_dim, "POS embedding size");
  lm->add_option("--vocab-cap", lm_args.vocab_cap, "vocabulary cap");
  lm->add_option("--unroll", lm_args.unroll, "BPTT unroll length");
  lm->add_option("--epochs", lm_args.epochs, "training epochs");
  lm->add_option("--lr", lm_args.lr, "initial learning rate");
  lm->add_flag("--lr-sweep", lm_args.lr_sweep, "try lr 10 and 20, keep the better dev ppl");
  lm->add_option("--lr-decay", lm_args.lr_decay, "decay factor on dev stalls");
  lm->add_option("--dropout", lm_args.dropout, "dropout probability");
  lm->add_option("--clip", lm_args.clip, "gradient clip norm");
  lm->add_option("--seed", lm_args.seed, "rng seed");
  lm->add_option("--vocab-out", lm_args.vocab_out, "vocabulary output path");
  lm->add_option("--pos-vocab-out", lm_args.pos_vocab_out, "POS vocabulary output path");
  lm->add_option("--log-out", lm_args.log_out, "training log TSV");

  EvalPplArgs ppl_args;
  auto* ppl = app.add_subcommand("eval-ppl", "perplexity of a corpus under an LM");
  ppl->add_option("--model", ppl_args.model, "LM checkpoint")->required();
  ppl->add_option("--vocab", ppl_args.vocab, "vocabulary file")->required();
  ppl->add_option("--input", ppl_args.input, "corpus to score")->required();
  ppl->add_option("--out", ppl_args.out, "report TSV")->required();
  ppl->add_option("--pos", ppl_args.pos, "POS sidecar");
  ppl->add_option("--pos-vocab", ppl_args.pos_vocab, "POS vocabulary file");

  EvalBleuArgs bleu_args;
  auto* bl = app.add_subcommand("eval-bleu", "corpus BLEU of hypotheses vs references");
  bl->add_option("--hyp", bleu_args.hyp, "hypotheses, one per line")->required();
  bl->add_option("--ref", bleu_args.ref, "references, one per line")->required();
  bl->add_option("--out", bleu_args.out, "report TSV")->required();

  StatsArgs stats_args;
  auto* st = app.add_subcommand("stats", "code-switching corpus statistics");
  st->add_option("--input", stats_args.input, "corpus, one utterance per line")->required();
  st->add_option("--out", stats_args.out, "stats TSV")->required();
  st->add_option("--ngram-out", stats_args.ngram_out,
                 "stem for 1..4-gram histogram TSVs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadFlags;
  }

  try {
    if (fixture->parsed()) return run_fixture_gen(fixture_args);
    if (align->parsed()) return run_align(align_args);
    if (ec->parsed()) return run_ec_generate(ec_args);
    if (rnd->parsed()) return run_random_generate(rnd_args);
    if (tg->parsed()) return run_train_gen(tg_args);
    if (dec->parsed()) return run_decode_nbest(dec_args);
    if (asmb->parsed()) return run_assemble(asm_args);
    if (lm->parsed()) return run_train_lm(lm_args);
    if (ppl->parsed()) return run_eval_ppl(ppl_args);
    if (bl->parsed()) return run_eval_bleu(bleu_args);
    if (st->parsed()) return run_stats(stats_args);
  } catch (const IoError& e) {
    std::cerr << "csforge: " << e.what() << "\n";
    return kExitMissingInput;
  } catch (const CheckpointError& e) {
    std::cerr << "csforge: " << e.what() << "\n";
    return kExitBadCheckpoint;
  } catch (const FormatError& e) {
    std::cerr << "csforge: " << e.what() << "\n";
    return kExitBadData;
  } catch (const ContractError& e) {
    std::cerr << "csforge: " << e.what() << "\n";
    return kExitContract;
  } catch (const std::exception& e) {
    std::cerr << "csforge: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
