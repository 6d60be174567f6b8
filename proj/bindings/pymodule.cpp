// Python bindings for the main csforge operations. Kept coarse-grained:
// corpus utilities, metrics, the aligner, the constraint generators, the
// fixture generator, and train/decode/score entry points for both models.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "csforge/aligner.hpp"
#include "csforge/corpus.hpp"
#include "csforge/fixture.hpp"
#include "csforge/generator.hpp"
#include "csforge/lm.hpp"
#include "csforge/metrics.hpp"
#include "csforge/seq2seq.hpp"

namespace py = pybind11;
using namespace csforge;

namespace {

Alignment links_to_alignment(const std::vector<std::pair<std::size_t, std::size_t>>& links) {
  Alignment a;
  a.links.insert(links.begin(), links.end());
  return a;
}

std::vector<std::pair<std::size_t, std::size_t>> alignment_to_links(const Alignment& a) {
  return {a.links.begin(), a.links.end()};
}

ParallelExample make_example(std::vector<std::string> l1, std::vector<std::string> l2,
                             std::vector<std::string> cs) {
  ParallelExample ex;
  ex.l1_tokens = std::move(l1);
  ex.l2_tokens = std::move(l2);
  ex.cs_tokens = std::move(cs);
  return ex;
}

}  // namespace

PYBIND11_MODULE(_csforge, m) {
  m.doc() = "code-switching sentence generation and LM augmentation toolkit";

  py::register_exception<IoError>(m, "IoError");
  py::register_exception<FormatError>(m, "FormatError");
  py::register_exception<CheckpointError>(m, "CheckpointError");
  py::register_exception<ContractError>(m, "ContractError");

  m.def("tokenize_and_clean",
        [](const std::string& line, std::optional<std::vector<std::string>> hes) {
          return tokenize_and_clean(line, hes.value_or(default_hesitations()));
        },
        py::arg("line"), py::arg("hesitations") = py::none());

  m.def("language_id", [](const std::string& token) {
    switch (language_id(token)) {
      case Lang::L1: return "L1";
      case Lang::L2: return "L2";
      default: return "OTHER";
    }
  });

  py::class_<Vocabulary, std::shared_ptr<Vocabulary>>(m, "Vocabulary")
      .def_static("build",
                  [](const TokenLines& corpus, std::size_t cap, bool with_sep) {
                    return Vocabulary::build(
                        corpus, cap,
                        with_sep ? std::vector<std::string>{kSepToken}
                                 : std::vector<std::string>{});
                  },
                  py::arg("corpus"), py::arg("cap") = 50000,
                  py::arg("with_sep") = false)
      .def_static("load", &Vocabulary::load)
      .def("save", &Vocabulary::save)
      .def("id_of", [](const Vocabulary& v, const std::string& t) { return v.id_of(t); })
      .def("token_of", &Vocabulary::token_of)
      .def("__len__", &Vocabulary::size)
      .def("__contains__",
           [](const Vocabulary& v, const std::string& t) { return v.contains(t); });

  m.def("bleu", &bleu, py::arg("hypotheses"), py::arg("references"));

  m.def("corpus_stats", [](const TokenLines& corpus) {
    const CorpusStats s = corpus_stats(corpus);
    py::dict out;
    out["utterances"] = s.utterances;
    out["tokens"] = s.tokens;
    out["segments"] = s.segments;
    out["avg_segment_length"] = s.avg_segment_length;
    out["avg_switches"] = s.avg_switches;
    out["empty"] = s.empty;
    return out;
  });

  m.def("ngram_histogram", [](const TokenLines& corpus, std::size_t n) {
    const NGramHistogram h = ngram_histogram(corpus, n);
    py::dict counts;
    for (const auto& [gram, count] : h.counts) counts[py::tuple(py::cast(gram))] = count;
    py::dict out;
    out["counts"] = counts;
    out["mean"] = h.mean;
    out["median"] = h.median;
    out["skewness"] = h.skewness;
    out["total"] = h.total;
    return out;
  });

  py::class_<AlignerResult>(m, "Aligner")
      .def_static("train",
                  [](const std::vector<std::pair<std::vector<std::string>,
                                                 std::vector<std::string>>>& pairs,
                     std::size_t iters, const std::string& model) {
                    std::vector<SentencePair> corpus;
                    for (const auto& [src, tgt] : pairs) corpus.push_back({src, tgt});
                    return train_aligner(corpus, iters,
                                         model == "diagonal" ? AlignModel::Diagonal
                                                             : AlignModel::Ibm1);
                  },
                  py::arg("pairs"), py::arg("iters") = 5, py::arg("model") = "ibm1")
      .def_property_readonly("log_likelihoods",
                             [](const AlignerResult& r) { return r.log_likelihoods; })
      .def_property_readonly("tension", [](const AlignerResult& r) { return r.lambda; })
      .def("align", [](const AlignerResult& r, const std::vector<std::string>& src,
                       const std::vector<std::string>& tgt) {
        return alignment_to_links(viterbi_align({src, tgt}, r));
      });

  m.def("symmetrize",
        [](const std::vector<std::pair<std::size_t, std::size_t>>& fwd,
           const std::vector<std::pair<std::size_t, std::size_t>>& rev,
           const std::string& method) {
          return alignment_to_links(symmetrize(
              links_to_alignment(fwd), links_to_alignment(rev),
              method == "union" ? SymMethod::Union : SymMethod::Intersection));
        },
        py::arg("fwd"), py::arg("rev"), py::arg("method") = "intersection");

  m.def("equivalence_generate",
        [](const std::vector<std::string>& l1, const std::vector<std::string>& l2,
           const std::vector<std::pair<std::size_t, std::size_t>>& links,
           std::size_t max_outputs) {
          std::vector<std::vector<std::string>> out;
          for (const auto& cand : equivalence_generate(make_example(l1, l2, {}),
                                                       links_to_alignment(links),
                                                       max_outputs)) {
            out.push_back(cand.tokens);
          }
          return out;
        },
        py::arg("l1"), py::arg("l2"), py::arg("links"), py::arg("max_outputs") = 16);

  m.def("random_switch_generate",
        [](const std::vector<std::string>& l1, const std::vector<std::string>& l2,
           const std::vector<std::pair<std::size_t, std::size_t>>& links,
           std::size_t count, std::uint64_t seed) {
          std::vector<std::vector<std::string>> out;
          for (const auto& cand : random_switch_generate(make_example(l1, l2, {}),
                                                         links_to_alignment(links),
                                                         count, seed)) {
            out.push_back(cand.tokens);
          }
          return out;
        },
        py::arg("l1"), py::arg("l2"), py::arg("links"), py::arg("count") = 3,
        py::arg("seed") = 1);

  m.def("generate_fixture",
        [](const std::string& stem, std::size_t size, std::uint64_t seed,
           double switch_prob) {
          ToyGrammar grammar = ToyGrammar::standard(seed);
          grammar.switch_prob = switch_prob;
          write_fixture(stem, grammar, generate_fixture(grammar, size));
        },
        py::arg("stem"), py::arg("size"), py::arg("seed") = 1,
        py::arg("switch_prob") = 0.35);

  py::class_<Seq2SeqModel, std::shared_ptr<Seq2SeqModel>>(m, "Generator")
      .def_static(
          "train",
          [](const std::vector<std::tuple<std::vector<std::string>,
                                          std::vector<std::string>,
                                          std::vector<std::string>>>& triples,
             std::size_t hidden, std::size_t epochs, double lr,
             const std::string& mode, std::size_t vocab_cap, std::uint64_t seed) {
            std::vector<ParallelExample> examples;
            TokenLines streams;
            for (const auto& [l1, l2, cs] : triples) {
              examples.push_back(make_example(l1, l2, cs));
              streams.push_back(l1);
              streams.push_back(l2);
              streams.push_back(cs);
            }
            auto vocab = std::make_shared<Vocabulary>(
                Vocabulary::build(streams, vocab_cap, {kSepToken}));
            Seq2SeqConfig cfg;
            cfg.vocab_size = vocab->size();
            cfg.embed_dim = hidden;
            cfg.hidden_dim = hidden;
            cfg.mode = mode == "attention" ? Seq2SeqMode::AttentionOnly
                                           : Seq2SeqMode::PointerGenerator;
            cfg.seed = seed;
            auto model = std::make_shared<Seq2SeqModel>(cfg);
            GenTrainConfig tcfg;
            tcfg.epochs = epochs;
            tcfg.lr = lr;
            tcfg.seed = seed;
            std::vector<EncodedExample> encoded;
            for (const auto& ex : examples) encoded.push_back(encode_example(ex, *vocab));
            train_generator(*model, encoded, nullptr, tcfg);
            return py::make_tuple(model, vocab);
          },
          py::arg("triples"), py::arg("hidden") = 32, py::arg("epochs") = 5,
          py::arg("lr") = 1.0, py::arg("mode") = "pointer-generator",
          py::arg("vocab_cap") = 50000, py::arg("seed") = 1)
      .def_static("load", [](const std::string& path) {
        return std::make_shared<Seq2SeqModel>(Seq2SeqModel::load(path));
      })
      .def("save", &Seq2SeqModel::save)
      .def("decode_nbest",
           [](const Seq2SeqModel& model, const Vocabulary& vocab,
              const std::vector<std::string>& l1, const std::vector<std::string>& l2,
              std::size_t beam, std::size_t nbest,
              std::optional<double> forced_p_gen) {
             const EncodedExample ex = encode_example(make_example(l1, l2, {}), vocab);
             std::vector<std::pair<double, std::vector<std::string>>> out;
             for (const auto& hyp : model.beam_search(ex, beam, nbest, forced_p_gen)) {
               out.emplace_back(hyp.logprob, detokenize_hypothesis(hyp, vocab, ex));
             }
             return out;
           },
           py::arg("vocab"), py::arg("l1"), py::arg("l2"), py::arg("beam") = 5,
           py::arg("nbest") = 1, py::arg("forced_p_gen") = py::none());

  py::class_<LanguageModel, std::shared_ptr<LanguageModel>>(m, "LanguageModel")
      .def_static(
          "train",
          [](const TokenLines& corpus, std::size_t hidden, std::size_t epochs,
             double lr, std::size_t unroll, double dropout, std::size_t vocab_cap,
             std::uint64_t seed) {
            auto vocab = std::make_shared<Vocabulary>(Vocabulary::build(corpus, vocab_cap));
            LMConfig cfg;
            cfg.vocab_size = vocab->size();
            cfg.hidden = hidden;
            cfg.pos_embed_dim = 0;
            cfg.bptt_unroll = unroll;
            cfg.lr_init = lr;
            cfg.dropout = dropout;
            cfg.seed = seed;
            auto model = std::make_shared<LanguageModel>(cfg);
            const LMDataset data = encode_lm_corpus(*vocab, corpus);
            train_lm(*model, data, nullptr, epochs);
            return py::make_tuple(model, vocab);
          },
          py::arg("corpus"), py::arg("hidden") = 32, py::arg("epochs") = 5,
          py::arg("lr") = 5.0, py::arg("unroll") = 35, py::arg("dropout") = 0.0,
          py::arg("vocab_cap") = 50000, py::arg("seed") = 1)
      .def_static("load", [](const std::string& path) {
        return std::make_shared<LanguageModel>(LanguageModel::load(path));
      })
      .def("save", &LanguageModel::save)
      .def("perplexity",
           [](const LanguageModel& model, const Vocabulary& vocab,
              const TokenLines& corpus) {
             const PerplexityReport r = model.perplexity(encode_lm_corpus(vocab, corpus));
             py::dict out;
             out["tokens"] = r.tokens;
             out["total_nll"] = r.total_nll;
             out["perplexity"] = r.perplexity;
             return out;
           },
           py::arg("vocab"), py::arg("corpus"));
}
