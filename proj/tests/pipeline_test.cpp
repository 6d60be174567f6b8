// End-to-end pipeline exercise through the installed CLI binary:
// fixture-gen -> align -> ec-generate / random-generate -> train-gen ->
// decode-nbest -> assemble -> train-lm -> eval-ppl -> eval-bleu -> stats.
// Small sizes throughout; checks wiring, exit codes and determinism.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "csforge/util.hpp"

namespace fs = std::filesystem;
using csforge::read_file;

namespace {

std::string g_cli;
int g_failures = 0;

void check(bool ok, const std::string& what) {
  std::cout << (ok ? "[ok] " : "[FAIL] ") << what << "\n";
  if (!ok) ++g_failures;
}

int run(const std::string& args, bool expect_success = true) {
  const std::string cmd = g_cli + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  const int code = WEXITSTATUS(status);
  if (expect_success) check(code == 0, "exit 0: " + args.substr(0, 60));
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: pipeline_test <path-to-csforge-cli>\n";
    return 2;
  }
  g_cli = argv[1];
  const fs::path dir = fs::temp_directory_path() / "csforge_pipeline";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string d = dir.string() + "/";

  // fixture
  run("fixture-gen --out " + d + "fx --size 120 --seed 11");
  check(fs::exists(d + "fx.tsv"), "fixture tsv exists");
  check(fs::exists(d + "fx.manifest.jsonl"), "manifest written");

  // determinism: identical manifests give byte-identical outputs
  run("fixture-gen --out " + d + "fx2 --size 120 --seed 11");
  check(read_file(d + "fx.tsv") == read_file(d + "fx2.tsv"),
        "fixture outputs byte-identical across runs");

  // aligner and the two baseline generators
  run("align --input " + d + "fx.tsv --out " + d + "fx.hyp.align --iters 4 "
      "--table-out " + d + "fx.table.tsv");
  run("ec-generate --input " + d + "fx.tsv --alignments " + d +
      "fx.hyp.align --out " + d + "ec.txt --max-outputs 4");
  run("random-generate --input " + d + "fx.tsv --alignments " + d +
      "fx.hyp.align --out " + d + "rnd.txt --count 3 --seed 5");
  check(fs::exists(d + "ec.txt.prov"), "provenance sidecar exists");

  // generator training at toy size
  run("train-gen --input " + d + "fx.tsv --dev " + d + "fx.tsv --out " + d +
      "gen.csfg --mode pointer-generator --embed-dim 16 --hidden-dim 16 "
      "--epochs 2 --lr 0.5 --seed 3 --log-out " + d + "gen.log");
  check(fs::exists(d + "gen.csfg"), "generator checkpoint exists");
  check(fs::exists(d + "gen.csfg.vocab"), "generator vocab exists");

  run("decode-nbest --model " + d + "gen.csfg --vocab " + d +
      "gen.csfg.vocab --input " + d + "fx.tsv --out " + d +
      "nbest.tsv --beam 5 --nbest 3");
  check(fs::exists(d + "nbest.tsv"), "nbest file exists");

  run("assemble --real " + d + "fx.cs.txt --nbest " + d + "nbest.tsv --out " +
      d + "aug.txt --policy 3best --lexicon " + d + "fx.lexicon.tsv");
  check(fs::exists(d + "aug.txt.pos"), "assembled pos sidecar exists");

  // language models with and without the syntax channel
  run("train-lm --input " + d + "fx.cs.txt --dev " + d + "fx.cs.txt --out " + d +
      "lm.csfg --hidden 16 --unroll 8 --epochs 2 --lr 1 --dropout 0.1 --seed 4 "
      "--log-out " + d + "lm.log");
  run("eval-ppl --model " + d + "lm.csfg --vocab " + d + "lm.csfg.vocab "
      "--input " + d + "fx.cs.txt --out " + d + "ppl.tsv");
  check(fs::exists(d + "ppl.tsv"), "perplexity report exists");

  run("train-lm --input " + d + "fx.cs.txt --dev " + d + "fx.cs.txt --pos " + d +
      "fx.cs.pos --dev-pos " + d + "fx.cs.pos --out " + d + "lmpos.csfg "
      "--hidden 16 --pos-dim 4 --unroll 8 --epochs 2 --lr 1 --seed 4");
  run("eval-ppl --model " + d + "lmpos.csfg --vocab " + d + "lmpos.csfg.vocab "
      "--pos " + d + "fx.cs.pos --pos-vocab " + d + "lmpos.csfg.posvocab "
      "--input " + d + "fx.cs.txt --out " + d + "pplpos.tsv");

  // metrics
  run("eval-bleu --hyp " + d + "fx.cs.txt --ref " + d + "fx.cs.txt --out " + d +
      "bleu.tsv");
  check(read_file(d + "bleu.tsv").find("bleu\t100.0000") != std::string::npos,
        "identity BLEU is 100");
  run("stats --input " + d + "fx.cs.txt --out " + d + "stats.tsv --ngram-out " +
      d + "hist");
  check(fs::exists(d + "hist.2gram.tsv"), "bigram histogram exists");

  // training determinism through the CLI surface
  run("train-gen --input " + d + "fx.tsv --out " + d + "det1.csfg "
      "--embed-dim 12 --hidden-dim 12 --epochs 1 --lr 0.5 --seed 9");
  run("train-gen --input " + d + "fx.tsv --out " + d + "det2.csfg "
      "--embed-dim 12 --hidden-dim 12 --epochs 1 --lr 0.5 --seed 9");
  check(read_file(d + "det1.csfg") == read_file(d + "det2.csfg"),
        "checkpoints byte-identical for identical manifests");

  // distinct exit codes
  check(run("stats --input " + d + "no_such_file --out " + d + "x.tsv", false) == 2,
        "missing input exits 2");
  check(run("stats --bogus-flag", false) == 3, "unknown flag exits 3");
  check(run("decode-nbest --model " + d + "fx.tsv --vocab " + d +
            "gen.csfg.vocab --input " + d + "fx.tsv --out " + d + "x.tsv",
            false) == 4,
        "bad checkpoint exits 4");
  check(run("decode-nbest --model " + d + "gen.csfg --vocab " + d +
            "gen.csfg.vocab --input " + d + "fx.tsv --out " + d +
            "x.tsv --beam 2 --nbest 5", false) == 6,
        "nbest > beam exits 6");

  // no subcommand mutates its inputs: fixture files still byte-identical
  check(read_file(d + "fx.tsv") == read_file(d + "fx2.tsv"),
        "inputs unchanged after the full pipeline");

  std::cout << (g_failures == 0 ? "pipeline test passed\n"
                                : "pipeline test FAILED\n");
  return g_failures == 0 ? 0 : 1;
}
