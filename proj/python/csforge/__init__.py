"""Code-switching sentence generation and LM augmentation toolkit."""

from ._csforge import (
    Aligner,
    CheckpointError,
    ContractError,
    FormatError,
    Generator,
    IoError,
    LanguageModel,
    Vocabulary,
    bleu,
    corpus_stats,
    equivalence_generate,
    generate_fixture,
    language_id,
    ngram_histogram,
    random_switch_generate,
    symmetrize,
    tokenize_and_clean,
)

__all__ = [
    "Aligner",
    "CheckpointError",
    "ContractError",
    "FormatError",
    "Generator",
    "IoError",
    "LanguageModel",
    "Vocabulary",
    "bleu",
    "corpus_stats",
    "equivalence_generate",
    "generate_fixture",
    "language_id",
    "ngram_histogram",
    "random_switch_generate",
    "symmetrize",
    "tokenize_and_clean",
]
