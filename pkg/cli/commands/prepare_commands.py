"""
Prepare Commands
================

Corpus preparation: tokenize, deduplicate and length-filter a SMILES file,
then write the cleaned corpus with its vocabulary sidecar.
"""

import logging

from config import DEFAULT_MAX_TOKENS
from logging_setup import safe_log
from models.corpus import prepare_corpus, vocab_sidecar_path, write_corpus

logger = logging.getLogger(__name__)


def run_prepare(args) -> int:
    """Handle ``qsmiles prepare``."""
    corpus = prepare_corpus(args.input, args.max_len)
    write_corpus(corpus, args.output)

    for line in corpus.report.as_lines():
        print(line)
    print(f"vocab_size: {len(corpus.vocab)}")
    print(f"output: {args.output}")
    print(f"vocab: {vocab_sidecar_path(args.output)}")
    safe_log(logger, "info", f"✅ Prepared {len(corpus)} molecules into {args.output}")
    return 0


def setup(subparsers):
    """Register the prepare subcommand."""
    parser = subparsers.add_parser(
        "prepare",
        help="Clean a SMILES file and build its vocabulary",
        description="Tokenize, deduplicate and length-filter a one-SMILES-per-line file.",
    )
    parser.add_argument("--input", required=True, help="Raw SMILES file, one molecule per line")
    parser.add_argument("--output", required=True, help="Cleaned corpus file (vocabulary goes to <output>.vocab.json)")
    parser.add_argument("--max-len", type=int, default=DEFAULT_MAX_TOKENS,
                        help=f"Longest token sequence kept, SOS/EOS included (default {DEFAULT_MAX_TOKENS})")
    parser.set_defaults(handler=run_prepare)
