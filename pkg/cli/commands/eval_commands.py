"""
Eval Commands
=============

Checkpoint evaluation on a corpus and single-molecule reconstruction.
"""

import csv
import logging
from pathlib import Path

from errors import CompatibilityError, ConfigurationError
from models.corpus import UNK_ID, Corpus, LoadReport, Vocabulary, load_corpus, tokenize, vocab_sidecar_path
from models.train_config import TrainConfig
from services.checkpoint_service import Checkpoint, load_checkpoint
from services.training_service import evaluate

logger = logging.getLogger(__name__)

MOLECULE_COLUMNS = ("smiles", "reconstruction", "fidelity", "trash_zero_prob", "similarity")


def open_for_checkpoint(path: str, checkpoint: Checkpoint, max_len: int) -> Corpus:
    """
    Load a corpus for a checkpoint.

    A vocabulary sidecar next to the file is used when present so a mismatch
    with the checkpoint is reported; otherwise the checkpoint vocabulary is used.
    """
    sidecar = Path(vocab_sidecar_path(path))
    vocab = Vocabulary.load(str(sidecar)) if sidecar.exists() else checkpoint.vocab
    return load_corpus(path, vocab, max_len)


def write_molecule_csv(rows, path: str):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=MOLECULE_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)


def run_eval(args) -> int:
    """Handle ``qsmiles eval``."""
    checkpoint = load_checkpoint(args.checkpoint)
    cfg = TrainConfig.from_dict(checkpoint.config)
    path = args.held_out or args.corpus or cfg.corpus
    if not path:
        raise ConfigurationError("checkpoint does not record a corpus; pass --corpus or --held-out")

    corpus = open_for_checkpoint(path, checkpoint, cfg.max_len)
    result = evaluate(checkpoint, corpus, args.batch_size)

    print(f"corpus: {path}")
    for line in result.as_lines():
        print(line)
    if args.output:
        write_molecule_csv(result.molecule_rows(), args.output)
        print(f"output: {args.output}")
    return 0


def run_reconstruct(args) -> int:
    """Handle ``qsmiles reconstruct``."""
    smiles = args.smiles.strip()
    if not smiles:
        args.parser.error("--smiles must not be empty")

    checkpoint = load_checkpoint(args.checkpoint)
    cfg = TrainConfig.from_dict(checkpoint.config)
    sequence = tokenize(smiles, checkpoint.vocab)
    if UNK_ID in sequence.tokens:
        raise CompatibilityError(f"{smiles!r} uses tokens outside the checkpoint vocabulary")

    corpus = Corpus(sequences=(sequence,), smiles=(smiles,), max_len=max(cfg.max_len, len(sequence)),
                    source="<command line>", vocab=checkpoint.vocab, report=LoadReport(lines=1, accepted=1))
    row = evaluate(checkpoint, corpus, batch_size=1).molecule_rows()[0]

    print(f"original: {row['smiles']}")
    print(f"reconstruction: {row['reconstruction']}")
    print(f"fidelity: {row['fidelity']:.6f}")
    print(f"similarity: {row['similarity']:.6f}")
    print(f"trash_zero_prob: {row['trash_zero_prob']:.6f}")
    return 0


def setup(subparsers):
    """Register the eval and reconstruct subcommands."""
    parser = subparsers.add_parser(
        "eval",
        help="Evaluate a checkpoint",
        description="Greedy, alpha=0 reconstruction of a corpus with aggregate metrics.",
    )
    parser.add_argument("--checkpoint", required=True, help="checkpoint.json from a training run")
    parser.add_argument("--corpus", help="Corpus to evaluate (default: the training corpus)")
    parser.add_argument("--held-out", help="Held-out SMILES file; takes precedence over --corpus")
    parser.add_argument("--batch-size", type=int, help="Evaluation batch size (default: the run's)")
    parser.add_argument("--output", help="Write per-molecule reconstructions to this CSV")
    parser.set_defaults(handler=run_eval)

    parser = subparsers.add_parser(
        "reconstruct",
        help="Reconstruct one molecule",
        description="Encode and decode one SMILES string with a checkpoint.",
    )
    parser.add_argument("--checkpoint", required=True, help="checkpoint.json from a training run")
    parser.add_argument("--smiles", required=True, help="SMILES string to reconstruct")
    parser.set_defaults(handler=run_reconstruct, parser=parser)
