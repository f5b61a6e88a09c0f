"""
SMILES Corpus
=============

Tokenization, vocabularies, corpus loading and batching for SMILES text files.

Tokens are found by greedy longest match over a fixed table: bracket atoms
(``[...]``) are one token, two-character symbols (Cl, Br, Si, @@, %nn) come
next, everything else is a single character from the accepted set.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from config import MAX_RAW_SMILES_LENGTH
from errors import CorpusReadError, EmptyCorpusError, TokenizeError

logger = logging.getLogger(__name__)

# Reserved ids
PAD_ID = 0
SOS_ID = 1
EOS_ID = 2
UNK_ID = 3
RESERVED_TOKENS: Tuple[str, ...] = ("<pad>", "<sos>", "<eos>", "<unk>")

TWO_CHAR_TOKENS = ("Cl", "Br", "Si", "@@")
SINGLE_CHAR_TOKENS = frozenset(
    "BCNOPSFI"      # organic subset
    "bcnops"        # aromatic atoms
    "()"            # branches
    "=#$:/\\.-+"    # bonds, charges, disconnection
    "0123456789"    # ring closures
    "@*"            # stereo mark, wildcard
)


def split_tokens(smiles: str, max_raw_length: int = MAX_RAW_SMILES_LENGTH) -> List[str]:
    """
    Split a SMILES string into token strings.

    Args:
        smiles: Raw SMILES text (no surrounding whitespace)
        max_raw_length: Longest accepted string in characters

    Returns:
        Token strings, without sentinels
    """
    if not smiles:
        raise TokenizeError(smiles, "empty string")
    if len(smiles) > max_raw_length:
        raise TokenizeError(smiles, f"longer than {max_raw_length} characters")

    tokens = []
    i = 0
    while i < len(smiles):
        char = smiles[i]

        if char == "[":
            close = smiles.find("]", i + 1)
            if close == -1:
                raise TokenizeError(smiles, f"unclosed bracket at position {i}")
            if "[" in smiles[i + 1:close]:
                raise TokenizeError(smiles, f"nested bracket at position {i}")
            tokens.append(smiles[i:close + 1])
            i = close + 1
            continue

        if char == "%":
            ring = smiles[i + 1:i + 3]
            if len(ring) != 2 or not ring.isdigit():
                raise TokenizeError(smiles, f"bad ring closure at position {i}")
            tokens.append(smiles[i:i + 3])
            i += 3
            continue

        pair = smiles[i:i + 2]
        if pair in TWO_CHAR_TOKENS:
            tokens.append(pair)
            i += 2
            continue

        if char not in SINGLE_CHAR_TOKENS:
            raise TokenizeError(smiles, f"unexpected character {char!r} at position {i}")
        tokens.append(char)
        i += 1

    return tokens


@dataclass(frozen=True)
class TokenSequence:
    """Token ids of one molecule, framed by SOS and EOS."""
    tokens: Tuple[int, ...]

    def __post_init__(self):
        if len(self.tokens) < 2 or self.tokens[0] != SOS_ID or self.tokens[-1] != EOS_ID:
            raise ValueError(f"sequence must start with SOS and end with EOS: {self.tokens}")
        interior = self.tokens[1:-1]
        if SOS_ID in interior or EOS_ID in interior:
            raise ValueError(f"sentinel inside sequence: {self.tokens}")

    def __len__(self) -> int:
        return len(self.tokens)


class Vocabulary:
    """Bidirectional token-string/id map with four reserved ids."""

    def __init__(self, tokens: Iterable[str]):
        # Sorted so rebuilding from the same lines gives identical ids
        self.tokens: List[str] = list(RESERVED_TOKENS) + sorted(set(tokens) - set(RESERVED_TOKENS))
        self.ids: Dict[str, int] = {token: i for i, token in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.tokens == other.tokens

    def id_of(self, token: str) -> int:
        return self.ids.get(token, UNK_ID)

    def token_of(self, token_id: int) -> str:
        return self.tokens[token_id]

    def to_dict(self) -> Dict[str, List[str]]:
        return {"tokens": self.tokens[len(RESERVED_TOKENS):]}

    @classmethod
    def from_dict(cls, data: Dict[str, List[str]]) -> "Vocabulary":
        return cls(data["tokens"])

    def save(self, path: str):
        """Write the vocabulary sidecar as JSON."""
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2)

    @classmethod
    def load(cls, path: str) -> "Vocabulary":
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


def tokenize(smiles: str, vocab: Vocabulary,
             max_raw_length: int = MAX_RAW_SMILES_LENGTH) -> TokenSequence:
    """
    Tokenize one SMILES string into a framed id sequence.

    Args:
        smiles: Raw SMILES text
        vocab: Vocabulary; unseen tokens map to UNK
        max_raw_length: Longest accepted string in characters

    Returns:
        TokenSequence starting with SOS and ending with EOS
    """
    ids = [vocab.id_of(token) for token in split_tokens(smiles, max_raw_length)]
    return TokenSequence(tuple([SOS_ID] + ids + [EOS_ID]))


def detokenize(seq: Sequence[int], vocab: Vocabulary) -> str:
    """
    Join token strings back into SMILES text.

    Sentinels and padding are stripped; decoding stops at the first EOS after
    position 0 so raw decoder output can be passed directly.
    """
    tokens = seq.tokens if isinstance(seq, TokenSequence) else seq
    parts = []
    for token_id in tokens:
        token_id = int(token_id)
        if token_id == EOS_ID:
            break
        if token_id in (PAD_ID, SOS_ID):
            continue
        parts.append(vocab.token_of(token_id))
    return "".join(parts)


def build_vocab(lines: Iterable[str]) -> Vocabulary:
    """
    Build a vocabulary from every token seen in the tokenizable lines.

    Args:
        lines: SMILES strings; untokenizable ones are skipped

    Returns:
        Vocabulary with reserved ids 0-3 and observed tokens sorted from id 4
    """
    seen = set()
    usable = 0
    for line in lines:
        try:
            seen.update(split_tokens(line))
        except TokenizeError:
            continue
        usable += 1

    if usable == 0:
        raise EmptyCorpusError("no tokenizable lines to build a vocabulary from")

    return Vocabulary(seen)


@dataclass
class LoadReport:
    """Line accounting for one corpus load."""
    lines: int = 0
    accepted: int = 0
    rejected: int = 0
    duplicates: int = 0
    length_filtered: int = 0
    unknown_tokens: int = 0  # accepted lines holding tokens outside the vocabulary

    def as_lines(self) -> List[str]:
        """Render as key:value lines."""
        return [
            f"lines: {self.lines}",
            f"accepted: {self.accepted}",
            f"rejected: {self.rejected}",
            f"duplicates: {self.duplicates}",
            f"length_filtered: {self.length_filtered}",
            f"unknown_tokens: {self.unknown_tokens}",
        ]


@dataclass
class Batch:
    """Padded mini-batch of token sequences."""
    ids: np.ndarray  # (B, T) int, PAD-filled
    mask: np.ndarray  # (B, T) bool, True on real tokens
    smiles: List[str]
    indices: List[int]  # Positions in the corpus

    @property
    def size(self) -> int:
        return self.ids.shape[0]


def pad_sequences(sequences: Sequence[TokenSequence]) -> Tuple[np.ndarray, np.ndarray]:
    """Stack sequences into a PAD-filled id matrix and its mask."""
    width = max(len(seq) for seq in sequences)
    ids = np.full((len(sequences), width), PAD_ID, dtype=np.int64)
    for row, seq in enumerate(sequences):
        ids[row, :len(seq)] = seq.tokens
    return ids, ids != PAD_ID


@dataclass(frozen=True)
class Corpus:
    """Deduplicated, length-filtered, tokenized SMILES collection."""
    sequences: Tuple[TokenSequence, ...]
    smiles: Tuple[str, ...]
    max_len: int
    source: str
    vocab: Vocabulary
    report: LoadReport = field(default_factory=LoadReport)

    def __len__(self) -> int:
        return len(self.sequences)

    def batch(self, indices: Sequence[int]) -> Batch:
        """Build a padded batch from corpus positions."""
        ids, mask = pad_sequences([self.sequences[i] for i in indices])
        return Batch(ids=ids, mask=mask,
                     smiles=[self.smiles[i] for i in indices],
                     indices=list(indices))

    def batches(self, batch_size: int, rng: Optional[np.random.Generator] = None) -> Iterator[Batch]:
        """
        Yield mini-batches covering the corpus once.

        Args:
            batch_size: Maximum molecules per batch
            rng: Shuffles the order when given; corpus order otherwise
        """
        order = np.arange(len(self.sequences))
        if rng is not None:
            order = rng.permutation(order)
        for start in range(0, len(order), batch_size):
            yield self.batch([int(i) for i in order[start:start + batch_size]])


def _read_lines(path: str) -> List[str]:
    """Read non-blank, non-comment lines of a SMILES file."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            lines = [line.strip() for line in f]
    except UnicodeDecodeError as e:
        raise CorpusReadError(f"{path} is not UTF-8 text: {e.reason} at byte {e.start}") from e
    return [line for line in lines if line and not line.startswith("#")]


def load_corpus(path: str, vocab: Vocabulary, max_len: int) -> Corpus:
    """
    Load a one-SMILES-per-line file into a corpus.

    Args:
        path: UTF-8 text file; '#' lines are comments
        vocab: Vocabulary used for ids
        max_len: Longest accepted token sequence, sentinels included

    Returns:
        Corpus with its load report
    """
    lines = _read_lines(path)
    report = LoadReport(lines=len(lines))
    seen = set()
    sequences: List[TokenSequence] = []
    kept: List[str] = []

    for line in lines:
        try:
            seq = tokenize(line, vocab, max_raw_length=max(MAX_RAW_SMILES_LENGTH, len(line)))
        except TokenizeError as e:
            logger.debug(f"Rejected line: {e}")
            report.rejected += 1
            continue

        if len(seq) > max_len or len(line) > MAX_RAW_SMILES_LENGTH:
            report.length_filtered += 1
            continue

        if line in seen:
            report.duplicates += 1
            continue

        seen.add(line)
        if UNK_ID in seq.tokens:
            report.unknown_tokens += 1
        sequences.append(seq)
        kept.append(line)

    report.accepted = len(sequences)
    if not sequences:
        raise EmptyCorpusError(f"no usable SMILES lines in {path}")

    logger.info(f"Loaded {report.accepted} molecules from {path} "
                f"({report.rejected} rejected, {report.duplicates} duplicates, "
                f"{report.length_filtered} too long)")
    if report.unknown_tokens:
        logger.warning(f"{report.unknown_tokens} molecules in {path} contain tokens outside the vocabulary "
                       f"and were mapped to <unk>")

    return Corpus(sequences=tuple(sequences), smiles=tuple(kept), max_len=max_len,
                  source=str(path), vocab=vocab, report=report)


def prepare_corpus(path: str, max_len: int) -> Corpus:
    """Build the vocabulary from a file and load the file with it."""
    lines = _read_lines(path)
    usable = []
    for line in lines:
        try:
            tokens = split_tokens(line)
        except TokenizeError:
            continue
        if len(tokens) + 2 <= max_len:
            usable.append(line)
    if not usable:
        raise EmptyCorpusError(f"no usable SMILES lines in {path}")
    return load_corpus(path, build_vocab(usable), max_len)


def vocab_sidecar_path(corpus_path: str) -> str:
    return f"{corpus_path}.vocab.json"


def write_corpus(corpus: Corpus, path: str):
    """Write corpus SMILES one per line plus the vocabulary sidecar."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for smiles in corpus.smiles:
            f.write(smiles + "\n")
    corpus.vocab.save(vocab_sidecar_path(path))


def open_corpus(path: str, max_len: int, vocab: Optional[Vocabulary] = None) -> Corpus:
    """
    Load a corpus file, reusing its vocabulary sidecar when one exists.

    Args:
        path: Corpus file
        max_len: Longest accepted token sequence
        vocab: Explicit vocabulary (e.g. from a checkpoint); wins over the sidecar
    """
    if vocab is None:
        sidecar = vocab_sidecar_path(path)
        if Path(sidecar).exists():
            vocab = Vocabulary.load(sidecar)
    if vocab is None:
        return prepare_corpus(path, max_len)
    return load_corpus(path, vocab, max_len)
