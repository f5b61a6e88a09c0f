"""
Error types
===========

Exception hierarchy shared by every package. Each kind also derives from the
closest builtin so callers can catch either.
"""

from typing import List, Optional


class QsmilesError(Exception):
    """Base class for all qsmiles errors."""


class ConfigurationError(QsmilesError, ValueError):
    """Invalid configuration value or inconsistent configuration."""


class TokenizeError(QsmilesError, ValueError):
    """A SMILES string was rejected by the tokenizer."""

    def __init__(self, smiles: str, reason: str):
        super().__init__(f"cannot tokenize {smiles!r}: {reason}")
        self.smiles = smiles
        self.reason = reason


class EmptyCorpusError(QsmilesError, ValueError):
    """No usable lines were found."""


class CorpusReadError(QsmilesError, ValueError):
    """A corpus file could not be decoded as UTF-8 text."""


class EmptyMetricsError(QsmilesError, ValueError):
    """A metrics file has no rows to plot."""


class ShapeError(QsmilesError, ValueError):
    """Array shapes do not fit together."""


class QubitIndexError(QsmilesError, IndexError):
    """Qubit index out of range, duplicated, or control equal to target."""


class DegenerateInputError(QsmilesError, ValueError):
    """Input has no usable positions (all padding, fully masked memory)."""


class DegenerateResetError(QsmilesError, ValueError):
    """Trash reset hit a zero-probability subspace."""


class ContractViolationError(QsmilesError, ValueError):
    """Caller broke an operation's precondition."""


class CompatibilityError(QsmilesError, ValueError):
    """Checkpoint and corpus disagree (vocabulary, dimensions)."""


class CheckpointError(QsmilesError, ValueError):
    """Checkpoint file is corrupt, truncated, or has the wrong format version."""


class NonFiniteLossError(QsmilesError, RuntimeError):
    """Training produced a NaN or infinite loss."""

    def __init__(self, message: str, batch_indices: Optional[List[int]] = None,
                 epoch: int = 0, step: int = 0):
        super().__init__(message)
        self.batch_indices = list(batch_indices or [])
        self.epoch = epoch
        self.step = step


# Errors caused by user input; the CLI maps these to exit code 1
USER_ERRORS = (
    ConfigurationError,
    TokenizeError,
    EmptyCorpusError,
    CorpusReadError,
    EmptyMetricsError,
    CompatibilityError,
    CheckpointError,
    FileNotFoundError,
    PermissionError,
    IsADirectoryError,
)
