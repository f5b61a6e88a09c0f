"""
Objective
=========

Composite training loss and sequence metrics.

    total = l_fid * L_fidelity + l_ce * L_CE + l_smiles * L_SMILES + l_trash * L_trash

L_SMILES = 1 - mean Levenshtein similarity of greedy decodes. It is an edit
distance over argmax tokens, so it enters the reported total as a constant and
contributes no gradient; the other three terms carry gradients.
"""

from dataclasses import asdict, dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from errors import ConfigurationError, DegenerateInputError, ShapeError
from models.corpus import EOS_ID, PAD_ID
from nn.layers import softmax_cross_entropy
from nn.tensor import Tensor, mul


@dataclass(frozen=True)
class LossWeights:
    fidelity: float = 1.0
    ce: float = 1.0
    smiles: float = 0.5
    trash: float = 0.5

    def __post_init__(self):
        values = asdict(self)
        negative = [name for name, value in values.items() if value < 0]
        if negative:
            raise ConfigurationError(f"loss weights must be non-negative: {negative}")
        if not any(value > 0 for value in values.values()):
            raise ConfigurationError("at least one loss weight must be positive")

    def scaled(self, factor: float) -> "LossWeights":
        return LossWeights(self.fidelity * factor, self.ce * factor, self.smiles * factor, self.trash * factor)


@dataclass
class BatchMetrics:
    """Loss components and figures of merit for one batch or epoch."""
    loss_total: float
    loss_fidelity: float
    loss_ce: float
    loss_smiles: float
    loss_trash: float
    fidelity: float
    similarity: float
    trash_zero_prob: float
    epoch: int = 0
    lr: float = 0.0

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass
class LossComponents:
    """Per-batch loss terms; the tensors are scalars connected to the tape."""
    fidelity_loss: Tensor
    ce: Tensor
    trash_loss: Tensor
    smiles_loss: float
    fidelity: float
    similarity: float
    trash_zero_prob: float


def levenshtein_distance(a: str, b: str) -> int:
    """Unit-cost edit distance (insert, delete, substitute)."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, char_a in enumerate(a, start=1):
        current = [i]
        for j, char_b in enumerate(b, start=1):
            current.append(min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + (char_a != char_b),
            ))
        previous = current
    return previous[-1]


def levenshtein_similarity(a: str, b: str) -> float:
    """1 - d(a, b) / max(|a|, |b|); two empty strings are identical."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein_distance(a, b) / longest


def batch_similarity(predicted: Sequence[str], references: Sequence[str]) -> np.ndarray:
    if len(predicted) != len(references):
        raise ShapeError(f"{len(predicted)} predictions for {len(references)} references")
    return np.array([levenshtein_similarity(p, r) for p, r in zip(predicted, references)])


def smiles_loss(similarities: np.ndarray) -> float:
    return float(1.0 - np.mean(similarities))


def sequence_ce(logits: Tensor, target: np.ndarray) -> Tensor:
    """
    Mean token cross-entropy over non-PAD targets.

    Args:
        logits: (B, S, V) per-step logits; step t predicts target[:, t + 1]
        target: (B, T) token ids starting with SOS, PAD-filled

    Returns:
        Scalar tensor

    Raises:
        DegenerateInputError: no non-PAD target after SOS
    """
    target = np.asarray(target, dtype=np.int64)
    if target.ndim == 1:
        target = target[None, :]
    steps = target.shape[1] - 1
    if logits.ndim != 3 or logits.shape[0] != target.shape[0] or logits.shape[1] < steps:
        raise ShapeError(f"sequence_ce: logits {logits.shape} cannot cover targets {target.shape}")

    labels = target[:, 1:]
    valid = labels != PAD_ID
    count = int(valid.sum())
    if count == 0:
        raise DegenerateInputError("no non-PAD target tokens")

    # PAD rows get a placeholder label and zero weight
    safe = np.where(valid, labels, EOS_ID)
    per_token = softmax_cross_entropy(logits[:, :steps, :], safe)
    return mul(per_token, valid / count).sum()


def total_loss(components: LossComponents, weights: LossWeights) -> Tuple[Tensor, BatchMetrics]:
    """
    Weighted total for backprop plus its metrics row.

    The SMILES term is added as a plain float so it shifts the value but not the
    gradient.
    """
    total = (mul(components.fidelity_loss, weights.fidelity)
             + mul(components.ce, weights.ce)
             + mul(components.trash_loss, weights.trash)
             + weights.smiles * components.smiles_loss)

    metrics = BatchMetrics(
        loss_total=float(total.data),
        loss_fidelity=float(components.fidelity_loss.data),
        loss_ce=float(components.ce.data),
        loss_smiles=float(components.smiles_loss),
        loss_trash=float(components.trash_loss.data),
        fidelity=float(components.fidelity),
        similarity=float(components.similarity),
        trash_zero_prob=float(components.trash_zero_prob),
    )
    return total, metrics


def weighted_total(metrics: BatchMetrics, weights: LossWeights) -> float:
    """Recompute the total from logged components."""
    return (weights.fidelity * metrics.loss_fidelity + weights.ce * metrics.loss_ce
            + weights.trash * metrics.loss_trash + weights.smiles * metrics.loss_smiles)
