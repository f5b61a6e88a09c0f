"""
Ket Embedding
=============

Tensor-product token embeddings: every token owns ``order`` small site vectors
whose Kronecker product is its d_site**order dimensional embedding. Token
embeddings are projected to ``d_model``; the per-position matrix is kept as the
decoder's attention memory and its masked mean feeds the quantum encoder.
"""

import logging
import math
from dataclasses import dataclass
from functools import reduce
from typing import Optional, Union

import numpy as np

from errors import DegenerateInputError, ShapeError
from models.corpus import PAD_ID, TokenSequence
from nn.layers import Dense, Layer
from nn.tensor import Tensor, embedding, mul, reshape, sum_

logger = logging.getLogger(__name__)


class KetFactors(Layer):
    """Trainable site vectors, stored as a (vocab, order, d_site) table."""

    def __init__(self, vocab_size: int, order: int, d_site: int, rng: np.random.Generator):
        if order < 1 or d_site < 1:
            raise ShapeError(f"ket factors need order >= 1 and d_site >= 1, got {order}, {d_site}")
        bound = 1.0 / math.sqrt(d_site)
        self.order = order
        self.d_site = d_site
        self.table = Tensor(rng.uniform(-bound, bound, size=(vocab_size, order, d_site)),
                            requires_grad=True)

    @property
    def vocab_size(self) -> int:
        return self.table.shape[0]

    @property
    def embedding_dim(self) -> int:
        return self.d_site ** self.order

    @property
    def params_per_token(self) -> int:
        return self.order * self.d_site


def embed_token(token_id: int, factors: KetFactors) -> np.ndarray:
    """v[t][1] ⊗ v[t][2] ⊗ ... ⊗ v[t][order] for one token."""
    if not 0 <= token_id < factors.vocab_size:
        raise ShapeError(f"token id {token_id} outside vocabulary of {factors.vocab_size}")
    sites = factors.table.data[token_id]
    return reduce(np.kron, sites)


def kron_sites(site_vectors: Tensor) -> Tensor:
    """
    Kronecker product over the site axis, differentiable.

    Args:
        site_vectors: (..., order, d_site)

    Returns:
        Tensor of shape (..., d_site**order)
    """
    lead = site_vectors.shape[:-2]
    order, d_site = site_vectors.shape[-2:]
    index = (slice(None),) * len(lead)

    product = site_vectors[index + (0, slice(None))]
    width = d_site
    for j in range(1, order):
        site = site_vectors[index + (j, slice(None))]
        outer = mul(reshape(product, lead + (width, 1)), reshape(site, lead + (1, d_site)))
        width *= d_site
        product = reshape(outer, lead + (width,))
    return product


@dataclass
class SequenceEmbedding:
    """Pooled vector z plus the per-position matrix used as attention memory."""
    z: Tensor  # (B, d_model)
    positions: Tensor  # (B, L, d_model)
    mask: np.ndarray  # (B, L) bool


def embed_sequence(ids: Union[np.ndarray, TokenSequence], factors: KetFactors, projection: Dense,
                   mask: Optional[np.ndarray] = None) -> SequenceEmbedding:
    """
    Embed token sequences and pool them.

    Args:
        ids: (B, L) PAD-filled token ids, (L,) ids, or one TokenSequence
        factors: Site vectors
        projection: Dense map d_site**order -> d_model
        mask: (B, L) bool; defaults to ids != PAD

    Returns:
        SequenceEmbedding; a single sequence keeps a leading batch axis of 1

    Raises:
        DegenerateInputError: a sequence has no non-PAD position
    """
    if isinstance(ids, TokenSequence):
        ids = np.asarray(ids.tokens, dtype=np.int64)
    ids = np.asarray(ids, dtype=np.int64)
    if ids.ndim == 1:
        ids = ids[None, :]
    if ids.ndim != 2 or ids.shape[1] == 0:
        raise ShapeError(f"embed_sequence: expected (batch, length) ids, got {ids.shape}")

    mask = (ids != PAD_ID) if mask is None else np.asarray(mask, dtype=bool)
    counts = mask.sum(axis=1)
    if np.any(counts == 0):
        raise DegenerateInputError("sequence has no non-PAD tokens")

    token_vectors = kron_sites(embedding(factors.table, ids))  # (B, L, d_site**order)
    positions = projection(token_vectors)  # (B, L, d_model)

    weights = (mask / counts[:, None])[..., None]
    z = sum_(mul(positions, weights), axis=1)
    return SequenceEmbedding(z=z, positions=positions, mask=mask)


class KetEmbedding(Layer):
    """Site factors plus the projection to the model width."""

    def __init__(self, vocab_size: int, order: int, d_site: int, d_model: int,
                 rng: np.random.Generator):
        self.factors = KetFactors(vocab_size, order, d_site, rng)
        self.projection = Dense(d_site ** order, d_model, rng)
        logger.debug(f"Ket embedding: {vocab_size} tokens x {order} sites x {d_site} "
                     f"(effective dim {d_site ** order}) -> {d_model}")

    def __call__(self, ids: np.ndarray, mask: Optional[np.ndarray] = None) -> SequenceEmbedding:
        return embed_sequence(ids, self.factors, self.projection, mask)
