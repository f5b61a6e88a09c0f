"""
Hybrid Autoencoder
==================

Ket embedding -> quantum autoencoder -> attention LSTM decoder, wired into one
model with a loss step for training and a greedy reconstruction pass for
evaluation.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from models.corpus import Batch, Vocabulary, detokenize
from models.decoder import AttentionDecoder, DecodeConfig, DecodeResult, decode_sequence
from models.ket_embedding import KetEmbedding, SequenceEmbedding
from models.objective import (LossComponents, LossWeights, batch_similarity,
                              sequence_ce, smiles_loss, total_loss)
from models.quantum_autoencoder import QuantumAutoencoder, QuantumOutputs
from models.train_config import TrainConfig
from nn.layers import Layer
from nn.tensor import Tensor, no_grad

logger = logging.getLogger(__name__)


@dataclass
class ForwardPass:
    embedding: SequenceEmbedding
    quantum: QuantumOutputs
    decoded: DecodeResult


@dataclass
class Reconstruction:
    """Greedy reconstructions and per-molecule figures of merit for one batch."""
    smiles: List[str]
    reconstructed: List[str]
    fidelity: np.ndarray
    trash_zero_prob: np.ndarray
    similarity: np.ndarray


class HybridAutoencoder(Layer):
    """All trainable parts of the model."""

    def __init__(self, cfg: TrainConfig, vocab_size: int, rng: np.random.Generator):
        self.embedding = KetEmbedding(vocab_size, cfg.ket_order, cfg.ket_site_dim, cfg.model_dim, rng)
        self.quantum = QuantumAutoencoder(cfg.qae, cfg.model_dim, rng)
        self.decoder = AttentionDecoder(
            vocab_size=vocab_size,
            token_dim=cfg.token_dim,
            n_latent=cfg.n_latent,
            d_memory=cfg.model_dim,
            d_h=cfg.hidden_dim,
            n_layers=cfg.decoder_layers,
            n_heads=cfg.attention_heads,
            rng=rng,
        )
        self.max_decode_len = cfg.max_decode_len

    def encode(self, ids: np.ndarray, mask: Optional[np.ndarray] = None):
        """Embed and run the circuit; returns (SequenceEmbedding, QuantumOutputs)."""
        embedded = self.embedding(ids, mask)
        return embedded, self.quantum(embedded.z)

    def forward(self, batch: Batch, alpha: float, rng: Optional[np.random.Generator]) -> ForwardPass:
        """Encode a batch and decode it against its own tokens with teacher-forcing probability alpha."""
        embedded, quantum = self.encode(batch.ids, batch.mask)
        decoded = decode_sequence(
            quantum.latent, embedded.positions, self.decoder,
            DecodeConfig(max_len=max(batch.ids.shape[1], 2), alpha=alpha),
            target=batch.ids, rng=rng, mask=embedded.mask,
        )
        return ForwardPass(embedding=embedded, quantum=quantum, decoded=decoded)

    def greedy_strings(self, latent: Tensor, embedded: SequenceEmbedding, vocab: Vocabulary) -> List[str]:
        """Free-running argmax decode, detokenized."""
        with no_grad():
            result = decode_sequence(Tensor(latent.data), Tensor(embedded.positions.data), self.decoder,
                                     DecodeConfig(max_len=self.max_decode_len), mask=embedded.mask)
        return [detokenize(row, vocab) for row in result.tokens]

    def reconstruct(self, batch: Batch, vocab: Vocabulary) -> Reconstruction:
        """Pure inference: alpha = 0, greedy tokens, no tape."""
        with no_grad():
            embedded, quantum = self.encode(batch.ids, batch.mask)
            strings = self.greedy_strings(quantum.latent, embedded, vocab)
        return Reconstruction(
            smiles=list(batch.smiles),
            reconstructed=strings,
            fidelity=quantum.fidelity.data.copy(),
            trash_zero_prob=quantum.trash_zero_prob.data.copy(),
            similarity=batch_similarity(strings, batch.smiles),
        )


def compute_batch_loss(model: HybridAutoencoder, batch: Batch, vocab: Vocabulary, weights: LossWeights,
                       alpha: float, rng: Optional[np.random.Generator]):
    """
    Forward one batch and assemble the weighted loss.

    Returns:
        (total loss tensor, BatchMetrics, ForwardPass)
    """
    forward = model.forward(batch, alpha, rng)
    quantum = forward.quantum

    ce = sequence_ce(forward.decoded.logits, batch.ids)
    fidelity_loss = 1.0 - quantum.fidelity.mean()
    trash_loss = 1.0 - quantum.trash_zero_prob.mean()

    similarities = batch_similarity(model.greedy_strings(quantum.latent, forward.embedding, vocab),
                                    batch.smiles)

    components = LossComponents(
        fidelity_loss=fidelity_loss,
        ce=ce,
        trash_loss=trash_loss,
        smiles_loss=smiles_loss(similarities),
        fidelity=float(np.mean(quantum.fidelity.data)),
        similarity=float(np.mean(similarities)),
        trash_zero_prob=float(np.mean(quantum.trash_zero_prob.data)),
    )
    total, metrics = total_loss(components, weights)
    return total, metrics, forward
