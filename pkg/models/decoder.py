"""
Attention LSTM Decoder
======================

Generates SMILES token distributions from the measured latent vector.

Each step feeds [token embedding ; latent] through stacked LSTM cells, attends
from the top hidden state over the encoder-side position matrix and maps
[h ; context] to vocabulary logits. During training the previous token is the
ground truth with probability alpha (teacher forcing) and the model's own
argmax otherwise (scheduled sampling).
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from errors import ConfigurationError, ContractViolationError, ShapeError
from models.corpus import EOS_ID, SOS_ID
from nn.layers import Dense, Layer, LSTMCell, MultiHeadAttention, stack_rows, uniform_param
from nn.tensor import Tensor, concat, embedding, softmax

logger = logging.getLogger(__name__)

ALPHA_SCHEDULES = ("linear", "inverse_sigmoid")


@dataclass(frozen=True)
class DecodeConfig:
    """Output length cap, teacher-forcing probability and token selection."""
    max_len: int
    alpha: float = 0.0
    greedy: bool = True

    def __post_init__(self):
        if self.max_len < 2:
            raise ConfigurationError(f"max decode length must be >= 2, got {self.max_len}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigurationError(f"teacher-forcing probability must be in [0, 1], got {self.alpha}")


@dataclass
class DecoderState:
    """Per-layer (h, c), last attention context and step counter."""
    layers: List[Tuple[Tensor, Tensor]]
    context: Optional[Tensor] = None
    step: int = 0


@dataclass
class DecodeResult:
    """Output of decode_sequence; step t predicts position t + 1 of the target."""
    tokens: np.ndarray  # (B, S) predicted ids
    logits: Tensor  # (B, S, V)
    inputs: np.ndarray  # (B, S) ids fed at each step, column 0 is SOS
    forced: np.ndarray  # (B, S) True where the ground-truth token was fed


class AttentionDecoder(Layer):
    """Parameters of the decoder: token table, latent projection, LSTM stack, attention, output."""

    def __init__(self, vocab_size: int, token_dim: int, n_latent: int, d_memory: int, d_h: int,
                 n_layers: int, n_heads: int, rng: np.random.Generator):
        if n_layers < 1:
            raise ConfigurationError(f"decoder needs at least one layer, got {n_layers}")
        self.vocab_size = vocab_size
        self.n_latent = n_latent
        self.d_h = d_h
        self.token_table = uniform_param(rng, (vocab_size, token_dim), 1.0 / math.sqrt(token_dim))
        self.latent_projection = Dense(n_latent, 2 * d_h, rng)
        self.cells = [LSTMCell(token_dim + n_latent if i == 0 else d_h, d_h, rng) for i in range(n_layers)]
        self.attention = MultiHeadAttention(d_h, d_memory, d_h, n_heads, rng)
        self.output = Dense(2 * d_h, vocab_size, rng)

    @property
    def n_layers(self) -> int:
        return len(self.cells)


def init_state(z_hat: Tensor, decoder: AttentionDecoder) -> DecoderState:
    """
    Project the latent vector into layer-0 (h, c); deeper layers start at zero.

    Args:
        z_hat: (B, n_latent) latent expectations
        decoder: Decoder parameters
    """
    if z_hat.shape[-1] != decoder.n_latent:
        raise ShapeError(f"latent vector has {z_hat.shape[-1]} entries, decoder expects {decoder.n_latent}")
    d_h = decoder.d_h
    projected = decoder.latent_projection(z_hat)
    layers = [(projected[:, :d_h], projected[:, d_h:])]
    zeros = np.zeros((z_hat.shape[0], d_h))
    for _ in range(1, decoder.n_layers):
        layers.append((Tensor(zeros), Tensor(zeros)))
    return DecoderState(layers=layers)


def decode_step(state: DecoderState, tokens: np.ndarray, z_hat: Tensor, memory: Tensor,
                decoder: AttentionDecoder,
                mask: Optional[np.ndarray] = None) -> Tuple[Tensor, DecoderState]:
    """
    One decoding step.

    Args:
        state: Current decoder state
        tokens: (B,) input token ids
        z_hat: (B, n_latent)
        memory: (B, L, d_memory) attention memory
        decoder: Decoder parameters
        mask: (B, L) attendable positions

    Returns:
        (logits of shape (B, V), next state)
    """
    tokens = np.asarray(tokens, dtype=np.int64)
    if tokens.shape != (z_hat.shape[0],):
        raise ShapeError(f"decode_step: {tokens.shape} token ids for a batch of {z_hat.shape[0]}")

    x = concat([embedding(decoder.token_table, tokens), z_hat], axis=-1)
    layers = []
    for cell, (h_prev, c_prev) in zip(decoder.cells, state.layers):
        h, c = cell(x, h_prev, c_prev)
        layers.append((h, c))
        x = h

    top = layers[-1][0]
    context = decoder.attention(top, memory, mask).context
    logits = decoder.output(concat([top, context], axis=-1))
    return logits, DecoderState(layers=layers, context=context, step=state.step + 1)


def sample_teacher_forcing(rng: Optional[np.random.Generator], alpha: float, shape) -> np.ndarray:
    """Draw ground-truth-feed decisions; alpha 0 or 1 consumes no randomness."""
    if alpha >= 1.0:
        return np.ones(shape, dtype=bool)
    if alpha <= 0.0:
        return np.zeros(shape, dtype=bool)
    if rng is None:
        raise ContractViolationError("scheduled sampling with 0 < alpha < 1 needs a random generator")
    return rng.random(shape) < alpha


def _select(logits: Tensor, cfg: DecodeConfig, rng: Optional[np.random.Generator]) -> np.ndarray:
    if cfg.greedy:
        return np.argmax(logits.data, axis=-1)
    if rng is None:
        raise ContractViolationError("sampled decoding needs a random generator")
    probs = softmax(Tensor(logits.data), axis=-1).data
    cumulative = np.cumsum(probs, axis=-1)
    draws = rng.random((probs.shape[0], 1))
    return np.minimum((cumulative < draws).sum(axis=-1), probs.shape[-1] - 1)


def decode_sequence(z_hat: Tensor, memory: Tensor, decoder: AttentionDecoder, cfg: DecodeConfig,
                    target: Optional[np.ndarray] = None, rng: Optional[np.random.Generator] = None,
                    mask: Optional[np.ndarray] = None) -> DecodeResult:
    """
    Decode a batch, with scheduled sampling when a target is given.

    With a target of shape (B, T) the decoder runs T - 1 steps; step 0 is fed SOS
    and step t >= 1 is fed target[:, t] with probability ``cfg.alpha``, otherwise
    the argmax of step t - 1. Without a target it decodes freely until every
    sample has produced EOS or ``cfg.max_len - 1`` steps have run.

    Raises:
        ContractViolationError: alpha > 0 without a target
    """
    if cfg.alpha > 0.0 and target is None:
        raise ContractViolationError(f"teacher forcing with alpha={cfg.alpha} needs a target sequence")

    batch = z_hat.shape[0]
    if target is not None:
        target = np.asarray(target, dtype=np.int64)
        if target.ndim != 2 or target.shape[0] != batch or target.shape[1] < 2:
            raise ShapeError(f"decode target {target.shape} does not fit a batch of {batch}")
        steps = target.shape[1] - 1
        forced = sample_teacher_forcing(rng, cfg.alpha, (batch, steps))
        forced[:, 0] = True
    else:
        steps = cfg.max_len - 1
        forced = np.zeros((batch, steps), dtype=bool)
        forced[:, 0] = True

    state = init_state(z_hat, decoder)
    step_logits: List[Tensor] = []
    tokens: List[np.ndarray] = []
    inputs: List[np.ndarray] = []
    previous = np.full(batch, SOS_ID, dtype=np.int64)
    finished = np.zeros(batch, dtype=bool)

    for t in range(steps):
        if t == 0:
            fed = np.full(batch, SOS_ID, dtype=np.int64)
        elif target is not None:
            fed = np.where(forced[:, t], target[:, t], previous)
        else:
            fed = previous

        logits, state = decode_step(state, fed, z_hat, memory, decoder, mask)
        previous = _select(logits, cfg, rng)
        step_logits.append(logits)
        tokens.append(previous)
        inputs.append(fed)

        if target is None:
            finished |= previous == EOS_ID
            if finished.all():
                break

    taken = len(tokens)
    return DecodeResult(tokens=np.stack(tokens, axis=1), logits=stack_rows(step_logits, axis=1),
                        inputs=np.stack(inputs, axis=1), forced=forced[:, :taken])


def teacher_forcing_alpha(epoch: int, alpha_min: float, anneal_epochs: int,
                          schedule: str = "linear") -> float:
    """
    Teacher-forcing probability for an epoch (0-based).

    linear:          max(alpha_min, 1 - t / T)
    inverse_sigmoid: max(alpha_min, 1 / (1 + exp(10 t / T - 5)))
    """
    if schedule not in ALPHA_SCHEDULES:
        raise ConfigurationError(f"unknown teacher-forcing schedule {schedule!r}; use one of {ALPHA_SCHEDULES}")
    if anneal_epochs <= 0:
        return float(alpha_min)
    ratio = epoch / anneal_epochs
    if schedule == "linear":
        alpha = 1.0 - ratio
    else:
        alpha = 1.0 / (1.0 + math.exp(10.0 * ratio - 5.0))
    return float(min(1.0, max(alpha_min, alpha)))
