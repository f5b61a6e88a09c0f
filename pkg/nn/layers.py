"""
Neural Layers
=============

Dense, LSTM cell, multi-head attention and softmax cross-entropy built on the
Tensor engine. Each layer owns its parameters as named leaf tensors.
"""

import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from errors import ContractViolationError, ShapeError
from .tensor import (Tensor, concat, log_softmax, matmul, reshape, sigmoid, softmax, tanh,
                     transpose)

PAD_TARGET = 0


def uniform_param(rng: np.random.Generator, shape: Tuple[int, ...], bound: float) -> Tensor:
    return Tensor(rng.uniform(-bound, bound, size=shape), requires_grad=True)


def zeros_param(shape: Tuple[int, ...]) -> Tensor:
    return Tensor(np.zeros(shape), requires_grad=True)


class Layer:
    """Base class: named parameters, collected recursively."""

    def parameters(self) -> Dict[str, Tensor]:
        params: Dict[str, Tensor] = {}
        for name, value in vars(self).items():
            if isinstance(value, Tensor) and value.requires_grad:
                params[name] = value
            elif isinstance(value, Layer):
                for sub, tensor in value.parameters().items():
                    params[f"{name}.{sub}"] = tensor
            elif isinstance(value, list) and value and all(isinstance(v, Layer) for v in value):
                for i, layer in enumerate(value):
                    for sub, tensor in layer.parameters().items():
                        params[f"{name}.{i}.{sub}"] = tensor
        return params


class Dense(Layer):
    """Affine map x @ W + b."""

    def __init__(self, d_in: int, d_out: int, rng: np.random.Generator, zero_init: bool = False):
        bound = 1.0 / math.sqrt(d_in)
        self.weight = zeros_param((d_in, d_out)) if zero_init else uniform_param(rng, (d_in, d_out), bound)
        self.bias = zeros_param((d_out,))

    def __call__(self, x: Tensor) -> Tensor:
        if x.shape[-1] != self.weight.shape[0]:
            raise ShapeError(f"dense: input {x.shape} does not match weight {self.weight.shape}")
        return matmul(x, self.weight) + self.bias


class LSTMCell(Layer):
    """
    LSTM cell parameters.

    The four gate matrices are stored side by side in the order
    input, forget, cell, output.
    """

    def __init__(self, d_in: int, d_h: int, rng: np.random.Generator):
        bound = 1.0 / math.sqrt(d_h)
        self.d_in = d_in
        self.d_h = d_h
        self.w_input = uniform_param(rng, (d_in, 4 * d_h), bound)
        self.w_hidden = uniform_param(rng, (d_h, 4 * d_h), bound)
        bias = np.zeros(4 * d_h)
        bias[d_h:2 * d_h] = 1.0  # forget gate
        self.bias = Tensor(bias, requires_grad=True)

    def __call__(self, x: Tensor, h_prev: Tensor, c_prev: Tensor) -> Tuple[Tensor, Tensor]:
        return lstm_cell(x, h_prev, c_prev, self)


def lstm_cell(x: Tensor, h_prev: Tensor, c_prev: Tensor, params: LSTMCell) -> Tuple[Tensor, Tensor]:
    """
    One LSTM step.

    Args:
        x: Input (..., d_in)
        h_prev: Hidden state (..., d_h)
        c_prev: Cell state (..., d_h)
        params: Gate weights

    Returns:
        (h, c), each (..., d_h)
    """
    d_h = params.d_h
    if x.shape[-1] != params.d_in or h_prev.shape[-1] != d_h or c_prev.shape[-1] != d_h:
        raise ShapeError(f"lstm_cell: got x {x.shape}, h {h_prev.shape}, c {c_prev.shape} "
                         f"for d_in={params.d_in}, d_h={d_h}")

    gates = matmul(x, params.w_input) + matmul(h_prev, params.w_hidden) + params.bias
    i = sigmoid(gates[..., 0:d_h])
    f = sigmoid(gates[..., d_h:2 * d_h])
    g = tanh(gates[..., 2 * d_h:3 * d_h])
    o = sigmoid(gates[..., 3 * d_h:4 * d_h])
    c = f * c_prev + i * g
    h = o * tanh(c)
    return h, c


class MultiHeadAttention(Layer):
    """Scaled dot-product attention with per-head projections."""

    def __init__(self, d_query: int, d_memory: int, d_h: int, n_heads: int, rng: np.random.Generator):
        if d_h % n_heads != 0:
            raise ShapeError(f"attention: hidden size {d_h} is not divisible by {n_heads} heads")
        self.n_heads = n_heads
        self.d_h = d_h
        self.query = Dense(d_query, d_h, rng)
        self.key = Dense(d_memory, d_h, rng)
        self.value = Dense(d_memory, d_h, rng)
        self.output = Dense(d_h, d_h, rng)

    @property
    def head_dim(self) -> int:
        return self.d_h // self.n_heads

    def __call__(self, query: Tensor, memory: Tensor, mask: Optional[np.ndarray] = None) -> "AttentionResult":
        return multi_head_attention(query, memory, self, mask)


@dataclass
class AttentionResult:
    context: Tensor  # (B, d_h)
    weights: np.ndarray  # (B, heads, L)


def multi_head_attention(query: Tensor, memory: Tensor, params: MultiHeadAttention,
                         mask: Optional[np.ndarray] = None) -> AttentionResult:
    """
    Attend from one query vector per sample over a memory of positions.

    Args:
        query: (B, d_query), or (d_query,) for a single sample
        memory: (B, L, d_memory), or (L, d_memory)
        params: Projections
        mask: (B, L) bool, True on positions that may be attended

    Returns:
        AttentionResult with the projected context and the per-head weights
    """
    single = query.ndim == 1
    if single:
        query = reshape(query, (1, query.shape[0]))
        memory = reshape(memory, (1,) + memory.shape)
        mask = None if mask is None else np.asarray(mask)[None, :]
    if memory.ndim != 3 or memory.shape[0] != query.shape[0] or memory.shape[1] == 0:
        raise ShapeError(f"attention: query {query.shape} and memory {memory.shape} do not fit")

    batch, length = memory.shape[0], memory.shape[1]
    heads, head_dim = params.n_heads, params.head_dim

    q = reshape(params.query(query), (batch, heads, 1, head_dim))
    k = transpose(reshape(params.key(memory), (batch, length, heads, head_dim)), (0, 2, 3, 1))
    v = transpose(reshape(params.value(memory), (batch, length, heads, head_dim)), (0, 2, 1, 3))

    scores = matmul(q, k) * (1.0 / math.sqrt(head_dim))  # (B, H, 1, L)
    head_mask = None if mask is None else np.asarray(mask, dtype=bool)[:, None, None, :]
    weights = softmax(scores, axis=-1, mask=head_mask)
    context = reshape(matmul(weights, v), (batch, heads * head_dim))
    out = params.output(context)

    if single:
        out = reshape(out, (params.d_h,))
    return AttentionResult(context=out, weights=weights.data[:, :, 0, :])


def softmax_cross_entropy(logits: Tensor, targets: np.ndarray) -> Tensor:
    """
    Per-row cross-entropy -log softmax(logits)[target].

    Args:
        logits: (..., V)
        targets: Integer ids with the leading shape of ``logits``; PAD is not allowed

    Returns:
        Tensor of per-row losses
    """
    targets = np.asarray(targets, dtype=np.int64)
    if targets.shape != logits.shape[:-1]:
        raise ShapeError(f"cross-entropy: targets {targets.shape} vs logits {logits.shape}")
    if np.any(targets == PAD_TARGET):
        raise ContractViolationError("cross-entropy target is PAD; mask it before calling")
    if np.any(targets >= logits.shape[-1]) or np.any(targets < 0):
        raise ShapeError(f"cross-entropy: target id outside {logits.shape[-1]} classes")

    logp = log_softmax(logits, axis=-1)
    onehot = np.zeros(logits.shape)
    np.put_along_axis(onehot, targets[..., None], 1.0, axis=-1)
    return -(logp * onehot).sum(axis=-1)


def stack_rows(tensors, axis: int = 1) -> Tensor:
    """Stack equally shaped tensors along a new axis."""
    expanded = [reshape(t, t.shape[:axis] + (1,) + t.shape[axis:]) for t in tensors]
    return concat(expanded, axis=axis)
