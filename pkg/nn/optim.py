"""
Optimizers
==========

Bias-corrected Adam over named parameter tensors.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from errors import ShapeError
from .tensor import Tensor


@dataclass
class AdamState:
    """First/second moments per parameter name plus the step counter."""
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray], state: AdamState,
              lr: float, beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8) -> Dict[str, np.ndarray]:
    """
    One Adam update.

    Args:
        params: Current values by name
        grads: Gradients by name; missing names count as zero gradient
        state: Moments, updated in place
        lr: Learning rate

    Returns:
        Updated parameter values by name
    """
    state.step += 1
    t = state.step
    updated = {}
    for name, value in params.items():
        grad = grads.get(name)
        if grad is None:
            grad = np.zeros_like(value)
        if grad.shape != value.shape:
            raise ShapeError(f"adam: gradient {grad.shape} does not match parameter {name} {value.shape}")

        m = state.m.get(name, np.zeros_like(value))
        v = state.v.get(name, np.zeros_like(value))
        m = beta1 * m + (1.0 - beta1) * grad
        v = beta2 * v + (1.0 - beta2) * grad * grad
        state.m[name] = m
        state.v[name] = v

        m_hat = m / (1.0 - beta1 ** t)
        v_hat = v / (1.0 - beta2 ** t)
        updated[name] = value - lr * m_hat / (np.sqrt(v_hat) + eps)
    return updated


class Adam:
    """Adam optimizer bound to a dict of leaf tensors."""

    def __init__(self, params: Dict[str, Tensor], beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8, state: Optional[AdamState] = None):
        self.params = params
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.state = state or AdamState()

    def zero_grad(self):
        for tensor in self.params.values():
            tensor.zero_grad()

    def step(self, lr: float):
        values = {name: t.data for name, t in self.params.items()}
        grads = {name: t.grad for name, t in self.params.items() if t.grad is not None}
        updated = adam_step(values, grads, self.state, lr, self.beta1, self.beta2, self.eps)
        for name, tensor in self.params.items():
            tensor.data = updated[name]
