"""
Neural network package
======================

Reverse-mode autodiff tensors, layers and optimizers used by the decoder.
"""

from .tensor import Tensor, no_grad
from .layers import Dense, LSTMCell, MultiHeadAttention
from .optim import Adam, AdamState, adam_step

__all__ = ['Tensor', 'no_grad', 'Dense', 'LSTMCell', 'MultiHeadAttention',
           'Adam', 'AdamState', 'adam_step']
