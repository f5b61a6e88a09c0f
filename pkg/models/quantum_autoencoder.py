"""
Quantum Autoencoder
===================

Angle encoding, layered RY/RZ + CRZ-ring ansatz, latent/trash partition,
reset-and-invert fidelity, and parameter-shift gradients.

The circuit for one sample:

    |0...0>  --RY(angles)-->  |phi>  --U(theta)-->  |psi_in>
    reset trash qubits of |psi_in> to |0> (project, renormalize)
    --U(theta)^dagger--RY(-angles)-->  |out>,   fidelity = |<0...0|out>|^2

Trash qubits are the last ``n_trash`` indices; the decoder reads <Z> on the
latent qubits of |psi_in>.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from errors import ConfigurationError, ShapeError
from nn.layers import Dense, Layer
from nn.tensor import Tensor, mul, tanh
from services.statevector_service import (MAX_QUBITS, StateVector, apply_crz, apply_ry, apply_rz,
                                          fidelity, reset_to_zero, z_expectations, zero_state)

logger = logging.getLogger(__name__)

CRZ_ANGLE = math.pi / 2  # Fixed entangler angle, not trained
SHIFT = math.pi / 2
THETA_INIT_RANGE = 0.1


@dataclass(frozen=True)
class QaeConfig:
    """Register partition and depth."""
    n_total: int = 8
    n_latent: int = 5
    n_trash: int = 3
    n_layers: int = 5

    def __post_init__(self):
        if self.n_latent + self.n_trash != self.n_total:
            raise ConfigurationError(
                f"latent + trash qubits must equal total qubits: "
                f"{self.n_latent} + {self.n_trash} = {self.n_latent + self.n_trash} != {self.n_total}"
            )
        if not 1 <= self.n_total <= MAX_QUBITS:
            raise ConfigurationError(f"total qubits must be in 1..{MAX_QUBITS}, got {self.n_total}")
        if self.n_latent < 1 or self.n_trash < 0:
            raise ConfigurationError(f"need at least one latent qubit, got {self.n_latent} latent / {self.n_trash} trash")
        if self.n_layers < 0:
            raise ConfigurationError(f"layer count must be non-negative, got {self.n_layers}")

    @property
    def latent_qubits(self) -> List[int]:
        return list(range(self.n_latent))

    @property
    def trash_qubits(self) -> List[int]:
        return list(range(self.n_latent, self.n_total))

    @property
    def theta_shape(self) -> Tuple[int, int, int]:
        return (self.n_layers, self.n_total, 2)

    @property
    def parameter_count(self) -> int:
        """Rotation parameters: trainable ansatz angles plus data-layer angles."""
        return self.n_layers * self.n_total * 2 + self.n_total


def init_circuit_params(cfg: QaeConfig, rng: np.random.Generator) -> np.ndarray:
    """Ansatz angles, uniform in [-0.1, 0.1], shape (layers, qubits, 2)."""
    return rng.uniform(-THETA_INIT_RANGE, THETA_INIT_RANGE, size=cfg.theta_shape)


def encode_angles(z: Tensor, projection: Dense) -> Tensor:
    """Map features to data-layer angles in [-pi, pi] via pi * tanh(z W + b)."""
    return mul(tanh(projection(z)), math.pi)


def data_layer(state: StateVector, angles: np.ndarray, adjoint: bool = False) -> StateVector:
    """RY(angle_q) on every qubit q; angles shape (..., n)."""
    sign = -1.0 if adjoint else 1.0
    for q in range(state.n_qubits):
        apply_ry(state, q, sign * angles[..., q])
    return state


def _entangle_ring(state: StateVector, angle: float):
    n = state.n_qubits
    if n < 2:
        return
    for q in range(n):
        apply_crz(state, q, (q + 1) % n, angle)


def ansatz(state: StateVector, theta: np.ndarray, direction: str = "forward") -> StateVector:
    """
    Apply the layered ansatz, or its exact inverse.

    Each layer: RY(theta[l, q, 0]) then RZ(theta[l, q, 1]) on every qubit, then a
    CRZ(pi/2) ring q -> (q+1) mod n.

    Args:
        state: Register of n qubits (batched or not)
        theta: Angles of shape (layers, n, 2)
        direction: "forward" or "adjoint"
    """
    theta = np.asarray(theta, dtype=np.float64)
    if theta.ndim != 3 or theta.shape[1:] != (state.n_qubits, 2):
        raise ShapeError(f"ansatz angles {theta.shape} do not fit {state.n_qubits} qubits")

    if direction == "forward":
        for layer in theta:
            for q in range(state.n_qubits):
                apply_ry(state, q, layer[q, 0])
                apply_rz(state, q, layer[q, 1])
            _entangle_ring(state, CRZ_ANGLE)
    elif direction == "adjoint":
        for layer in theta[::-1]:
            _entangle_ring(state, -CRZ_ANGLE)
            for q in range(state.n_qubits):
                apply_rz(state, q, -layer[q, 1])
                apply_ry(state, q, -layer[q, 0])
    else:
        raise ValueError(f"direction must be 'forward' or 'adjoint', got {direction!r}")
    return state


@dataclass
class QaeForward:
    """States and figures of merit of one encode/decode pass."""
    psi_in: StateVector
    psi_out: StateVector
    fidelity: np.ndarray
    trash_zero_prob: np.ndarray
    latent: np.ndarray


def qae_forward_angles(angles: np.ndarray, theta: np.ndarray, cfg: QaeConfig) -> QaeForward:
    """
    Run encode, trash reset and decode for data-layer angles.

    Args:
        angles: (n_total,) or (B, n_total)
        theta: (layers, n_total, 2)
        cfg: Register partition

    Returns:
        QaeForward; fidelity is 0 for samples whose trash reset is degenerate
    """
    angles = np.asarray(angles, dtype=np.float64)
    if angles.shape[-1] != cfg.n_total:
        raise ShapeError(f"expected {cfg.n_total} angles, got shape {angles.shape}")
    batch = None if angles.ndim == 1 else angles.shape[0]

    state = zero_state(cfg.n_total, batch_size=batch)
    data_layer(state, angles)
    ansatz(state, theta, "forward")
    psi_in = state.copy()
    latent = z_expectations(psi_in, cfg.latent_qubits)

    trash_zero_prob = reset_to_zero(state, cfg.trash_qubits, strict=False)
    if np.any(trash_zero_prob < 1e-12):
        logger.warning("Degenerate trash reset; fidelity set to 0 for affected samples")

    ansatz(state, theta, "adjoint")
    data_layer(state, angles, adjoint=True)
    fid = fidelity(zero_state(cfg.n_total, batch_size=batch), state)

    return QaeForward(psi_in=psi_in, psi_out=state, fidelity=np.asarray(fid),
                      trash_zero_prob=np.asarray(trash_zero_prob), latent=latent)


def qae_forward(z: Tensor, theta: np.ndarray, cfg: QaeConfig, projection: Dense) -> QaeForward:
    """Encode features to angles, then run the autoencoder pass."""
    return qae_forward_angles(encode_angles(z, projection).data, theta, cfg)


def fidelity_loss(f: QaeForward) -> np.ndarray:
    return 1.0 - f.fidelity


def trash_loss(f: QaeForward) -> np.ndarray:
    return 1.0 - f.trash_zero_prob


def observables(angles: np.ndarray, theta: np.ndarray, cfg: QaeConfig) -> np.ndarray:
    """
    Expectation-type outputs per sample: latent <Z>..., fidelity, trash-zero probability.

    Returns:
        Array of shape (B, n_latent + 2)
    """
    f = qae_forward_angles(angles, theta, cfg)
    return np.concatenate([f.latent, f.fidelity[..., None], f.trash_zero_prob[..., None]], axis=-1)


def param_shift_grad(angles: np.ndarray, theta: np.ndarray, cfg: QaeConfig,
                     upstream: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Parameter-shift gradient of sum(upstream * observables).

    d<O>/dp = (<O>(p + pi/2) - <O>(p - pi/2)) / 2 for every ansatz angle and every
    data-layer angle.

    Args:
        angles: (B, n_total) data-layer angles
        theta: (layers, n_total, 2)
        cfg: Register partition
        upstream: (B, n_latent + 2) gradient of the loss w.r.t. observables

    Returns:
        (grad_theta, grad_angles) with the shapes of theta and angles
    """
    angles = np.asarray(angles, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    upstream = np.asarray(upstream, dtype=np.float64)

    grad_theta = np.zeros_like(theta)
    for index in np.ndindex(theta.shape):
        plus = theta.copy()
        minus = theta.copy()
        plus[index] += SHIFT
        minus[index] -= SHIFT
        diff = (observables(angles, plus, cfg) - observables(angles, minus, cfg)) / 2.0
        grad_theta[index] = np.sum(upstream * diff)

    # Each sample's angles only touch its own outputs, so one batched shift per qubit
    grad_angles = np.zeros_like(angles)
    for q in range(cfg.n_total):
        plus = angles.copy()
        minus = angles.copy()
        plus[..., q] += SHIFT
        minus[..., q] -= SHIFT
        diff = (observables(plus, theta, cfg) - observables(minus, theta, cfg)) / 2.0
        grad_angles[..., q] = np.sum(upstream * diff, axis=-1)

    return grad_theta, grad_angles


def quantum_encode(angles: Tensor, theta: Tensor, cfg: QaeConfig) -> Tensor:
    """Autodiff node wrapping the circuit; backward uses the parameter-shift rule."""
    data = observables(angles.data, theta.data, cfg)

    def backward(g):
        grad_theta, grad_angles = param_shift_grad(angles.data, theta.data, cfg, g)
        return grad_angles, grad_theta

    return Tensor.from_op(data, (angles, theta), "quantum_encode", backward)


@dataclass
class QuantumOutputs:
    """Tape-connected circuit outputs for a batch."""
    angles: Tensor  # (B, n_total)
    latent: Tensor  # (B, n_latent)
    fidelity: Tensor  # (B,)
    trash_zero_prob: Tensor  # (B,)


class QuantumAutoencoder(Layer):
    """Trainable encoder projection plus ansatz angles."""

    def __init__(self, cfg: QaeConfig, d_model: int, rng: np.random.Generator):
        self.cfg = cfg
        self.encoder = Dense(d_model, cfg.n_total, rng)
        self.theta = Tensor(init_circuit_params(cfg, rng), requires_grad=True)

    def __call__(self, z: Tensor) -> QuantumOutputs:
        angles = encode_angles(z, self.encoder)
        out = quantum_encode(angles, self.theta, self.cfg)
        n = self.cfg.n_latent
        return QuantumOutputs(angles=angles, latent=out[:, :n],
                              fidelity=out[:, n], trash_zero_prob=out[:, n + 1])


@dataclass
class GateEntry:
    """One row of the circuit listing."""
    layer: str
    gate: str
    qubits: Tuple[int, ...]
    param_index: Optional[int]

    def render(self) -> str:
        qubits = ",".join(str(q) for q in self.qubits)
        param = "-" if self.param_index is None else str(self.param_index)
        return f"{self.layer:<6} {self.gate:<4} q[{qubits}]  param={param}"


def circuit_listing(cfg: QaeConfig) -> List[GateEntry]:
    """
    Gate-by-gate listing of the encoder circuit.

    Parameter indices count data-layer angles first (0..n-1), then ansatz angles
    in (layer, qubit, RY/RZ) order. CRZ gates carry the fixed pi/2 angle.
    """
    n = cfg.n_total
    entries = [GateEntry("data", "RY", (q,), q) for q in range(n)]
    for layer in range(cfg.n_layers):
        for q in range(n):
            base = n + (layer * n + q) * 2
            entries.append(GateEntry(f"L{layer}", "RY", (q,), base))
            entries.append(GateEntry(f"L{layer}", "RZ", (q,), base + 1))
        if n >= 2:
            for q in range(n):
                entries.append(GateEntry(f"L{layer}", "CRZ", (q, (q + 1) % n), None))
    return entries


def rotation_parameter_count(entries: Sequence[GateEntry]) -> int:
    return sum(1 for e in entries if e.param_index is not None)
