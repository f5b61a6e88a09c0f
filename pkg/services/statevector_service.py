"""
Statevector Simulation Service
==============================

Dense statevector simulator for small registers: allocation, RY/RZ/CRZ gates,
overlaps and exact Pauli-Z marginals.

Qubit ordering is little-endian: qubit 0 is the least significant bit of the
basis index. Amplitude arrays may carry leading batch axes, shape (..., 2**n);
gate angles are scalars or arrays broadcast over those axes. Gates work in
place on a (..., high, 2, low) view of the amplitudes.
"""

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from errors import ConfigurationError, DegenerateResetError, QubitIndexError, ShapeError

MAX_QUBITS = 14

Angle = Union[float, np.ndarray]


@dataclass
class StateVector:
    """Normalized amplitudes over n qubits, optionally batched."""
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape[-1] != 2 ** self.n_qubits:
            raise ShapeError(f"{self.n_qubits} qubits need {2 ** self.n_qubits} amplitudes, "
                             f"got {self.amplitudes.shape[-1]}")

    @property
    def batch_shape(self):
        return self.amplitudes.shape[:-1]

    def norm(self) -> np.ndarray:
        return np.sum(np.abs(self.amplitudes) ** 2, axis=-1)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())


def zero_state(n: int, batch_size: int = None) -> StateVector:
    """
    Allocate |0...0>.

    Args:
        n: Qubit count, 1..14
        batch_size: Optional leading batch axis
    """
    if not 1 <= n <= MAX_QUBITS:
        raise ConfigurationError(f"qubit count must be in 1..{MAX_QUBITS}, got {n}")
    shape = (2 ** n,) if batch_size is None else (batch_size, 2 ** n)
    amplitudes = np.zeros(shape, dtype=np.complex128)
    amplitudes[..., 0] = 1.0
    return StateVector(n, amplitudes)


def _check_qubit(state: StateVector, qubit: int):
    if not 0 <= qubit < state.n_qubits:
        raise QubitIndexError(f"qubit {qubit} out of range for {state.n_qubits} qubits")


def _check_qubits(state: StateVector, qubits: Sequence[int]):
    for q in qubits:
        _check_qubit(state, q)
    if len(set(qubits)) != len(qubits):
        raise QubitIndexError(f"duplicate qubit indices {list(qubits)}")


def _pair_view(state: StateVector, qubit: int) -> np.ndarray:
    """View amplitudes as (..., high, 2, low) with the qubit's bit on axis -2."""
    n = state.n_qubits
    return state.amplitudes.reshape(state.batch_shape + (2 ** (n - qubit - 1), 2, 2 ** qubit))


def _angle_factor(angle: Angle, func) -> np.ndarray:
    """Evaluate func(angle/2) shaped to broadcast against a pair view."""
    values = func(np.asarray(angle, dtype=np.float64) / 2.0)
    return values[..., None, None] if values.ndim else values


def apply_ry(state: StateVector, qubit: int, angle: Angle) -> StateVector:
    """RY(angle) = [[cos a/2, -sin a/2], [sin a/2, cos a/2]] on one qubit, in place."""
    _check_qubit(state, qubit)
    view = _pair_view(state, qubit)
    c = _angle_factor(angle, np.cos)
    s = _angle_factor(angle, np.sin)
    a0 = view[..., 0, :].copy()
    a1 = view[..., 1, :]
    view[..., 0, :] = c * a0 - s * a1
    view[..., 1, :] = s * a0 + c * a1
    return state


def apply_rz(state: StateVector, qubit: int, angle: Angle) -> StateVector:
    """RZ(angle) = diag(exp(-i a/2), exp(i a/2)) on one qubit, in place."""
    _check_qubit(state, qubit)
    view = _pair_view(state, qubit)
    phase = _angle_factor(angle, lambda half: np.exp(1j * half))
    view[..., 0, :] *= np.conj(phase)
    view[..., 1, :] *= phase
    return state


def apply_crz(state: StateVector, control: int, target: int, angle: Angle) -> StateVector:
    """Controlled RZ: RZ(angle) on target where the control bit is 1, in place."""
    _check_qubit(state, control)
    _check_qubit(state, target)
    if control == target:
        raise QubitIndexError(f"control and target are both qubit {control}")

    index = np.arange(2 ** state.n_qubits)
    control_on = ((index >> control) & 1) == 1
    target_on = ((index >> target) & 1) == 1

    half = np.asarray(angle, dtype=np.float64) / 2.0
    phase = np.exp(1j * half)[..., None] if half.ndim else np.exp(1j * half)
    state.amplitudes[..., control_on & ~target_on] *= np.conj(phase)
    state.amplitudes[..., control_on & target_on] *= phase
    return state


def fidelity(a: StateVector, b: StateVector) -> Union[float, np.ndarray]:
    """|<a|b>|^2, per batch element when batched."""
    if a.n_qubits != b.n_qubits or a.amplitudes.shape != b.amplitudes.shape:
        raise ShapeError(f"fidelity: states of shape {a.amplitudes.shape} and {b.amplitudes.shape}")
    overlap = np.sum(np.conj(a.amplitudes) * b.amplitudes, axis=-1)
    value = np.abs(overlap) ** 2
    return float(value) if np.ndim(value) == 0 else value


def _z_signs(n: int, qubits: Sequence[int]) -> np.ndarray:
    """(2**n, k) matrix of +1/-1 for bit 0/1 of each listed qubit."""
    index = np.arange(2 ** n)[:, None]
    bits = (index >> np.asarray(qubits, dtype=np.int64)[None, :]) & 1
    return 1.0 - 2.0 * bits


def z_expectations(state: StateVector, qubits: Sequence[int]) -> np.ndarray:
    """
    Exact <Z> per listed qubit: P(bit=0) - P(bit=1).

    Returns:
        Array of shape (..., len(qubits)) in [-1, 1]
    """
    _check_qubits(state, qubits)
    return state.probabilities() @ _z_signs(state.n_qubits, qubits)


def _zero_mask(n: int, qubits: Sequence[int]) -> np.ndarray:
    index = np.arange(2 ** n)
    bits = 0
    for q in qubits:
        bits |= 1 << q
    return (index & bits) == 0


def zero_projection_prob(state: StateVector, qubits: Sequence[int]) -> Union[float, np.ndarray]:
    """Probability that every listed qubit reads 0."""
    _check_qubits(state, qubits)
    value = np.sum(state.probabilities()[..., _zero_mask(state.n_qubits, qubits)], axis=-1)
    return float(value) if np.ndim(value) == 0 else value


def reset_to_zero(state: StateVector, qubits: Sequence[int], strict: bool = True,
                  tol: float = 1e-12) -> np.ndarray:
    """
    Project the listed qubits onto |0> and renormalize, in place.

    Batch elements whose zero-projection probability is below ``tol`` are set to
    the zero vector when ``strict`` is False.

    Returns:
        Zero-projection probability before the reset, per batch element
    """
    _check_qubits(state, qubits)
    keep = _zero_mask(state.n_qubits, qubits)
    prob = np.sum(state.probabilities()[..., keep], axis=-1)
    degenerate = prob < tol
    if strict and np.any(degenerate):
        raise DegenerateResetError(f"zero-projection probability {np.min(prob):.3e} on qubits {list(qubits)}")

    scale = np.where(degenerate, 0.0, 1.0 / np.sqrt(np.where(degenerate, 1.0, prob)))
    state.amplitudes[..., ~keep] = 0.0
    state.amplitudes *= np.asarray(scale)[..., None] if np.ndim(scale) else scale
    return prob
