import math

import numpy as np
import pytest

from errors import ConfigurationError, ShapeError
from models.quantum_autoencoder import (QaeConfig, QuantumAutoencoder, ansatz, circuit_listing,
                                        encode_angles, init_circuit_params, observables,
                                        param_shift_grad, qae_forward_angles,
                                        rotation_parameter_count)
from nn.layers import Dense
from nn.optim import Adam
from nn.tensor import Tensor
from services.statevector_service import StateVector, zero_state
from tests.oracles import (ansatz_unitary, numerical_grad, random_state, reset_invert_fidelity)


def test_default_partition_has_88_rotation_parameters():
    cfg = QaeConfig()
    assert cfg.parameter_count == 88
    assert rotation_parameter_count(circuit_listing(cfg)) == 88


def test_listing_parameter_indices_are_unique_and_dense():
    cfg = QaeConfig(n_total=3, n_latent=2, n_trash=1, n_layers=2)
    indices = [e.param_index for e in circuit_listing(cfg) if e.param_index is not None]
    assert sorted(indices) == list(range(cfg.parameter_count))
    crz = [e for e in circuit_listing(cfg) if e.gate == "CRZ"]
    assert len(crz) == 6
    assert crz[-1].qubits == (2, 0)
    assert "param=-" in crz[0].render()


def test_partition_mismatch_message():
    with pytest.raises(ConfigurationError, match=r"5 \+ 4 = 9 != 8"):
        QaeConfig(n_total=8, n_latent=5, n_trash=4, n_layers=5)


def test_zero_layer_identity_pipeline_reproduces_zero_state():
    cfg = QaeConfig(n_total=3, n_latent=3, n_trash=0, n_layers=0)
    forward = qae_forward_angles(np.zeros(3), np.zeros(cfg.theta_shape), cfg)
    np.testing.assert_allclose(forward.psi_out.amplitudes, zero_state(3).amplitudes, atol=1e-12)
    assert float(forward.fidelity) == pytest.approx(1.0)


def test_no_trash_qubits_is_lossless(rng):
    cfg = QaeConfig(n_total=3, n_latent=3, n_trash=0, n_layers=2)
    theta = rng.uniform(-np.pi, np.pi, size=cfg.theta_shape)
    angles = rng.uniform(-np.pi, np.pi, size=(5, 3))
    forward = qae_forward_angles(angles, theta, cfg)
    np.testing.assert_allclose(forward.fidelity, 1.0, atol=1e-10)
    np.testing.assert_allclose(forward.trash_zero_prob, 1.0)


def test_ansatz_followed_by_adjoint_is_identity(rng):
    theta = rng.uniform(-np.pi, np.pi, size=(3, 4, 2))
    psi = random_state(rng, 4, batch=2)
    state = StateVector(4, psi.copy())
    ansatz(state, theta, "forward")
    ansatz(state, theta, "adjoint")
    np.testing.assert_allclose(state.amplitudes, psi, atol=1e-12)


def test_two_qubit_ansatz_matches_dense_unitary(rng):
    theta = rng.uniform(-np.pi, np.pi, size=(2, 2, 2))
    psi = random_state(rng, 2)
    state = ansatz(StateVector(2, psi.copy()), theta)
    np.testing.assert_allclose(state.amplitudes, ansatz_unitary(2, theta) @ psi, atol=1e-12)


def test_ansatz_rejects_bad_shapes():
    with pytest.raises(ShapeError):
        ansatz(zero_state(3), np.zeros((1, 2, 2)))
    with pytest.raises(ValueError):
        ansatz(zero_state(2), np.zeros((1, 2, 2)), direction="sideways")


def test_fidelity_matches_dense_oracle(rng):
    cfg = QaeConfig(n_total=4, n_latent=3, n_trash=1, n_layers=2)
    theta = rng.uniform(-np.pi, np.pi, size=cfg.theta_shape)
    angles = rng.uniform(-np.pi, np.pi, size=(6, 4))
    forward = qae_forward_angles(angles, theta, cfg)
    expected = [reset_invert_fidelity(a, theta, cfg.n_trash) for a in angles]
    np.testing.assert_allclose(forward.fidelity, expected, atol=1e-10)


def test_reset_invert_fidelity_equals_trash_zero_probability(rng):
    cfg = QaeConfig(n_total=4, n_latent=2, n_trash=2, n_layers=3)
    theta = rng.uniform(-np.pi, np.pi, size=cfg.theta_shape)
    angles = rng.uniform(-np.pi, np.pi, size=(8, 4))
    forward = qae_forward_angles(angles, theta, cfg)
    np.testing.assert_allclose(forward.fidelity, forward.trash_zero_prob, atol=1e-10)
    assert np.all((forward.fidelity >= 0.0) & (forward.fidelity <= 1.0 + 1e-12))
    assert np.all(np.abs(forward.latent) <= 1.0 + 1e-12)


def test_degenerate_reset_gives_zero_fidelity():
    cfg = QaeConfig(n_total=2, n_latent=1, n_trash=1, n_layers=0)
    forward = qae_forward_angles(np.array([[0.0, np.pi], [0.0, 0.0]]), np.zeros(cfg.theta_shape), cfg)
    np.testing.assert_allclose(forward.fidelity, [0.0, 1.0], atol=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_parameter_shift_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    n_trash = int(rng.integers(1, 4))
    cfg = QaeConfig(n_total=4, n_latent=4 - n_trash, n_trash=n_trash, n_layers=2)
    theta = rng.uniform(-np.pi, np.pi, size=cfg.theta_shape)
    angles = rng.uniform(-np.pi, np.pi, size=(3, 4))
    upstream = rng.normal(size=(3, cfg.n_latent + 2))

    def objective():
        return float(np.sum(upstream * observables(angles, theta, cfg)))

    grad_theta, grad_angles = param_shift_grad(angles, theta, cfg, upstream)
    np.testing.assert_allclose(grad_theta, numerical_grad(objective, theta), atol=1e-5)
    np.testing.assert_allclose(grad_angles, numerical_grad(objective, angles), atol=1e-5)


def test_last_layer_rz_does_not_affect_outputs(rng):
    cfg = QaeConfig(n_total=3, n_latent=2, n_trash=1, n_layers=2)
    theta = rng.uniform(-1.0, 1.0, size=cfg.theta_shape)
    angles = rng.uniform(-1.0, 1.0, size=(3, 3))
    grad_theta, _ = param_shift_grad(angles, theta, cfg, np.ones((3, cfg.n_latent + 2)))
    np.testing.assert_allclose(grad_theta[-1, :, 1], 0.0, atol=1e-12)


def test_encode_angles_are_bounded_and_differentiable(rng):
    projection = Dense(4, 3, rng)
    z = Tensor(rng.normal(scale=50.0, size=(5, 4)))
    angles = encode_angles(z, projection)
    assert np.all(np.abs(angles.data) <= math.pi)

    x = Tensor(rng.normal(size=(2, 4)), requires_grad=True)
    encode_angles(x, projection).sum().backward()

    def objective():
        return float(encode_angles(Tensor(x.data), projection).data.sum())

    np.testing.assert_allclose(x.grad, numerical_grad(objective, x.data), atol=1e-6)


def test_init_params_are_small(rng):
    theta = init_circuit_params(QaeConfig(), rng)
    assert theta.shape == (5, 8, 2)
    assert np.all(np.abs(theta) <= 0.1)


def test_module_backward_reaches_encoder_and_theta(rng):
    cfg = QaeConfig(n_total=3, n_latent=2, n_trash=1, n_layers=1)
    qae = QuantumAutoencoder(cfg, d_model=4, rng=rng)
    out = qae(Tensor(rng.normal(size=(2, 4))))
    assert out.latent.shape == (2, 2)
    (out.latent.sum() + out.fidelity.sum()).backward()
    assert qae.theta.grad.shape == cfg.theta_shape
    assert qae.encoder.weight.grad.shape == (4, 3)
    assert set(qae.parameters()) == {"encoder.weight", "encoder.bias", "theta"}


@pytest.mark.slow
def test_encoder_and_ansatz_learn_to_compress():
    rng = np.random.default_rng(7)
    cfg = QaeConfig(n_total=4, n_latent=3, n_trash=1, n_layers=2)
    qae = QuantumAutoencoder(cfg, d_model=4, rng=rng)
    z = Tensor(rng.normal(size=(16, 4)))
    opt = Adam(qae.parameters())

    for _ in range(500):
        opt.zero_grad()
        out = qae(z)
        ((1.0 - out.fidelity).mean() + (1.0 - out.trash_zero_prob).mean()).backward()
        opt.step(lr=0.01)

    out = qae(z)
    assert out.fidelity.data.mean() >= 0.9
    assert out.trash_zero_prob.data.mean() >= 0.9
