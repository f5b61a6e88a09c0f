import numpy as np
import pytest

from errors import ContractViolationError, DegenerateInputError, ShapeError
from nn import Adam, AdamState, Dense, LSTMCell, MultiHeadAttention, Tensor, adam_step, no_grad
from nn.layers import softmax_cross_entropy, stack_rows
from nn.tensor import (concat, embedding, exp, log, log_softmax, matmul, reshape, sigmoid, softmax,
                       tanh, transpose)
from tests.oracles import numerical_grad

TRIALS = range(50)


def _check_grad(param: Tensor, loss_fn, rtol=1e-4, atol=1e-6):
    param.zero_grad()
    loss_fn().backward()
    expected = numerical_grad(lambda: float(loss_fn().data), param.data)
    np.testing.assert_allclose(param.grad, expected, rtol=rtol, atol=atol)


def test_square_gradient_at_three():
    x = Tensor(np.array(3.0), requires_grad=True)
    (x * x).backward()
    assert float(x.grad) == 6.0


PRIMITIVES = {
    "tanh": lambda x: tanh(x),
    "sigmoid": lambda x: sigmoid(x),
    "exp": lambda x: exp(x * 0.5),
    "log": lambda x: log(x * x + 1.0),
    "slice": lambda x: x[1:, ::2],
    "fancy_slice": lambda x: x[np.array([0, 2, 0]), 1],
    "mean": lambda x: x.mean(axis=0),
    "sum_keepdims": lambda x: x.sum(axis=1, keepdims=True),
    "softmax": lambda x: softmax(x, axis=-1),
    "masked_softmax": lambda x: softmax(x, axis=-1, mask=np.array([True, False, True, True])),
    "log_softmax": lambda x: log_softmax(x, axis=0),
    "transpose": lambda x: transpose(x, (1, 0)),
    "reshape": lambda x: reshape(x, (2, 6)),
    "matmul": lambda x: matmul(x, np.arange(8.0).reshape(4, 2) / 8.0),
    "embedding": lambda x: embedding(x, np.array([[2, 0], [2, 1]])),
}


@pytest.mark.parametrize("name", sorted(PRIMITIVES))
def test_primitive_gradients(name):
    op = PRIMITIVES[name]
    for seed in range(5):
        rng = np.random.default_rng(seed)
        x = Tensor(rng.normal(size=(3, 4)), requires_grad=True)
        w = rng.normal(size=op(Tensor(x.data)).shape)
        _check_grad(x, lambda: (op(x) * w).sum())


def test_softmax_rows_sum_to_one(rng):
    out = softmax(Tensor(rng.normal(scale=10.0, size=(20, 7))), axis=-1)
    np.testing.assert_allclose(out.data.sum(axis=-1), 1.0, atol=1e-12)


@pytest.mark.parametrize("seed", TRIALS)
def test_dense_gradients(seed):
    rng = np.random.default_rng(seed)
    layer = Dense(4, 3, rng)
    x = Tensor(rng.normal(size=(5, 4)), requires_grad=True)
    w = rng.normal(size=(5, 3))

    def loss():
        return (layer(x) * w).sum()

    _check_grad(layer.weight, loss)
    _check_grad(layer.bias, loss)
    _check_grad(x, loss)


@pytest.mark.parametrize("seed", TRIALS)
def test_lstm_cell_gradients(seed):
    rng = np.random.default_rng(seed)
    cell = LSTMCell(3, 4, rng)
    x = Tensor(rng.normal(size=(2, 3)), requires_grad=True)
    h0 = Tensor(rng.normal(size=(2, 4)), requires_grad=True)
    c0 = Tensor(rng.normal(size=(2, 4)), requires_grad=True)
    w = rng.normal(size=(2, 4))

    def loss():
        h, c = cell(x, h0, c0)
        return (h * w).sum() + c.sum()

    _check_grad(cell.w_input, loss)
    _check_grad(cell.w_hidden, loss)
    _check_grad(cell.bias, loss)
    _check_grad(h0, loss)
    _check_grad(c0, loss)


def test_lstm_forget_bias_starts_at_one(rng):
    cell = LSTMCell(2, 3, rng)
    np.testing.assert_allclose(cell.bias.data[3:6], 1.0)
    np.testing.assert_allclose(cell.bias.data[:3], 0.0)


def test_lstm_with_zero_weights_stays_at_zero(rng):
    cell = LSTMCell(3, 4, rng)
    for tensor in cell.parameters().values():
        tensor.data = np.zeros_like(tensor.data)
    h, c = cell(Tensor(rng.normal(size=(2, 3))), Tensor(rng.normal(size=(2, 4))), Tensor(np.zeros((2, 4))))
    np.testing.assert_array_equal(c.data, 0.0)
    np.testing.assert_array_equal(h.data, 0.0)


def test_lstm_cell_state_grows_by_at_most_one(rng):
    cell = LSTMCell(3, 4, rng)
    for tensor in cell.parameters().values():
        tensor.data = rng.normal(scale=5.0, size=tensor.shape)
    c_prev = rng.normal(scale=3.0, size=(50, 4))
    _, c = cell(Tensor(rng.normal(size=(50, 3))), Tensor(rng.normal(size=(50, 4))), Tensor(c_prev))
    assert np.all(np.abs(c.data) <= np.abs(c_prev) + 1.0 + 1e-12)


def _mask(rng, batch, length):
    mask = rng.random((batch, length)) < 0.7
    mask[:, 0] = True
    return mask


@pytest.mark.parametrize("seed", TRIALS)
def test_attention_gradients(seed):
    rng = np.random.default_rng(seed)
    attn = MultiHeadAttention(d_query=4, d_memory=3, d_h=4, n_heads=2, rng=rng)
    query = Tensor(rng.normal(size=(2, 4)), requires_grad=True)
    memory = Tensor(rng.normal(size=(2, 5, 3)), requires_grad=True)
    mask = _mask(rng, 2, 5)
    w = rng.normal(size=(2, 4))

    def loss():
        return (attn(query, memory, mask).context * w).sum()

    _check_grad(query, loss)
    _check_grad(memory, loss)
    _check_grad(attn.key.weight, loss)
    _check_grad(attn.output.bias, loss)


def test_attention_weights_respect_mask(rng):
    attn = MultiHeadAttention(d_query=4, d_memory=3, d_h=4, n_heads=2, rng=rng)
    mask = np.array([[True] * 5, [True, True, False, False, False]])
    weights = attn(Tensor(rng.normal(size=(2, 4))), Tensor(rng.normal(size=(2, 5, 3))), mask).weights
    assert weights.shape == (2, 2, 5)
    np.testing.assert_allclose(weights.sum(axis=-1), 1.0, atol=1e-9)
    np.testing.assert_array_equal(weights[1, :, 2:], 0.0)


def test_attention_over_one_position_returns_its_projected_value(rng):
    attn = MultiHeadAttention(d_query=4, d_memory=3, d_h=6, n_heads=3, rng=rng)
    memory = rng.normal(size=(2, 1, 3))
    out = attn(Tensor(rng.normal(size=(2, 4))), Tensor(memory))
    np.testing.assert_array_equal(out.weights, 1.0)
    expected = attn.output(attn.value(Tensor(memory[:, 0, :]))).data
    np.testing.assert_allclose(out.context.data, expected, atol=1e-12)


def test_attention_single_sample_shape(rng):
    attn = MultiHeadAttention(d_query=3, d_memory=3, d_h=6, n_heads=3, rng=rng)
    out = attn(Tensor(rng.normal(size=3)), Tensor(rng.normal(size=(4, 3))))
    assert out.context.shape == (6,)


def test_attention_rejects_indivisible_heads(rng):
    with pytest.raises(ShapeError):
        MultiHeadAttention(d_query=3, d_memory=3, d_h=10, n_heads=4, rng=rng)


def test_attention_rejects_empty_memory(rng):
    attn = MultiHeadAttention(d_query=2, d_memory=2, d_h=2, n_heads=1, rng=rng)
    with pytest.raises(ShapeError):
        attn(Tensor(np.zeros((1, 2))), Tensor(np.zeros((1, 0, 2))))


def test_masked_softmax():
    out = softmax(Tensor(np.array([[1.0, 2.0, 3.0]])), mask=np.array([[True, False, True]]))
    assert out.data[0, 1] == 0.0
    np.testing.assert_allclose(out.data.sum(), 1.0)
    with pytest.raises(DegenerateInputError):
        softmax(Tensor(np.zeros((1, 2))), mask=np.array([[False, False]]))


def test_cross_entropy_of_uniform_logits():
    loss = softmax_cross_entropy(Tensor(np.zeros((2, 4))), np.array([1, 3]))
    np.testing.assert_allclose(loss.data, np.log(4.0))


@pytest.mark.parametrize("seed", TRIALS)
def test_cross_entropy_gradient(seed):
    rng = np.random.default_rng(seed)
    logits = Tensor(rng.normal(size=(3, 5)), requires_grad=True)
    targets = rng.integers(1, 5, size=3)
    _check_grad(logits, lambda: softmax_cross_entropy(logits, targets).sum())

    probs = np.exp(logits.data) / np.exp(logits.data).sum(axis=-1, keepdims=True)
    onehot = np.eye(5)[targets]
    np.testing.assert_allclose(logits.grad, probs - onehot, atol=1e-12)


def test_cross_entropy_contract():
    logits = Tensor(np.zeros((2, 4)))
    with pytest.raises(ContractViolationError):
        softmax_cross_entropy(logits, np.array([0, 1]))
    with pytest.raises(ShapeError):
        softmax_cross_entropy(logits, np.array([1, 4]))


def test_concat_and_stack_gradients(rng):
    a = Tensor(rng.normal(size=(2, 3)), requires_grad=True)
    b = Tensor(rng.normal(size=(2, 1)), requires_grad=True)
    w = rng.normal(size=(2, 4))
    _check_grad(a, lambda: (concat([a, b], axis=-1) * w).sum())
    stacked = stack_rows([a, a, a])
    assert stacked.shape == (2, 3, 3)


def test_broadcast_mismatch_is_shape_error():
    with pytest.raises(ShapeError):
        Tensor(np.zeros((2, 3))) + Tensor(np.zeros((4,)))


def test_no_grad_records_nothing(rng):
    layer = Dense(2, 2, rng)
    with no_grad():
        out = layer(Tensor(np.ones((1, 2))))
    assert not out.requires_grad
    out.sum().backward()
    assert layer.weight.grad is None


def test_adam_first_step_moves_by_learning_rate():
    state = AdamState()
    params = {"w": np.array([1.0, -2.0])}
    updated = adam_step(params, {"w": np.array([0.5, -3.0])}, state, lr=0.1)
    np.testing.assert_allclose(updated["w"], [0.9, -1.9], atol=1e-6)
    assert state.step == 1


def test_adam_minimises_quadratic():
    w = Tensor(np.array([3.0, -4.0]), requires_grad=True)
    opt = Adam({"w": w})
    for _ in range(500):
        opt.zero_grad()
        (w * w).sum().backward()
        opt.step(lr=0.05)
    np.testing.assert_allclose(w.data, 0.0, atol=1e-3)


def test_adam_missing_gradient_counts_as_zero():
    state = AdamState()
    updated = adam_step({"w": np.ones(2)}, {}, state, lr=0.1)
    np.testing.assert_allclose(updated["w"], 1.0)
