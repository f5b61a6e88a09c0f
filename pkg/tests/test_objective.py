from functools import lru_cache

import numpy as np
import pytest

from errors import ConfigurationError, DegenerateInputError, ShapeError
from models.corpus import EOS_ID, PAD_ID, SOS_ID
from models.objective import (LossComponents, LossWeights, batch_similarity, levenshtein_distance,
                              levenshtein_similarity, sequence_ce, smiles_loss, total_loss,
                              weighted_total)
from nn.tensor import Tensor
from tests.oracles import numerical_grad


def _recursive_distance(a: str, b: str) -> int:
    @lru_cache(maxsize=None)
    def d(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        return min(d(i - 1, j) + 1, d(i, j - 1) + 1, d(i - 1, j - 1) + (a[i - 1] != b[j - 1]))
    return d(len(a), len(b))


def _random_smiles_like(rng, max_len=8):
    return "".join(rng.choice(list("CNO()=1c"), size=rng.integers(0, max_len + 1)))


def test_levenshtein_matches_recursive_definition(rng):
    for _ in range(200):
        a, b = _random_smiles_like(rng), _random_smiles_like(rng)
        assert levenshtein_distance(a, b) == _recursive_distance(a, b)


@pytest.mark.parametrize("a,b,expected", [
    ("kitten", "sitting", 3),
    ("", "CCO", 3),
    ("CCO", "CCO", 0),
    ("c1ccccc1", "c1ccncc1", 1),
])
def test_levenshtein_known_values(a, b, expected):
    assert levenshtein_distance(a, b) == expected


def test_levenshtein_metric_properties(rng):
    for _ in range(100):
        a, b, c = (_random_smiles_like(rng) for _ in range(3))
        assert levenshtein_distance(a, b) == levenshtein_distance(b, a)
        assert levenshtein_distance(a, c) <= levenshtein_distance(a, b) + levenshtein_distance(b, c)


def test_similarity_values():
    assert levenshtein_similarity("CCO", "CCN") == pytest.approx(2 / 3)
    assert levenshtein_similarity("", "") == 1.0
    assert levenshtein_similarity("", "C") == 0.0
    assert levenshtein_similarity("CCO", "CCO") == 1.0


def test_batch_similarity_and_smiles_loss():
    sims = batch_similarity(["CCO", ""], ["CCN", "CC"])
    np.testing.assert_allclose(sims, [2 / 3, 0.0])
    assert smiles_loss(sims) == pytest.approx(1 - 1 / 3)
    with pytest.raises(ShapeError):
        batch_similarity(["C"], [])


def test_uniform_logits_cross_entropy_is_log_vocab():
    target = np.array([[SOS_ID, 5, 6, EOS_ID]])
    logits = Tensor(np.zeros((1, 3, 8)))
    assert float(sequence_ce(logits, target).data) == pytest.approx(np.log(8))


def test_confident_correct_logits_give_near_zero_loss():
    target = np.array([[SOS_ID, 4, EOS_ID]])
    logits = np.full((1, 2, 6), -50.0)
    logits[0, 0, 4] = 50.0
    logits[0, 1, EOS_ID] = 50.0
    assert float(sequence_ce(Tensor(logits), target).data) < 1e-12


def test_padding_targets_are_ignored(rng):
    target = np.array([[SOS_ID, 4, EOS_ID, PAD_ID, PAD_ID]])
    logits = rng.normal(size=(1, 4, 6))
    short = float(sequence_ce(Tensor(logits[:, :2]), target[:, :3]).data)
    long = float(sequence_ce(Tensor(logits), target).data)
    assert long == pytest.approx(short)

    changed = logits.copy()
    changed[:, 2:] = 99.0
    assert float(sequence_ce(Tensor(changed), target).data) == pytest.approx(short)


def test_cross_entropy_gradient(rng):
    target = np.array([[SOS_ID, 4, 5, EOS_ID], [SOS_ID, 5, EOS_ID, PAD_ID]])
    logits = Tensor(rng.normal(size=(2, 3, 7)), requires_grad=True)
    sequence_ce(logits, target).backward()
    expected = numerical_grad(lambda: float(sequence_ce(Tensor(logits.data), target).data), logits.data)
    np.testing.assert_allclose(logits.grad, expected, atol=1e-7)


def test_cross_entropy_edge_cases():
    with pytest.raises(DegenerateInputError):
        sequence_ce(Tensor(np.zeros((1, 2, 5))), np.array([[SOS_ID, PAD_ID, PAD_ID]]))
    with pytest.raises(ShapeError):
        sequence_ce(Tensor(np.zeros((1, 1, 5))), np.array([[SOS_ID, 4, EOS_ID]]))


def _components(fid=0.3, ce=1.7, trash=0.2, smiles=0.4):
    return LossComponents(
        fidelity_loss=Tensor(fid, requires_grad=True),
        ce=Tensor(ce, requires_grad=True),
        trash_loss=Tensor(trash, requires_grad=True),
        smiles_loss=smiles,
        fidelity=1 - fid,
        similarity=1 - smiles,
        trash_zero_prob=1 - trash,
    )


def test_total_matches_weighted_components():
    weights = LossWeights(fidelity=1.0, ce=2.0, smiles=0.5, trash=0.25)
    total, metrics = total_loss(_components(), weights)
    expected = 0.3 + 2.0 * 1.7 + 0.5 * 0.4 + 0.25 * 0.2
    assert metrics.loss_total == pytest.approx(expected, abs=1e-12)
    assert weighted_total(metrics, weights) == pytest.approx(metrics.loss_total, abs=1e-12)


def test_total_is_linear_in_weights():
    weights = LossWeights()
    _, base = total_loss(_components(), weights)
    _, doubled = total_loss(_components(), weights.scaled(2.0))
    assert doubled.loss_total == pytest.approx(2 * base.loss_total)


def test_smiles_term_carries_no_gradient():
    components = _components()
    total, _ = total_loss(components, LossWeights(fidelity=1.0, ce=3.0, smiles=10.0, trash=0.5))
    total.backward()
    assert float(components.fidelity_loss.grad) == pytest.approx(1.0)
    assert float(components.ce.grad) == pytest.approx(3.0)
    assert float(components.trash_loss.grad) == pytest.approx(0.5)


@pytest.mark.parametrize("kwargs", [{"fidelity": -1.0}, {"fidelity": 0, "ce": 0, "smiles": 0, "trash": 0}])
def test_loss_weight_validation(kwargs):
    with pytest.raises(ConfigurationError):
        LossWeights(**kwargs)
