"""Shared fixtures."""

import numpy as np
import pytest

from models.corpus import Vocabulary, build_vocab
from models.train_config import build_train_config

TOY_SMILES = [
    "CCO", "CCN", "CC(=O)O", "c1ccccc1", "CCCl", "C#N", "CC(C)O", "OCCO",
    "CN", "CCBr", "C=O", "NCC(=O)O", "CC#N", "COC", "CCCC", "c1ccncc1",
]


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def toy_vocab() -> Vocabulary:
    return build_vocab(TOY_SMILES)


@pytest.fixture
def corpus_file(tmp_path):
    path = tmp_path / "toy.smi"
    path.write_text("\n".join(TOY_SMILES) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def tiny_config(tmp_path):
    """Smallest sensible model: fast enough for per-test training."""
    return build_train_config("toy", overrides={
        "epochs": "2",
        "batch_size": "4",
        "n_qubits": "3",
        "n_latent": "2",
        "n_trash": "1",
        "qae_layers": "1",
        "ket_order": "2",
        "ket_site_dim": "2",
        "model_dim": "8",
        "token_dim": "8",
        "hidden_dim": "8",
        "decoder_layers": "1",
        "attention_heads": "2",
        "max_len": "12",
        "max_decode_len": "12",
        "out_dir": str(tmp_path / "run"),
    })
