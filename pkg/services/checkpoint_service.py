"""
Checkpoint Service
==================

Saves and restores the full training state as one JSON document: every
parameter, the Adam moments, epoch and step counters, the random generator
state, the vocabulary and the resolved run configuration.

Arrays are stored as ``{"shape": [...], "data": [...]}`` with Python float
reprs, which round-trip exactly, and keys are sorted, so save -> load -> save
is byte-identical.
"""

import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from config import CHECKPOINT_FORMAT_VERSION
from errors import CheckpointError, CompatibilityError
from logging_setup import safe_log
from models.corpus import Vocabulary
from nn.layers import Layer
from nn.optim import Adam, AdamState

logger = logging.getLogger(__name__)

_REQUIRED_KEYS = ("format_version", "params", "optimizer", "epoch", "step", "rng_state", "vocab", "config")


@dataclass
class Checkpoint:
    """Everything needed to resume or evaluate a run."""
    params: Dict[str, np.ndarray]
    optimizer: AdamState
    epoch: int  # completed epochs
    step: int  # completed optimizer steps
    rng_state: Dict[str, Any]
    vocab: Vocabulary
    config: Dict[str, Any]
    format_version: int = CHECKPOINT_FORMAT_VERSION


def _encode_array(array: np.ndarray) -> Dict[str, Any]:
    array = np.asarray(array, dtype=np.float64)
    return {"shape": list(array.shape), "data": array.ravel().tolist()}


def _decode_array(entry: Dict[str, Any]) -> np.ndarray:
    return np.asarray(entry["data"], dtype=np.float64).reshape(entry["shape"])


def _encode_arrays(arrays: Dict[str, np.ndarray]) -> Dict[str, Any]:
    return {name: _encode_array(value) for name, value in arrays.items()}


def _decode_arrays(entries: Dict[str, Any]) -> Dict[str, np.ndarray]:
    return {name: _decode_array(entry) for name, entry in entries.items()}


def checkpoint_to_dict(checkpoint: Checkpoint) -> Dict[str, Any]:
    return {
        "format_version": checkpoint.format_version,
        "params": _encode_arrays(checkpoint.params),
        "optimizer": {
            "step": checkpoint.optimizer.step,
            "m": _encode_arrays(checkpoint.optimizer.m),
            "v": _encode_arrays(checkpoint.optimizer.v),
        },
        "epoch": checkpoint.epoch,
        "step": checkpoint.step,
        "rng_state": checkpoint.rng_state,
        "vocab": checkpoint.vocab.to_dict(),
        "config": checkpoint.config,
    }


def checkpoint_from_dict(data: Dict[str, Any]) -> Checkpoint:
    missing = [key for key in _REQUIRED_KEYS if key not in data]
    if missing:
        raise CheckpointError(f"checkpoint is missing {', '.join(missing)}")
    version = data["format_version"]
    if version != CHECKPOINT_FORMAT_VERSION:
        raise CheckpointError(f"checkpoint format version {version} is not supported "
                              f"(this build reads version {CHECKPOINT_FORMAT_VERSION})")
    try:
        optimizer = AdamState(step=int(data["optimizer"]["step"]),
                              m=_decode_arrays(data["optimizer"]["m"]),
                              v=_decode_arrays(data["optimizer"]["v"]))
        return Checkpoint(
            params=_decode_arrays(data["params"]),
            optimizer=optimizer,
            epoch=int(data["epoch"]),
            step=int(data["step"]),
            rng_state=data["rng_state"],
            vocab=Vocabulary.from_dict(data["vocab"]),
            config=dict(data["config"]),
            format_version=version,
        )
    except (KeyError, TypeError, ValueError) as e:
        raise CheckpointError(f"checkpoint has malformed contents: {e}") from e


def dumps_checkpoint(checkpoint: Checkpoint) -> str:
    return json.dumps(checkpoint_to_dict(checkpoint), sort_keys=True, indent=2)


def save_checkpoint(checkpoint: Checkpoint, path: str):
    """
    Write a checkpoint, replacing any existing file atomically.

    Args:
        checkpoint: State to persist
        path: Destination file
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = target.with_name(target.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as f:
        f.write(dumps_checkpoint(checkpoint))
    os.replace(tmp, target)
    safe_log(logger, "debug", f"💾 Saved checkpoint (epoch {checkpoint.epoch}, step {checkpoint.step}) to {target}")


def load_checkpoint(path: str) -> Checkpoint:
    """
    Read a checkpoint file.

    Raises:
        FileNotFoundError: no such file
        CheckpointError: truncated or corrupt file, or wrong format version
    """
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise CheckpointError(f"checkpoint {path} is corrupt or truncated: {e}") from e
    if not isinstance(data, dict):
        raise CheckpointError(f"checkpoint {path} is not a JSON object")
    checkpoint = checkpoint_from_dict(data)
    logger.debug(f"Loaded checkpoint {path} (epoch {checkpoint.epoch})")
    return checkpoint


def capture_checkpoint(model: Layer, optimizer: Adam, epoch: int, step: int,
                       rng: np.random.Generator, vocab: Vocabulary,
                       config: Dict[str, Any]) -> Checkpoint:
    """Snapshot live training objects (arrays are copied)."""
    state = optimizer.state
    return Checkpoint(
        params={name: t.data.copy() for name, t in model.parameters().items()},
        optimizer=AdamState(step=state.step,
                            m={k: v.copy() for k, v in state.m.items()},
                            v={k: v.copy() for k, v in state.v.items()}),
        epoch=epoch,
        step=step,
        rng_state=json.loads(json.dumps(rng.bit_generator.state)),
        vocab=vocab,
        config=dict(config),
    )


def restore_parameters(model: Layer, params: Dict[str, np.ndarray]):
    """
    Copy stored arrays into a freshly built model.

    Raises:
        CompatibilityError: parameter names or shapes differ
    """
    live = model.parameters()
    if set(live) != set(params):
        missing = sorted(set(live) - set(params))
        extra = sorted(set(params) - set(live))
        raise CompatibilityError(f"checkpoint parameters do not match the model "
                                 f"(missing {missing[:5]}, unexpected {extra[:5]})")
    for name, tensor in live.items():
        if tensor.data.shape != params[name].shape:
            raise CompatibilityError(f"parameter {name}: checkpoint shape {params[name].shape} "
                                     f"vs model {tensor.data.shape}")
        tensor.data = params[name].copy()


def restore_rng(state: Dict[str, Any], rng: Optional[np.random.Generator] = None) -> np.random.Generator:
    rng = rng or np.random.default_rng()
    rng.bit_generator.state = state
    return rng
