"""
Plot Service
============

Standalone SVG line charts drawn from a metrics CSV:

- fidelity_similarity.svg  fidelity and classical similarity per epoch
- loss_components.svg      the four loss terms per epoch, EMA-smoothed over the raw curve
- metrics_vs_lr.svg        fidelity and similarity against the epoch's learning rate
"""

import logging
from pathlib import Path
from typing import Dict, List, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from errors import EmptyMetricsError  # noqa: E402
from logging_setup import safe_log  # noqa: E402
from services.training_service import read_metrics  # noqa: E402

logger = logging.getLogger(__name__)

FIDELITY_PLOT = "fidelity_similarity.svg"
LOSS_PLOT = "loss_components.svg"
LR_PLOT = "metrics_vs_lr.svg"

_LOSS_SERIES = (
    ("loss_fidelity", "fidelity loss"),
    ("loss_ce", "cross-entropy"),
    ("loss_smiles", "SMILES loss"),
    ("loss_trash", "trash loss"),
)

# Fixed metadata and id salt keep the SVG output identical across runs
_SVG_METADATA = {"Date": None}
matplotlib.rcParams["svg.hashsalt"] = "qsmiles"


def ema(values: Sequence[float], smoothing: float) -> np.ndarray:
    """Exponential moving average; smoothing 0 returns the input."""
    if not 0.0 <= smoothing < 1.0:
        raise ValueError(f"smoothing must be in [0, 1), got {smoothing}")
    values = np.asarray(values, dtype=np.float64)
    out = np.empty_like(values)
    running = values[0] if len(values) else 0.0
    for i, value in enumerate(values):
        running = smoothing * running + (1.0 - smoothing) * value
        out[i] = running
    return out


def _column(rows: List[Dict[str, float]], key: str) -> np.ndarray:
    return np.array([row[key] for row in rows], dtype=np.float64)


def _save(fig, path: Path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_SVG_METADATA)
    plt.close(fig)


def plot_fidelity_similarity(rows: List[Dict[str, float]], path: Path):
    epochs = _column(rows, "epoch")
    fig, ax = plt.subplots(figsize=(8, 5))
    ax.plot(epochs, _column(rows, "fidelity"), marker="o", label="quantum fidelity")
    ax.plot(epochs, _column(rows, "similarity"), marker="s", label="classical similarity")
    ax.set_xlabel("Epoch")
    ax.set_ylabel("Score")
    ax.set_ylim(0.0, 1.05)
    ax.set_title("Fidelity and similarity")
    ax.grid(True)
    ax.legend()
    _save(fig, path)


def plot_loss_components(rows: List[Dict[str, float]], path: Path, smoothing: float = 0.6):
    epochs = _column(rows, "epoch")
    fig, ax = plt.subplots(figsize=(8, 5))
    for key, label in _LOSS_SERIES:
        raw = _column(rows, key)
        line, = ax.plot(epochs, raw, alpha=0.3 if smoothing > 0 else 1.0)
        if smoothing > 0:
            ax.plot(epochs, ema(raw, smoothing), color=line.get_color(), label=label)
        else:
            line.set_label(label)
    ax.set_xlabel("Epoch")
    ax.set_ylabel("Loss")
    ax.set_title("Loss components")
    ax.grid(True)
    ax.legend()
    _save(fig, path)


def plot_metrics_vs_lr(rows: List[Dict[str, float]], path: Path):
    lr = _column(rows, "lr")
    fig, ax = plt.subplots(figsize=(8, 5))
    ax.plot(lr, _column(rows, "fidelity"), marker="o", label="quantum fidelity")
    ax.plot(lr, _column(rows, "similarity"), marker="s", label="classical similarity")
    ax.set_xlabel("Learning rate")
    ax.set_ylabel("Score")
    ax.set_title("Fidelity and similarity against learning rate")
    if np.all(lr > 0) and lr.max() / lr.min() > 100:
        ax.set_xscale("log")
    ax.grid(True)
    ax.legend()
    _save(fig, path)


def write_plots(metrics_path: str, out_dir: str, smoothing: float = 0.6) -> List[Path]:
    """
    Render every chart for a metrics CSV.

    Args:
        metrics_path: CSV written by the trainer
        out_dir: Destination directory
        smoothing: EMA factor for the loss curves

    Returns:
        Paths of the written SVG files
    """
    rows = read_metrics(metrics_path)
    if not rows:
        raise EmptyMetricsError(f"no metric rows in {metrics_path}")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / FIDELITY_PLOT, out / LOSS_PLOT, out / LR_PLOT]
    plot_fidelity_similarity(rows, paths[0])
    plot_loss_components(rows, paths[1], smoothing)
    plot_metrics_vs_lr(rows, paths[2])
    safe_log(logger, "info", f"📈 Wrote {len(paths)} plots to {out}")
    return paths
