"""
Training Service
================

Runs the training loop: shuffled mini-batches, forward through embedding,
circuit and decoder, composite loss, backpropagation (tape plus parameter
shift), Adam with a per-epoch cosine learning rate, one metrics CSV row and
one checkpoint per epoch. Also hosts the evaluation pass shared by the
``eval`` and ``reconstruct`` commands and by the end-of-epoch metrics.
"""

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
from tqdm import tqdm

from config import CHECKPOINT_FILE, METRICS_FILE, NONFINITE_DUMP_FILE, SHOW_PROGRESS
from errors import CompatibilityError, ConfigurationError, NonFiniteLossError
from logging_setup import safe_log
from models.corpus import UNK_ID, Corpus, Vocabulary
from models.decoder import teacher_forcing_alpha
from models.hybrid_autoencoder import HybridAutoencoder, Reconstruction, compute_batch_loss
from models.objective import BatchMetrics
from models.train_config import TrainConfig
from nn.optim import Adam
from services.checkpoint_service import (Checkpoint, capture_checkpoint, restore_parameters,
                                         restore_rng, save_checkpoint)

logger = logging.getLogger(__name__)

METRIC_COLUMNS = (
    "epoch", "step", "lr",
    "loss_total", "loss_fidelity", "loss_ce", "loss_smiles", "loss_trash",
    "fidelity", "similarity", "trash_zero_prob",
)

_LOSS_COLUMNS = ("loss_total", "loss_fidelity", "loss_ce", "loss_smiles", "loss_trash")


def cosine_lr(step: int, total_steps: int, lr_max: float, lr_min: float) -> float:
    """lr_min + (lr_max - lr_min) * (1 + cos(pi * step / total_steps)) / 2."""
    if total_steps <= 0:
        raise ConfigurationError(f"cosine schedule needs total_steps > 0, got {total_steps}")
    if not 0 <= step <= total_steps:
        raise ConfigurationError(f"cosine schedule step {step} outside [0, {total_steps}]")
    return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + math.cos(math.pi * step / total_steps))


class MetricsWriter:
    """Append-only metrics CSV with a fixed column order."""

    def __init__(self, path: Path, append: bool = False):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if not (append and self.path.exists()):
            with open(self.path, "w", newline="", encoding="utf-8") as f:
                csv.writer(f).writerow(METRIC_COLUMNS)

    def log(self, row: Dict[str, float]):
        values = [row[column] for column in METRIC_COLUMNS]
        with open(self.path, "a", newline="", encoding="utf-8") as f:
            csv.writer(f).writerow([repr(v) if isinstance(v, float) else v for v in values])


def read_metrics(path: str) -> List[Dict[str, float]]:
    """Load a metrics CSV into rows of floats (epoch and step as ints)."""
    rows = []
    with open(path, "r", newline="", encoding="utf-8") as f:
        for raw in csv.DictReader(f):
            row = {key: float(value) for key, value in raw.items()}
            row["epoch"] = int(row["epoch"])
            row["step"] = int(row["step"])
            rows.append(row)
    return rows


@dataclass
class EvaluationResult:
    """Corpus-level figures of merit plus every reconstruction."""
    fidelity: float
    similarity: float
    trash_zero_prob: float
    reconstructions: List[Reconstruction] = field(default_factory=list)

    @property
    def trash_deviation(self) -> float:
        return 1.0 - self.trash_zero_prob

    @property
    def count(self) -> int:
        return sum(len(r.smiles) for r in self.reconstructions)

    def molecule_rows(self) -> List[Dict[str, object]]:
        rows = []
        for rec in self.reconstructions:
            for i, smiles in enumerate(rec.smiles):
                rows.append({
                    "smiles": smiles,
                    "reconstruction": rec.reconstructed[i],
                    "fidelity": float(rec.fidelity[i]),
                    "trash_zero_prob": float(rec.trash_zero_prob[i]),
                    "similarity": float(rec.similarity[i]),
                })
        return rows

    def as_lines(self) -> List[str]:
        return [
            f"molecules: {self.count}",
            f"fidelity: {self.fidelity:.6f}",
            f"similarity: {self.similarity:.6f}",
            f"trash_zero_prob: {self.trash_zero_prob:.6f}",
            f"trash_deviation: {self.trash_deviation:.6f}",
        ]


def evaluate_model(model: HybridAutoencoder, corpus: Corpus, batch_size: int) -> EvaluationResult:
    """Greedy, alpha = 0 pass over the corpus in file order."""
    reconstructions = [model.reconstruct(batch, corpus.vocab) for batch in corpus.batches(batch_size)]
    return EvaluationResult(
        fidelity=float(np.mean(np.concatenate([r.fidelity for r in reconstructions]))),
        similarity=float(np.mean(np.concatenate([r.similarity for r in reconstructions]))),
        trash_zero_prob=float(np.mean(np.concatenate([r.trash_zero_prob for r in reconstructions]))),
        reconstructions=reconstructions,
    )


def build_model(cfg: TrainConfig, vocab: Vocabulary, rng: np.random.Generator) -> HybridAutoencoder:
    return HybridAutoencoder(cfg, len(vocab), rng)


def model_from_checkpoint(checkpoint: Checkpoint):
    """Rebuild the model a checkpoint was taken from; returns (model, TrainConfig)."""
    cfg = TrainConfig.from_dict(checkpoint.config)
    model = build_model(cfg, checkpoint.vocab, np.random.default_rng(cfg.seed))
    restore_parameters(model, checkpoint.params)
    return model, cfg


def check_compatibility(checkpoint: Checkpoint, corpus: Corpus):
    """
    Raise CompatibilityError when the corpus cannot be read with the checkpoint's vocabulary.
    """
    if corpus.vocab != checkpoint.vocab:
        raise CompatibilityError(f"corpus vocabulary ({len(corpus.vocab)} tokens) differs from "
                                 f"the checkpoint vocabulary ({len(checkpoint.vocab)} tokens)")
    unknown = [corpus.smiles[i] for i, seq in enumerate(corpus.sequences) if UNK_ID in seq.tokens]
    if unknown:
        raise CompatibilityError(f"{len(unknown)} molecules use tokens outside the checkpoint "
                                 f"vocabulary, e.g. {unknown[0]!r}")


def evaluate(checkpoint: Checkpoint, corpus: Corpus, batch_size: Optional[int] = None) -> EvaluationResult:
    """
    Pure-inference metrics of a checkpoint on a corpus.

    Args:
        checkpoint: Trained state
        corpus: Molecules to reconstruct
        batch_size: Defaults to the run's batch size, so a checkpoint evaluated on
            its own training corpus repeats the end-of-epoch pass exactly
    """
    check_compatibility(checkpoint, corpus)
    model, cfg = model_from_checkpoint(checkpoint)
    result = evaluate_model(model, corpus, batch_size or cfg.batch_size)
    safe_log(logger, "info", f"📊 Evaluated {result.count} molecules: fidelity {result.fidelity:.4f}, "
                             f"similarity {result.similarity:.4f}")
    return result


@dataclass
class TrainResult:
    checkpoint: Checkpoint
    history: List[Dict[str, float]]
    metrics_path: Path
    checkpoint_path: Path


class TrainingService:
    """Owns the model, optimizer and generator of one run."""

    def __init__(self, cfg: TrainConfig, corpus: Corpus, run_dir: Optional[str] = None,
                 resume: Optional[Checkpoint] = None):
        self.cfg = cfg
        self.corpus = corpus
        self.vocab = corpus.vocab
        self.run_dir = Path(run_dir or cfg.out_dir)
        self.run_dir.mkdir(parents=True, exist_ok=True)
        self.metrics_path = self.run_dir / METRICS_FILE
        self.checkpoint_path = self.run_dir / CHECKPOINT_FILE

        # One generator drives initialisation, shuffling and scheduled sampling
        self.rng = np.random.default_rng(cfg.seed)
        self.model = build_model(cfg, self.vocab, self.rng)
        self.optimizer = Adam(self.model.parameters())
        self.start_epoch = 0
        self.step = 0

        if resume is not None:
            check_compatibility(resume, corpus)
            restore_parameters(self.model, resume.params)
            self.optimizer.state = resume.optimizer
            restore_rng(resume.rng_state, self.rng)
            self.start_epoch = resume.epoch
            self.step = resume.step
            safe_log(logger, "info", f"🔧 Resuming after epoch {resume.epoch} (step {resume.step})")

        self.writer = MetricsWriter(self.metrics_path, append=resume is not None)

    def _dump_nonfinite(self, batch, epoch: int, metrics: BatchMetrics):
        dump = {
            "epoch": epoch,
            "step": self.step,
            "batch_indices": batch.indices,
            "smiles": batch.smiles,
            "losses": {key: getattr(metrics, key) for key in _LOSS_COLUMNS},
        }
        path = self.run_dir / NONFINITE_DUMP_FILE
        with open(path, "w", encoding="utf-8") as f:
            json.dump(dump, f, indent=2, default=str)
        safe_log(logger, "error", f"🛑 Non-finite loss at epoch {epoch}, step {self.step}; batch dumped to {path}")
        raise NonFiniteLossError(f"non-finite loss at epoch {epoch}, step {self.step} "
                                 f"(batch indices {batch.indices}); see {path}",
                                 batch_indices=batch.indices, epoch=epoch, step=self.step)

    def run_epoch(self, epoch: int) -> Dict[str, float]:
        """Train one epoch (0-based) and return its metrics row."""
        cfg = self.cfg
        lr = cosine_lr(epoch, cfg.epochs, cfg.lr, cfg.min_lr)
        alpha = teacher_forcing_alpha(epoch, cfg.alpha_min, cfg.alpha_anneal_epochs, cfg.alpha_schedule)
        logger.debug(f"Epoch {epoch + 1}: lr={lr:.3e} alpha={alpha:.3f}")

        batch_rows: List[BatchMetrics] = []
        batches = self.corpus.batches(cfg.batch_size, self.rng)
        total_batches = math.ceil(len(self.corpus) / cfg.batch_size)
        for batch in tqdm(batches, total=total_batches, desc=f"Epoch {epoch + 1}/{cfg.epochs}",
                          leave=False, disable=not SHOW_PROGRESS):
            self.optimizer.zero_grad()
            total, metrics, _ = compute_batch_loss(self.model, batch, self.vocab, cfg.weights, alpha, self.rng)
            if not all(math.isfinite(getattr(metrics, key)) for key in _LOSS_COLUMNS):
                self._dump_nonfinite(batch, epoch + 1, metrics)
            total.backward()
            self.optimizer.step(lr)
            self.step += 1
            batch_rows.append(metrics)

        row: Dict[str, float] = {"epoch": epoch + 1, "step": self.step, "lr": float(lr)}
        for key in _LOSS_COLUMNS:
            row[key] = float(np.mean([getattr(m, key) for m in batch_rows]))

        if cfg.eval_each_epoch:
            result = evaluate_model(self.model, self.corpus, cfg.batch_size)
            row.update(fidelity=result.fidelity, similarity=result.similarity,
                       trash_zero_prob=result.trash_zero_prob)
        else:
            for key in ("fidelity", "similarity", "trash_zero_prob"):
                row[key] = float(np.mean([getattr(m, key) for m in batch_rows]))
        return row

    def train(self) -> TrainResult:
        """Run the remaining epochs; writes one CSV row and one checkpoint per epoch."""
        cfg = self.cfg
        history: List[Dict[str, float]] = []
        checkpoint = None
        safe_log(logger, "info", f"⚛️ Training on {len(self.corpus)} molecules for epochs "
                                 f"{self.start_epoch + 1}..{cfg.epochs}")

        for epoch in range(self.start_epoch, cfg.epochs):
            row = self.run_epoch(epoch)
            self.writer.log(row)
            history.append(row)
            checkpoint = capture_checkpoint(self.model, self.optimizer, epoch + 1, self.step,
                                            self.rng, self.vocab, cfg.to_dict())
            save_checkpoint(checkpoint, self.checkpoint_path)
            safe_log(logger, "info", f"📈 Epoch {epoch + 1}/{cfg.epochs}: loss {row['loss_total']:.4f}, "
                                     f"fidelity {row['fidelity']:.4f}, similarity {row['similarity']:.4f}")

        if checkpoint is None:
            checkpoint = capture_checkpoint(self.model, self.optimizer, self.start_epoch, self.step,
                                            self.rng, self.vocab, cfg.to_dict())
            logger.warning(f"Nothing to train: run already finished {self.start_epoch} epochs")

        safe_log(logger, "info", f"✅ Training finished; metrics in {self.metrics_path}")
        return TrainResult(checkpoint=checkpoint, history=history,
                           metrics_path=self.metrics_path, checkpoint_path=self.checkpoint_path)


def train(corpus: Corpus, cfg: TrainConfig, run_dir: Optional[str] = None,
          resume: Optional[Checkpoint] = None) -> TrainResult:
    """Train a model on a corpus; see TrainingService."""
    return TrainingService(cfg, corpus, run_dir, resume).train()
