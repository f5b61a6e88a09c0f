"""
Train Commands
==============

Training driver: resolves the run configuration, loads the corpus, trains,
and renders the metric plots.
"""

import logging
from typing import Any, Dict, Optional

from config import DEFAULT_PRESET, PRESETS, load_config_file
from errors import ConfigurationError
from logging_setup import safe_log
from models.corpus import open_corpus
from models.train_config import (TrainConfig, build_train_config, log_dimension_conflicts,
                                 parse_overrides)
from services.checkpoint_service import load_checkpoint
from services.plot_service import write_plots
from services.training_service import train

logger = logging.getLogger(__name__)


def smoothing_factor(text: str) -> float:
    value = float(text)
    if not 0.0 <= value < 1.0:
        raise ValueError(text)
    return value


def add_config_arguments(parser):
    """Flags shared by every command that resolves a TrainConfig."""
    parser.add_argument("--config", help="key=value file; any TrainConfig field")
    parser.add_argument("--preset", choices=sorted(PRESETS), default=DEFAULT_PRESET,
                        help=f"Named hyperparameter preset (default {DEFAULT_PRESET})")
    parser.add_argument("--paper-dims", action="store_true",
                        help="Use hidden size 252 with 4 attention heads")
    parser.add_argument("--set", action="append", metavar="KEY=VALUE", default=[],
                        help="Override one config field; repeatable, wins over --config")


def _cli_overrides(args) -> Dict[str, Any]:
    overrides: Dict[str, Any] = parse_overrides(args.set)
    for flag, key in (("seed", "seed"), ("out", "out_dir"), ("corpus", "corpus")):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value
    return overrides


def resolve_config(args, base: Optional[Dict[str, Any]] = None) -> TrainConfig:
    """
    Build the run configuration from flags.

    Args:
        args: Parsed arguments
        base: Stored configuration to start from instead of the preset (resume)
    """
    if base is None:
        return build_train_config(args.preset, args.config, _cli_overrides(args), args.paper_dims)
    values = dict(base)
    if args.config:
        values.update(load_config_file(args.config))
    values.update(_cli_overrides(args))
    return TrainConfig.from_dict(values)


def run_train(args) -> int:
    """Handle ``qsmiles train``."""
    log_dimension_conflicts()
    resume = load_checkpoint(args.resume) if args.resume else None
    cfg = resolve_config(args, base=resume.config if resume else None)
    if not cfg.corpus:
        raise ConfigurationError("no corpus given; pass --corpus or set corpus= in the config file")

    for line in cfg.summary_lines():
        print(line)
        logger.info(line)

    corpus = open_corpus(cfg.corpus, cfg.max_len, vocab=resume.vocab if resume else None)
    result = train(corpus, cfg, cfg.out_dir, resume)

    if not args.no_plots:
        write_plots(str(result.metrics_path), cfg.out_dir, args.smooth)

    last = result.history[-1] if result.history else {}
    print(f"epochs: {result.checkpoint.epoch}")
    print(f"steps: {result.checkpoint.step}")
    for key in ("loss_total", "fidelity", "similarity", "trash_zero_prob"):
        if key in last:
            print(f"{key}: {last[key]:.6f}")
    print(f"checkpoint: {result.checkpoint_path}")
    print(f"metrics: {result.metrics_path}")
    safe_log(logger, "info", f"✅ Run complete in {cfg.out_dir}")
    return 0


def setup(subparsers):
    """Register the train subcommand."""
    parser = subparsers.add_parser(
        "train",
        help="Train the autoencoder",
        description="Train on a prepared corpus; writes checkpoint.json, metrics.csv and SVG plots.",
    )
    parser.add_argument("--corpus", help="Prepared corpus file")
    add_config_arguments(parser)
    parser.add_argument("--seed", type=int, help="Random seed (overrides preset and config file)")
    parser.add_argument("--out", help="Run directory for checkpoint, metrics and plots")
    parser.add_argument("--resume", metavar="CHECKPOINT",
                        help="Continue a run from its checkpoint, appending to its metrics")
    parser.add_argument("--no-plots", action="store_true", help="Skip SVG plot rendering")
    parser.add_argument("--smooth", type=smoothing_factor, default=0.6,
                        help="EMA smoothing for the loss plot, in [0, 1) (default 0.6)")
    parser.set_defaults(handler=run_train)
