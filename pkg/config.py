"""
Configuration settings for qsmiles
==================================

Contains all configuration constants, run presets and config-file parsing.
Uses environment variables (optionally from a .env file) for machine-local settings.
"""

import os
from typing import Any, Dict, List, Tuple

from dotenv import dotenv_values, load_dotenv

# Load environment variables from .env file if available
load_dotenv()

# ========================================
# PATHS
# ========================================

DATA_DIR = os.getenv("QSMILES_DATA_DIR", "data")
RUNS_DIR = os.getenv("QSMILES_RUNS_DIR", "runs")

CHECKPOINT_FILE = os.getenv("QSMILES_CHECKPOINT_FILE", "checkpoint.json")
METRICS_FILE = os.getenv("QSMILES_METRICS_FILE", "metrics.csv")
NONFINITE_DUMP_FILE = "nonfinite_batch.json"

# ========================================
# CORPUS CONFIGURATION
# ========================================

MAX_RAW_SMILES_LENGTH = int(os.getenv("QSMILES_MAX_RAW_LENGTH", "256"))  # Characters per input line
DEFAULT_MAX_TOKENS = int(os.getenv("QSMILES_MAX_TOKENS", "64"))  # Token count including SOS/EOS

# ========================================
# TRAINING CONFIGURATION
# ========================================

DEFAULT_SEED = int(os.getenv("QSMILES_SEED", "1234"))
DEFAULT_PRESET = os.getenv("QSMILES_PRESET", "paper")
SHOW_PROGRESS = os.getenv("QSMILES_PROGRESS", "true").lower() == "true"

# Bumped whenever the checkpoint layout changes
CHECKPOINT_FORMAT_VERSION = 1

# Every TrainConfig field has a value in every preset so runs never depend on
# hidden defaults.
_LOSS_AND_SCHEDULE_DEFAULTS: Dict[str, Any] = {
    "lambda_fidelity": 1.0,
    "lambda_ce": 1.0,
    "lambda_smiles": 0.5,
    "lambda_trash": 0.5,
    "alpha_min": 0.5,
    "alpha_schedule": "linear",
    "eval_each_epoch": True,
}

PRESETS: Dict[str, Dict[str, Any]] = {
    # Reference-scale run; hidden size rounded to 256 so 8 heads divide it
    "paper": {
        **_LOSS_AND_SCHEDULE_DEFAULTS,
        "epochs": 50,
        "batch_size": 1024,
        "lr": 1e-6,
        "min_lr": 0.0,
        "n_qubits": 8,
        "n_latent": 5,
        "n_trash": 3,
        "qae_layers": 5,
        "ket_order": 4,
        "ket_site_dim": 4,
        "model_dim": 252,
        "token_dim": 64,
        "hidden_dim": 256,
        "decoder_layers": 4,
        "attention_heads": 8,
        "max_len": 64,
        "max_decode_len": 64,
        "alpha_anneal_epochs": 25,
    },
    # Smoke-test sized run
    "toy": {
        **_LOSS_AND_SCHEDULE_DEFAULTS,
        "epochs": 3,
        "batch_size": 16,
        "lr": 1e-3,
        "min_lr": 1e-5,
        "n_qubits": 6,
        "n_latent": 4,
        "n_trash": 2,
        "qae_layers": 2,
        "ket_order": 2,
        "ket_site_dim": 4,
        "model_dim": 32,
        "token_dim": 32,
        "hidden_dim": 64,
        "decoder_layers": 2,
        "attention_heads": 4,
        "max_len": 32,
        "max_decode_len": 32,
        "alpha_anneal_epochs": 2,
    },
    # 32-molecule memorisation run
    "overfit": {
        **_LOSS_AND_SCHEDULE_DEFAULTS,
        "epochs": 250,
        "batch_size": 8,
        "lr": 1e-3,
        "min_lr": 1e-4,
        "n_qubits": 6,
        "n_latent": 4,
        "n_trash": 2,
        "qae_layers": 2,
        "ket_order": 2,
        "ket_site_dim": 4,
        "model_dim": 32,
        "token_dim": 32,
        "hidden_dim": 64,
        "decoder_layers": 2,
        "attention_heads": 4,
        "max_len": 18,
        "max_decode_len": 20,
        "alpha_anneal_epochs": 100,
    },
}

# Hidden size / heads pair that keeps the reference hidden dimension of 252
PAPER_DIMS: Dict[str, Any] = {
    "hidden_dim": 252,
    "attention_heads": 4,
}

# Reference experimental setup, printed verbatim in the paper-preset run header
REFERENCE_SETUP: List[Tuple[str, str]] = [
    ("Number of encoder qubits", "8"),
    ("Number of latent qubits", "5"),
    ("QAE layers", "5"),
    ("Trash qubits", "4"),
    ("Entanglement topology", "CRZ gates"),
    ("Hidden dimension", "252"),
    ("Decoder layers", "4"),
    ("Attention heads", "8"),
    ("Batch size", "1024"),
    ("Learning rate", "1e-6"),
    ("Optimizer", "Adam"),
    ("Epochs", "50"),
]

# ========================================
# LOGGING CONFIGURATION
# ========================================

LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FILE = os.getenv("LOG_FILE", "qsmiles.log")  # Empty string disables the file handler

# ========================================
# CONFIG FILES
# ========================================

def load_config_file(path: str) -> Dict[str, str]:
    """
    Parse a flat key=value config file.

    Args:
        path: Path to the config file

    Returns:
        Mapping of raw keys to raw string values
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"Config file not found: {path}")

    raw = dotenv_values(path)
    return {key: ("" if value is None else value) for key, value in raw.items()}

# ========================================
# VALIDATION
# ========================================

def validate_config():
    """Validate that environment-derived configuration values are usable."""
    problems = []

    if LOG_LEVEL.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        problems.append(f"LOG_LEVEL={LOG_LEVEL}")
    if MAX_RAW_SMILES_LENGTH < 1:
        problems.append(f"QSMILES_MAX_RAW_LENGTH={MAX_RAW_SMILES_LENGTH}")
    if DEFAULT_MAX_TOKENS < 3:
        problems.append(f"QSMILES_MAX_TOKENS={DEFAULT_MAX_TOKENS}")
    if DEFAULT_PRESET not in PRESETS:
        problems.append(f"QSMILES_PRESET={DEFAULT_PRESET}")

    if problems:
        raise ValueError(
            f"Invalid configuration values: {', '.join(problems)}\n"
            f"Please fix these environment variables or update your .env file."
        )

# Validate config on import (can be disabled for testing)
if os.getenv("SKIP_CONFIG_VALIDATION") != "true":
    validate_config()
