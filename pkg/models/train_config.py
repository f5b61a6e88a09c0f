"""
Training configuration
======================

Flat ``TrainConfig`` dataclass resolved from a named preset, an optional
key=value file and command-line overrides (later sources win).
"""

import logging
from dataclasses import MISSING, asdict, dataclass, fields
from typing import Any, Dict, List, Mapping, Optional

from config import (DEFAULT_SEED, PAPER_DIMS, PRESETS, REFERENCE_SETUP, RUNS_DIR,
                    load_config_file)
from errors import ConfigurationError
from models.decoder import ALPHA_SCHEDULES
from models.objective import LossWeights
from models.quantum_autoencoder import QaeConfig

logger = logging.getLogger(__name__)

_TRUE_VALUES = ("true", "1", "yes", "on")
_FALSE_VALUES = ("false", "0", "no", "off")


@dataclass
class TrainConfig:
    """Every tunable of a run; field names double as config-file keys."""
    epochs: int
    batch_size: int
    lr: float
    min_lr: float
    n_qubits: int
    n_latent: int
    n_trash: int
    qae_layers: int
    ket_order: int
    ket_site_dim: int
    model_dim: int
    token_dim: int
    hidden_dim: int
    decoder_layers: int
    attention_heads: int
    max_len: int
    max_decode_len: int
    lambda_fidelity: float
    lambda_ce: float
    lambda_smiles: float
    lambda_trash: float
    alpha_min: float
    alpha_anneal_epochs: int
    alpha_schedule: str = "linear"
    eval_each_epoch: bool = True
    seed: int = DEFAULT_SEED
    out_dir: str = RUNS_DIR
    corpus: str = ""
    preset: str = "custom"

    def __post_init__(self):
        self.validate()

    def validate(self):
        """Raise ConfigurationError on the first inconsistent field group."""
        if self.epochs < 1:
            raise ConfigurationError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigurationError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.lr > 0:
            raise ConfigurationError(f"lr must be > 0, got {self.lr}")
        if not 0 <= self.min_lr <= self.lr:
            raise ConfigurationError(f"min_lr must be in [0, lr], got {self.min_lr}")
        if self.hidden_dim % self.attention_heads != 0:
            raise ConfigurationError(
                f"hidden_dim {self.hidden_dim} is not divisible by attention_heads {self.attention_heads}"
            )
        if not 0.0 <= self.alpha_min <= 1.0:
            raise ConfigurationError(f"alpha_min must be in [0, 1], got {self.alpha_min}")
        if self.alpha_schedule not in ALPHA_SCHEDULES:
            raise ConfigurationError(f"alpha_schedule must be one of {ALPHA_SCHEDULES}, got {self.alpha_schedule!r}")
        if self.max_len < 3 or self.max_decode_len < 2:
            raise ConfigurationError(f"max_len must be >= 3 and max_decode_len >= 2, "
                                     f"got {self.max_len}, {self.max_decode_len}")
        for name in ("ket_order", "ket_site_dim", "model_dim", "token_dim", "decoder_layers"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be >= 1, got {getattr(self, name)}")
        # Both raise ConfigurationError with the offending numbers
        _ = (self.qae, self.weights)

    @property
    def qae(self) -> QaeConfig:
        return QaeConfig(n_total=self.n_qubits, n_latent=self.n_latent,
                         n_trash=self.n_trash, n_layers=self.qae_layers)

    @property
    def weights(self) -> LossWeights:
        return LossWeights(fidelity=self.lambda_fidelity, ce=self.lambda_ce,
                           smiles=self.lambda_smiles, trash=self.lambda_trash)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigurationError(f"unknown config keys: {', '.join(unknown)}")
        missing = sorted(f.name for f in fields(cls) if f.name not in data
                         and f.default is MISSING)
        if missing:
            raise ConfigurationError(f"missing config keys: {', '.join(missing)}")
        return cls(**{key: _cast(key, value) for key, value in data.items()})

    def summary_lines(self) -> List[str]:
        """Run header: resolved fields, loss weights and schedules."""
        lines = [f"preset: {self.preset}"]
        if self.preset == "paper":
            lines.append("Reference experimental setup:")
            lines.extend(f"  {name}: {value}" for name, value in REFERENCE_SETUP)
        lines.append("Resolved configuration:")
        lines.extend(f"  {key}: {value}" for key, value in self.to_dict().items() if key != "preset")
        lines.append(f"loss weights: fidelity={self.lambda_fidelity} ce={self.lambda_ce} "
                     f"smiles={self.lambda_smiles} trash={self.lambda_trash}")
        lines.append(f"teacher forcing: {self.alpha_schedule}, alpha_min={self.alpha_min}, "
                     f"anneal over {self.alpha_anneal_epochs} epochs")
        lines.append(f"learning rate: cosine {self.lr} -> {self.min_lr} over {self.epochs} epochs")
        return lines


def _cast(key: str, value: Any) -> Any:
    """Cast a raw (usually string) value to the field's declared type."""
    field_type = {f.name: f.type for f in fields(TrainConfig)}[key]
    if not isinstance(value, str):
        return value
    text = value.strip()
    try:
        if field_type in (int, "int"):
            return int(float(text)) if "e" in text.lower() else int(text)
        if field_type in (float, "float"):
            return float(text)
        if field_type in (bool, "bool"):
            lowered = text.lower()
            if lowered in _TRUE_VALUES:
                return True
            if lowered in _FALSE_VALUES:
                return False
            raise ValueError(text)
    except ValueError:
        raise ConfigurationError(f"cannot read {key}={value!r} as {getattr(field_type, '__name__', field_type)}") from None
    return text


def parse_overrides(pairs: Optional[List[str]]) -> Dict[str, str]:
    """Turn repeated KEY=VALUE flags into a mapping."""
    overrides = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ConfigurationError(f"override {pair!r} is not KEY=VALUE")
        key, value = pair.split("=", 1)
        overrides[key.strip()] = value.strip()
    return overrides


def build_train_config(preset: str = "paper", config_file: Optional[str] = None,
                       overrides: Optional[Mapping[str, Any]] = None,
                       paper_dims: bool = False) -> TrainConfig:
    """
    Resolve a TrainConfig: preset < config file < overrides.

    Args:
        preset: One of config.PRESETS
        config_file: Optional key=value file
        overrides: Values from command-line flags
        paper_dims: Use the 252-wide hidden state with 4 heads

    Returns:
        Validated TrainConfig
    """
    if preset not in PRESETS:
        raise ConfigurationError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")

    values: Dict[str, Any] = dict(PRESETS[preset])
    values["preset"] = preset
    if paper_dims:
        values.update(PAPER_DIMS)
    if config_file:
        values.update(load_config_file(config_file))
    values.update(overrides or {})

    cfg = TrainConfig.from_dict(values)
    logger.debug(f"Resolved {preset} preset with {len(overrides or {})} overrides")
    return cfg


def log_dimension_conflicts():
    """Warn about the two inconsistencies in the reference setup."""
    logger.warning("Reference setup lists 5 latent + 4 trash qubits for an 8-qubit encoder "
                   "(5 + 4 = 9 != 8); using 5 latent + 3 trash")
    logger.warning("Reference setup lists hidden dimension 252 with 8 attention heads "
                   "(252 / 8 = 31.5); paper preset uses 256 hidden, --paper-dims uses 252 with 4 heads")
