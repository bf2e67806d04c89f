"""
Configuration management for clustrec.

This module provides the run configuration as a Pydantic Settings model. Values come
from, in increasing priority: defaults, CLUSTREC_* environment variables, a flat
KEY=VALUE config file, and command-line options.
"""

import hashlib
import json
import logging
import os
from enum import Enum
from pathlib import Path
from typing import Annotated, Any, Dict, List, Mapping, Optional

from dotenv import dotenv_values
from pydantic import Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, NoDecode

from .errors import ConfigError
from .models import IndexId

logger = logging.getLogger(__name__)


class LogLevel(str, Enum):
    """Logging levels."""
    DEBUG = "DEBUG"
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"


BUILTIN_ALGORITHMS = (
    "MST", "SL", "AL", "CL", "WL", "KM", "KHM", "KKM",
    "MBK", "FC", "DBSCAN", "MS", "GMF", "GMT", "GMD",
)

EMBEDDING_SIZES = (50, 100, 200, 300, 400, 500)

# Fields that never change results; left out of hashes and report headers.
_RUNTIME_FIELDS = {"corpus_dir", "output_dir", "store", "jobs", "log_level"}

_SECTIONS: Dict[str, tuple] = {
    "evaluation": ("algorithms", "repeats", "k_min", "k_max", "master_seed"),
    "graph": ("pca_enabled", "pca_variance_target", "graph_threshold"),
    "walks": (
        "walk_count", "walk_length", "node_dim", "walk_window",
        "walk_negatives", "walk_epochs", "walk_lr", "master_seed",
    ),
    "gcn": (
        "gcn_layers", "gcn_emb", "gcn_lr", "gcn_max_epochs",
        "gcn_patience", "strict_loo", "master_seed",
    ),
    "ranker": ("ranker_trees", "ranker_depth", "ranker_shrinkage", "master_seed"),
    "meta_features": ("excess_kurtosis",),
}


def _split_list(value: Any) -> Any:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class RunConfig(BaseSettings):
    """Resolved configuration of one clustrec run."""

    # Locations
    corpus_dir: Path = Field(default=Path("corpus"), description="Directory of CSV datasets")
    output_dir: Path = Field(default=Path("reports"), description="Directory for report files")
    store: Path = Field(default=Path(".clustrec-store"), description="Artifact store root")
    label_column: str = Field(default="class", description="Column treated as class label and dropped")

    # Measures and algorithms
    measures: Annotated[List[IndexId], NoDecode] = Field(
        default_factory=lambda: list(IndexId),
        description="Validity indices to evaluate"
    )
    average_ranking: bool = Field(default=True, description="Also build the average-ranking table")
    algorithms: Annotated[List[str], NoDecode] = Field(
        default_factory=lambda: list(BUILTIN_ALGORITHMS),
        description="Candidate clustering algorithms"
    )

    # Evaluation
    repeats: int = Field(default=10, ge=1, description="Seeded runs averaged per grid point")
    k_min: int = Field(default=2, ge=2)
    k_max: int = Field(default=25, ge=2)
    master_seed: int = Field(default=42, ge=0)
    jobs: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1)

    # Graph representation
    pca_enabled: bool = True
    pca_variance_target: float = Field(default=0.90, gt=0.0, le=1.0)
    graph_threshold: float = Field(default=0.9)
    pca_ablation: bool = Field(default=False, description="Add a no-PCA method to benchmarks")

    # DeepWalk
    walk_count: int = Field(default=10, ge=1)
    walk_length: int = Field(default=40, ge=1)
    node_dim: int = Field(default=64, ge=1)
    walk_window: int = Field(default=5, ge=1)
    walk_negatives: int = Field(default=5, ge=1)
    walk_epochs: int = Field(default=5, ge=1)
    walk_lr: float = Field(default=0.025, gt=0.0)

    # Graph convolutional network
    gcn_layers: int = Field(default=4)
    gcn_emb: int = Field(default=300)
    gcn_lr: float = Field(default=0.006, ge=0.0)
    gcn_max_epochs: int = Field(default=60, ge=1)
    gcn_patience: int = Field(default=10, ge=1)
    strict_loo: bool = Field(default=False, description="Retrain the GCN per fold without the test label")

    # Ranker
    ranker_trees: int = Field(default=200, ge=1)
    ranker_depth: int = Field(default=4, ge=1)
    ranker_shrinkage: float = Field(default=0.1, gt=0.0)

    # Meta-features
    excess_kurtosis: bool = False

    log_level: LogLevel = LogLevel.INFO

    model_config = {
        "env_prefix": "CLUSTREC_",
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "extra": "ignore",
        "case_sensitive": False,
    }

    @field_validator("algorithms", mode="before")
    @classmethod
    def split_algorithms(cls, v: Any) -> Any:
        """Accept comma-separated strings."""
        return _split_list(v)

    @field_validator("measures", mode="before")
    @classmethod
    def split_measures(cls, v: Any) -> Any:
        """Accept comma-separated, case-insensitive index names."""
        items = _split_list(v)
        if isinstance(items, (list, tuple)):
            return [item.lower() if isinstance(item, str) else item for item in items]
        return items

    @field_validator("algorithms")
    @classmethod
    def validate_algorithms(cls, v: List[str]) -> List[str]:
        """Normalize and de-duplicate algorithm ids."""
        seen: List[str] = []
        for item in v:
            symbol = item.upper()
            if symbol not in seen:
                seen.append(symbol)
        if len(seen) < 2:
            raise ValueError("at least two algorithms are required")
        return seen

    @field_validator("measures")
    @classmethod
    def validate_measures(cls, v: List[IndexId]) -> List[IndexId]:
        if not v:
            raise ValueError("at least one measure is required")
        return list(dict.fromkeys(v))

    @field_validator("graph_threshold")
    @classmethod
    def validate_threshold(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError(f"graph_threshold must lie in (0, 1), got {v}")
        return v

    @field_validator("gcn_layers")
    @classmethod
    def validate_layers(cls, v: int) -> int:
        if not 2 <= v <= 6:
            raise ValueError(f"gcn_layers must lie in 2..6, got {v}")
        return v

    @field_validator("gcn_emb")
    @classmethod
    def validate_emb(cls, v: int) -> int:
        if v not in EMBEDDING_SIZES:
            raise ValueError(f"gcn_emb must be one of {EMBEDDING_SIZES}, got {v}")
        return v

    @model_validator(mode="after")
    def validate_k_range(self) -> "RunConfig":
        if self.k_min > self.k_max:
            raise ValueError(f"k_min ({self.k_min}) exceeds k_max ({self.k_max})")
        return self

    def section(self, name: str) -> Dict[str, Any]:
        """Return the parameters influencing one kind of artifact."""
        data = self.model_dump(mode="json")
        return {field: data[field] for field in _SECTIONS[name]}

    def section_hash(self, name: str, *upstream: str) -> str:
        """Stable hash of a section plus upstream hashes."""
        return config_hash({"section": name, "params": self.section(name), "upstream": list(upstream)})

    def resolved(self) -> Dict[str, Any]:
        """Every result-affecting setting, for reproducibility headers."""
        data = self.model_dump(mode="json")
        return {key: value for key, value in sorted(data.items()) if key not in _RUNTIME_FIELDS}


def config_hash(params: Mapping[str, Any]) -> str:
    """Stable short hash of a JSON-serializable mapping."""
    text = json.dumps(params, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def load_run_config(
    config_file: Optional[Path] = None,
    overrides: Optional[Mapping[str, Any]] = None
) -> RunConfig:
    """
    Build a RunConfig from a config file and command-line overrides.

    Args:
        config_file: Optional flat KEY=VALUE file
        overrides: Values given on the command line; None entries are ignored

    Returns:
        Validated run configuration

    Raises:
        ConfigError: On unknown keys or invalid values
    """
    values: Dict[str, Any] = {}

    if config_file is not None:
        if not Path(config_file).is_file():
            raise ConfigError(f"Config file not found: {config_file}")
        for key, value in dotenv_values(config_file).items():
            name = key.strip().lower()
            if name.startswith("clustrec_"):
                name = name[len("clustrec_"):]
            if name not in RunConfig.model_fields:
                raise ConfigError(f"Unknown config key in {config_file}: {key}")
            if value is not None:
                values[name] = value

    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value

    try:
        config = RunConfig(**values)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {e}") from e

    logger.debug(f"Resolved configuration: {config.resolved()}")
    return config
