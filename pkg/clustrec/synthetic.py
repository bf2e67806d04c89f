"""
Synthetic benchmark corpus for clustrec.

Three structural regimes: well separated Gaussian blobs, elongated chain-like
clusters, and dense clusters over a uniform noise background. Every file carries
a `class` label column; some also carry a nominal column.
"""

import logging
from pathlib import Path
from typing import Callable, Dict, List, Tuple

import numpy as np
import pandas as pd
from sklearn.datasets import make_blobs

from .errors import IoError
from .seeding import derive_seed

logger = logging.getLogger(__name__)

REGIMES = ("blobs", "chains", "noisy")
NOMINAL_VALUES = ("north", "south", "east", "west")


def _blobs(rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    n = int(rng.integers(80, 160))
    m = int(rng.integers(2, 6))
    k = int(rng.integers(2, 6))
    X, y = make_blobs(
        n_samples=n,
        n_features=m,
        centers=k,
        cluster_std=float(rng.uniform(0.3, 0.8)),
        center_box=(-10.0, 10.0),
        random_state=int(rng.integers(0, 2 ** 31 - 1))
    )
    return X, y


def _chains(rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    n = int(rng.integers(80, 160))
    m = int(rng.integers(2, 5))
    k = int(rng.integers(2, 5))
    sizes = np.diff(np.linspace(0, n, k + 1).astype(int))
    parts, labels = [], []
    for c, size in enumerate(sizes):
        start = rng.uniform(-10.0, 10.0, size=m)
        direction = rng.normal(size=m)
        direction /= np.linalg.norm(direction)
        t = rng.uniform(0.0, float(rng.uniform(8.0, 14.0)), size=size)
        parts.append(start + t[:, None] * direction + rng.normal(scale=0.25, size=(size, m)))
        labels.append(np.full(size, c))
    return np.vstack(parts), np.concatenate(labels)


def _noisy(rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    n = int(rng.integers(80, 160))
    m = int(rng.integers(2, 4))
    k = int(rng.integers(2, 5))
    n_noise = int(n * rng.uniform(0.15, 0.25))
    X, y = make_blobs(
        n_samples=n - n_noise,
        n_features=m,
        centers=k,
        cluster_std=float(rng.uniform(0.2, 0.5)),
        center_box=(-8.0, 8.0),
        random_state=int(rng.integers(0, 2 ** 31 - 1))
    )
    low, high = X.min(axis=0) - 1.0, X.max(axis=0) + 1.0
    noise = rng.uniform(low, high, size=(n_noise, m))
    return np.vstack([X, noise]), np.concatenate([y, np.full(n_noise, -1)])


_GENERATORS: Dict[str, Callable[[np.random.Generator], Tuple[np.ndarray, np.ndarray]]] = {
    "blobs": _blobs,
    "chains": _chains,
    "noisy": _noisy,
}


def make_dataset(regime: str, index: int, seed: int = 42) -> pd.DataFrame:
    """One synthetic dataset as a frame with feature, optional nominal and class columns."""
    if regime not in _GENERATORS:
        raise ValueError(f"Unknown regime: {regime}")
    rng = np.random.default_rng(derive_seed(seed, "corpus", regime, index))
    X, y = _GENERATORS[regime](rng)
    order = rng.permutation(X.shape[0])
    X, y = X[order], y[order]
    frame = pd.DataFrame(X, columns=[f"x{j}" for j in range(X.shape[1])])
    if index % 3 == 2:
        frame["region"] = rng.choice(NOMINAL_VALUES, size=X.shape[0])
    frame["class"] = y
    return frame


def generate_corpus(out_dir: Path, per_regime: int = 12, seed: int = 42) -> List[Path]:
    """
    Write per_regime CSV datasets for every regime.

    Args:
        out_dir: Target directory, created if needed
        per_regime: Datasets per regime
        seed: Master seed

    Returns:
        Paths of the written files, sorted
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise IoError(f"Cannot create corpus directory {out_dir}: {e}") from e

    paths = []
    for regime in REGIMES:
        for index in range(per_regime):
            path = out_dir / f"{regime}_{index:02d}.csv"
            frame = make_dataset(regime, index, seed)
            try:
                frame.to_csv(path, index=False, float_format="%.6f", lineterminator="\n")
            except OSError as e:
                raise IoError(f"Cannot write {path}: {e}") from e
            paths.append(path)
    logger.info(f"Generated {len(paths)} datasets in {out_dir}")
    return sorted(paths)
