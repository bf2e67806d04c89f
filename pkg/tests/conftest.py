"""Shared fixtures for clustrec tests."""

from pathlib import Path
from typing import Callable, List

import numpy as np
import pytest
from sklearn.datasets import make_blobs

from clustrec.config import RunConfig, load_run_config
from clustrec.store import ArtifactStore
from ingestion.preprocess import NumericDataset, dataset_from_matrix


@pytest.fixture
def write_csv(tmp_path: Path) -> Callable[[str, str], Path]:
    """Write CSV text to a file under tmp_path."""
    def _write(name: str, text: str) -> Path:
        path = tmp_path / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        return path
    return _write


@pytest.fixture
def three_blobs() -> NumericDataset:
    X, _ = make_blobs(n_samples=90, centers=[[0, 0], [6, 6], [0, 8]], cluster_std=0.4, random_state=7)
    return dataset_from_matrix("three_blobs", X)


@pytest.fixture
def small_datasets() -> List[NumericDataset]:
    datasets = []
    for i in range(6):
        X, _ = make_blobs(n_samples=30 + 5 * i, centers=2 + i % 3, n_features=2 + i % 2, random_state=i)
        datasets.append(dataset_from_matrix(f"ds_{i}", X))
    return datasets


@pytest.fixture
def store(tmp_path: Path) -> ArtifactStore:
    return ArtifactStore(tmp_path / "store")


def random_symmetric(rng: np.random.Generator, n: int, density: float = 0.4) -> np.ndarray:
    """Random weighted symmetric adjacency without self-loops."""
    upper = np.triu(rng.uniform(0.1, 1.0, size=(n, n)) * (rng.uniform(size=(n, n)) < density), k=1)
    return upper + upper.T


@pytest.fixture
def toy_corpus(tmp_path: Path) -> Path:
    """Six small labelled datasets from two structural regimes."""
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    for i in range(6):
        centers = 2 + i % 2
        X, y = make_blobs(n_samples=24, centers=centers, n_features=2, cluster_std=0.3 + 0.3 * (i // 2), random_state=10 + i)
        if i % 2:
            X[:, 1] *= 4.0
        lines = ["x0,x1,class"] + [f"{a:.6f},{b:.6f},{c}" for (a, b), c in zip(X, y)]
        (corpus / f"toy_{i}.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return corpus


@pytest.fixture
def toy_config(tmp_path: Path, toy_corpus: Path) -> RunConfig:
    """A configuration small enough to run the whole pipeline in seconds."""
    return load_run_config(overrides={
        "corpus_dir": toy_corpus,
        "output_dir": tmp_path / "reports",
        "store": tmp_path / "store",
        "measures": "silhouette",
        "algorithms": "KM,SL,AL",
        "repeats": 1,
        "k_min": 2,
        "k_max": 4,
        "jobs": 1,
        "walk_count": 2,
        "walk_length": 8,
        "node_dim": 8,
        "walk_epochs": 1,
        "gcn_layers": 2,
        "gcn_emb": 50,
        "gcn_max_epochs": 5,
        "ranker_trees": 5,
        "ranker_depth": 2,
    })


@pytest.fixture
def table_factory():
    """Build a PerformanceTable from a datasets x algorithms score matrix."""
    from clustrec.evaluation import PerformanceTable
    from clustrec.models import AlgorithmSpec, Orientation

    def _make(scores, algorithms=None, datasets=None, measure="silhouette", direction=Orientation.MAXIMIZE):
        scores = np.asarray(scores, dtype=float)
        algorithms = algorithms or [f"A{j}" for j in range(scores.shape[1])]
        datasets = datasets or [f"d{i}" for i in range(scores.shape[0])]
        specs = [AlgorithmSpec(id=a, ordinal=j, deterministic=True, needs_k=True) for j, a in enumerate(algorithms)]
        return PerformanceTable.from_scores(measure, direction, specs, datasets, scores)
    return _make
