"""
Graph representation of datasets for clustrec.

This module reduces a dataset with PCA and links instances whose cosine similarity
in the reduced space exceeds a threshold, giving one weighted undirected graph per dataset.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple

import numpy as np
from scipy.sparse import csr_matrix

from ingestion.preprocess import NumericDataset

from .errors import DimensionMismatch, ParseError

logger = logging.getLogger(__name__)

DEFAULT_VARIANCE_TARGET = 0.90
DEFAULT_THRESHOLD = 0.9


@dataclass(frozen=True)
class ReducedDataset:
    """Centered dataset projected onto its leading principal directions."""
    name: str
    matrix: np.ndarray
    explained_variance: np.ndarray
    mean_vector: np.ndarray
    components: np.ndarray
    pca_enabled: bool = True
    variance_target: float = DEFAULT_VARIANCE_TARGET

    @property
    def q(self) -> int:
        return self.matrix.shape[1]


def _orient(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so that each one's largest-magnitude coordinate is positive."""
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def pca_reduce(
    d: NumericDataset,
    variance_target: float = DEFAULT_VARIANCE_TARGET,
    enabled: bool = True,
    n_components: Optional[int] = None
) -> ReducedDataset:
    """
    Project a dataset onto the fewest principal components reaching a variance target.

    The eigendecomposition runs on whichever of the covariance (m x m) or Gram (n x n)
    matrix is smaller.

    Args:
        d: Preprocessed dataset
        variance_target: Cumulative explained-variance fraction to reach
        enabled: When False the centered data passes through unrotated
        n_components: Fixed component count overriding the target

    Returns:
        Reduced dataset
    """
    X = np.asarray(d.matrix, dtype=float)
    n, m = X.shape
    mean = X.mean(axis=0)
    centered = X - mean
    column_variance = np.sum(centered ** 2, axis=0)
    total = float(column_variance.sum())

    if not enabled:
        explained = column_variance / total if total > 0 else np.zeros(m)
        return ReducedDataset(
            name=d.name,
            matrix=centered,
            explained_variance=explained,
            mean_vector=mean,
            components=np.eye(m),
            pca_enabled=False,
            variance_target=variance_target
        )

    if m <= n:
        eigenvalues, vectors = np.linalg.eigh(centered.T @ centered)
        eigenvalues = np.clip(eigenvalues[::-1], 0.0, None)
        vectors = vectors[:, ::-1]
    else:
        eigenvalues, left = np.linalg.eigh(centered @ centered.T)
        eigenvalues = np.clip(eigenvalues[::-1], 0.0, None)
        left = left[:, ::-1]
        vectors = np.zeros((m, n))
        positive = eigenvalues > 0
        vectors[:, positive] = centered.T @ left[:, positive] / np.sqrt(eigenvalues[positive])

    spectrum_sum = eigenvalues.sum()
    if spectrum_sum <= 0:
        fractions = np.zeros_like(eigenvalues)
        rank = 1
    else:
        fractions = eigenvalues / spectrum_sum
        rank = max(1, int(np.sum(eigenvalues > eigenvalues[0] * 1e-12)))

    if n_components is not None:
        q = int(np.clip(n_components, 1, min(n, m)))
    else:
        cumulative = np.cumsum(fractions)
        reached = np.flatnonzero(cumulative >= variance_target - 1e-9)
        q = int(reached[0]) + 1 if reached.size else rank
        q = min(q, rank)

    components = _orient(vectors[:, :q])
    reduced = centered @ components
    return ReducedDataset(
        name=d.name,
        matrix=reduced,
        explained_variance=fractions[:q],
        mean_vector=mean,
        components=components.T,
        pca_enabled=True,
        variance_target=variance_target
    )


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    """
    Cosine of the angle between two vectors; 0 when either is the zero vector.

    Raises:
        DimensionMismatch: If the vectors differ in length
    """
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    if u.shape != v.shape:
        raise DimensionMismatch(f"Cannot compare vectors of length {u.size} and {v.size}")
    norm = np.linalg.norm(u) * np.linalg.norm(v)
    if norm == 0:
        return 0.0
    return float(np.clip(u @ v / norm, -1.0, 1.0))


def cosine_similarity_matrix(matrix: np.ndarray) -> np.ndarray:
    """Pairwise cosine similarities of the rows; zero rows are similar to nothing."""
    matrix = np.asarray(matrix, dtype=float)
    norms = np.linalg.norm(matrix, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    unit = matrix / safe[:, None]
    unit[norms == 0] = 0.0
    return np.clip(unit @ unit.T, -1.0, 1.0)


@dataclass(frozen=True)
class SimilarityGraph:
    """Weighted undirected graph stored as sorted (i < j) edge triples."""
    n: int
    threshold: float
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray
    name: str = ""

    @property
    def edge_count(self) -> int:
        return int(self.weights.size)

    @cached_property
    def adjacency(self) -> csr_matrix:
        """Symmetric sparse adjacency with an empty diagonal."""
        data = np.concatenate([self.weights, self.weights])
        rows = np.concatenate([self.rows, self.cols])
        cols = np.concatenate([self.cols, self.rows])
        return csr_matrix((data, (rows, cols)), shape=(self.n, self.n))

    def neighbors(self, node: int) -> Tuple[np.ndarray, np.ndarray]:
        """Neighbour ids (ascending) and edge weights of a node."""
        adjacency = self.adjacency
        start, end = adjacency.indptr[node], adjacency.indptr[node + 1]
        order = np.argsort(adjacency.indices[start:end], kind="stable")
        return adjacency.indices[start:end][order], adjacency.data[start:end][order]

    def dense(self) -> np.ndarray:
        return self.adjacency.toarray()

    def to_text(self) -> str:
        """Header plus one `i j w` line per edge."""
        lines = [
            "# clustrec similarity graph",
            f"name: {self.name}",
            f"n: {self.n}",
            f"threshold: {self.threshold!r}",
            f"edges: {self.edge_count}",
        ]
        lines.extend(f"{i} {j} {w!r}" for i, j, w in zip(self.rows.tolist(), self.cols.tolist(), self.weights.tolist()))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SimilarityGraph":
        header = {}
        rows, cols, weights = [], [], []
        try:
            for line in text.splitlines():
                if not line or line.startswith("#"):
                    continue
                if ":" in line:
                    key, value = line.split(":", 1)
                    header[key.strip()] = value.strip()
                    continue
                i, j, w = line.split()
                rows.append(int(i))
                cols.append(int(j))
                weights.append(float(w))
            graph = cls(
                n=int(header["n"]),
                threshold=float(header["threshold"]),
                rows=np.array(rows, dtype=int),
                cols=np.array(cols, dtype=int),
                weights=np.array(weights, dtype=float),
                name=header.get("name", "")
            )
        except (KeyError, ValueError) as e:
            raise ParseError(f"Malformed graph text: {e}") from e
        if graph.edge_count != int(header["edges"]):
            raise ParseError(f"Graph declares {header['edges']} edges but lists {graph.edge_count}")
        return graph


def build_similarity_graph(r: ReducedDataset, threshold: float = DEFAULT_THRESHOLD) -> SimilarityGraph:
    """
    Connect instance pairs whose cosine similarity is strictly above the threshold.

    Args:
        r: Reduced dataset
        threshold: Edge threshold

    Returns:
        Similarity graph over the n instances
    """
    similarities = cosine_similarity_matrix(r.matrix)
    rows, cols = np.triu_indices(similarities.shape[0], k=1)
    values = similarities[rows, cols]
    keep = values > threshold
    graph = SimilarityGraph(
        n=similarities.shape[0],
        threshold=threshold,
        rows=rows[keep].astype(int),
        cols=cols[keep].astype(int),
        weights=values[keep],
        name=r.name
    )
    logger.debug(f"Graph for {r.name}: {graph.n} nodes, {graph.edge_count} edges (q={r.q})")
    return graph


def dataset_graph(
    d: NumericDataset,
    variance_target: float = DEFAULT_VARIANCE_TARGET,
    pca_enabled: bool = True,
    threshold: float = DEFAULT_THRESHOLD
) -> SimilarityGraph:
    """PCA-reduce a dataset and build its similarity graph."""
    return build_similarity_graph(pca_reduce(d, variance_target, pca_enabled), threshold)
