"""
Internal clustering validity indices for clustrec.

Definitions follow the standard literature forms:

- Dunn: minimum single-link distance between clusters over the maximum cluster diameter.
- Bezdek-Pal generalized Dunn GD(4,1): minimum centroid distance over the maximum diameter.
- Calinski-Harabasz, Silhouette (s(i)=0 for singletons), Davies-Bouldin: scikit-learn.
- Milligan-Cooper: point-biserial correlation between pair distances and the
  between-cluster indicator.
- Hubert-Levin C-index: (S_w - S_min) / (S_max - S_min) over the N_w within-cluster pairs.
- Handl-Knowles-Kell connectivity: sum of 1/j penalties when the j-th nearest
  neighbour (j <= 10) lies in another cluster.
- SD-Scat: mean norm of the per-cluster variance vectors over the norm of the data variance.
- Xie-Beni (crisp): within sum of squares over n times the minimum squared centroid distance.

Noise points (label -1) are removed before any computation.
"""

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy.spatial.distance import pdist, squareform
from sklearn.metrics import calinski_harabasz_score, davies_bouldin_score, silhouette_score

from ingestion.preprocess import NumericDataset

from .errors import UndefinedIndex
from .models import IndexId, IndexScore, IndexSpec, Orientation

if TYPE_CHECKING:
    from .zoo import ClusteringSolution

logger = logging.getLogger(__name__)

CONNECTIVITY_NEIGHBOURS = 10

INDEX_SPECS: Dict[IndexId, IndexSpec] = {
    spec.id: spec for spec in [
        IndexSpec(id=IndexId.BEZDEK_PAL, orientation=Orientation.MAXIMIZE,
                  description="Generalized Dunn GD(4,1)"),
        IndexSpec(id=IndexId.DUNN, orientation=Orientation.MAXIMIZE, description="Dunn index"),
        IndexSpec(id=IndexId.CALINSKI_HARABASZ, orientation=Orientation.MAXIMIZE,
                  description="Variance ratio criterion"),
        IndexSpec(id=IndexId.SILHOUETTE, orientation=Orientation.MAXIMIZE, description="Mean silhouette width"),
        IndexSpec(id=IndexId.MILLIGAN_COOPER, orientation=Orientation.MAXIMIZE,
                  description="Point-biserial correlation"),
        IndexSpec(id=IndexId.DAVIES_BOULDIN, orientation=Orientation.MINIMIZE, description="Davies-Bouldin index"),
        IndexSpec(id=IndexId.HANDL_KNOWLES_KELL, orientation=Orientation.MINIMIZE,
                  description="Connectivity with 10 neighbours"),
        IndexSpec(id=IndexId.HUBERT_LEVIN, orientation=Orientation.MINIMIZE, description="C-index"),
        IndexSpec(id=IndexId.SD_SCAT, orientation=Orientation.MINIMIZE, description="Scatter term of the SD index"),
        IndexSpec(id=IndexId.XIE_BENI, orientation=Orientation.MINIMIZE, description="Crisp Xie-Beni index"),
    ]
}


def orientation(m: IndexId) -> Orientation:
    """Whether larger or smaller values of an index are better."""
    return INDEX_SPECS[IndexId(m)].orientation


@dataclass
class Partition:
    """Non-noise points of a clustering with shared geometry."""
    X: np.ndarray
    labels: np.ndarray
    distances: np.ndarray
    clusters: np.ndarray

    @property
    def k(self) -> int:
        return len(self.clusters)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    def centroids(self) -> np.ndarray:
        return np.array([self.X[self.labels == c].mean(axis=0) for c in self.clusters])

    def diameters(self) -> np.ndarray:
        result = []
        for c in self.clusters:
            mask = self.labels == c
            block = self.distances[np.ix_(mask, mask)]
            result.append(block.max() if block.size else 0.0)
        return np.array(result)


def make_partition(X: np.ndarray, labels: np.ndarray) -> Partition:
    """Drop noise and check that at least two clusters remain."""
    labels = np.asarray(labels)
    keep = labels >= 0
    X = np.asarray(X, dtype=float)[keep]
    labels = labels[keep]
    clusters = np.unique(labels)
    if clusters.size < 2:
        raise UndefinedIndex(f"Need at least 2 clusters after noise removal, got {clusters.size}")
    return Partition(X=X, labels=labels, distances=squareform(pdist(X)), clusters=clusters)


def _require_not_all_singletons(part: Partition):
    if part.k >= part.n:
        raise UndefinedIndex("Every cluster is a singleton")


def silhouette(part: Partition) -> float:
    _require_not_all_singletons(part)
    return float(silhouette_score(part.distances, part.labels, metric="precomputed"))


def calinski_harabasz(part: Partition) -> float:
    _require_not_all_singletons(part)
    return float(calinski_harabasz_score(part.X, part.labels))


def davies_bouldin(part: Partition) -> float:
    _require_not_all_singletons(part)
    return float(davies_bouldin_score(part.X, part.labels))


def dunn(part: Partition) -> float:
    max_diameter = part.diameters().max()
    if max_diameter <= 0:
        raise UndefinedIndex("All clusters have zero diameter")
    separation = np.inf
    for a in range(part.k):
        for b in range(a + 1, part.k):
            block = part.distances[np.ix_(part.labels == part.clusters[a], part.labels == part.clusters[b])]
            separation = min(separation, block.min())
    return float(separation / max_diameter)


def bezdek_pal(part: Partition) -> float:
    max_diameter = part.diameters().max()
    if max_diameter <= 0:
        raise UndefinedIndex("All clusters have zero diameter")
    return float(pdist(part.centroids()).min() / max_diameter)


def xie_beni(part: Partition) -> float:
    centroids = part.centroids()
    separation = pdist(centroids, "sqeuclidean").min()
    if separation <= 0:
        raise UndefinedIndex("Two clusters share a centroid")
    index = np.searchsorted(part.clusters, part.labels)
    compactness = np.sum((part.X - centroids[index]) ** 2)
    return float(compactness / (part.n * separation))


def _pair_arrays(part: Partition):
    upper = np.triu_indices(part.n, k=1)
    return part.distances[upper], part.labels[upper[0]] == part.labels[upper[1]]


def hubert_levin(part: Partition) -> float:
    distances, same = _pair_arrays(part)
    n_within = int(same.sum())
    if n_within == 0:
        raise UndefinedIndex("No within-cluster pairs")
    ordered = np.sort(distances)
    s_min = ordered[:n_within].sum()
    s_max = ordered[-n_within:].sum()
    if s_max <= s_min:
        raise UndefinedIndex("All pair distances are equal")
    return float((distances[same].sum() - s_min) / (s_max - s_min))


def milligan_cooper(part: Partition) -> float:
    distances, same = _pair_arrays(part)
    n_within = int(same.sum())
    n_between = distances.size - n_within
    spread = distances.std()
    if n_within == 0 or n_between == 0 or spread <= 0:
        raise UndefinedIndex("Point-biserial correlation needs within and between pairs")
    gap = distances[~same].mean() - distances[same].mean()
    return float(gap * np.sqrt(n_within * n_between) / distances.size / spread)


def handl_knowles_kell(part: Partition) -> float:
    neighbours = min(CONNECTIVITY_NEIGHBOURS, part.n - 1)
    distances = part.distances.copy()
    np.fill_diagonal(distances, np.inf)
    order = np.argsort(distances, axis=1, kind="stable")[:, :neighbours]
    differs = part.labels[order] != part.labels[:, None]
    weights = 1.0 / np.arange(1, neighbours + 1)
    return float(np.sum(differs * weights[None, :]))


def sd_scat(part: Partition) -> float:
    total = np.linalg.norm(part.X.var(axis=0))
    if total <= 0:
        raise UndefinedIndex("Data has zero variance")
    per_cluster = [np.linalg.norm(part.X[part.labels == c].var(axis=0)) for c in part.clusters]
    return float(np.mean(per_cluster) / total)


_INDEX_FUNCTIONS: Dict[IndexId, Callable[[Partition], float]] = {
    IndexId.BEZDEK_PAL: bezdek_pal,
    IndexId.DUNN: dunn,
    IndexId.CALINSKI_HARABASZ: calinski_harabasz,
    IndexId.SILHOUETTE: silhouette,
    IndexId.MILLIGAN_COOPER: milligan_cooper,
    IndexId.DAVIES_BOULDIN: davies_bouldin,
    IndexId.HANDL_KNOWLES_KELL: handl_knowles_kell,
    IndexId.HUBERT_LEVIN: hubert_levin,
    IndexId.SD_SCAT: sd_scat,
    IndexId.XIE_BENI: xie_beni,
}


def compute_indices(
    d: NumericDataset,
    s: "ClusteringSolution",
    measures: Sequence[IndexId]
) -> List[IndexScore]:
    """
    Compute several indices over one shared distance matrix.

    Degenerate partitions yield IndexScore(defined=False) with a reason.
    """
    if len(s.labels) != d.n:
        raise UndefinedIndex(f"Solution has {len(s.labels)} labels for {d.n} instances")
    try:
        part = make_partition(d.matrix, s.labels)
    except UndefinedIndex as e:
        return [IndexScore(defined=False, reason=str(e)) for _ in measures]

    scores = []
    for m in measures:
        try:
            value = _INDEX_FUNCTIONS[IndexId(m)](part)
        except UndefinedIndex as e:
            scores.append(IndexScore(defined=False, reason=str(e)))
            continue
        if not np.isfinite(value):
            scores.append(IndexScore(defined=False, reason="non-finite value"))
            continue
        scores.append(IndexScore(value=value))
    return scores


def compute_index(d: NumericDataset, s: "ClusteringSolution", m: IndexId) -> IndexScore:
    """Compute one validity index for a clustering solution."""
    return compute_indices(d, s, [m])[0]


def index_on_labels(X: np.ndarray, labels: np.ndarray, m: IndexId) -> float:
    """
    Compute an index directly on a matrix and labels.

    Raises:
        UndefinedIndex: For degenerate partitions
    """
    return _INDEX_FUNCTIONS[IndexId(m)](make_partition(X, labels))
