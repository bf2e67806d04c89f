"""
Comparison systems for clustrec.

This module provides the popularity ranking, the standard (mean-rank) ranking and
two hand-crafted meta-feature families computed from pairwise instance distances:
distance-based and correlation-and-distance (CaD). Both families describe a
dataset with the same 19 statistics of a normalized vector.
"""

import logging
from typing import Dict, List, Mapping, Sequence, Union

import numpy as np
from scipy.spatial.distance import pdist
from scipy.stats import rankdata

from ingestion.preprocess import NumericDataset

from .errors import DimensionMismatch
from .evaluation import PerformanceTable
from .models import PopularityVector

logger = logging.getLogger(__name__)

META_FEATURE_NAMES = (
    ["mean", "variance", "std", "skewness", "kurtosis"]
    + [f"pct_interval_{i}" for i in range(1, 11)]
    + ["pct_z_0_1", "pct_z_1_2", "pct_z_2_3", "pct_z_3_inf"]
)

INTERVAL_EDGES = np.arange(1, 10) / 10.0


def popularity_rank(table: PerformanceTable) -> PopularityVector:
    """
    Rank algorithms by how often each was best, most frequent first.

    Ties in count go to the lower ordinal.
    """
    counts = {a: 0 for a in table.algorithms}
    for d in table.datasets:
        counts[table.best[d]] += 1
    return popularity_from_counts(table.measure, counts, table.algorithms)


def popularity_from_counts(
    measure: str,
    counts: Mapping[str, int],
    order: Sequence[str]
) -> PopularityVector:
    """
    Popularity vector from explicit best-counts.

    Args:
        measure: Measure the counts belong to
        counts: Best-count per algorithm; missing algorithms count 0
        order: Algorithms in ordinal order

    Returns:
        Algorithms sorted by count descending, then ordinal
    """
    position = {a: i for i, a in enumerate(order)}
    unknown = set(counts) - set(position)
    if unknown:
        raise DimensionMismatch(f"Counts for algorithms outside the order: {sorted(unknown)}")
    full = {a: int(counts.get(a, 0)) for a in order}
    ranked = sorted(order, key=lambda a: (-full[a], position[a]))
    return PopularityVector(measure=measure, order=ranked, counts=full)


def standard_ranking(table: PerformanceTable) -> List[str]:
    """Algorithms ordered by mean rank over the table's datasets, ties by ordinal."""
    mean_ranks = table.ranks.mean(axis=0)
    return sorted(
        table.algorithms,
        key=lambda a: (float(mean_ranks[a]), table.ordinals[table.algorithms.index(a)])
    )


def _min_max(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return values
    low, high = values.min(), values.max()
    if high <= low:
        return np.zeros_like(values)
    return (values - low) / (high - low)


def _matrix(d: Union[NumericDataset, np.ndarray]) -> np.ndarray:
    matrix = d.matrix if isinstance(d, NumericDataset) else d
    return np.asarray(matrix, dtype=float)


def distance_vector(d: Union[NumericDataset, np.ndarray]) -> np.ndarray:
    """
    Min-max normalized pairwise Euclidean distances in (i, j), i < j order.

    All-equal distances map to zeros.
    """
    return _min_max(pdist(_matrix(d)))


def spearman_rows(matrix: np.ndarray) -> np.ndarray:
    """
    Spearman correlation of every instance pair over its feature values.

    Pairs follow pdist order. A constant row correlates 0 with everything.
    """
    ranks = rankdata(np.asarray(matrix, dtype=float), method="average", axis=1)
    centered = ranks - ranks.mean(axis=1, keepdims=True)
    norms = np.linalg.norm(centered, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    unit = centered / safe[:, None]
    unit[norms == 0] = 0.0
    correlation = np.clip(unit @ unit.T, -1.0, 1.0)
    rows, cols = np.triu_indices(correlation.shape[0], k=1)
    return correlation[rows, cols]


def cad_vector(d: Union[NumericDataset, np.ndarray]) -> np.ndarray:
    """Raw distances followed by Spearman correlations, min-max normalized jointly."""
    matrix = _matrix(d)
    return _min_max(np.concatenate([pdist(matrix), spearman_rows(matrix)]))


def meta_features_19(v: np.ndarray, excess_kurtosis: bool = False) -> np.ndarray:
    """
    The 19 distribution statistics of a normalized vector.

    Variance and std use the n-1 denominator; skewness and kurtosis are standardized
    moments over that std. A zero-variance vector has skewness and kurtosis 0 and
    every z-score in [0, 1). Interval i covers ((i-1)/10, i/10], the first one
    including 0.

    Args:
        v: Values in [0, 1]
        excess_kurtosis: Subtract 3 from the kurtosis

    Returns:
        Length-19 vector ordered as META_FEATURE_NAMES
    """
    v = np.asarray(v, dtype=float).ravel()
    if v.size == 0:
        raise DimensionMismatch("Meta-features need a non-empty vector")
    n = v.size
    mean = v.mean()
    deviations = v - mean
    variance = float(np.sum(deviations ** 2) / (n - 1)) if n > 1 else 0.0
    std = float(np.sqrt(variance))

    if std > 0:
        z = deviations / std
        skewness = float(np.mean(z ** 3))
        kurtosis = float(np.mean(z ** 4))
        if excess_kurtosis:
            kurtosis -= 3.0
        z_abs = np.abs(z)
    else:
        skewness = 0.0
        kurtosis = 0.0
        z_abs = np.zeros(n)

    intervals = np.bincount(np.searchsorted(INTERVAL_EDGES, v, side="left"), minlength=10)[:10]
    bands = np.bincount(np.minimum(np.floor(z_abs).astype(int), 3), minlength=4)[:4]
    return np.concatenate([
        [mean, variance, std, skewness, kurtosis],
        100.0 * intervals / n,
        100.0 * bands / n,
    ])


def distance_meta_features(d: Union[NumericDataset, np.ndarray], excess_kurtosis: bool = False) -> np.ndarray:
    return meta_features_19(distance_vector(d), excess_kurtosis)


def cad_meta_features(d: Union[NumericDataset, np.ndarray], excess_kurtosis: bool = False) -> np.ndarray:
    return meta_features_19(cad_vector(d), excess_kurtosis)


def meta_feature_table(
    datasets: Sequence[NumericDataset],
    kind: str,
    excess_kurtosis: bool = False
) -> Dict[str, np.ndarray]:
    """Meta-feature vector per dataset name for kind 'distance' or 'cad'."""
    compute = {"distance": distance_meta_features, "cad": cad_meta_features}.get(kind)
    if compute is None:
        raise ValueError(f"Unknown meta-feature kind: {kind}")
    features = {d.name: compute(d, excess_kurtosis) for d in datasets}
    logger.debug(f"Computed {kind} meta-features for {len(features)} datasets")
    return features


def top_k(vector: PopularityVector, k: int = 3) -> List[str]:
    """First k algorithms of a popularity vector."""
    return list(vector.order[:k])
