"""
Significance tests for clustrec benchmarks.

Friedman's test compares all methods over the datasets; Wilcoxon signed-rank
tests compare one method against each other one on paired per-dataset values.
"""

import logging
from typing import List, Mapping, Sequence, Tuple

import numpy as np
from scipy.stats import chi2, rankdata, wilcoxon

from .errors import LengthMismatch, TooFewPairs, TooFewSamples
from .models import SignificanceResult

logger = logging.getLogger(__name__)

MIN_PAIRS = 6
EXACT_LIMIT = 25
MIN_METHODS = 3
MIN_DATASETS = 10


def wilcoxon_signed_rank(x: Sequence[float], y: Sequence[float]) -> Tuple[float, float]:
    """
    Two-sided Wilcoxon signed-rank test on paired samples.

    Zero differences are dropped. The statistic is min(W+, W-). The null distribution
    is exact for n <= 25 without tied |differences|, the normal approximation with
    tie correction otherwise.

    Raises:
        LengthMismatch: If the samples differ in length
        TooFewPairs: If fewer than 6 non-zero differences remain
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise LengthMismatch(f"Paired samples of length {x.size} and {y.size}")
    differences = y - x
    differences = differences[differences != 0]
    n = differences.size
    if n < MIN_PAIRS:
        raise TooFewPairs(f"Wilcoxon needs at least {MIN_PAIRS} non-zero differences, got {n}")

    magnitudes = np.abs(differences)
    exact = n <= EXACT_LIMIT and np.unique(magnitudes).size == n
    result = wilcoxon(
        differences,
        zero_method="wilcox",
        alternative="two-sided",
        method="exact" if exact else "approx"
    )
    return float(result.statistic), float(min(1.0, result.pvalue))


def friedman_test(score_matrix: np.ndarray) -> Tuple[float, float]:
    """
    Friedman chi-square statistic over within-dataset ranks.

    Args:
        score_matrix: methods x datasets

    Returns:
        (statistic, p-value) with k - 1 degrees of freedom

    Raises:
        TooFewSamples: With fewer than 3 methods or 10 datasets
    """
    scores = np.asarray(score_matrix, dtype=float)
    if scores.ndim != 2 or scores.shape[0] < MIN_METHODS or scores.shape[1] < MIN_DATASETS:
        raise TooFewSamples(
            f"Friedman needs at least {MIN_METHODS} methods and {MIN_DATASETS} datasets, got shape {scores.shape}"
        )
    k, n = scores.shape
    ranks = rankdata(scores, method="average", axis=0)
    mean_ranks = ranks.mean(axis=1)
    statistic = 12.0 * n / (k * (k + 1)) * (np.sum(mean_ranks ** 2) - k * (k + 1) ** 2 / 4.0)
    statistic = max(0.0, float(statistic))
    return statistic, float(chi2.sf(statistic, k - 1))


def compare_methods(
    per_dataset: Mapping[str, Mapping[str, float]],
    metric: str,
    reference: str
) -> List[SignificanceResult]:
    """
    Friedman over all methods plus Wilcoxon of the reference against each other method.

    Datasets with a missing (NaN) value for any method are left out. Tests whose
    sample requirements are not met are skipped with a warning.
    """
    methods = list(per_dataset)
    if not methods:
        return []
    datasets = sorted(set.intersection(*(set(values) for values in per_dataset.values())))
    matrix = np.array([[per_dataset[m][d] for d in datasets] for m in methods], dtype=float).reshape(len(methods), -1)
    matrix = matrix[:, ~np.isnan(matrix).any(axis=0)]

    results: List[SignificanceResult] = []
    try:
        statistic, p_value = friedman_test(matrix)
        results.append(SignificanceResult(
            test="friedman", metric=metric, comparison="all", statistic=statistic, p_value=p_value
        ))
    except TooFewSamples as e:
        logger.warning(f"Skipping Friedman test on {metric}: {e}")

    if reference not in methods:
        return results
    reference_row = matrix[methods.index(reference)]
    for i, other in enumerate(methods):
        if other == reference:
            continue
        try:
            statistic, p_value = wilcoxon_signed_rank(reference_row, matrix[i])
        except TooFewPairs as e:
            logger.warning(f"Skipping Wilcoxon {reference} vs {other} on {metric}: {e}")
            continue
        results.append(SignificanceResult(
            test="wilcoxon", metric=metric, comparison=f"{reference}_vs_{other}",
            statistic=statistic, p_value=p_value
        ))
    return results

