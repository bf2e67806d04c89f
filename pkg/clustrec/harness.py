"""
Leave-one-out evaluation for clustrec.

This module scores predicted algorithm rankings against actual ones (SRC, MRR,
MRR@K) and runs the leave-one-out protocol for the meta-feature methods and the
training-free baselines.
"""

import hashlib
import logging
import time
from typing import Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from scipy.stats import rankdata

from .baselines import popularity_rank, standard_ranking
from .errors import ClustRecError, LengthMismatch, TooFewSamples
from .evaluation import PerformanceTable
from .models import AlgorithmSpec, FoldResult, MethodSummary
from .ranker import assemble_training_set, recommend, train_ranker
from .seeding import derive_seed

logger = logging.getLogger(__name__)

POPULARITY = "popularity"
STANDARD_RANKING = "standard_ranking"

FeatureProvider = Callable[[str], Mapping[str, np.ndarray]]


def src(actual: Sequence[float], predicted: Sequence[float]) -> float:
    """
    Spearman's rank correlation 1 - 6 sum(d^2) / (n^3 - n) on two rank vectors.

    Fractional ranks are used as given, without tie correction.

    Raises:
        LengthMismatch: If the vectors differ in length or have fewer than 2 entries
    """
    a = np.asarray(actual, dtype=float)
    p = np.asarray(predicted, dtype=float)
    if a.shape != p.shape:
        raise LengthMismatch(f"Rank vectors of length {a.size} and {p.size}")
    n = a.size
    if n < 2:
        raise LengthMismatch(f"SRC needs at least 2 ranks, got {n}")
    return float(1.0 - 6.0 * np.sum((a - p) ** 2) / (n ** 3 - n))


def reciprocal_rank(predicted: Sequence[str], actual_ranks: Mapping[str, float]) -> float:
    """1 / position of the first actually-best algorithm in the predicted list."""
    best_rank = min(actual_ranks.values())
    for position, algorithm in enumerate(predicted, start=1):
        if actual_ranks[algorithm] == best_rank:
            return 1.0 / position
    raise LengthMismatch("Predicted list does not contain a best algorithm")


def mrr(fold_results: Sequence[FoldResult]) -> float:
    """Mean reciprocal rank over the successful folds."""
    values = [fold.reciprocal_rank for fold in fold_results if fold.ok]
    return float(np.mean(values)) if values else float("nan")


def fold_reciprocal_at_k(fold: FoldResult, k: int) -> float:
    """Reciprocal of the best competition rank among the top-k predictions."""
    algorithms = list(fold.actual_ranks)
    competition = rankdata([fold.actual_ranks[a] for a in algorithms], method="min")
    position = dict(zip(algorithms, competition))
    best = min(position[a] for a in fold.predicted[:k])
    return 1.0 / float(best)


def mrr_at_k(fold_results: Sequence[FoldResult], k: int) -> float:
    """
    Mean over folds of the reciprocal of the best actual rank among the top-k predictions.

    Non-decreasing in k and exactly 1 at k = |A|.
    """
    values = [fold_reciprocal_at_k(fold, k) for fold in fold_results if fold.ok]
    return float(np.mean(values)) if values else float("nan")


def random_ranking_mrr(n: int) -> float:
    """Expected MRR of a uniformly random ranking of n algorithms."""
    return float(np.sum(1.0 / np.arange(1, n + 1)) / n)


def groups_hash(groups: Sequence[str]) -> str:
    return hashlib.sha256("\n".join(sorted(groups)).encode("utf-8")).hexdigest()[:16]


def make_fold_result(
    dataset: str,
    method: str,
    predicted: Sequence[str],
    actual_ranks: Mapping[str, float],
    training_groups: Sequence[str],
    split_features: Optional[Sequence[int]] = None
) -> FoldResult:
    """Score one predicted ranking against the actual ranking."""
    algorithms = list(actual_ranks)
    predicted_position = {a: i + 1 for i, a in enumerate(predicted)}
    if set(predicted_position) != set(algorithms):
        raise LengthMismatch(f"Prediction for {dataset} does not cover every algorithm")
    best_rank = min(actual_ranks.values())
    return FoldResult(
        dataset=dataset,
        method=method,
        predicted=list(predicted),
        actual_ranks=dict(actual_ranks),
        src=src([actual_ranks[a] for a in algorithms], [predicted_position[a] for a in algorithms]),
        reciprocal_rank=reciprocal_rank(predicted, actual_ranks),
        top1_hit=actual_ranks[predicted[0]] == best_rank,
        training_groups=sorted(training_groups),
        training_groups_hash=groups_hash(training_groups),
        split_features=list(split_features or [])
    )


def _specs(table: PerformanceTable) -> List[AlgorithmSpec]:
    return [
        AlgorithmSpec(id=a, ordinal=o, deterministic=True, needs_k=True)
        for a, o in zip(table.algorithms, table.ordinals)
    ]


def _require_folds(table: PerformanceTable):
    if len(table.datasets) < 3:
        raise TooFewSamples(f"Leave-one-out needs at least 3 datasets, got {len(table.datasets)}")


def _ranker_fold(
    table: PerformanceTable,
    test: str,
    method: str,
    features: Mapping[str, np.ndarray],
    trees: int,
    depth: int,
    shrinkage: float,
    seed: int
) -> FoldResult:
    train = [d for d in table.datasets if d != test]
    try:
        instances = assemble_training_set(features, table.subset(train))
        model = train_ranker(instances, trees=trees, depth=depth, shrinkage=shrinkage, seed=derive_seed(seed, "fold", test))
        recommendation = recommend(model, features[test], _specs(table), dataset=test, measure=table.measure)
        return make_fold_result(
            dataset=test,
            method=method,
            predicted=recommendation.order,
            actual_ranks=table.actual_ranks(test),
            training_groups=model.training_groups,
            split_features=model.split_features()
        )
    except ClustRecError as e:
        logger.warning(f"Fold {test} of {method} failed: {e}")
        return FoldResult(
            dataset=test,
            method=method,
            actual_ranks=table.actual_ranks(test),
            training_groups=sorted(train),
            training_groups_hash=groups_hash(train),
            error=str(e)
        )


def leave_one_out(
    table: PerformanceTable,
    method: str,
    features: Optional[Mapping[str, np.ndarray]] = None,
    fold_features: Optional[FeatureProvider] = None,
    trees: int = 200,
    depth: int = 4,
    shrinkage: float = 0.1,
    seed: int = 0,
    jobs: int = 1
) -> List[FoldResult]:
    """
    Train the ranker without each dataset in turn and test it on that dataset.

    Args:
        table: Performance table of one measure
        method: Name recorded in the fold results
        features: Meta-feature vector per dataset, shared by every fold
        fold_features: Per-fold provider returning the vectors for a held-out dataset
        trees: Boosting rounds
        depth: Tree depth
        shrinkage: Learning rate
        seed: Ranker seed; each fold derives its own
        jobs: Parallel folds

    Returns:
        One FoldResult per dataset in table order; failed folds carry an error

    Raises:
        TooFewSamples: If the table has fewer than 3 datasets
    """
    _require_folds(table)
    if features is None and fold_features is None:
        raise ValueError("leave_one_out needs features or fold_features")

    start_time = time.time()
    if fold_features is None:
        results = Parallel(n_jobs=jobs)(
            delayed(_ranker_fold)(table, test, method, features, trees, depth, shrinkage, seed)
            for test in table.datasets
        )
    else:
        results = [
            _ranker_fold(table, test, method, fold_features(test), trees, depth, shrinkage, seed)
            for test in table.datasets
        ]

    failed = sum(1 for fold in results if not fold.ok)
    logger.info(
        f"Leave-one-out {method} on {table.measure}: {len(results)} folds, {failed} failed, "
        f"MRR={mrr(results):.4f} ({time.time() - start_time:.2f}s)"
    )
    return list(results)


def popularity_loo(table: PerformanceTable) -> List[FoldResult]:
    """Leave-one-out of the popularity ranking; no model is trained."""
    _require_folds(table)
    results = []
    for test in table.datasets:
        train = [d for d in table.datasets if d != test]
        predicted = popularity_rank(table.subset(train)).order
        results.append(make_fold_result(test, POPULARITY, predicted, table.actual_ranks(test), train))
    return results


def standard_ranking_loo(table: PerformanceTable) -> List[FoldResult]:
    """Leave-one-out of the mean-rank ordering."""
    _require_folds(table)
    results = []
    for test in table.datasets:
        train = [d for d in table.datasets if d != test]
        predicted = standard_ranking(table.subset(train))
        results.append(make_fold_result(test, STANDARD_RANKING, predicted, table.actual_ranks(test), train))
    return results


def summarize(fold_results: Sequence[FoldResult], method: str, measure: str) -> MethodSummary:
    """Aggregate folds of one method into means and the MRR@K series."""
    ok = [fold for fold in fold_results if fold.ok]
    n_algorithms = len(ok[0].actual_ranks) if ok else 0
    return MethodSummary(
        method=method,
        measure=measure,
        mean_src=float(np.mean([fold.src for fold in ok])) if ok else float("nan"),
        mean_mrr=mrr(ok),
        top1_hits=sum(1 for fold in ok if fold.top1_hit),
        n_folds=len(fold_results),
        failed_folds=len(fold_results) - len(ok),
        mrr_at_k=[mrr_at_k(ok, k) for k in range(1, n_algorithms + 1)]
    )


def per_dataset_metric(fold_results: Sequence[FoldResult], metric: str) -> Dict[str, float]:
    """Metric value per dataset, NaN for failed folds."""
    return {
        fold.dataset: float(getattr(fold, metric)) if fold.ok else float("nan")
        for fold in fold_results
    }
