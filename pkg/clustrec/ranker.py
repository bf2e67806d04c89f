"""
Pairwise meta-ranker for clustrec.

Training instances pair a dataset's meta-feature vector with one algorithm's
ordinal; the target is that algorithm's relevance |A| - R + 1 on the dataset.
The model is a gradient-boosted ensemble of regression trees fit to RankNet-style
pairwise logistic gradients computed within each dataset group, with Newton
leaf values as in LambdaMART.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field
from sklearn.tree import DecisionTreeRegressor

from .errors import DegenerateGroups, DimensionMismatch, MissingEmbedding
from .evaluation import PerformanceTable
from .models import AlgorithmSpec, RankedAlgorithm, RankedRecommendation
from .seeding import derive_seed

logger = logging.getLogger(__name__)

LEAF = -1


@dataclass(frozen=True)
class MetaInstance:
    """One (dataset, algorithm) training row."""
    features: np.ndarray
    relevance: float
    group: str
    algorithm: str
    ordinal: int


def assemble_training_set(
    embeddings: Mapping[str, np.ndarray],
    table: PerformanceTable
) -> List[MetaInstance]:
    """
    Cross every dataset of the table with every algorithm.

    Args:
        embeddings: Meta-feature vector per dataset name
        table: Performance table supplying the actual ranks

    Returns:
        |D| * |A| instances grouped by dataset

    Raises:
        MissingEmbedding: If a dataset has no meta-feature vector
    """
    size = len(table.algorithms)
    instances = []
    for d in table.datasets:
        if d not in embeddings:
            raise MissingEmbedding(f"No meta-features for dataset {d}")
        vector = np.asarray(embeddings[d], dtype=float).ravel()
        ranks = table.actual_ranks(d)
        for algorithm, ordinal in zip(table.algorithms, table.ordinals):
            instances.append(MetaInstance(
                features=np.append(vector, float(ordinal)),
                relevance=size - ranks[algorithm] + 1.0,
                group=d,
                algorithm=algorithm,
                ordinal=ordinal
            ))
    return instances


def pairwise_lambdas(
    scores: np.ndarray,
    relevance: np.ndarray,
    groups: Sequence[str]
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Negative gradients and second derivatives of the pairwise logistic loss.

    Only pairs inside one group with different relevance contribute.
    """
    scores = np.asarray(scores, dtype=float)
    relevance = np.asarray(relevance, dtype=float)
    groups = np.asarray(groups)
    lambdas = np.zeros(scores.size)
    weights = np.zeros(scores.size)

    for group in dict.fromkeys(groups.tolist()):
        idx = np.flatnonzero(groups == group)
        preferred = relevance[idx][:, None] > relevance[idx][None, :]
        rho = 1.0 / (1.0 + np.exp(scores[idx][:, None] - scores[idx][None, :]))
        rho = np.where(preferred, rho, 0.0)
        hessian = rho * (1.0 - rho)
        lambdas[idx] += rho.sum(axis=1) - rho.sum(axis=0)
        weights[idx] += hessian.sum(axis=1) + hessian.sum(axis=0)
    return lambdas, weights


class RegressionTree(BaseModel):
    """Binary tree in array form; feature == -1 marks a leaf."""
    feature: List[int]
    threshold: List[float]
    left: List[int]
    right: List[int]
    value: List[float]

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by every row."""
        X = np.asarray(X, dtype=np.float32)
        feature = np.asarray(self.feature)
        threshold = np.asarray(self.threshold)
        left = np.asarray(self.left)
        right = np.asarray(self.right)
        nodes = np.zeros(X.shape[0], dtype=int)
        active = feature[nodes] != LEAF
        while active.any():
            rows = np.flatnonzero(active)
            current = nodes[rows]
            goes_left = X[rows, feature[current]] <= threshold[current]
            nodes[rows] = np.where(goes_left, left[current], right[current])
            active = feature[nodes] != LEAF
        return nodes

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(self.value)[self.apply(X)]


class RankerModel(BaseModel):
    """Boosted tree ensemble with its training header."""
    n_features: int
    n_trees: int
    depth: int
    shrinkage: float
    seed: int
    config_hash: str = ""
    measure: str = ""
    feature_kind: str = ""
    algorithms: List[str] = Field(default_factory=list)
    ordinals: List[int] = Field(default_factory=list)
    typical_k: Dict[str, float] = Field(default_factory=dict)
    training_groups: List[str] = Field(default_factory=list)
    trees: List[RegressionTree] = Field(default_factory=list)

    def score(self, X: np.ndarray) -> np.ndarray:
        """
        Ranking scores of feature rows.

        Raises:
            DimensionMismatch: If the rows do not have n_features columns
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(f"Model expects {self.n_features} features, got {X.shape[1]}")
        total = np.zeros(X.shape[0])
        for tree in self.trees:
            total += tree.predict(X)
        return total

    def split_features(self) -> List[int]:
        """Feature indices used by any split."""
        used = {f for tree in self.trees for f in tree.feature if f != LEAF}
        return sorted(used)

    def to_text(self) -> str:
        return self.model_dump_json(indent=1)

    @classmethod
    def from_text(cls, text: str) -> "RankerModel":
        return cls.model_validate_json(text)


def _drop_degenerate_groups(instances: List[MetaInstance]) -> List[MetaInstance]:
    by_group: Dict[str, List[MetaInstance]] = {}
    for instance in instances:
        by_group.setdefault(instance.group, []).append(instance)
    kept = []
    for group, members in by_group.items():
        if len({member.relevance for member in members}) < 2:
            logger.warning(f"Dropping group {group}: all relevances are equal")
            continue
        kept.extend(members)
    if len({instance.group for instance in kept}) < 2:
        raise DegenerateGroups(
            f"Need at least 2 groups with distinct relevances, got {len({i.group for i in kept})}"
        )
    return kept


def _export_tree(estimator: DecisionTreeRegressor, leaf_values: np.ndarray) -> RegressionTree:
    tree = estimator.tree_
    is_leaf = tree.children_left == -1
    return RegressionTree(
        feature=np.where(is_leaf, LEAF, tree.feature).astype(int).tolist(),
        threshold=np.where(is_leaf, 0.0, tree.threshold).astype(float).tolist(),
        left=tree.children_left.astype(int).tolist(),
        right=tree.children_right.astype(int).tolist(),
        value=np.where(is_leaf, leaf_values, 0.0).astype(float).tolist()
    )


def train_ranker(
    instances: Sequence[MetaInstance],
    trees: int = 200,
    depth: int = 4,
    shrinkage: float = 0.1,
    seed: int = 0
) -> RankerModel:
    """
    Fit the boosted pairwise ranker.

    Instances are sorted by (group, ordinal) first, so their input order never
    matters. Groups whose relevances are all equal carry no pairs and are dropped.

    Args:
        instances: Training rows
        trees: Boosting rounds
        depth: Maximum tree depth
        shrinkage: Learning rate applied to every leaf value
        seed: Seed for tree fitting

    Returns:
        Trained model

    Raises:
        DegenerateGroups: If fewer than two groups with distinct relevances remain
    """
    rows = sorted(instances, key=lambda instance: (instance.group, instance.ordinal))
    rows = _drop_degenerate_groups(rows)
    widths = {instance.features.size for instance in rows}
    if len(widths) != 1:
        raise DimensionMismatch(f"Feature vectors differ in length: {sorted(widths)}")

    X = np.vstack([instance.features for instance in rows])
    relevance = np.array([instance.relevance for instance in rows])
    groups = [instance.group for instance in rows]
    scores = np.zeros(len(rows))
    exported: List[RegressionTree] = []

    for round_index in range(trees):
        lambdas, weights = pairwise_lambdas(scores, relevance, groups)
        estimator = DecisionTreeRegressor(
            max_depth=depth,
            random_state=derive_seed(seed, "tree", round_index)
        )
        estimator.fit(X, lambdas)
        leaves = estimator.apply(X.astype(np.float32))
        node_count = estimator.tree_.node_count
        numerator = np.bincount(leaves, lambdas, node_count)
        denominator = np.bincount(leaves, weights, node_count)
        with np.errstate(invalid="ignore", divide="ignore"):
            newton = np.where(denominator > 0, numerator / denominator, 0.0)
        leaf_values = shrinkage * newton
        scores += leaf_values[leaves]
        exported.append(_export_tree(estimator, leaf_values))

    model = RankerModel(
        n_features=X.shape[1],
        n_trees=trees,
        depth=depth,
        shrinkage=shrinkage,
        seed=seed,
        training_groups=sorted(set(groups)),
        trees=exported
    )
    logger.debug(f"Trained ranker on {len(rows)} instances in {len(set(groups))} groups")
    return model


def recommend(
    model: RankerModel,
    embedding: np.ndarray,
    algorithms: Sequence[AlgorithmSpec],
    dataset: str = "",
    measure: str = "",
    typical_k: Optional[Mapping[str, float]] = None
) -> RankedRecommendation:
    """
    Rank every algorithm for one dataset, best first; ties go to the lower ordinal.

    Raises:
        DimensionMismatch: If embedding plus ordinal does not match the model width
    """
    vector = np.asarray(embedding, dtype=float).ravel()
    if vector.size + 1 != model.n_features:
        raise DimensionMismatch(f"Model expects {model.n_features - 1} meta-features, got {vector.size}")
    X = np.vstack([np.append(vector, float(spec.ordinal)) for spec in algorithms])
    scores = model.score(X)
    order = sorted(range(len(algorithms)), key=lambda i: (-scores[i], algorithms[i].ordinal))
    typical_k = typical_k if typical_k is not None else model.typical_k
    items = [
        RankedAlgorithm(
            algorithm=algorithms[i].id,
            ordinal=algorithms[i].ordinal,
            score=float(scores[i]),
            typical_k=typical_k.get(algorithms[i].id)
        )
        for i in order
    ]
    return RankedRecommendation(dataset=dataset, measure=measure or model.measure, items=items)
