"""
Clustering algorithm zoo for clustrec.

This module provides the candidate clustering algorithms, their capability table
and the per-dataset hyperparameter search that picks the cluster count (or the
density parameters) under a validity index.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, minimum_spanning_tree
from scipy.spatial.distance import cdist, pdist, squareform
from sklearn.cluster import DBSCAN, KMeans, MeanShift, MiniBatchKMeans
from sklearn.mixture import GaussianMixture

from ingestion.preprocess import NumericDataset

from .errors import AllNoise, InvalidParams, NoValidConfiguration
from .indices import compute_indices, orientation
from .models import AlgorithmSpec, IndexId, Orientation
from .seeding import derive_seed

logger = logging.getLogger(__name__)

MAX_ITER = 300
TOLERANCE = 1e-6
COVARIANCE_REGULARIZATION = 1e-6
KHM_EXPONENT = 3.5
FUZZIFIER = 2.0


@dataclass(frozen=True)
class ClusteringSolution:
    """Labels produced by one algorithm run; -1 marks noise."""
    algorithm: str
    labels: np.ndarray
    k_effective: int
    seed: int
    params: Dict[str, Any] = field(default_factory=dict)
    converged: bool = True


class HyperparamGrid(BaseModel):
    """Search space of the tuning step."""
    k_min: int = Field(default=2, ge=2)
    k_max: int = Field(default=25, ge=2)
    eps_quantiles: Tuple[float, ...] = (0.10, 0.25, 0.50)
    min_pts: Tuple[int, ...] = (3, 5)
    bandwidth_quantiles: Tuple[float, ...] = (0.10, 0.25, 0.50)

    @model_validator(mode="after")
    def validate_range(self) -> "HyperparamGrid":
        if self.k_min > self.k_max:
            raise ValueError(f"Empty k range {self.k_min}..{self.k_max}")
        return self


def relabel(labels: np.ndarray) -> np.ndarray:
    """Map cluster ids to 0..k-1 by first appearance, keeping -1 for noise."""
    labels = np.asarray(labels).astype(int)
    out = np.full(labels.shape, -1, dtype=int)
    mapping: Dict[int, int] = {}
    for i, label in enumerate(labels):
        if label < 0:
            continue
        if label not in mapping:
            mapping[label] = len(mapping)
        out[i] = mapping[label]
    return out


class ClusteringAlgorithm(ABC):
    """Abstract base class for clustering algorithms."""

    @abstractmethod
    def fit_predict(self, X: np.ndarray, params: Dict[str, Any], seed: int) -> Tuple[np.ndarray, bool]:
        """Cluster X and return raw labels plus a convergence flag."""
        pass


class HierarchicalLinkage(ClusteringAlgorithm):
    """Agglomerative clustering cut at K clusters."""

    def __init__(self, method: str):
        self.method = method

    def fit_predict(self, X, params, seed):
        tree = linkage(X, method=self.method, metric="euclidean")
        return fcluster(tree, t=params["k"], criterion="maxclust"), True


class MinimumSpanningTreeClustering(ClusteringAlgorithm):
    """Remove the K-1 heaviest edges of the Euclidean minimum spanning tree."""

    def fit_predict(self, X, params, seed):
        n = X.shape[0]
        distances = squareform(pdist(X))
        # csgraph reads zeros as missing edges
        off_diagonal = ~np.eye(n, dtype=bool)
        distances[off_diagonal & (distances == 0)] = np.finfo(float).tiny
        tree = minimum_spanning_tree(distances).tocoo()
        order = np.lexsort((tree.col, tree.row, -tree.data))
        keep = order[params["k"] - 1:]
        forest = csr_matrix((tree.data[keep], (tree.row[keep], tree.col[keep])), shape=(n, n))
        _, labels = connected_components(forest, directed=False)
        return labels, True


class KMeansClustering(ClusteringAlgorithm):
    """Lloyd K-means with k-means++ seeding."""

    def fit_predict(self, X, params, seed):
        model = KMeans(n_clusters=params["k"], n_init=1, max_iter=MAX_ITER, tol=TOLERANCE, random_state=seed)
        labels = model.fit_predict(X)
        return labels, model.n_iter_ < MAX_ITER


class MiniBatchKMeansClustering(ClusteringAlgorithm):
    """Mini-batch K-means."""

    def fit_predict(self, X, params, seed):
        model = MiniBatchKMeans(
            n_clusters=params["k"],
            n_init=1,
            max_iter=MAX_ITER,
            batch_size=min(1024, X.shape[0]),
            tol=TOLERANCE,
            random_state=seed
        )
        labels = model.fit_predict(X)
        return labels, model.n_iter_ < MAX_ITER


class KHarmonicMeans(ClusteringAlgorithm):
    """K-harmonic means with harmonic exponent p."""

    def __init__(self, p: float = KHM_EXPONENT):
        self.p = p

    def fit_predict(self, X, params, seed):
        k = params["k"]
        p = self.p
        rng = np.random.default_rng(seed)
        centers = X[rng.choice(X.shape[0], size=k, replace=False)].copy()
        previous = np.inf
        converged = False

        for _ in range(MAX_ITER):
            d = np.maximum(cdist(X, centers), 1e-12)
            # Ratios to the row minimum keep the powers bounded.
            d_min = d.min(axis=1)
            ratio = d / d_min[:, None]
            s_p = np.sum(ratio ** -p, axis=1)
            s_p2 = np.sum(ratio ** (-p - 2), axis=1)
            objective = float(np.sum(k * d_min ** p / s_p))

            membership = ratio ** (-p - 2) / s_p2[:, None]
            weight = d_min ** (p - 2) * s_p2 / s_p ** 2
            coefficients = membership * weight[:, None]
            centers = (coefficients.T @ X) / coefficients.sum(axis=0)[:, None]

            if abs(previous - objective) <= TOLERANCE * max(1.0, abs(objective)):
                converged = True
                break
            previous = objective

        return cdist(X, centers).argmin(axis=1), converged


class KernelKMeans(ClusteringAlgorithm):
    """Kernel K-means with an RBF kernel; bandwidth = median pairwise distance."""

    def fit_predict(self, X, params, seed):
        k = params["k"]
        n = X.shape[0]
        rng = np.random.default_rng(seed)
        pairwise = pdist(X)
        sigma = float(np.median(pairwise)) if pairwise.size else 0.0
        if sigma <= 0:
            sigma = 1.0
        gram = np.exp(-squareform(pairwise) ** 2 / (2.0 * sigma ** 2))
        diagonal = np.diag(gram)

        seeds = rng.choice(n, size=k, replace=False)
        distances = diagonal[:, None] - 2.0 * gram[:, seeds] + diagonal[seeds][None, :]
        labels = distances.argmin(axis=1)
        previous = np.inf
        converged = False

        for _ in range(MAX_ITER):
            members = np.zeros((n, k))
            members[np.arange(n), labels] = 1.0
            sizes = members.sum(axis=0)
            safe = np.where(sizes > 0, sizes, 1.0)
            cross = gram @ members
            within = np.einsum("ik,ij,jk->k", members, gram, members)
            distances = diagonal[:, None] - 2.0 * cross / safe + within / safe ** 2
            distances[:, sizes == 0] = np.inf

            new_labels = distances.argmin(axis=1)
            own = distances[np.arange(n), new_labels]
            for empty in np.flatnonzero(sizes == 0):
                farthest = int(np.argmax(own))
                new_labels[farthest] = empty
                own[farthest] = -np.inf

            objective = float(np.sum(distances[np.arange(n), labels]))
            if np.array_equal(new_labels, labels) or abs(previous - objective) <= TOLERANCE * max(1.0, abs(objective)):
                labels = new_labels
                converged = True
                break
            labels = new_labels
            previous = objective

        return labels, converged


class FuzzyCMeans(ClusteringAlgorithm):
    """Fuzzy C-means with fuzzifier m=2; hard labels by maximum membership."""

    def __init__(self, m: float = FUZZIFIER):
        self.m = m

    def fit_predict(self, X, params, seed):
        k = params["k"]
        rng = np.random.default_rng(seed)
        membership = rng.dirichlet(np.ones(k), size=X.shape[0])
        previous = np.inf
        converged = False

        for _ in range(MAX_ITER):
            weights = membership ** self.m
            centers = (weights.T @ X) / weights.sum(axis=0)[:, None]
            d = np.maximum(cdist(X, centers), 1e-12)
            objective = float(np.sum(weights * d ** 2))
            inverse = d ** (-2.0 / (self.m - 1.0))
            membership = inverse / inverse.sum(axis=1, keepdims=True)
            if abs(previous - objective) <= TOLERANCE * max(1.0, abs(objective)):
                converged = True
                break
            previous = objective

        return membership.argmax(axis=1), converged


class DensityScan(ClusteringAlgorithm):
    """DBSCAN."""

    def fit_predict(self, X, params, seed):
        return DBSCAN(eps=params["eps"], min_samples=params["min_pts"]).fit_predict(X), True


class MeanShiftClustering(ClusteringAlgorithm):
    """Mean shift with a flat kernel."""

    def fit_predict(self, X, params, seed):
        model = MeanShift(bandwidth=params["bandwidth"], max_iter=MAX_ITER)
        labels = model.fit_predict(X)
        return labels, model.n_iter_ < MAX_ITER


class GaussianMixtureClustering(ClusteringAlgorithm):
    """EM-fitted Gaussian mixture; hard labels by maximum responsibility."""

    def __init__(self, covariance_type: str):
        self.covariance_type = covariance_type

    def fit_predict(self, X, params, seed):
        model = GaussianMixture(
            n_components=params["k"],
            covariance_type=self.covariance_type,
            reg_covar=COVARIANCE_REGULARIZATION,
            max_iter=MAX_ITER,
            tol=TOLERANCE,
            n_init=1,
            random_state=seed
        )
        model.fit(X)
        return model.predict(X), bool(model.converged_)


# Registry of algorithms: id -> (spec, implementation)
_REGISTRY: Dict[str, Tuple[AlgorithmSpec, ClusteringAlgorithm]] = {}


def register_algorithm(
    algorithm_id: str,
    implementation: ClusteringAlgorithm,
    deterministic: bool,
    needs_k: bool,
    density_based: bool = False,
    family: str = "",
    description: str = ""
) -> AlgorithmSpec:
    """
    Add an algorithm to the zoo under the next free ordinal.

    Args:
        algorithm_id: Short symbol, e.g. EAC
        implementation: Algorithm instance
        deterministic: Whether results ignore the seed
        needs_k: Whether the algorithm takes a cluster count
        density_based: Whether it is tuned over the density grid
        family: Algorithm family
        description: Human-readable description

    Returns:
        The registered capability record
    """
    symbol = algorithm_id.upper()
    if symbol in _REGISTRY:
        raise InvalidParams(f"Algorithm already registered: {symbol}")
    if not needs_k and not density_based:
        raise InvalidParams(f"{symbol} needs either a cluster count or a density grid")
    spec = AlgorithmSpec(
        id=symbol,
        ordinal=len(_REGISTRY),
        deterministic=deterministic,
        needs_k=needs_k,
        density_based=density_based,
        family=family,
        description=description
    )
    _REGISTRY[symbol] = (spec, implementation)
    return spec


def _register_builtins():
    register_algorithm("MST", MinimumSpanningTreeClustering(), True, True, family="graph",
                       description="Minimum spanning tree cut")
    register_algorithm("SL", HierarchicalLinkage("single"), True, True, family="hierarchical",
                       description="Agglomerative single linkage")
    register_algorithm("AL", HierarchicalLinkage("average"), True, True, family="hierarchical",
                       description="Agglomerative average linkage")
    register_algorithm("CL", HierarchicalLinkage("complete"), True, True, family="hierarchical",
                       description="Agglomerative complete linkage")
    register_algorithm("WL", HierarchicalLinkage("ward"), True, True, family="hierarchical",
                       description="Agglomerative Ward linkage")
    register_algorithm("KM", KMeansClustering(), False, True, family="partitional", description="K-means")
    register_algorithm("KHM", KHarmonicMeans(), False, True, family="partitional", description="K-harmonic means")
    register_algorithm("KKM", KernelKMeans(), False, True, family="partitional", description="Kernel K-means")
    register_algorithm("MBK", MiniBatchKMeansClustering(), False, True, family="partitional",
                       description="Mini-batch K-means")
    register_algorithm("FC", FuzzyCMeans(), False, True, family="fuzzy", description="Fuzzy C-means")
    register_algorithm("DBSCAN", DensityScan(), True, False, density_based=True, family="density",
                       description="DBSCAN")
    register_algorithm("MS", MeanShiftClustering(), True, False, density_based=True, family="density",
                       description="Mean shift")
    register_algorithm("GMF", GaussianMixtureClustering("full"), False, True, family="model",
                       description="Gaussian mixture, full covariance")
    register_algorithm("GMT", GaussianMixtureClustering("tied"), False, True, family="model",
                       description="Gaussian mixture, tied covariance")
    register_algorithm("GMD", GaussianMixtureClustering("diag"), False, True, family="model",
                       description="Gaussian mixture, diagonal covariance")


_register_builtins()


def supported_algorithms() -> List[AlgorithmSpec]:
    """All registered algorithms in ordinal order."""
    return sorted((spec for spec, _ in _REGISTRY.values()), key=lambda spec: spec.ordinal)


def get_spec(algorithm: Union[str, AlgorithmSpec]) -> AlgorithmSpec:
    if isinstance(algorithm, AlgorithmSpec):
        return algorithm
    try:
        return _REGISTRY[algorithm.upper()][0]
    except KeyError:
        raise InvalidParams(f"Unknown algorithm: {algorithm}") from None


def resolve_algorithms(ids: Sequence[str]) -> List[AlgorithmSpec]:
    """Specs for the given ids, in ordinal order."""
    return sorted((get_spec(a) for a in ids), key=lambda spec: spec.ordinal)


def _validate_params(spec: AlgorithmSpec, params: Dict[str, Any], n: int):
    if spec.needs_k:
        k = params.get("k")
        if not isinstance(k, (int, np.integer)) or k < 1:
            raise InvalidParams(f"{spec.id} needs an integer k >= 1, got {k!r}")
        if k > n:
            raise InvalidParams(f"{spec.id}: k={k} exceeds n={n}")
    elif spec.id == "DBSCAN":
        if params.get("eps", 0) <= 0 or params.get("min_pts", 0) < 1:
            raise InvalidParams(f"DBSCAN needs eps > 0 and min_pts >= 1, got {params}")
    elif spec.id == "MS":
        if params.get("bandwidth", 0) <= 0:
            raise InvalidParams(f"MS needs bandwidth > 0, got {params}")


def run_algorithm(
    d: NumericDataset,
    algorithm: Union[str, AlgorithmSpec],
    params: Dict[str, Any],
    seed: int
) -> ClusteringSolution:
    """
    Run one algorithm with concrete hyperparameters.

    Args:
        d: Preprocessed dataset
        algorithm: Algorithm id or spec
        params: Hyperparameters, e.g. {"k": 3}
        seed: Random seed; ignored by deterministic algorithms

    Returns:
        Solution with dense labels

    Raises:
        InvalidParams: If params do not fit the algorithm or the fit fails
        AllNoise: If every point is labelled noise
    """
    spec = get_spec(algorithm)
    _validate_params(spec, params, d.n)
    implementation = _REGISTRY[spec.id][1]

    try:
        raw_labels, converged = implementation.fit_predict(np.asarray(d.matrix, dtype=float), params, seed)
    except (ValueError, np.linalg.LinAlgError) as e:
        raise InvalidParams(f"{spec.id} failed with {params}: {e}") from e

    labels = relabel(raw_labels)
    if np.all(labels < 0):
        raise AllNoise(f"{spec.id} labelled every point of {d.name} as noise with {params}")

    if not converged:
        logger.warning(f"{spec.id} hit the iteration cap on {d.name} with {params}")

    labels.setflags(write=False)
    return ClusteringSolution(
        algorithm=spec.id,
        labels=labels,
        k_effective=int(labels.max()) + 1,
        seed=seed,
        params=dict(params),
        converged=converged
    )


def grid_points(d: NumericDataset, spec: AlgorithmSpec, grid: HyperparamGrid) -> List[Dict[str, Any]]:
    """Concrete hyperparameter settings searched for one algorithm."""
    if spec.needs_k:
        upper = min(grid.k_max, d.n)
        return [{"k": k} for k in range(grid.k_min, upper + 1)]

    distances = pdist(d.matrix)
    if spec.id == "DBSCAN":
        eps_values = list(dict.fromkeys(float(np.quantile(distances, q)) for q in grid.eps_quantiles))
        return [{"eps": eps, "min_pts": p} for eps in eps_values for p in grid.min_pts]
    bandwidths = list(dict.fromkeys(float(np.quantile(distances, q)) for q in grid.bandwidth_quantiles))
    return [{"bandwidth": b} for b in bandwidths]


@dataclass
class GridEvaluation:
    """Scores of every grid point of one (dataset, algorithm) cell."""
    algorithm: str
    dataset: str
    points: List[Dict[str, Any]]
    measures: List[IndexId]
    scores: np.ndarray
    solutions: List[Optional[ClusteringSolution]]
    runs: int = 0
    errors: List[str] = field(default_factory=list)

    def best(self, measure: IndexId) -> Optional[int]:
        """Index of the best grid point; ties go to the earlier point."""
        column = self.scores[:, self.measures.index(measure)]
        if not np.any(np.isfinite(column)):
            return None
        if orientation(measure) == Orientation.MAXIMIZE:
            return int(np.nanargmax(column))
        return int(np.nanargmin(column))


def score_grid(
    d: NumericDataset,
    algorithm: Union[str, AlgorithmSpec],
    measures: Sequence[IndexId],
    grid: HyperparamGrid,
    repeats: int,
    master_seed: int = 0
) -> GridEvaluation:
    """
    Run every grid point and score it under several indices.

    Stochastic algorithms run `repeats` times per point with seeds derived from
    (master seed, dataset, ordinal, repeat); a point's score is the mean over the
    repeats whose index is defined.
    """
    spec = get_spec(algorithm)
    measures = list(measures)
    points = grid_points(d, spec, grid)
    runs_per_point = 1 if spec.deterministic else repeats
    seeds = [derive_seed(master_seed, d.name, spec.ordinal, r) for r in range(runs_per_point)]

    scores = np.full((len(points), len(measures)), np.nan)
    solutions: List[Optional[ClusteringSolution]] = []
    errors: List[str] = []
    runs = 0

    for p, params in enumerate(points):
        values = np.full((runs_per_point, len(measures)), np.nan)
        first: Optional[ClusteringSolution] = None
        for r, seed in enumerate(seeds):
            try:
                solution = run_algorithm(d, spec, params, seed)
            except (InvalidParams, AllNoise) as e:
                errors.append(f"{type(e).__name__}: {e}")
                continue
            finally:
                runs += 1
            first = first or solution
            computed = compute_indices(d, solution, measures)
            values[r] = [score.value if score.defined else np.nan for score in computed]
        solutions.append(first)
        defined = ~np.isnan(values)
        counts = defined.sum(axis=0)
        sums = np.where(defined, values, 0.0).sum(axis=0)
        scores[p] = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)

    return GridEvaluation(
        algorithm=spec.id,
        dataset=d.name,
        points=points,
        measures=measures,
        scores=scores,
        solutions=solutions,
        runs=runs,
        errors=errors
    )


@dataclass(frozen=True)
class TuningResult:
    """Best configuration of one algorithm on one dataset."""
    params: Dict[str, Any]
    solution: ClusteringSolution
    score: float


def tune_k(
    d: NumericDataset,
    algorithm: Union[str, AlgorithmSpec],
    m: IndexId,
    grid: Optional[HyperparamGrid] = None,
    repeats: int = 10,
    master_seed: int = 0
) -> TuningResult:
    """
    Exhaustive grid search of the cluster count (or density parameters).

    Raises:
        NoValidConfiguration: If no grid point produced a defined score
    """
    evaluation = score_grid(d, algorithm, [m], grid or HyperparamGrid(), repeats, master_seed)
    best = evaluation.best(m)
    if best is None:
        raise NoValidConfiguration(f"No valid configuration of {evaluation.algorithm} on {d.name} for {m.value}")
    return TuningResult(
        params=evaluation.points[best],
        solution=evaluation.solutions[best],
        score=float(evaluation.scores[best, 0])
    )
