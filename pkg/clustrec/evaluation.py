"""
Clustering algorithm evaluation for clustrec.

This module scores every (dataset, algorithm) pair under the validity indices,
ranks the algorithms per dataset, labels each dataset with its best algorithm and
combines the per-index rankings into the average-ranking table.
"""

import io
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.stats import rankdata

from ingestion.preprocess import NumericDataset

from .errors import MismatchedAxes, ParseError
from .indices import INDEX_SPECS, orientation
from .models import AVERAGE_RANKING, AlgorithmSpec, IndexId, Orientation
from .zoo import HyperparamGrid, resolve_algorithms, score_grid, supported_algorithms

logger = logging.getLogger(__name__)


def rank_row(scores: np.ndarray, direction: Orientation) -> np.ndarray:
    """
    Fractional ranks of one dataset's scores, 1 = best.

    Columns must be in ordinal order. Undefined (NaN) scores take the ranks after
    every defined score, ordered among themselves by ordinal.
    """
    scores = np.asarray(scores, dtype=float)
    defined = ~np.isnan(scores)
    ranks = np.empty(scores.size)
    values = scores[defined]
    if direction == Orientation.MAXIMIZE:
        values = -values
    ranks[defined] = rankdata(values, method="average") if values.size else values
    n_defined = int(defined.sum())
    ranks[~defined] = np.arange(n_defined + 1, scores.size + 1)
    return ranks


@dataclass(frozen=True)
class PerformanceTable:
    """Scores, ranks and best algorithm per dataset for one measure."""
    measure: str
    orientation: Orientation
    algorithms: Tuple[str, ...]
    ordinals: Tuple[int, ...]
    datasets: Tuple[str, ...]
    scores: pd.DataFrame
    ranks: pd.DataFrame
    best: Dict[str, str]
    params: Dict[str, Dict[str, Dict[str, Any]]] = field(default_factory=dict)
    errors: Dict[str, Dict[str, str]] = field(default_factory=dict)
    repeats: int = 1
    master_seed: int = 0

    @classmethod
    def from_scores(
        cls,
        measure: str,
        direction: Orientation,
        algorithms: Sequence[AlgorithmSpec],
        datasets: Sequence[str],
        scores: np.ndarray,
        params: Optional[Dict[str, Dict[str, Dict[str, Any]]]] = None,
        errors: Optional[Dict[str, Dict[str, str]]] = None,
        repeats: int = 1,
        master_seed: int = 0
    ) -> "PerformanceTable":
        """Rank a datasets x algorithms score matrix."""
        algorithms = sorted(algorithms, key=lambda spec: spec.ordinal)
        names = tuple(spec.id for spec in algorithms)
        scores = np.asarray(scores, dtype=float).reshape(len(datasets), len(names))
        ranks = np.vstack([rank_row(row, direction) for row in scores]) if len(datasets) else scores.copy()
        best = {d: names[int(np.argmin(ranks[i]))] for i, d in enumerate(datasets)}
        return cls(
            measure=measure,
            orientation=direction,
            algorithms=names,
            ordinals=tuple(spec.ordinal for spec in algorithms),
            datasets=tuple(datasets),
            scores=pd.DataFrame(scores, index=list(datasets), columns=list(names)),
            ranks=pd.DataFrame(ranks, index=list(datasets), columns=list(names)),
            best=best,
            params=params or {},
            errors=errors or {},
            repeats=repeats,
            master_seed=master_seed
        )

    def actual_ranks(self, dataset: str) -> Dict[str, float]:
        row = self.ranks.loc[dataset]
        return {a: float(row[a]) for a in self.algorithms}

    def subset(self, datasets: Sequence[str]) -> "PerformanceTable":
        """Restrict the table to some datasets, keeping their rows unchanged."""
        keep = [d for d in self.datasets if d in set(datasets)]
        return PerformanceTable(
            measure=self.measure,
            orientation=self.orientation,
            algorithms=self.algorithms,
            ordinals=self.ordinals,
            datasets=tuple(keep),
            scores=self.scores.loc[keep].copy(),
            ranks=self.ranks.loc[keep].copy(),
            best={d: self.best[d] for d in keep},
            params={d: self.params[d] for d in keep if d in self.params},
            errors={d: self.errors[d] for d in keep if d in self.errors},
            repeats=self.repeats,
            master_seed=self.master_seed
        )

    def to_csv_text(self) -> str:
        """Serialize as a metadata header followed by a long-format table."""
        lines = [
            "# clustrec performance table",
            f"# measure: {self.measure}",
            f"# orientation: {self.orientation.value}",
            f"# repeats: {self.repeats}",
            f"# master_seed: {self.master_seed}",
            f"# algorithms: {','.join(self.algorithms)}",
            f"# ordinals: {','.join(str(o) for o in self.ordinals)}",
        ]
        records = []
        for d in self.datasets:
            for a in self.algorithms:
                records.append({
                    "dataset": d,
                    "algorithm": a,
                    "score": self.scores.at[d, a],
                    "rank": self.ranks.at[d, a],
                    "best": int(self.best[d] == a),
                    "params": json.dumps(self.params.get(d, {}).get(a, {}), sort_keys=True),
                    "error": self.errors.get(d, {}).get(a, ""),
                })
        frame = pd.DataFrame(records, columns=["dataset", "algorithm", "score", "rank", "best", "params", "error"])
        return "\n".join(lines) + "\n" + frame.to_csv(index=False, lineterminator="\n")

    @classmethod
    def from_csv_text(cls, text: str) -> "PerformanceTable":
        """Parse the output of to_csv_text."""
        header: Dict[str, str] = {}
        body = []
        for line in text.splitlines(keepends=True):
            if line.startswith("# "):
                if ":" in line:
                    key, value = line[2:].split(":", 1)
                    header[key.strip()] = value.strip()
            else:
                body.append(line)
        try:
            algorithms = tuple(header["algorithms"].split(","))
            ordinals = tuple(int(o) for o in header["ordinals"].split(","))
            frame = pd.read_csv(
                io.StringIO("".join(body)),
                dtype={"dataset": str, "algorithm": str, "params": str, "error": str},
                keep_default_na=False,
                na_values={"score": [""]},
                float_precision="round_trip"
            )
        except (KeyError, ValueError) as e:
            raise ParseError(f"Malformed performance table: {e}") from e

        datasets = tuple(dict.fromkeys(frame["dataset"]))
        scores = frame.pivot(index="dataset", columns="algorithm", values="score").loc[list(datasets), list(algorithms)]
        ranks = frame.pivot(index="dataset", columns="algorithm", values="rank").loc[list(datasets), list(algorithms)]
        best = {row.dataset: row.algorithm for row in frame.itertuples() if row.best == 1}
        params: Dict[str, Dict[str, Dict[str, Any]]] = {}
        errors: Dict[str, Dict[str, str]] = {}
        for row in frame.itertuples():
            values = json.loads(row.params) if row.params else {}
            if values:
                params.setdefault(row.dataset, {})[row.algorithm] = values
            if row.error:
                errors.setdefault(row.dataset, {})[row.algorithm] = row.error

        scores.index.name = None
        scores.columns.name = None
        ranks.index.name = None
        ranks.columns.name = None
        return cls(
            measure=header["measure"],
            orientation=Orientation(header["orientation"]),
            algorithms=algorithms,
            ordinals=ordinals,
            datasets=datasets,
            scores=scores.astype(float),
            ranks=ranks.astype(float),
            best=best,
            params=params,
            errors=errors,
            repeats=int(header["repeats"]),
            master_seed=int(header["master_seed"])
        )


@dataclass
class CellResult:
    """Best configuration of one (dataset, algorithm) cell per measure."""
    dataset: str
    algorithm: str
    scores: Dict[IndexId, float]
    params: Dict[IndexId, Dict[str, Any]]
    k_effective: Dict[IndexId, int]
    runs: int
    errors: List[str]


def _evaluate_cell(
    d: NumericDataset,
    spec: AlgorithmSpec,
    measures: Sequence[IndexId],
    grid: HyperparamGrid,
    repeats: int,
    master_seed: int
) -> CellResult:
    evaluation = score_grid(d, spec, measures, grid, repeats, master_seed)
    scores: Dict[IndexId, float] = {}
    params: Dict[IndexId, Dict[str, Any]] = {}
    k_effective: Dict[IndexId, int] = {}
    for j, m in enumerate(evaluation.measures):
        best = evaluation.best(m)
        if best is None:
            scores[m] = float("nan")
            continue
        scores[m] = float(evaluation.scores[best, j])
        params[m] = dict(evaluation.points[best])
        solution = evaluation.solutions[best]
        k_effective[m] = solution.k_effective if solution is not None else 0
    return CellResult(
        dataset=d.name,
        algorithm=spec.id,
        scores=scores,
        params=params,
        k_effective=k_effective,
        runs=evaluation.runs,
        errors=evaluation.errors
    )


@dataclass
class CorpusEvaluation:
    """Tables per measure plus bookkeeping of the runs performed."""
    tables: Dict[IndexId, PerformanceTable]
    runs: int = 0
    failed_cells: int = 0


def evaluate_corpus(
    datasets: Sequence[NumericDataset],
    algorithms: Sequence[str],
    measures: Sequence[IndexId],
    repeats: int = 10,
    master_seed: int = 0,
    grid: Optional[HyperparamGrid] = None,
    jobs: int = 1
) -> CorpusEvaluation:
    """
    Evaluate every cell once and derive one PerformanceTable per measure.

    Every grid run is scored under all measures; the best configuration is then
    chosen per measure, which matches tuning each measure separately.
    """
    grid = grid or HyperparamGrid()
    specs = resolve_algorithms(algorithms)
    measures = [IndexId(m) for m in measures]
    tasks = [(d, spec) for d in datasets for spec in specs]
    logger.info(f"Evaluating {len(tasks)} cells ({len(datasets)} datasets x {len(specs)} algorithms)")

    cells = Parallel(n_jobs=jobs)(
        delayed(_evaluate_cell)(d, spec, measures, grid, repeats, master_seed) for d, spec in tasks
    )

    names = [d.name for d in datasets]
    tables: Dict[IndexId, PerformanceTable] = {}
    runs = sum(cell.runs for cell in cells)
    failed = 0
    for m in measures:
        matrix = np.full((len(names), len(specs)), np.nan)
        params: Dict[str, Dict[str, Dict[str, Any]]] = {}
        errors: Dict[str, Dict[str, str]] = {}
        for cell in cells:
            i = names.index(cell.dataset)
            j = [spec.id for spec in specs].index(cell.algorithm)
            matrix[i, j] = cell.scores[m]
            if m in cell.params:
                entry = dict(cell.params[m])
                entry["k_effective"] = cell.k_effective[m]
                params.setdefault(cell.dataset, {})[cell.algorithm] = entry
            else:
                reason = cell.errors[-1] if cell.errors else "UndefinedIndex: no defined score"
                errors.setdefault(cell.dataset, {})[cell.algorithm] = f"undefined: {reason}"
                failed += 1
        tables[m] = PerformanceTable.from_scores(
            measure=m.value,
            direction=orientation(m),
            algorithms=specs,
            datasets=names,
            scores=matrix,
            params=params,
            errors=errors,
            repeats=repeats,
            master_seed=master_seed
        )

    logger.info(f"Evaluation finished: {runs} algorithm runs, {failed} undefined cells")
    return CorpusEvaluation(tables=tables, runs=runs, failed_cells=failed)


def evaluate_all(
    datasets: Sequence[NumericDataset],
    algorithms: Sequence[str],
    m: IndexId,
    repeats: int = 10,
    master_seed: int = 0,
    grid: Optional[HyperparamGrid] = None,
    jobs: int = 1
) -> PerformanceTable:
    """Evaluate every (dataset, algorithm) cell under one measure."""
    return evaluate_corpus(datasets, algorithms, [m], repeats, master_seed, grid, jobs).tables[IndexId(m)]


def average_ranking(tables: Sequence[PerformanceTable]) -> PerformanceTable:
    """
    Combine per-index tables by averaging each algorithm's rank.

    Raises:
        MismatchedAxes: If the tables differ in datasets or algorithms, or fewer than two are given
    """
    tables = list(tables)
    if len(tables) < 2:
        raise MismatchedAxes(f"Average ranking needs at least 2 tables, got {len(tables)}")
    first = tables[0]
    for table in tables[1:]:
        if table.datasets != first.datasets or table.algorithms != first.algorithms:
            raise MismatchedAxes(f"Table for {table.measure} does not share axes with {first.measure}")

    mean_ranks = sum(table.ranks.to_numpy() for table in tables) / len(tables)
    specs = [
        AlgorithmSpec(id=a, ordinal=o, deterministic=True, needs_k=True)
        for a, o in zip(first.algorithms, first.ordinals)
    ]
    return PerformanceTable.from_scores(
        measure=AVERAGE_RANKING,
        direction=Orientation.MINIMIZE,
        algorithms=specs,
        datasets=first.datasets,
        scores=mean_ranks,
        repeats=first.repeats,
        master_seed=first.master_seed
    )


def label_pairs(t: PerformanceTable) -> List[Tuple[str, str]]:
    """(dataset, best algorithm) pairs in corpus order."""
    return [(d, t.best[d]) for d in t.datasets]


def best_parameters(t: PerformanceTable) -> pd.DataFrame:
    """Tuned hyperparameters of every cell in long format, for plotting."""
    records = []
    for d in t.datasets:
        for a in t.algorithms:
            for name, value in sorted(t.params.get(d, {}).get(a, {}).items()):
                records.append({"dataset": d, "algorithm": a, "parameter": name, "value": value})
    return pd.DataFrame(records, columns=["dataset", "algorithm", "parameter", "value"])


def registry_table() -> pd.DataFrame:
    """Machine-readable table of algorithm ordinals, capabilities and index orientations."""
    records = []
    for spec in supported_algorithms():
        records.append({
            "kind": "algorithm",
            "id": spec.id,
            "ordinal": spec.ordinal,
            "deterministic": spec.deterministic,
            "needs_k": spec.needs_k,
            "density_based": spec.density_based,
            "orientation": "",
        })
    for position, spec in enumerate(INDEX_SPECS.values()):
        records.append({
            "kind": "index",
            "id": spec.id.value,
            "ordinal": position,
            "deterministic": "",
            "needs_k": "",
            "density_based": "",
            "orientation": spec.orientation.value,
        })
    return pd.DataFrame(records)
