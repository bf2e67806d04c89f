"""
Report files for clustrec.

Reports are comma-separated tables preceded by a "# key: value" header carrying the
resolved configuration and master seed. Runtime details such as paths, worker counts
and timings are never written, so equal configurations give byte-identical reports.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

import pandas as pd

from .errors import IoError
from .models import FoldResult, MethodSummary, RankedRecommendation, SignificanceResult

logger = logging.getLogger(__name__)


def header_lines(settings: Mapping[str, Any], extra: Optional[Mapping[str, Any]] = None) -> List[str]:
    """Reproducibility header from resolved settings."""
    lines = ["# clustrec report"]
    for key, value in sorted(settings.items()):
        lines.append(f"# {key}: {json.dumps(value, sort_keys=True)}")
    for key, value in (extra or {}).items():
        lines.append(f"# {key}: {json.dumps(value, sort_keys=True)}")
    return lines


def render(frame: pd.DataFrame, header: Sequence[str]) -> str:
    return "\n".join(header) + "\n" + frame.to_csv(index=False, lineterminator="\n")


def write_report(path: Path, frame: pd.DataFrame, header: Sequence[str]) -> str:
    """Write a table report and return its text."""
    return write_text(path, render(frame, header))


def write_text(path: Path, text: str) -> str:
    """
    Write report text.

    Raises:
        IoError: If the file cannot be written
    """
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise IoError(f"Cannot write report {path}: {e}") from e
    logger.info(f"Wrote {path}")
    return text


def read_report(path: Path) -> pd.DataFrame:
    """Load the table part of a report."""
    return pd.read_csv(path, comment="#")


def folds_frame(folds: Sequence[FoldResult]) -> pd.DataFrame:
    records = []
    for fold in folds:
        records.append({
            "method": fold.method,
            "dataset": fold.dataset,
            "src": fold.src,
            "reciprocal_rank": fold.reciprocal_rank,
            "top1_hit": int(fold.top1_hit),
            "predicted": " ".join(fold.predicted),
            "training_groups_hash": fold.training_groups_hash,
            "error": fold.error or "",
        })
    return pd.DataFrame(records, columns=[
        "method", "dataset", "src", "reciprocal_rank", "top1_hit",
        "predicted", "training_groups_hash", "error",
    ])


def summary_frame(summaries: Sequence[MethodSummary], random_mrr: Optional[float] = None) -> pd.DataFrame:
    """One row per metric, one column per method."""
    rows: Dict[str, Dict[str, Any]] = {"SRC": {}, "MRR": {}, "top1_hits": {}, "folds": {}, "failed_folds": {}}
    for summary in summaries:
        rows["SRC"][summary.method] = summary.mean_src
        rows["MRR"][summary.method] = summary.mean_mrr
        rows["top1_hits"][summary.method] = summary.top1_hits
        rows["folds"][summary.method] = summary.n_folds
        rows["failed_folds"][summary.method] = summary.failed_folds
    frame = pd.DataFrame.from_dict(rows, orient="index", columns=[s.method for s in summaries])
    frame.index.name = "metric"
    frame = frame.reset_index()
    if random_mrr is not None:
        frame["random"] = [float("nan"), random_mrr, float("nan"), float("nan"), float("nan")]
    return frame


def mrr_at_k_frame(summaries: Sequence[MethodSummary]) -> pd.DataFrame:
    """Plot-ready (k, value) series per method."""
    records = []
    for summary in summaries:
        for k, value in enumerate(summary.mrr_at_k, start=1):
            records.append({"method": summary.method, "k": k, "mrr_at_k": value})
    return pd.DataFrame(records, columns=["method", "k", "mrr_at_k"])


def significance_frame(results: Sequence[SignificanceResult]) -> pd.DataFrame:
    return pd.DataFrame(
        [result.model_dump() for result in results],
        columns=["test", "metric", "comparison", "statistic", "p_value"]
    )


def recommendation_frame(recommendation: RankedRecommendation) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "position": position,
                "algorithm": item.algorithm,
                "score": item.score,
                "typical_k": item.typical_k,
            }
            for position, item in enumerate(recommendation.items, start=1)
        ],
        columns=["position", "algorithm", "score", "typical_k"]
    )
