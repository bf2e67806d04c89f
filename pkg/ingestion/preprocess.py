"""
Preprocessing for clustrec datasets.

This module turns a RawDataset into a NumericDataset: the label column is dropped,
nominal columns are integer-encoded, constant, identifier-like and mostly-missing
columns are removed, remaining gaps are mean-imputed and every column is min-max
normalized to [0, 1]. Every action is recorded in the dataset provenance.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from sklearn.impute import SimpleImputer

from clustrec.errors import EmptyAfterPreprocess, InternalError
from clustrec.models import ColumnKind, DropReason, Provenance

from .dataset_loader import ColumnSpec, RawDataset, parse_number

logger = logging.getLogger(__name__)

MAX_MISSING_FRACTION = 0.4


@dataclass(frozen=True)
class NumericDataset:
    """A preprocessed dataset: finite values in [0, 1], no constant column."""
    name: str
    matrix: np.ndarray
    feature_names: Tuple[str, ...]
    provenance: Provenance

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def m(self) -> int:
        return self.matrix.shape[1]

    @property
    def source_hash(self) -> str:
        return self.provenance.source_hash


def encode_nominal(values: Sequence[str]) -> List[int]:
    """
    Integer-encode symbols by first appearance.

    Args:
        values: Non-empty sequence of symbols

    Returns:
        Codes where the first distinct symbol maps to 0, the second to 1, and so on
    """
    codes, _ = pd.factorize(pd.Series(list(values), dtype=object), sort=False)
    return codes.tolist()


def _is_identifier(values: pd.Series, kind: ColumnKind, n: int) -> bool:
    """A column holding a distinct value for every instance."""
    if values.isna().any() or values.nunique() != n:
        return False
    if kind == ColumnKind.NOMINAL:
        return True
    # Numeric columns count only when they look like a row id. Below three rows every
    # normalized column is {0, 1}, which would otherwise read as one.
    if n < 3:
        return False
    numbers = values.astype(float).to_numpy()
    if not np.all(numbers == np.round(numbers)):
        return False
    return numbers.max() - numbers.min() + 1 == n


def preprocess(raw: RawDataset) -> NumericDataset:
    """
    Clean a raw dataset into a normalized numeric matrix.

    Args:
        raw: Parsed dataset with at least two rows

    Returns:
        NumericDataset with provenance

    Raises:
        EmptyAfterPreprocess: If fewer than two rows or no column survive
    """
    n = raw.n_rows
    provenance = Provenance(source=raw.source, source_hash=raw.source_hash, rows=n)
    if n < 2:
        raise EmptyAfterPreprocess(f"{raw.name} has {n} rows; at least 2 are required")

    kept: Dict[str, pd.Series] = {}

    for index, column in enumerate(raw.columns):
        # (a) label column
        if column.kind == ColumnKind.LABEL:
            provenance.dropped[column.name] = DropReason.LABEL
            continue

        values = pd.Series(raw.column_values(index), dtype=object)
        present = values.dropna()
        if column.kind == ColumnKind.NUMERIC:
            values = values.map(lambda v: np.nan if v is None else parse_number(v)).astype(float)
            present = values.dropna()

        # (c) identical values for all instances
        if present.nunique() <= 1:
            provenance.dropped[column.name] = DropReason.CONSTANT
            continue

        # (d) a distinct value per instance
        if _is_identifier(values, column.kind, n):
            provenance.dropped[column.name] = DropReason.IDENTIFIER
            continue

        # (e) too many missing values
        missing = int(values.isna().sum())
        if missing / n > MAX_MISSING_FRACTION:
            provenance.dropped[column.name] = DropReason.MISSING
            continue

        # (b) nominal encoding
        if column.kind == ColumnKind.NOMINAL:
            codes = np.full(n, np.nan)
            mask = values.notna().to_numpy()
            codes[mask] = encode_nominal(values[mask].tolist())
            values = pd.Series(codes)
            provenance.encoded.append(column.name)

        if missing:
            provenance.imputed[column.name] = missing
        kept[column.name] = values.astype(float).reset_index(drop=True)
        provenance.kept.append(column.name)

    if not kept:
        raise EmptyAfterPreprocess(f"No column of {raw.name} survived preprocessing")

    frame = pd.DataFrame(kept)
    matrix = frame.to_numpy(dtype=float)
    if np.isnan(matrix).any():
        matrix = SimpleImputer(strategy="mean").fit_transform(matrix)

    # (f) min-max normalization
    low = matrix.min(axis=0)
    high = matrix.max(axis=0)
    if np.any(high <= low):
        raise InternalError(f"Constant column survived preprocessing in {raw.name}")
    matrix = np.clip((matrix - low) / (high - low), 0.0, 1.0)
    matrix.setflags(write=False)

    if provenance.dropped:
        logger.info(f"{raw.name}: dropped {dict((k, v.value) for k, v in provenance.dropped.items())}")

    return NumericDataset(
        name=raw.name,
        matrix=matrix,
        feature_names=tuple(frame.columns),
        provenance=provenance
    )


def as_raw(dataset: NumericDataset) -> RawDataset:
    """Express a NumericDataset as a RawDataset of numeric columns."""
    columns = tuple(ColumnSpec(name, ColumnKind.NUMERIC) for name in dataset.feature_names)
    cells = tuple(tuple(repr(float(value)) for value in row) for row in dataset.matrix)
    return RawDataset(
        name=dataset.name,
        columns=columns,
        cells=cells,
        source=dataset.provenance.source,
        source_hash=dataset.provenance.source_hash
    )


def dataset_from_matrix(
    name: str,
    matrix: np.ndarray,
    feature_names: Optional[Sequence[str]] = None
) -> NumericDataset:
    """Run an in-memory matrix through preprocess."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim == 1:
        matrix = matrix[:, None]
    names = list(feature_names or [f"x{j}" for j in range(matrix.shape[1])])
    columns = tuple(ColumnSpec(column, ColumnKind.NUMERIC) for column in names)
    cells = tuple(tuple(repr(float(v)) for v in row) for row in matrix)
    return preprocess(RawDataset(name=name, columns=columns, cells=cells, source="<memory>"))
