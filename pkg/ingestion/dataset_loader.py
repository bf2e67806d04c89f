"""
Dataset loading utilities for clustrec.

This module parses comma-separated dataset files into RawDataset records, inferring
column kinds and recording missing cells. No cleaning happens here; see preprocess.
"""

import csv
import hashlib
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Mapping, Optional, Sequence, Tuple

from clustrec.errors import IoError, ParseError
from clustrec.models import ColumnKind

logger = logging.getLogger(__name__)

MISSING_MARKERS = frozenset({"", "NaN", "?"})


@dataclass(frozen=True)
class ColumnSpec:
    """Name and kind of a raw column."""
    name: str
    kind: ColumnKind


@dataclass(frozen=True)
class RawDataset:
    """A parsed table; missing cells are None."""
    name: str
    columns: Tuple[ColumnSpec, ...]
    cells: Tuple[Tuple[Optional[str], ...], ...]
    source: str = ""
    source_hash: str = field(default="", compare=False)

    def __post_init__(self):
        width = len(self.columns)
        for index, row in enumerate(self.cells, start=1):
            if len(row) != width:
                raise ParseError(
                    f"Row {index} of {self.name} has {len(row)} cells, expected {width}",
                    row=index,
                    col=min(len(row), width) + 1
                )
        labels = [c for c in self.columns if c.kind == ColumnKind.LABEL]
        if len(labels) > 1:
            raise ParseError(f"{self.name} has {len(labels)} label columns; at most one is allowed")

    @property
    def n_rows(self) -> int:
        return len(self.cells)

    @property
    def column_names(self) -> List[str]:
        return [c.name for c in self.columns]

    def column_values(self, index: int) -> List[Optional[str]]:
        """Values of one column, top to bottom."""
        return [row[index] for row in self.cells]


def is_missing(value: Optional[str]) -> bool:
    return value is None or value.strip() in MISSING_MARKERS


def parse_number(value: str) -> Optional[float]:
    """Parse a finite float or return None."""
    try:
        number = float(value)
    except ValueError:
        return None
    return number if math.isfinite(number) else None


def infer_kind(values: Sequence[Optional[str]]) -> ColumnKind:
    """Numeric when every present value parses as a finite number."""
    for value in values:
        if value is not None and parse_number(value) is None:
            return ColumnKind.NOMINAL
    return ColumnKind.NUMERIC


def file_hash(file_path: Path) -> str:
    """Calculate SHA-256 hash of file."""
    hash_sha256 = hashlib.sha256()
    with open(file_path, "rb") as f:
        for chunk in iter(lambda: f.read(4096), b""):
            hash_sha256.update(chunk)
    return hash_sha256.hexdigest()


def load_csv(
    path: Path,
    schema: Optional[Mapping[str, ColumnKind]] = None,
    label_column: Optional[str] = None,
    name: Optional[str] = None
) -> RawDataset:
    """
    Load a comma-separated file with a header row.

    Args:
        path: File to read
        schema: Column-kind overrides by column name
        label_column: Column to mark as class label when present
        name: Dataset name; defaults to the file stem

    Returns:
        Parsed dataset with inferred column kinds

    Raises:
        IoError: If the file cannot be read
        ParseError: On a missing header, duplicate column names or ragged rows
    """
    path = Path(path)
    schema = dict(schema or {})

    try:
        with open(path, "r", encoding="utf-8", newline="") as file:
            rows = [row for row in csv.reader(file) if row]
    except UnicodeDecodeError as e:
        raise ParseError(f"{path} is not valid UTF-8 text: {e}") from e
    except OSError as e:
        raise IoError(f"Cannot read {path}: {e}") from e

    if not rows:
        raise ParseError(f"{path} has no header row", row=0)

    header = [column.strip() for column in rows[0]]
    if len(set(header)) != len(header):
        raise ParseError(f"{path} has duplicate column names", row=0)

    cells = []
    for index, row in enumerate(rows[1:], start=1):
        if len(row) != len(header):
            raise ParseError(
                f"Row {index} of {path} has {len(row)} cells, expected {len(header)}",
                row=index,
                col=min(len(row), len(header)) + 1
            )
        cells.append(tuple(None if is_missing(cell) else cell.strip() for cell in row))

    unknown = set(schema) - set(header)
    if unknown:
        raise ParseError(f"Schema overrides name unknown columns: {sorted(unknown)}")

    columns = []
    for index, column in enumerate(header):
        if column in schema:
            kind = ColumnKind(schema[column])
        elif label_column is not None and column == label_column:
            kind = ColumnKind.LABEL
        else:
            kind = infer_kind([row[index] for row in cells])
        columns.append(ColumnSpec(column, kind))

    dataset = RawDataset(
        name=name or path.stem,
        columns=tuple(columns),
        cells=tuple(cells),
        source=str(path),
        source_hash=file_hash(path)
    )
    logger.debug(f"Loaded {dataset.name}: {dataset.n_rows} rows, {len(columns)} columns")
    return dataset
