"""
Corpus ingestion for clustrec.

This module loads a directory of CSV datasets, preprocesses each one and keeps
statistics about what was dropped, encoded and imputed along the way.
"""

import logging
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

import click

from clustrec.errors import ClustRecError, DataError, IoError
from clustrec.models import ColumnKind

from .dataset_loader import load_csv
from .preprocess import NumericDataset, preprocess

logger = logging.getLogger(__name__)


def load_dataset(
    path: Path,
    label_column: Optional[str] = None,
    schema: Optional[Mapping[str, ColumnKind]] = None
) -> NumericDataset:
    """Load and preprocess a single CSV file."""
    return preprocess(load_csv(path, schema=schema, label_column=label_column))


class CorpusIngestor:
    """Loads and preprocesses every dataset of a corpus directory."""

    def __init__(self, label_column: Optional[str] = "class", strict: bool = False):
        """
        Initialize the ingestor.

        Args:
            label_column: Column dropped as class label when present
            strict: Raise on the first failing file instead of skipping it
        """
        self.label_column = label_column
        self.strict = strict
        self.stats = self._empty_statistics()

    @staticmethod
    def _empty_statistics() -> Dict[str, Any]:
        return {
            'datasets_loaded': 0,
            'datasets_failed': 0,
            'columns_dropped': 0,
            'columns_encoded': 0,
            'cells_imputed': 0,
            'processing_time': 0.0
        }

    def process_file(self, file_path: Path) -> Optional[NumericDataset]:
        """
        Load and preprocess one file.

        Args:
            file_path: CSV file

        Returns:
            The dataset, or None when the file failed and strict mode is off
        """
        start = time.perf_counter()
        try:
            dataset = load_dataset(file_path, label_column=self.label_column)
        except ClustRecError as e:
            self.stats['datasets_failed'] += 1
            logger.error(f"Failed to ingest {file_path}: {e}")
            if self.strict:
                raise
            return None

        provenance = dataset.provenance
        self.stats['datasets_loaded'] += 1
        self.stats['columns_dropped'] += len(provenance.dropped)
        self.stats['columns_encoded'] += len(provenance.encoded)
        self.stats['cells_imputed'] += sum(provenance.imputed.values())
        self.stats['processing_time'] += time.perf_counter() - start
        logger.debug(f"Ingested {dataset.name}: n={dataset.n}, m={dataset.m}")
        return dataset

    def process_directory(self, directory_path: Path) -> List[NumericDataset]:
        """
        Process every CSV file of a directory, sorted by file name.

        Args:
            directory_path: Corpus directory

        Returns:
            Successfully ingested datasets in name order

        Raises:
            IoError: If the directory does not exist
            DataError: If two files share a dataset name
        """
        directory_path = Path(directory_path)
        if not directory_path.is_dir():
            raise IoError(f"Corpus directory does not exist: {directory_path}")

        files = sorted(p for p in directory_path.glob("*.csv") if p.is_file())
        logger.info(f"Found {len(files)} datasets in {directory_path}")

        datasets = []
        names = set()
        for file_path in files:
            dataset = self.process_file(file_path)
            if dataset is None:
                continue
            if dataset.name in names:
                raise DataError(f"Duplicate dataset name: {dataset.name}")
            names.add(dataset.name)
            datasets.append(dataset)

        return datasets

    def get_statistics(self) -> Dict[str, Any]:
        """Get processing statistics."""
        return self.stats.copy()

    def reset_statistics(self):
        """Reset processing statistics."""
        self.stats = self._empty_statistics()


# CLI Interface
@click.group()
def cli():
    """clustrec dataset ingestion."""
    pass


@cli.command()
@click.argument('file_path', type=click.Path(exists=True, path_type=Path))
@click.option('--label-column', default='class', show_default=True, help='Class label column to drop')
@click.option('--verbose', '-v', is_flag=True, help='Enable verbose logging')
def inspect(file_path: Path, label_column: str, verbose: bool):
    """Preprocess one file and print its provenance."""
    if verbose:
        logging.basicConfig(level=logging.INFO)

    try:
        dataset = load_dataset(file_path, label_column=label_column)
    except ClustRecError as e:
        click.echo(f"Failed to ingest {file_path}: {e}", err=True)
        sys.exit(e.exit_code)

    click.echo(f"{dataset.name}: {dataset.n} instances x {dataset.m} features")
    click.echo(dataset.provenance.to_text())


@cli.command()
@click.argument('directory_path', type=click.Path(exists=True, path_type=Path))
@click.option('--label-column', default='class', show_default=True, help='Class label column to drop')
@click.option('--verbose', '-v', is_flag=True, help='Enable verbose logging')
def summary(directory_path: Path, label_column: str, verbose: bool):
    """Ingest a corpus directory and print statistics."""
    if verbose:
        logging.basicConfig(level=logging.INFO)

    ingestor = CorpusIngestor(label_column=label_column)
    try:
        datasets = ingestor.process_directory(directory_path)
    except ClustRecError as e:
        click.echo(f"Ingestion failed: {e}", err=True)
        sys.exit(e.exit_code)

    stats = ingestor.get_statistics()
    click.echo(f"Datasets loaded: {stats['datasets_loaded']}")
    click.echo(f"Datasets failed: {stats['datasets_failed']}")
    click.echo(f"Columns dropped: {stats['columns_dropped']}")
    click.echo(f"Columns encoded: {stats['columns_encoded']}")
    click.echo(f"Cells imputed: {stats['cells_imputed']}")
    for dataset in datasets:
        click.echo(f"  {dataset.name}: n={dataset.n}, m={dataset.m}")


if __name__ == '__main__':
    cli()
