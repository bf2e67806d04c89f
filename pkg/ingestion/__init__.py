"""
clustrec Ingestion Package.

This package loads tabular datasets and applies the cleaning steps that turn them
into normalized numeric matrices ready for clustering and graph construction.
"""

from .dataset_loader import ColumnSpec, RawDataset, file_hash, load_csv
from .preprocess import NumericDataset, as_raw, dataset_from_matrix, encode_nominal, preprocess
from .ingest import CorpusIngestor, load_dataset

__version__ = "1.0.0"

__all__ = [
    'ColumnSpec',
    'RawDataset',
    'file_hash',
    'load_csv',
    'NumericDataset',
    'as_raw',
    'dataset_from_matrix',
    'encode_nominal',
    'preprocess',
    'CorpusIngestor',
    'load_dataset'
]
