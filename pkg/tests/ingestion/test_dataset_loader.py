"""Tests for CSV loading."""

import pytest

from clustrec.errors import IoError, ParseError
from clustrec.models import ColumnKind
from ingestion.dataset_loader import infer_kind, is_missing, load_csv


class TestLoadCsv:
    def test_numeric_file(self, write_csv):
        path = write_csv("numbers.csv", "a,b\n1,2\n3,4\n5,6\n")
        raw = load_csv(path)
        assert raw.name == "numbers"
        assert raw.n_rows == 3
        assert [c.kind for c in raw.columns] == [ColumnKind.NUMERIC, ColumnKind.NUMERIC]
        assert len(raw.source_hash) == 64

    def test_nominal_inference(self, write_csv):
        path = write_csv("colors.csv", "color,x\nred,1\nblue,2\nred,3\n")
        raw = load_csv(path)
        assert raw.columns[0].kind == ColumnKind.NOMINAL
        assert raw.columns[1].kind == ColumnKind.NUMERIC

    def test_ragged_row(self, write_csv):
        path = write_csv("ragged.csv", "a,b\n1,2\n3\n")
        with pytest.raises(ParseError) as excinfo:
            load_csv(path)
        assert excinfo.value.row == 2

    def test_missing_markers(self, write_csv):
        path = write_csv("gaps.csv", "a,b\n1,?\nNaN,2\n,3\n")
        raw = load_csv(path)
        assert raw.column_values(0) == ["1", None, None]
        assert raw.column_values(1) == [None, "2", "3"]
        assert raw.columns[0].kind == ColumnKind.NUMERIC

    def test_label_column_and_schema(self, write_csv):
        path = write_csv("labelled.csv", "x,code,class\n1,10,a\n2,20,b\n")
        raw = load_csv(path, schema={"code": ColumnKind.NOMINAL}, label_column="class")
        assert [c.kind for c in raw.columns] == [ColumnKind.NUMERIC, ColumnKind.NOMINAL, ColumnKind.LABEL]

    def test_unknown_schema_column(self, write_csv):
        path = write_csv("plain.csv", "x\n1\n2\n")
        with pytest.raises(ParseError):
            load_csv(path, schema={"nope": ColumnKind.NUMERIC})

    def test_duplicate_header(self, write_csv):
        path = write_csv("dup.csv", "x,x\n1,2\n")
        with pytest.raises(ParseError):
            load_csv(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(IoError):
            load_csv(tmp_path / "absent.csv")


def test_infer_kind_ignores_missing():
    assert infer_kind(["1.5", None, "2"]) == ColumnKind.NUMERIC
    assert infer_kind(["1.5", "inf"]) == ColumnKind.NOMINAL


def test_is_missing():
    assert is_missing(None)
    assert is_missing(" ? ")
    assert not is_missing("0")
