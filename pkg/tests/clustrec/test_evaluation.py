"""Tests for performance tables and the average ranking."""

import numpy as np
import pytest

from clustrec.errors import MismatchedAxes
from clustrec.evaluation import (
    PerformanceTable,
    average_ranking,
    best_parameters,
    evaluate_all,
    evaluate_corpus,
    label_pairs,
    rank_row,
    registry_table,
)
from clustrec.models import AVERAGE_RANKING, IndexId, Orientation
from clustrec.zoo import HyperparamGrid


class TestRankRow:
    def test_maximize(self):
        np.testing.assert_array_equal(rank_row(np.array([0.9, 0.2, 0.5]), Orientation.MAXIMIZE), [1, 3, 2])

    def test_fractional_ties(self):
        np.testing.assert_array_equal(rank_row(np.array([0.5, 0.5, 0.2]), Orientation.MAXIMIZE), [1.5, 1.5, 3])

    def test_undefined_ranks_last(self):
        np.testing.assert_array_equal(rank_row(np.array([np.nan, 0.3, 0.1]), Orientation.MINIMIZE), [3, 2, 1])

    def test_undefined_ordered_by_ordinal(self):
        np.testing.assert_array_equal(rank_row(np.array([np.nan, 0.3, np.nan]), Orientation.MAXIMIZE), [2, 1, 3])


class TestPerformanceTable:
    def test_best_and_ties(self, table_factory):
        table = table_factory([[0.9, 0.2, 0.5], [0.5, 0.5, 0.2]])
        assert table.best == {"d0": "A0", "d1": "A0"}
        assert table.actual_ranks("d1") == {"A0": 1.5, "A1": 1.5, "A2": 3.0}

    def test_monotone_transform_invariance(self, table_factory):
        rng = np.random.default_rng(2)
        scores = rng.uniform(size=(5, 4))
        table = table_factory(scores)
        transformed = table_factory(np.exp(3 * scores) + 7)
        np.testing.assert_array_equal(table.ranks.to_numpy(), transformed.ranks.to_numpy())
        assert label_pairs(table) == label_pairs(transformed)

    def test_label_pairs_in_corpus_order(self, table_factory):
        table = table_factory([[0.1, 0.9], [0.8, 0.2], [0.3, 0.4]], datasets=["c", "a", "b"])
        assert label_pairs(table) == [("c", "A1"), ("a", "A0"), ("b", "A1")]

    def test_csv_round_trip(self, table_factory):
        table = table_factory([[0.123456789012345, np.nan, 0.5], [1 / 3, 0.25, 2 / 3]])
        parsed = PerformanceTable.from_csv_text(table.to_csv_text())
        assert parsed.algorithms == table.algorithms
        assert parsed.datasets == table.datasets
        assert parsed.best == table.best
        np.testing.assert_array_equal(parsed.ranks.to_numpy(), table.ranks.to_numpy())
        assert np.array_equal(parsed.scores.to_numpy(), table.scores.to_numpy(), equal_nan=True)
        assert parsed.to_csv_text() == table.to_csv_text()

    def test_subset(self, table_factory):
        table = table_factory([[0.1, 0.9], [0.8, 0.2], [0.3, 0.4]])
        sub = table.subset(["d2", "d0"])
        assert sub.datasets == ("d0", "d2")
        assert sub.best == {"d0": "A1", "d2": "A1"}


class TestAverageRanking:
    def test_mean_positions(self, table_factory):
        first = table_factory([[1, 2, 3]], algorithms=["A", "B", "C"], direction=Orientation.MINIMIZE)
        second = table_factory([[3, 1, 2]], algorithms=["A", "B", "C"], direction=Orientation.MINIMIZE)
        combined = average_ranking([first, second])
        assert combined.measure == AVERAGE_RANKING
        np.testing.assert_allclose(combined.scores.to_numpy()[0], [2.0, 1.5, 2.5])
        assert combined.best["d0"] == "B"
        np.testing.assert_array_equal(combined.ranks.to_numpy()[0], [2, 1, 3])

    def test_identical_tables(self, table_factory):
        table = table_factory(np.random.default_rng(4).uniform(size=(3, 4)))
        combined = average_ranking([table, table])
        np.testing.assert_array_equal(combined.ranks.to_numpy(), table.ranks.to_numpy())

    def test_unanimity(self, table_factory):
        tables = [table_factory([[0.9, 0.05 * i, 0.2]]) for i in range(10)]
        assert average_ranking(tables).best["d0"] == "A0"

    def test_mismatched_axes(self, table_factory):
        with pytest.raises(MismatchedAxes):
            average_ranking([table_factory([[1, 2]]), table_factory([[1, 2, 3]])])
        with pytest.raises(MismatchedAxes):
            average_ranking([table_factory([[1, 2]])])


class TestEvaluateCorpus:
    def test_table_shape_and_reproducibility(self, small_datasets):
        grid = HyperparamGrid(k_min=2, k_max=4)
        datasets = small_datasets[:5]
        first = evaluate_all(datasets, ["KM", "SL", "AL"], IndexId.SILHOUETTE, repeats=2, master_seed=7, grid=grid)
        second = evaluate_all(datasets, ["AL", "KM", "SL"], IndexId.SILHOUETTE, repeats=2, master_seed=7, grid=grid)
        assert first.algorithms == ("SL", "AL", "KM")
        assert first.scores.shape == (5, 3)
        assert first.to_csv_text() == second.to_csv_text()

    def test_multi_measure_matches_single_measure(self, small_datasets):
        grid = HyperparamGrid(k_min=2, k_max=4)
        datasets = small_datasets[:3]
        both = evaluate_corpus(datasets, ["KM", "AL"], [IndexId.SILHOUETTE, IndexId.DAVIES_BOULDIN],
                               repeats=2, master_seed=1, grid=grid)
        single = evaluate_all(datasets, ["KM", "AL"], IndexId.DAVIES_BOULDIN, repeats=2, master_seed=1, grid=grid)
        assert both.tables[IndexId.DAVIES_BOULDIN].to_csv_text() == single.to_csv_text()
        assert both.runs == 3 * (3 * 2 + 3)

    def test_best_parameters_record_k(self, small_datasets):
        table = evaluate_all(small_datasets[:2], ["AL"], IndexId.SILHOUETTE, repeats=1,
                             grid=HyperparamGrid(k_min=2, k_max=3))
        frame = best_parameters(table)
        assert set(frame["parameter"]) == {"k", "k_effective"}


def test_registry_table_lists_algorithms_and_indices():
    frame = registry_table()
    assert (frame["kind"] == "algorithm").sum() >= 15
    indices = frame[frame["kind"] == "index"]
    assert len(indices) == 10
    assert indices.set_index("id").loc["davies_bouldin", "orientation"] == "minimize"
