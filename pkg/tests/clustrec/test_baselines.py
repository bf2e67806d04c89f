"""Tests for the popularity, standard-ranking and hand-crafted meta-feature baselines."""

import numpy as np
import pytest

from clustrec.baselines import (
    META_FEATURE_NAMES,
    cad_vector,
    distance_meta_features,
    distance_vector,
    meta_feature_table,
    meta_features_19,
    popularity_from_counts,
    popularity_rank,
    spearman_rows,
    standard_ranking,
    top_k,
)
from clustrec.errors import DimensionMismatch

ALGORITHMS = ["EAC", "PSC", "MST", "SL", "AL", "CL", "WL", "KM", "KHM", "KKM", "MBK", "FC", "DBSCAN", "MS", "GMF", "GMT", "GMD"]

BEST_COUNTS = {
    "BP": ([19, 0, 10, 117, 29, 5, 3, 3, 2, 5, 0, 2, 14, 1, 0, 0, 0], ["SL", "AL", "EAC"]),
    "Dunn": ([26, 1, 12, 38, 34, 22, 1, 8, 6, 7, 3, 1, 44, 2, 3, 1, 1], ["DBSCAN", "SL", "AL"]),
    "CH": ([6, 4, 1, 1, 4, 4, 12, 78, 18, 31, 7, 26, 1, 1, 4, 5, 7], ["KM", "KKM", "FC"]),
    "Sil": ([37, 1, 3, 25, 40, 9, 18, 35, 4, 5, 4, 4, 4, 3, 5, 4, 9], ["AL", "EAC", "KM"]),
    "MC": ([27, 6, 6, 28, 44, 22, 5, 16, 3, 11, 5, 1, 24, 2, 3, 6, 1], ["AL", "SL", "EAC"]),
    "DB": ([8, 0, 3, 108, 52, 5, 5, 9, 2, 0, 2, 3, 1, 2, 1, 3, 6], ["SL", "AL", "KM"]),
    "HKK": ([18, 4, 26, 85, 27, 5, 7, 12, 3, 3, 2, 3, 9, 0, 3, 3, 0], ["SL", "AL", "MST"]),
    "HL": ([29, 7, 2, 41, 43, 22, 9, 24, 2, 0, 5, 3, 8, 2, 6, 1, 6], ["AL", "SL", "EAC"]),
    "SDScat": ([11, 10, 3, 70, 33, 9, 4, 11, 15, 0, 3, 5, 17, 3, 4, 3, 9], ["SL", "AL", "DBSCAN"]),
    "XB": ([5, 0, 11, 67, 37, 22, 11, 3, 1, 1, 3, 8, 34, 3, 0, 3, 1], ["SL", "AL", "DBSCAN"]),
    "AvgRank": ([28, 0, 2, 35, 67, 18, 17, 23, 2, 1, 2, 5, 0, 3, 0, 4, 3], ["AL", "SL", "EAC"]),
}


class TestPopularity:
    @pytest.mark.parametrize("measure", sorted(BEST_COUNTS))
    def test_top_three_from_best_counts(self, measure):
        counts, expected = BEST_COUNTS[measure]
        vector = popularity_from_counts(measure, dict(zip(ALGORITHMS, counts)), ALGORITHMS)
        assert top_k(vector, 3) == expected
        assert sorted(vector.order) == sorted(ALGORITHMS)

    def test_count_ties_go_to_lower_ordinal(self):
        vector = popularity_from_counts("m", {"B": 2, "C": 2}, ["A", "B", "C"])
        assert vector.order == ["B", "C", "A"]
        assert vector.counts == {"A": 0, "B": 2, "C": 2}

    def test_unknown_algorithm(self):
        with pytest.raises(DimensionMismatch):
            popularity_from_counts("m", {"Z": 1}, ["A"])

    def test_from_table(self, table_factory):
        table = table_factory([[0.1, 0.9, 0.5], [0.8, 0.2, 0.1], [0.1, 0.7, 0.6]])
        vector = popularity_rank(table)
        assert vector.order == ["A1", "A0", "A2"]
        assert vector.counts == {"A0": 1, "A1": 2, "A2": 0}


def test_standard_ranking(table_factory):
    table = table_factory([[0.9, 0.5, 0.1], [0.1, 0.5, 0.9], [0.5, 0.9, 0.1]])
    # mean ranks: A0 2.0, A1 1.67, A2 2.33
    assert standard_ranking(table) == ["A1", "A0", "A2"]


def test_standard_ranking_tie_uses_ordinal(table_factory):
    table = table_factory([[0.9, 0.1], [0.1, 0.9]])
    assert standard_ranking(table) == ["A0", "A1"]


class TestVectors:
    def test_distance_vector(self):
        np.testing.assert_allclose(distance_vector(np.array([[0.0, 0.0], [3.0, 4.0], [6.0, 8.0]])), [0.0, 1.0, 0.0])

    def test_equal_distances_map_to_zero(self):
        np.testing.assert_array_equal(distance_vector(np.array([[0.0, 0.0], [1.0, 1.0]])), [0.0])

    def test_spearman_rows(self):
        matrix = np.array([[1.0, 2.0, 3.0], [3.0, 2.0, 1.0], [5.0, 5.0, 5.0], [1.0, 5.0, 9.0]])
        np.testing.assert_allclose(spearman_rows(matrix), [-1.0, 0.0, 1.0, 0.0, -1.0, 0.0])

    def test_cad_vector_concatenates(self):
        matrix = np.random.default_rng(0).normal(size=(6, 4))
        v = cad_vector(matrix)
        assert v.shape == (30,)
        assert v.min() == 0.0 and v.max() == 1.0


def meta_features_oracle(v, excess_kurtosis=False):
    n = len(v)
    mean = sum(v) / n
    variance = sum((x - mean) ** 2 for x in v) / (n - 1)
    std = variance ** 0.5
    z = [(x - mean) / std for x in v]
    skewness = sum(t ** 3 for t in z) / n
    kurtosis = sum(t ** 4 for t in z) / n - (3.0 if excess_kurtosis else 0.0)
    intervals = [0] * 10
    for x in v:
        for i in range(1, 11):
            if x <= i / 10.0:
                intervals[i - 1] += 1
                break
    bands = [0] * 4
    for t in z:
        a = abs(t)
        bands[0 if a < 1 else 1 if a < 2 else 2 if a < 3 else 3] += 1
    return [mean, variance, std, skewness, kurtosis] + [100.0 * c / n for c in intervals] + [100.0 * c / n for c in bands]


class TestMetaFeatures:
    def test_names(self):
        assert len(META_FEATURE_NAMES) == 19

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_oracle(self, seed):
        rng = np.random.default_rng(seed)
        v = rng.beta(0.7, 2.0, size=int(rng.integers(5, 200)))
        features = meta_features_19(v)
        np.testing.assert_allclose(features, meta_features_oracle(v.tolist()), rtol=0, atol=1e-10)
        assert features[5:15].sum() == pytest.approx(100.0)
        assert features[15:].sum() == pytest.approx(100.0)

    def test_excess_kurtosis(self):
        v = np.random.default_rng(7).uniform(size=50)
        assert meta_features_19(v, excess_kurtosis=True)[4] == pytest.approx(meta_features_19(v)[4] - 3.0)

    def test_interval_boundaries(self):
        features = meta_features_19(np.array([0.0, 0.1, 0.10000001, 1.0]))
        np.testing.assert_allclose(features[5:15], [50.0, 25.0, 0, 0, 0, 0, 0, 0, 0, 25.0])

    def test_constant_vector(self):
        features = meta_features_19(np.zeros(4))
        np.testing.assert_array_equal(features[:5], [0.0, 0.0, 0.0, 0.0, 0.0])
        assert features[15] == 100.0

    def test_empty_vector(self):
        with pytest.raises(DimensionMismatch):
            meta_features_19(np.array([]))

    def test_table(self, small_datasets):
        table = meta_feature_table(small_datasets, "distance")
        assert list(table) == [d.name for d in small_datasets]
        np.testing.assert_array_equal(table["ds_0"], distance_meta_features(small_datasets[0]))
        assert all(len(meta_feature_table(small_datasets[:2], "cad")[d.name]) == 19 for d in small_datasets[:2])

    def test_unknown_kind(self, small_datasets):
        with pytest.raises(ValueError):
            meta_feature_table(small_datasets, "landmarking")
