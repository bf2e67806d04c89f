"""Tests for PCA reduction and similarity graphs."""

import numpy as np
import pytest
from scipy.spatial.distance import pdist

from clustrec.errors import DimensionMismatch, ParseError
from clustrec.graph_utils import (
    ReducedDataset,
    SimilarityGraph,
    build_similarity_graph,
    cosine_similarity,
    dataset_graph,
    pca_reduce,
)
from ingestion.preprocess import dataset_from_matrix


def reduced_from(matrix: np.ndarray) -> ReducedDataset:
    return ReducedDataset(
        name="fixed",
        matrix=matrix,
        explained_variance=np.ones(matrix.shape[1]) / matrix.shape[1],
        mean_vector=np.zeros(matrix.shape[1]),
        components=np.eye(matrix.shape[1])
    )


class TestPcaReduce:
    def test_rank_one_data(self):
        x = np.random.default_rng(0).uniform(size=50)
        r = pca_reduce(dataset_from_matrix("line", np.column_stack([x, 2 * x])))
        assert r.q == 1
        np.testing.assert_allclose(r.explained_variance, [1.0])

    def test_isotropic_needs_both_components(self):
        X = np.random.default_rng(1).normal(size=(400, 2))
        r = pca_reduce(dataset_from_matrix("iso", X), variance_target=0.90)
        assert r.q == 2

    def test_full_target_preserves_distances(self, three_blobs):
        r = pca_reduce(three_blobs, variance_target=1.0)
        np.testing.assert_allclose(pdist(r.matrix), pdist(three_blobs.matrix), atol=1e-8)

    def test_wide_data_uses_gram_side(self):
        X = np.random.default_rng(2).normal(size=(6, 20))
        d = dataset_from_matrix("wide", X)
        r = pca_reduce(d, variance_target=1.0)
        assert r.q <= 5
        np.testing.assert_allclose(pdist(r.matrix), pdist(d.matrix), atol=1e-8)

    def test_explained_variance_properties(self, three_blobs):
        r = pca_reduce(three_blobs, variance_target=0.99)
        assert np.all(np.diff(r.explained_variance) <= 1e-12)
        assert r.explained_variance.sum() <= 1 + 1e-9

    def test_sign_convention(self, three_blobs):
        r = pca_reduce(three_blobs, variance_target=1.0)
        for component in r.components:
            assert component[np.argmax(np.abs(component))] > 0

    def test_orthonormal_components(self, three_blobs):
        r = pca_reduce(three_blobs, variance_target=1.0)
        np.testing.assert_allclose(r.components @ r.components.T, np.eye(r.q), atol=1e-10)

    def test_disabled_is_centered_pass_through(self, three_blobs):
        r = pca_reduce(three_blobs, enabled=False)
        assert not r.pca_enabled
        np.testing.assert_allclose(r.matrix, three_blobs.matrix - three_blobs.matrix.mean(axis=0))


class TestCosineSimilarity:
    @pytest.mark.parametrize("u, v, expected", [
        ((1, 2, 3), (1, 2, 3), 1.0),
        ((1, 0), (0, 1), 0.0),
        ((1, 1), (1, 0), 0.70710678),
        ((0, 0), (1, 0), 0.0),
    ])
    def test_values(self, u, v, expected):
        assert cosine_similarity(np.array(u), np.array(v)) == pytest.approx(expected, abs=1e-8)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            cosine_similarity(np.ones(2), np.ones(3))


class TestSimilarityGraph:
    def test_threshold_filter(self):
        gram = np.array([[1.0, 0.95, 0.8], [0.95, 1.0, 0.91], [0.8, 0.91, 1.0]])
        g = build_similarity_graph(reduced_from(np.linalg.cholesky(gram)), threshold=0.9)
        assert list(zip(g.rows.tolist(), g.cols.tolist())) == [(0, 1), (1, 2)]
        np.testing.assert_allclose(g.weights, [0.95, 0.91])

    def test_threshold_is_strict(self):
        g = build_similarity_graph(reduced_from(np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])), threshold=0.9)
        assert g.edge_count == 1
        assert build_similarity_graph(reduced_from(np.array([[1.0], [1.0]])), threshold=1.0).edge_count == 0

    def test_isolated_nodes_allowed(self):
        g = build_similarity_graph(reduced_from(np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])))
        assert g.edge_count == 0
        assert g.n == 3

    def test_invariants(self, three_blobs):
        g = dataset_graph(three_blobs)
        assert np.all(g.rows < g.cols)
        assert np.all(g.weights > 0.9)
        assert np.all(g.weights <= 1 + 1e-9)
        dense = g.dense()
        np.testing.assert_array_equal(dense, dense.T)
        assert np.all(np.diag(dense) == 0)

    def test_neighbors(self):
        g = SimilarityGraph(n=3, threshold=0.5, rows=np.array([0, 1]), cols=np.array([2, 2]), weights=np.array([0.6, 0.7]))
        nodes, weights = g.neighbors(2)
        np.testing.assert_array_equal(nodes, [0, 1])
        np.testing.assert_allclose(weights, [0.6, 0.7])

    def test_text_round_trip(self, three_blobs):
        g = dataset_graph(three_blobs)
        parsed = SimilarityGraph.from_text(g.to_text())
        assert parsed.to_text() == g.to_text()
        np.testing.assert_array_equal(parsed.weights, g.weights)

    def test_malformed_text(self):
        with pytest.raises(ParseError):
            SimilarityGraph.from_text("n: 2\nthreshold: 0.9\nedges: 2\n0 1 0.95\n")

    def test_no_pca_changes_graph_input(self, three_blobs):
        with_pca = dataset_graph(three_blobs, variance_target=0.5)
        without = dataset_graph(three_blobs, pca_enabled=False)
        assert with_pca.n == without.n == three_blobs.n
