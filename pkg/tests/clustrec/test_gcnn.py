"""Tests for the graph convolutional embedder."""

import numpy as np
import pytest
import torch

from clustrec.errors import DimensionMismatch, SingleClassCorpus
from clustrec.gcnn import (
    GcnModel,
    GraphConvClassifier,
    LabeledGraph,
    corpus_loss,
    embed_all,
    forward,
    normalize_adjacency,
    train_gcnn,
    training_accuracy,
)
from tests.conftest import random_symmetric


def random_graph(rng, n, dim, label=None, name="g"):
    return LabeledGraph(name=name, Z=random_symmetric(rng, n), X=rng.normal(size=(n, dim)), label=label)


class TestNormalizeAdjacency:
    def test_entries_and_spectrum(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n = int(rng.integers(2, 15))
            Z = random_symmetric(rng, n)
            F = normalize_adjacency(Z)
            Zt = Z + np.eye(n)
            b = Zt.sum(axis=1)
            for i in range(n):
                for j in range(n):
                    assert F[i, j] == pytest.approx(Zt[i, j] / np.sqrt(b[i] * b[j]), abs=1e-15)
            eigenvalues = np.linalg.eigvalsh(F)
            assert eigenvalues.min() >= -1 - 1e-9
            assert eigenvalues.max() <= 1 + 1e-9

    def test_edgeless_graph_is_identity(self):
        np.testing.assert_array_equal(normalize_adjacency(np.zeros((4, 4))), np.eye(4))

    def test_rejects_non_square(self):
        with pytest.raises(DimensionMismatch):
            normalize_adjacency(np.zeros((2, 3)))


def test_labeled_graph_shape_check():
    with pytest.raises(DimensionMismatch):
        LabeledGraph(name="bad", Z=np.zeros((3, 3)), X=np.zeros((4, 2)))


def test_gradients_match_finite_differences():
    rng = np.random.default_rng(1)
    h = 1e-5
    for trial in range(20):
        n = int(rng.integers(2, 13))
        g = random_graph(rng, n, 3)
        module = GraphConvClassifier(input_dim=3, emb=4, layers=2, n_classes=3, seed=trial)
        inputs = [(torch.from_numpy(normalize_adjacency(g.Z)), torch.from_numpy(g.X))]
        target = torch.tensor([trial % 3])

        module.zero_grad()
        corpus_loss(module, inputs, target).backward()
        analytic, numeric = [], []
        with torch.no_grad():
            for param in module.parameters():
                flat = param.view(-1)
                analytic.append(param.grad.view(-1).clone())
                estimates = torch.empty_like(flat)
                for k in range(flat.numel()):
                    original = flat[k].item()
                    flat[k] = original + h
                    plus = corpus_loss(module, inputs, target).item()
                    flat[k] = original - h
                    minus = corpus_loss(module, inputs, target).item()
                    flat[k] = original
                    estimates[k] = (plus - minus) / (2 * h)
                numeric.append(estimates)
        analytic_vec, numeric_vec = torch.cat(analytic), torch.cat(numeric)
        scale = max(float(analytic_vec.norm() + numeric_vec.norm()), 1e-12)
        assert float((analytic_vec - numeric_vec).norm()) / scale < 1e-4


def test_embedding_is_permutation_invariant():
    rng = np.random.default_rng(2)
    module = GraphConvClassifier(input_dim=5, emb=8, layers=3, n_classes=2, seed=4)
    model = GcnModel(module=module, classes=["A", "B"], architecture={"input_dim": 5, "emb": 8, "layers": 3, "seed": 4})
    for _ in range(100):
        n = int(rng.integers(2, 12))
        g = random_graph(rng, n, 5)
        perm = rng.permutation(n)
        permuted = LabeledGraph(name="p", Z=g.Z[np.ix_(perm, perm)], X=g.X[perm])
        _, original, logits = forward(model, g)
        _, shuffled, shuffled_logits = forward(model, permuted)
        np.testing.assert_allclose(shuffled, original, atol=1e-9)
        np.testing.assert_allclose(shuffled_logits, logits, atol=1e-9)


def clique_and_edgeless(n_each=10, nodes=16, dim=4, seed=3):
    rng = np.random.default_rng(seed)
    graphs = []
    for i in range(n_each):
        clique = np.ones((nodes, nodes)) - np.eye(nodes)
        graphs.append(LabeledGraph(name=f"clique_{i}", Z=clique, X=rng.normal(size=(nodes, dim)), label="clique"))
        graphs.append(LabeledGraph(name=f"empty_{i}", Z=np.zeros((nodes, nodes)), X=rng.normal(size=(nodes, dim)), label="empty"))
    return graphs


class TestTraining:
    def test_separates_cliques_from_edgeless_graphs(self):
        graphs = clique_and_edgeless()
        model = train_gcnn(graphs, layers=2, emb=32, lr=0.02, max_epochs=60, patience=10, seed=0)
        assert model.classes == ["clique", "empty"]
        assert model.history[-1] < model.history[0]
        assert training_accuracy(model, graphs) == 1.0

    def test_zero_learning_rate_stops_after_patience(self):
        graphs = clique_and_edgeless(n_each=2, nodes=4)
        model = train_gcnn(graphs, layers=2, emb=8, lr=0.0, max_epochs=60, patience=10, seed=0)
        assert len(model.history) == 11
        assert model.stopped_epoch == 10
        assert len(set(model.history)) == 1

    def test_runs_to_max_epochs(self):
        graphs = clique_and_edgeless(n_each=2, nodes=4)
        model = train_gcnn(graphs, layers=2, emb=8, lr=0.01, max_epochs=3, patience=10, seed=0)
        assert len(model.history) == 3
        assert model.stopped_epoch == 2

    def test_architecture_record(self):
        graphs = clique_and_edgeless(n_each=2, nodes=4)
        model = train_gcnn(graphs, layers=2, emb=16, max_epochs=2, seed=5)
        assert model.architecture["layers"] == 2
        assert model.emb == 16
        assert model.input_dim == 4
        assert len(model.module.convs) == 2

    def test_seeded(self):
        graphs = clique_and_edgeless(n_each=2, nodes=4)
        first = train_gcnn(graphs, layers=2, emb=8, max_epochs=4, seed=7)
        second = train_gcnn(graphs, layers=2, emb=8, max_epochs=4, seed=7)
        assert first.history == second.history
        assert first.to_bytes() == second.to_bytes()

    def test_single_class(self):
        graphs = [g for g in clique_and_edgeless(n_each=2, nodes=4) if g.label == "clique"]
        with pytest.raises(SingleClassCorpus):
            train_gcnn(graphs, max_epochs=2)

    def test_mixed_feature_widths(self):
        rng = np.random.default_rng(0)
        graphs = [random_graph(rng, 4, 3, label="a"), random_graph(rng, 4, 5, label="b")]
        with pytest.raises(DimensionMismatch):
            train_gcnn(graphs, max_epochs=2)


class TestModelUse:
    @pytest.fixture
    def model(self):
        return train_gcnn(clique_and_edgeless(n_each=2, nodes=4), layers=2, emb=8, max_epochs=3, seed=1)

    def test_bytes_round_trip_preserves_outputs(self, model):
        restored = GcnModel.from_bytes(model.to_bytes())
        g = clique_and_edgeless(n_each=1, nodes=5, seed=9)[0]
        np.testing.assert_array_equal(forward(restored, g)[1], forward(model, g)[1])
        assert restored.classes == model.classes
        assert restored.history == model.history

    def test_embed_all_order_and_width(self, model):
        graphs = clique_and_edgeless(n_each=2, nodes=6, seed=11)
        embeddings = embed_all(model, graphs, measure="silhouette")
        assert [e.name for e in embeddings] == [g.name for g in graphs]
        assert all(e.vector.shape == (8,) and e.measure == "silhouette" for e in embeddings)

    def test_wrong_feature_width(self, model):
        rng = np.random.default_rng(0)
        with pytest.raises(DimensionMismatch):
            forward(model, random_graph(rng, 4, 7))
