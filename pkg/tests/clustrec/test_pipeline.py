"""Tests for the end-to-end meta-learning pipeline on a toy corpus."""

import numpy as np
import pytest

import clustrec.pipeline as pipeline_module
from clustrec.errors import MissingArtifact
from clustrec.evaluation import PerformanceTable
from clustrec.models import AVERAGE_RANKING, IndexId, Orientation
from clustrec.pipeline import MetaLearningPipeline, typical_k
from clustrec.zoo import resolve_algorithms

TOY_DATASETS = [f"toy_{i}" for i in range(6)]

# Scores for KM, SL, AL with a different winner on each pair of datasets.
DESIGNED_SCORES = [
    [0.9, 0.2, 0.5],
    [0.3, 0.8, 0.4],
    [0.2, 0.4, 0.7],
    [0.8, 0.1, 0.3],
    [0.1, 0.9, 0.6],
    [0.4, 0.2, 0.6],
]


@pytest.fixture
def pipeline(toy_config):
    return MetaLearningPipeline(toy_config)


@pytest.fixture
def designed_pipeline(toy_config):
    """Pipeline whose silhouette table is seeded in the store with known winners."""
    pipeline = MetaLearningPipeline(toy_config)
    specs = resolve_algorithms(["KM", "SL", "AL"])
    by_id = {spec.id: j for j, spec in enumerate(specs)}
    ordered = sorted(specs, key=lambda spec: spec.ordinal)
    scores = np.array([[row[by_id[spec.id]] for spec in ordered] for row in DESIGNED_SCORES])
    table = PerformanceTable.from_scores("silhouette", Orientation.MAXIMIZE, ordered, TOY_DATASETS, scores)
    pipeline.store.put(pipeline._table_key("silhouette"), table.to_csv_text().encode("utf-8"))
    return pipeline


class TestEvaluate:
    def test_tables_and_warm_cache(self, toy_config, mocker):
        cold = MetaLearningPipeline(toy_config)
        tables = cold.evaluate()
        assert list(tables) == ["silhouette"]
        assert list(tables["silhouette"].datasets) == TOY_DATASETS
        assert cold.get_statistics()["algorithm_runs"] > 0

        spy = mocker.spy(pipeline_module, "evaluate_corpus")
        warm = MetaLearningPipeline(toy_config)
        warm_tables = warm.evaluate()
        assert spy.call_count == 0
        assert warm.get_statistics()["algorithm_runs"] == 0
        assert warm.get_statistics()["cache_hits"] >= 1
        assert warm_tables["silhouette"].to_csv_text() == tables["silhouette"].to_csv_text()

    def test_single_measure_skips_average(self, pipeline, caplog):
        assert pipeline.measure_names() == ["silhouette"]
        assert "Average ranking" in caplog.text

    def test_average_ranking_added(self, toy_config):
        config = toy_config.model_copy(update={"measures": [IndexId.SILHOUETTE, IndexId.DUNN]})
        tables = MetaLearningPipeline(config).evaluate()
        assert list(tables) == ["silhouette", "dunn", AVERAGE_RANKING]
        assert tables[AVERAGE_RANKING].datasets == tables["dunn"].datasets

    def test_reports(self, pipeline, toy_config):
        paths = pipeline.write_evaluation_reports(pipeline.evaluate())
        names = {p.name for p in paths}
        assert {"registry.csv", "silhouette_performance.csv", "silhouette_k_distribution.csv"} <= names
        assert all(p.is_file() for p in paths)
        assert "# clustrec report" in (toy_config.output_dir / "registry.csv").read_text(encoding="utf-8")

    def test_table_key_tracks_evaluation_settings_only(self, toy_config):
        base = MetaLearningPipeline(toy_config)._table_key("silhouette")
        graph_change = MetaLearningPipeline(toy_config.model_copy(update={"graph_threshold": 0.8}))
        k_change = MetaLearningPipeline(toy_config.model_copy(update={"k_max": 5}))
        assert graph_change._table_key("silhouette") == base
        assert k_change._table_key("silhouette") != base

    def test_stats_reset(self, pipeline):
        pipeline.evaluate()
        pipeline.reset_statistics()
        assert pipeline.get_statistics()["algorithm_runs"] == 0


def test_typical_k(table_factory):
    table = table_factory([[0.5, 0.4], [0.3, 0.6], [0.2, 0.1]])
    table.params.update({
        "d0": {"A0": {"k_effective": 2}, "A1": {"k_effective": 3}},
        "d1": {"A0": {"k_effective": 4}},
        "d2": {"A0": {"k_effective": 5}},
    })
    assert typical_k([table]) == {"A0": 4.0, "A1": 3.0}


class TestTrainRecommend:
    def test_recommend_needs_trained_models(self, pipeline, toy_corpus):
        with pytest.raises(MissingArtifact, match="clustrec train"):
            pipeline.recommend(toy_corpus / "toy_0.csv", "silhouette")

    def test_train_then_recommend(self, designed_pipeline, toy_config, toy_corpus):
        receipts = designed_pipeline.train()
        assert [r.key.kind.value for r in receipts["silhouette"]] == ["gcnn_model", "ranker_model"]
        stats = designed_pipeline.get_statistics()
        assert stats["gcn_trained"] == 1 and stats["rankers_trained"] == 1
        assert stats["graphs_built"] == 6

        first = MetaLearningPipeline(toy_config).recommend(toy_corpus / "toy_3.csv", "silhouette")
        second = MetaLearningPipeline(toy_config).recommend(toy_corpus / "toy_3.csv", "silhouette")
        assert sorted(first.order) == ["AL", "KM", "SL"]
        assert first.model_dump() == second.model_dump()
        assert (toy_config.output_dir / "recommendation_toy_3_silhouette.csv").is_file()

    def test_retrain_uses_store(self, designed_pipeline, toy_config):
        designed_pipeline.train()
        warm = MetaLearningPipeline(toy_config)
        warm.train()
        stats = warm.get_statistics()
        assert stats["gcn_trained"] == 0
        assert stats["graphs_built"] == 0
        assert stats["algorithm_runs"] == 0


class TestBenchmark:
    def test_methods_and_reports(self, designed_pipeline):
        result = designed_pipeline.benchmark()["silhouette"]
        assert list(result.folds) == ["marco_ge", "distance", "cad", "popularity", "standard_ranking"]
        for summary in result.summaries:
            assert summary.n_folds == 6
            assert len(summary.mrr_at_k) == 3
        assert all(path.is_file() for path in result.reports.values())
        assert set(result.reports) == {"folds", "summary", "mrr_at_k", "significance"}

    def test_reports_reproducible_across_cold_and_warm_runs(self, designed_pipeline, toy_config):
        cold = designed_pipeline.benchmark()["silhouette"].reports
        cold_bytes = {name: path.read_bytes() for name, path in cold.items()}
        warm = MetaLearningPipeline(toy_config).benchmark()["silhouette"].reports
        assert {name: path.read_bytes() for name, path in warm.items()} == cold_bytes

    def test_pca_ablation_adds_method(self, designed_pipeline):
        designed_pipeline.config = designed_pipeline.config.model_copy(update={"pca_ablation": True})
        result = designed_pipeline.benchmark()["silhouette"]
        assert "marco_ge_no_pca" in result.folds

    def test_strict_leave_one_out(self, designed_pipeline):
        designed_pipeline.config = designed_pipeline.config.model_copy(update={"strict_loo": True})
        result = designed_pipeline.benchmark()["silhouette"]
        assert designed_pipeline.get_statistics()["gcn_trained"] == 6
        assert result.summary("marco_ge").n_folds == 6


def test_sensitivity_grid(designed_pipeline, toy_config):
    frames = designed_pipeline.sensitivity(layers_range=[1, 2], emb_sizes=[8], max_epochs=2)
    frame = frames["silhouette"]
    assert frame[["layers", "emb"]].values.tolist() == [[1, 8], [2, 8]]
    assert (toy_config.output_dir / "silhouette_sensitivity.csv").is_file()
