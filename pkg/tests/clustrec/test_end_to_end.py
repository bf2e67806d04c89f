"""Full benchmark on the synthetic corpus."""

import numpy as np
import pytest

from clustrec.config import load_run_config
from clustrec.harness import random_ranking_mrr
from clustrec.pipeline import MetaLearningPipeline
from clustrec.synthetic import generate_corpus

ALGORITHMS = "SL,AL,CL,WL,KM,MBK,DBSCAN,GMF"


@pytest.mark.slow
@pytest.mark.integration
def test_synthetic_benchmark(tmp_path):
    corpus = tmp_path / "corpus"
    generate_corpus(corpus, per_regime=12, seed=42)
    config = load_run_config(overrides={
        "corpus_dir": corpus,
        "output_dir": tmp_path / "reports",
        "store": tmp_path / "store",
        "measures": "silhouette",
        "algorithms": ALGORITHMS,
        "repeats": 2,
        "k_min": 2,
        "k_max": 6,
        "jobs": 2,
        "gcn_emb": 50,
        "gcn_layers": 2,
        "ranker_trees": 50,
    })

    cold = MetaLearningPipeline(config).benchmark()["silhouette"]
    assert cold.summary("marco_ge").n_folds == 36
    assert cold.summary("marco_ge").failed_folds == 0
    for summary in cold.summaries:
        assert 0.0 < summary.mean_mrr <= 1.0
        assert summary.mrr_at_k[-1] == 1.0
        assert all(a <= b for a, b in zip(summary.mrr_at_k, summary.mrr_at_k[1:]))
    assert random_ranking_mrr(8) == pytest.approx(0.34, abs=0.005)

    for method, folds in cold.folds.items():
        for fold in folds:
            assert fold.dataset not in fold.training_groups, method

    cold_reports = {name: path.read_bytes() for name, path in cold.reports.items()}
    warm_pipeline = MetaLearningPipeline(config)
    warm = warm_pipeline.benchmark()["silhouette"]
    assert warm_pipeline.get_statistics()["algorithm_runs"] == 0
    assert {name: path.read_bytes() for name, path in warm.reports.items()} == cold_reports
    assert np.isclose(warm.summary("marco_ge").mean_mrr, cold.summary("marco_ge").mean_mrr)
