"""Tests for run configuration."""

import pytest

from clustrec.config import BUILTIN_ALGORITHMS, RunConfig, config_hash, load_run_config
from clustrec.errors import ConfigError
from clustrec.models import IndexId
from clustrec.seeding import derive_seed


class TestRunConfig:
    def test_defaults(self):
        config = load_run_config()
        assert config.measures == list(IndexId)
        assert config.algorithms == list(BUILTIN_ALGORITHMS)
        assert config.graph_threshold == 0.9
        assert (config.gcn_layers, config.gcn_emb, config.gcn_lr) == (4, 300, 0.006)
        assert (config.ranker_trees, config.ranker_depth, config.ranker_shrinkage) == (200, 4, 0.1)
        assert config.repeats == 10

    @pytest.mark.parametrize("overrides", [
        {"graph_threshold": 1.5},
        {"graph_threshold": 0.0},
        {"gcn_layers": 7},
        {"gcn_emb": 64},
        {"k_min": 6, "k_max": 3},
        {"algorithms": "KM"},
        {"measures": "not_an_index"},
    ])
    def test_invalid_values(self, overrides):
        with pytest.raises(ConfigError):
            load_run_config(overrides=overrides)

    def test_comma_separated_lists(self):
        config = load_run_config(overrides={"measures": "Silhouette, dunn", "algorithms": "km,sl,km"})
        assert config.measures == [IndexId.SILHOUETTE, IndexId.DUNN]
        assert config.algorithms == ["KM", "SL"]

    def test_config_file_and_precedence(self, tmp_path):
        path = tmp_path / "run.env"
        path.write_text("GCN_LAYERS=5\nGCN_EMB=400\nCLUSTREC_MASTER_SEED=7\n", encoding="utf-8")
        config = load_run_config(path, {"gcn_emb": 200})
        assert config.gcn_layers == 5
        assert config.gcn_emb == 200
        assert config.master_seed == 7

    def test_unknown_key_in_file(self, tmp_path):
        path = tmp_path / "run.env"
        path.write_text("NOT_A_SETTING=1\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_run_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_run_config(tmp_path / "absent.env")

    def test_store_from_environment(self, monkeypatch, tmp_path):
        monkeypatch.setenv("CLUSTREC_STORE", str(tmp_path / "elsewhere"))
        assert load_run_config().store == tmp_path / "elsewhere"

    def test_section_hash_tracks_only_its_fields(self):
        base = RunConfig()
        other_ranker = RunConfig(ranker_trees=10)
        assert base.section_hash("graph") == other_ranker.section_hash("graph")
        assert base.section_hash("ranker") != other_ranker.section_hash("ranker")

    def test_resolved_excludes_runtime_fields(self):
        resolved = RunConfig(jobs=3).resolved()
        assert "jobs" not in resolved
        assert "store" not in resolved
        assert resolved["master_seed"] == 42


def test_config_hash_is_order_independent():
    assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})
    assert len(config_hash({"a": 1})) == 16


def test_derive_seed_is_stable_and_distinct():
    assert derive_seed(42, "km", 3) == derive_seed(42, "km", 3)
    assert derive_seed(42, "km", 3) != derive_seed(42, "km", 4)
    assert 0 <= derive_seed(1, "x") < 2 ** 32
