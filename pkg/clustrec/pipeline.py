"""
Meta-learning pipeline for clustrec.

This module wires the stages together: corpus evaluation, graph construction,
DeepWalk node features, GCN training and embedding, ranker training, inference on
a new dataset, and the leave-one-out benchmark. Every expensive intermediate goes
through the artifact store, keyed by a hash of exactly the settings it depends on.
"""

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from ingestion.dataset_loader import file_hash
from ingestion.ingest import CorpusIngestor, load_dataset
from ingestion.preprocess import NumericDataset

from .baselines import meta_feature_table
from .config import RunConfig, config_hash
from .errors import DataError, MissingArtifact
from .evaluation import PerformanceTable, average_ranking, best_parameters, evaluate_corpus, registry_table
from .gcnn import GcnModel, GraphEmbedding, LabeledGraph, embed_all, forward, train_gcnn
from .graph_utils import SimilarityGraph, dataset_graph
from .harness import (
    POPULARITY,
    STANDARD_RANKING,
    leave_one_out,
    per_dataset_metric,
    popularity_loo,
    random_ranking_mrr,
    standard_ranking_loo,
    summarize,
)
from .models import (
    AVERAGE_RANKING,
    AlgorithmSpec,
    ArtifactKey,
    ArtifactKind,
    FeatureKind,
    FoldResult,
    MethodSummary,
    RankedRecommendation,
    SignificanceResult,
    StoredReceipt,
)
from .node_embed import DeepWalkEmbedder, NodeFeatureMatrix
from .ranker import RankerModel, assemble_training_set, recommend, train_ranker
from .reports import (
    folds_frame,
    header_lines,
    mrr_at_k_frame,
    recommendation_frame,
    significance_frame,
    summary_frame,
    write_report,
    write_text,
)
from .seeding import derive_seed
from .significance import compare_methods
from .store import ArtifactStore
from .zoo import HyperparamGrid

logger = logging.getLogger(__name__)

NO_PCA = "marco_ge_no_pca"

Representation = Tuple[SimilarityGraph, NodeFeatureMatrix]


@dataclass
class BenchmarkResult:
    """Leave-one-out outcome of every method for one measure."""
    measure: str
    folds: Dict[str, List[FoldResult]]
    summaries: List[MethodSummary]
    significance: List[SignificanceResult]
    reports: Dict[str, Path] = field(default_factory=dict)

    def summary(self, method: str) -> MethodSummary:
        for summary in self.summaries:
            if summary.method == method:
                return summary
        raise KeyError(method)


def typical_k(tables: Sequence[PerformanceTable]) -> Dict[str, float]:
    """Median tuned cluster count per algorithm across tables and datasets."""
    values: Dict[str, List[float]] = {}
    for table in tables:
        for d in table.datasets:
            for a, params in table.params.get(d, {}).items():
                if "k_effective" in params:
                    values.setdefault(a, []).append(float(params["k_effective"]))
    return {a: float(np.median(ks)) for a, ks in sorted(values.items())}


def _build_graph(d: NumericDataset, variance_target: float, pca_enabled: bool, threshold: float) -> str:
    return dataset_graph(d, variance_target, pca_enabled, threshold).to_text()


def _build_features(embedder: DeepWalkEmbedder, graph_text: str, name: str) -> bytes:
    return embedder.embed(SimilarityGraph.from_text(graph_text), name).to_bytes()


class MetaLearningPipeline:
    """Runs the training, inference and benchmark workflows for one configuration."""

    def __init__(self, config: RunConfig, store: Optional[ArtifactStore] = None):
        """
        Initialize the pipeline.

        Args:
            config: Resolved run configuration
            store: Artifact store; defaults to one rooted at config.store
        """
        self.config = config
        self.store = store or ArtifactStore(config.store)
        self.embedder = DeepWalkEmbedder.from_config(config)
        self._datasets: Optional[List[NumericDataset]] = None
        self._fingerprint: Optional[str] = None
        self.stats = self._empty_statistics()

    @staticmethod
    def _empty_statistics() -> Dict[str, Any]:
        return {
            'datasets': 0,
            'algorithm_runs': 0,
            'cache_hits': 0,
            'cache_misses': 0,
            'graphs_built': 0,
            'gcn_trained': 0,
            'rankers_trained': 0,
            'folds_run': 0,
            'stage_times': {}
        }

    def get_statistics(self) -> Dict[str, Any]:
        """Get pipeline statistics."""
        stats = self.stats.copy()
        stats['stage_times'] = dict(self.stats['stage_times'])
        return stats

    def reset_statistics(self):
        """Reset pipeline statistics."""
        self.stats = self._empty_statistics()

    def _timed(self, stage: str, start: float):
        elapsed = time.perf_counter() - start
        self.stats['stage_times'][stage] = self.stats['stage_times'].get(stage, 0.0) + elapsed
        logger.info(f"Stage {stage} took {elapsed:.2f}s")

    # Corpus

    def load_corpus(self) -> List[NumericDataset]:
        """Ingest the corpus directory once."""
        if self._datasets is None:
            ingestor = CorpusIngestor(label_column=self.config.label_column, strict=True)
            datasets = ingestor.process_directory(self.config.corpus_dir)
            if len(datasets) < 2:
                raise DataError(f"Corpus {self.config.corpus_dir} needs at least 2 datasets, got {len(datasets)}")
            self._datasets = datasets
            self.stats['datasets'] = len(datasets)
        return self._datasets

    def corpus_fingerprint(self) -> str:
        """Hash of the corpus file contents, by dataset name."""
        if self._fingerprint is None:
            directory = Path(self.config.corpus_dir)
            if not directory.is_dir():
                raise DataError(f"Corpus directory does not exist: {directory}")
            files = sorted(p for p in directory.glob("*.csv") if p.is_file())
            self._fingerprint = config_hash({
                "files": {p.stem: file_hash(p) for p in files},
                "label_column": self.config.label_column,
            })
        return self._fingerprint

    def measure_names(self) -> List[str]:
        """Configured measures plus the average ranking when it applies."""
        names = [m.value for m in self.config.measures]
        if self.config.average_ranking:
            if len(names) >= 2:
                names.append(AVERAGE_RANKING)
            else:
                logger.warning("Average ranking needs at least 2 measures; skipping it")
        return names

    def _report_header(self, **extra: Any) -> List[str]:
        return header_lines(self.config.resolved(), {"corpus": self.corpus_fingerprint(), **extra})

    def _cached(self, key: ArtifactKey, build: Callable[[], bytes]) -> bytes:
        payload = self.store.get(key)
        if payload is not None:
            self.stats['cache_hits'] += 1
            return payload
        self.stats['cache_misses'] += 1
        payload = build()
        self.store.put(key, payload)
        return payload

    # Evaluation

    def _evaluation_hash(self) -> str:
        return self.config.section_hash("evaluation", self.corpus_fingerprint(), self.config.label_column)

    def _table_key(self, measure: str) -> ArtifactKey:
        upstream = [self._evaluation_hash()]
        if measure == AVERAGE_RANKING:
            upstream.append(",".join(m.value for m in self.config.measures))
        return ArtifactKey(kind=ArtifactKind.PERF_TABLE, identifier=measure, config_hash=config_hash({"upstream": upstream}))

    def evaluate(self) -> Dict[str, PerformanceTable]:
        """
        Performance table per measure, from the store when present.

        Returns:
            Tables keyed by measure name, in configured order
        """
        start = time.perf_counter()
        tables: Dict[str, PerformanceTable] = {}
        missing = []
        for m in self.config.measures:
            payload = self.store.get(self._table_key(m.value))
            if payload is None:
                missing.append(m)
                self.stats['cache_misses'] += 1
            else:
                tables[m.value] = PerformanceTable.from_csv_text(payload.decode("utf-8"))
                self.stats['cache_hits'] += 1

        if missing:
            evaluation = evaluate_corpus(
                self.load_corpus(),
                self.config.algorithms,
                missing,
                repeats=self.config.repeats,
                master_seed=self.config.master_seed,
                grid=HyperparamGrid(k_min=self.config.k_min, k_max=self.config.k_max),
                jobs=self.config.jobs
            )
            self.stats['algorithm_runs'] += evaluation.runs
            for m, table in evaluation.tables.items():
                text = table.to_csv_text()
                self.store.put(self._table_key(m.value), text.encode("utf-8"))
                tables[m.value] = PerformanceTable.from_csv_text(text)

        ordered = {m.value: tables[m.value] for m in self.config.measures}
        if AVERAGE_RANKING in self.measure_names():
            key = self._table_key(AVERAGE_RANKING)
            payload = self._cached(key, lambda: average_ranking(list(ordered.values())).to_csv_text().encode("utf-8"))
            ordered[AVERAGE_RANKING] = PerformanceTable.from_csv_text(payload.decode("utf-8"))

        self._timed("evaluate", start)
        return ordered

    def write_evaluation_reports(self, tables: Dict[str, PerformanceTable]) -> List[Path]:
        """Registry, performance tables, tuned parameters and undefined cells."""
        output = Path(self.config.output_dir)
        paths = [output / "registry.csv"]
        write_report(paths[0], registry_table(), self._report_header())
        for measure, table in tables.items():
            path = output / f"{measure}_performance.csv"
            write_text(path, "\n".join(self._report_header(measure=measure)) + "\n" + table.to_csv_text())
            paths.append(path)
            if measure == AVERAGE_RANKING:
                continue
            path = output / f"{measure}_k_distribution.csv"
            write_report(path, best_parameters(table), self._report_header(measure=measure))
            paths.append(path)
            if table.errors:
                errors = pd.DataFrame(
                    [
                        {"dataset": d, "algorithm": a, "error": message}
                        for d, row in table.errors.items() for a, message in sorted(row.items())
                    ],
                    columns=["dataset", "algorithm", "error"]
                )
                path = output / f"{measure}_errors.csv"
                write_report(path, errors, self._report_header(measure=measure))
                paths.append(path)
        return paths

    # Graph representation and node features

    def _graph_params(self, pca_enabled: bool) -> Dict[str, Any]:
        params = self.config.section("graph")
        params["pca_enabled"] = pca_enabled
        return params

    def _graph_hash(self, d: NumericDataset, pca_enabled: bool) -> str:
        return config_hash({"graph": self._graph_params(pca_enabled), "source": d.source_hash, "name": d.name})

    def _features_hash(self, d: NumericDataset, pca_enabled: bool) -> str:
        return config_hash({"walks": self.config.section("walks"), "graph": self._graph_hash(d, pca_enabled)})

    def representations(
        self,
        datasets: Sequence[NumericDataset],
        pca_enabled: Optional[bool] = None
    ) -> Dict[str, Representation]:
        """Similarity graph and DeepWalk features of every dataset."""
        pca_enabled = self.config.pca_enabled if pca_enabled is None else pca_enabled
        start = time.perf_counter()
        graph_keys = {
            d.name: ArtifactKey(kind=ArtifactKind.GRAPH, identifier=d.name, config_hash=self._graph_hash(d, pca_enabled))
            for d in datasets
        }
        feature_keys = {
            d.name: ArtifactKey(
                kind=ArtifactKind.NODE_FEATURES, identifier=d.name, config_hash=self._features_hash(d, pca_enabled)
            )
            for d in datasets
        }

        graph_texts: Dict[str, str] = {}
        pending = []
        for d in datasets:
            payload = self.store.get(graph_keys[d.name])
            if payload is None:
                pending.append(d)
                self.stats['cache_misses'] += 1
            else:
                graph_texts[d.name] = payload.decode("utf-8")
                self.stats['cache_hits'] += 1
        built = Parallel(n_jobs=self.config.jobs)(
            delayed(_build_graph)(d, self.config.pca_variance_target, pca_enabled, self.config.graph_threshold)
            for d in pending
        )
        for d, text in zip(pending, built):
            self.store.put(graph_keys[d.name], text.encode("utf-8"))
            graph_texts[d.name] = text
        self.stats['graphs_built'] += len(pending)

        feature_payloads: Dict[str, bytes] = {}
        pending = []
        for d in datasets:
            payload = self.store.get(feature_keys[d.name])
            if payload is None:
                pending.append(d)
                self.stats['cache_misses'] += 1
            else:
                feature_payloads[d.name] = payload
                self.stats['cache_hits'] += 1
        trained = Parallel(n_jobs=self.config.jobs)(
            delayed(_build_features)(self.embedder, graph_texts[d.name], d.name) for d in pending
        )
        for d, payload in zip(pending, trained):
            self.store.put(feature_keys[d.name], payload)
            feature_payloads[d.name] = payload

        self._timed("representations", start)
        return {
            d.name: (SimilarityGraph.from_text(graph_texts[d.name]), NodeFeatureMatrix.from_bytes(feature_payloads[d.name]))
            for d in datasets
        }

    # GCN and embeddings

    def _model_hash(self, measure: str, pca_enabled: bool, exclude: Optional[str] = None) -> str:
        upstream = self._table_key(measure).config_hash
        return config_hash({
            "gcn": self.config.section("gcn"),
            "graph": self._graph_params(pca_enabled),
            "walks": self.config.section("walks"),
            "table": upstream,
            "measure": measure,
            "exclude": exclude,
        })

    def train_gcn(
        self,
        table: PerformanceTable,
        representations: Dict[str, Representation],
        pca_enabled: Optional[bool] = None,
        exclude: Optional[str] = None
    ) -> Tuple[GcnModel, str]:
        """Train (or load) the GCN of one measure, optionally without one dataset."""
        pca_enabled = self.config.pca_enabled if pca_enabled is None else pca_enabled
        model_hash = self._model_hash(table.measure, pca_enabled, exclude)
        key = ArtifactKey(kind=ArtifactKind.GCNN_MODEL, identifier=table.measure, config_hash=model_hash)

        def build() -> bytes:
            graphs = [
                LabeledGraph.from_parts(graph, features, label=table.best[d], name=d)
                for d, (graph, features) in representations.items() if d != exclude
            ]
            model = train_gcnn(
                graphs,
                layers=self.config.gcn_layers,
                emb=self.config.gcn_emb,
                lr=self.config.gcn_lr,
                max_epochs=self.config.gcn_max_epochs,
                patience=self.config.gcn_patience,
                seed=derive_seed(self.config.master_seed, "gcn", table.measure),
                classes=list(table.algorithms)
            )
            self.stats['gcn_trained'] += 1
            return model.to_bytes()

        return GcnModel.from_bytes(self._cached(key, build)), model_hash

    def embeddings(
        self,
        model: GcnModel,
        model_hash: str,
        measure: str,
        representations: Dict[str, Representation]
    ) -> Dict[str, np.ndarray]:
        """Readout embedding of every dataset under one trained model."""
        vectors = {}
        for name, (graph, features) in representations.items():
            key = ArtifactKey(kind=ArtifactKind.EMBEDDING, identifier=f"{measure}__{name}", config_hash=model_hash)

            def build(graph=graph, features=features, name=name) -> bytes:
                labeled = LabeledGraph.from_parts(graph, features, name=name)
                return embed_all(model, [labeled], measure)[0].to_bytes()

            vectors[name] = GraphEmbedding.from_bytes(self._cached(key, build)).vector
        return vectors

    def meta_features(self, datasets: Sequence[NumericDataset], kind: FeatureKind) -> Dict[str, np.ndarray]:
        """Hand-crafted meta-feature vectors of one family, cached per dataset."""
        vectors = {}
        for d in datasets:
            key = ArtifactKey(
                kind=ArtifactKind.EMBEDDING,
                identifier=f"{kind.value}__{d.name}",
                config_hash=config_hash({
                    "meta_features": self.config.section("meta_features"),
                    "source": d.source_hash,
                    "name": d.name,
                })
            )

            def build(d=d) -> bytes:
                vector = meta_feature_table([d], kind.value, self.config.excess_kurtosis)[d.name]
                return GraphEmbedding(name=d.name, measure=kind.value, vector=vector).to_bytes()

            vectors[d.name] = GraphEmbedding.from_bytes(self._cached(key, build)).vector
        return vectors

    # Training

    def _ranker_key(self, measure: str, model_hash: str) -> ArtifactKey:
        return ArtifactKey(
            kind=ArtifactKind.RANKER_MODEL,
            identifier=measure,
            config_hash=config_hash({"ranker": self.config.section("ranker"), "model": model_hash})
        )

    def train(self) -> Dict[str, List[StoredReceipt]]:
        """
        Train and persist the GCN and ranker of every measure.

        Returns:
            Receipts of the two model artifacts per measure
        """
        tables = self.evaluate()
        datasets = self.load_corpus()
        representations = self.representations(datasets)
        start = time.perf_counter()
        k_values = typical_k([t for m, t in tables.items() if m != AVERAGE_RANKING])

        receipts: Dict[str, List[StoredReceipt]] = {}
        for measure, table in tables.items():
            model, model_hash = self.train_gcn(table, representations)
            vectors = self.embeddings(model, model_hash, measure, representations)
            ranker = train_ranker(
                assemble_training_set(vectors, table),
                trees=self.config.ranker_trees,
                depth=self.config.ranker_depth,
                shrinkage=self.config.ranker_shrinkage,
                seed=derive_seed(self.config.master_seed, "ranker", FeatureKind.MARCO_GE.value)
            )
            self.stats['rankers_trained'] += 1
            ranker_key = self._ranker_key(measure, model_hash)
            ranker = ranker.model_copy(update={
                "config_hash": ranker_key.config_hash,
                "measure": measure,
                "feature_kind": FeatureKind.MARCO_GE.value,
                "algorithms": list(table.algorithms),
                "ordinals": list(table.ordinals),
                "typical_k": {a: k for a, k in k_values.items() if a in table.algorithms},
            })
            gcn_key = ArtifactKey(kind=ArtifactKind.GCNN_MODEL, identifier=measure, config_hash=model_hash)
            receipts[measure] = [
                self.store.put(gcn_key, self._require(gcn_key, measure)),
                self.store.put(ranker_key, ranker.to_text().encode("utf-8")),
            ]
            logger.info(f"Trained models for {measure}: GCN {model_hash}, ranker {ranker_key.config_hash}")

        self._timed("train", start)
        return receipts

    # Inference

    def _require(self, key: ArtifactKey, measure: str) -> bytes:
        payload = self.store.get(key)
        if payload is None:
            raise MissingArtifact(
                f"No trained {key.kind.value} for measure '{measure}' under {self.store.root}. "
                f"Run `python -m clustrec train --corpus {self.config.corpus_dir} --measures {measure}` "
                f"with the same settings first."
            )
        return payload

    def recommend(self, dataset_path: Path, measure: str) -> RankedRecommendation:
        """
        Rank the configured algorithms for a new dataset.

        Raises:
            MissingArtifact: If the models of the measure have not been trained
        """
        pca_enabled = self.config.pca_enabled
        model_hash = self._model_hash(measure, pca_enabled)
        gcn_key = ArtifactKey(kind=ArtifactKind.GCNN_MODEL, identifier=measure, config_hash=model_hash)
        model = GcnModel.from_bytes(self._require(gcn_key, measure))
        ranker = RankerModel.from_text(self._require(self._ranker_key(measure, model_hash), measure).decode("utf-8"))

        start = time.perf_counter()
        d = load_dataset(Path(dataset_path), label_column=self.config.label_column)
        graph = dataset_graph(d, self.config.pca_variance_target, pca_enabled, self.config.graph_threshold)
        features = self.embedder.embed(graph, d.name)
        _, vector, _ = forward(model, LabeledGraph.from_parts(graph, features, name=d.name))
        specs = [
            AlgorithmSpec(id=a, ordinal=o, deterministic=True, needs_k=True)
            for a, o in zip(ranker.algorithms, ranker.ordinals)
        ]
        recommendation = recommend(ranker, vector, specs, dataset=d.name, measure=measure)
        self._timed("recommend", start)

        path = Path(self.config.output_dir) / f"recommendation_{d.name}_{measure}.csv"
        write_report(path, recommendation_frame(recommendation), self._report_header(measure=measure, dataset=d.name))
        return recommendation

    # Benchmark

    def _marco_ge_folds(
        self,
        table: PerformanceTable,
        representations: Dict[str, Representation],
        pca_enabled: bool,
        method: str
    ) -> List[FoldResult]:
        ranker_params = {
            "trees": self.config.ranker_trees,
            "depth": self.config.ranker_depth,
            "shrinkage": self.config.ranker_shrinkage,
            "seed": derive_seed(self.config.master_seed, "ranker", method),
        }
        if not self.config.strict_loo:
            model, model_hash = self.train_gcn(table, representations, pca_enabled)
            vectors = self.embeddings(model, model_hash, table.measure, representations)
            return leave_one_out(table, method, features=vectors, jobs=self.config.jobs, **ranker_params)

        def fold_features(test: str) -> Dict[str, np.ndarray]:
            model, model_hash = self.train_gcn(table, representations, pca_enabled, exclude=test)
            return self.embeddings(model, model_hash, f"{table.measure}__loo_{test}", representations)

        return leave_one_out(table, method, fold_features=fold_features, **ranker_params)

    def benchmark(self) -> Dict[str, BenchmarkResult]:
        """
        Leave-one-out comparison of every method for every measure, with reports.

        Returns:
            Results keyed by measure name
        """
        tables = self.evaluate()
        datasets = self.load_corpus()
        if len(datasets) < 3:
            raise DataError(f"Benchmark needs at least 3 datasets, got {len(datasets)}")
        representations = self.representations(datasets)
        no_pca = self.representations(datasets, pca_enabled=False) if self.config.pca_ablation else None
        meta_features = {
            kind: self.meta_features(datasets, kind) for kind in (FeatureKind.DISTANCE, FeatureKind.CAD)
        }

        start = time.perf_counter()
        results: Dict[str, BenchmarkResult] = {}
        for measure, table in tables.items():
            folds: Dict[str, List[FoldResult]] = {
                FeatureKind.MARCO_GE.value: self._marco_ge_folds(
                    table, representations, self.config.pca_enabled, FeatureKind.MARCO_GE.value
                )
            }
            if no_pca is not None:
                folds[NO_PCA] = self._marco_ge_folds(table, no_pca, False, NO_PCA)
            for kind, vectors in meta_features.items():
                folds[kind.value] = leave_one_out(
                    table,
                    kind.value,
                    features=vectors,
                    trees=self.config.ranker_trees,
                    depth=self.config.ranker_depth,
                    shrinkage=self.config.ranker_shrinkage,
                    seed=derive_seed(self.config.master_seed, "ranker", kind.value),
                    jobs=self.config.jobs
                )
            folds[POPULARITY] = popularity_loo(table)
            folds[STANDARD_RANKING] = standard_ranking_loo(table)
            self.stats['folds_run'] += sum(len(f) for f in folds.values())

            summaries = [summarize(method_folds, method, measure) for method, method_folds in folds.items()]
            significance = []
            for metric, field_name in (("mrr", "reciprocal_rank"), ("src", "src")):
                per_dataset = {method: per_dataset_metric(f, field_name) for method, f in folds.items()}
                significance.extend(compare_methods(per_dataset, metric, FeatureKind.MARCO_GE.value))

            result = BenchmarkResult(measure=measure, folds=folds, summaries=summaries, significance=significance)
            result.reports = self._write_benchmark_reports(result, len(table.algorithms))
            results[measure] = result
            marco = result.summary(FeatureKind.MARCO_GE.value)
            popularity = result.summary(POPULARITY)
            logger.info(
                f"{measure}: marco_ge SRC={marco.mean_src:.4f} MRR={marco.mean_mrr:.4f}; "
                f"popularity SRC={popularity.mean_src:.4f} MRR={popularity.mean_mrr:.4f}"
            )

        self._timed("benchmark", start)
        return results

    def _write_benchmark_reports(self, result: BenchmarkResult, n_algorithms: int) -> Dict[str, Path]:
        output = Path(self.config.output_dir)
        header = self._report_header(measure=result.measure)
        all_folds = [fold for method_folds in result.folds.values() for fold in method_folds]
        reports = {
            "folds": (output / f"{result.measure}_folds.csv", folds_frame(all_folds)),
            "summary": (
                output / f"{result.measure}_summary.csv",
                summary_frame(result.summaries, random_ranking_mrr(n_algorithms))
            ),
            "mrr_at_k": (output / f"{result.measure}_mrr_at_k.csv", mrr_at_k_frame(result.summaries)),
            "significance": (output / f"{result.measure}_significance.csv", significance_frame(result.significance)),
        }
        report_hash = config_hash({"header": header})
        for path, frame in reports.values():
            text = write_report(path, frame, header)
            self.store.put(
                ArtifactKey(kind=ArtifactKind.REPORT, identifier=path.stem, config_hash=report_hash),
                text.encode("utf-8")
            )
        return {name: path for name, (path, _) in reports.items()}

    # Sensitivity

    def sensitivity(
        self,
        layers_range: Sequence[int] = (2, 3, 4, 5, 6),
        emb_sizes: Sequence[int] = (50, 100, 200, 300, 400, 500),
        max_epochs: Optional[int] = None
    ) -> Dict[str, pd.DataFrame]:
        """
        Mean SRC and MRR of the GCN pipeline over a grid of depths and embedding sizes.

        Models trained here are not stored.
        """
        tables = self.evaluate()
        datasets = self.load_corpus()
        representations = self.representations(datasets)
        epochs = max_epochs or self.config.gcn_max_epochs
        start = time.perf_counter()

        frames = {}
        for measure, table in tables.items():
            graphs = [
                LabeledGraph.from_parts(graph, features, label=table.best[d], name=d)
                for d, (graph, features) in representations.items()
            ]
            records = []
            for layers in layers_range:
                for emb in emb_sizes:
                    model = train_gcnn(
                        graphs,
                        layers=layers,
                        emb=emb,
                        lr=self.config.gcn_lr,
                        max_epochs=epochs,
                        patience=self.config.gcn_patience,
                        seed=derive_seed(self.config.master_seed, "gcn", measure),
                        classes=list(table.algorithms)
                    )
                    vectors = {e.name: e.vector for e in embed_all(model, graphs, measure)}
                    folds = leave_one_out(
                        table,
                        FeatureKind.MARCO_GE.value,
                        features=vectors,
                        trees=self.config.ranker_trees,
                        depth=self.config.ranker_depth,
                        shrinkage=self.config.ranker_shrinkage,
                        seed=derive_seed(self.config.master_seed, "ranker", FeatureKind.MARCO_GE.value),
                        jobs=self.config.jobs
                    )
                    summary = summarize(folds, FeatureKind.MARCO_GE.value, measure)
                    records.append({
                        "layers": layers,
                        "emb": emb,
                        "epochs": epochs,
                        "mean_src": summary.mean_src,
                        "mean_mrr": summary.mean_mrr,
                    })
                    logger.info(f"{measure} layers={layers} emb={emb}: MRR={summary.mean_mrr:.4f}")
            frame = pd.DataFrame(records, columns=["layers", "emb", "epochs", "mean_src", "mean_mrr"])
            write_report(
                Path(self.config.output_dir) / f"{measure}_sensitivity.csv",
                frame,
                self._report_header(measure=measure)
            )
            frames[measure] = frame

        self._timed("sensitivity", start)
        return frames
