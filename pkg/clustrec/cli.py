"""
Command-line interface for clustrec.

Subcommands mirror the workflow: evaluate the corpus, train the meta-models,
recommend algorithms for a new dataset, and benchmark against the baselines.
Exit codes: 0 success, 1 configuration error, 2 data error, 3 internal error.
"""

import functools
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import click
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from . import __version__
from .config import RunConfig, load_run_config
from .errors import ClustRecError, ConfigError, UndefinedCells
from .evaluation import PerformanceTable, registry_table
from .models import AVERAGE_RANKING
from .pipeline import MetaLearningPipeline
from .store import ArtifactStore
from .synthetic import generate_corpus

logger = logging.getLogger(__name__)

# Command-line option name -> RunConfig field
_RUN_OPTIONS = {
    "corpus": "corpus_dir",
    "output": "output_dir",
    "store": "store",
    "label_column": "label_column",
    "measures": "measures",
    "algorithms": "algorithms",
    "average": "average_ranking",
    "repeats": "repeats",
    "k_min": "k_min",
    "k_max": "k_max",
    "seed": "master_seed",
    "jobs": "jobs",
    "pca": "pca_enabled",
    "variance_target": "pca_variance_target",
    "threshold": "graph_threshold",
    "pca_ablation": "pca_ablation",
    "walks": "walk_count",
    "walk_length": "walk_length",
    "node_dim": "node_dim",
    "layers": "gcn_layers",
    "emb": "gcn_emb",
    "lr": "gcn_lr",
    "epochs": "gcn_max_epochs",
    "patience": "gcn_patience",
    "strict_loo": "strict_loo",
    "trees": "ranker_trees",
    "depth": "ranker_depth",
    "shrinkage": "ranker_shrinkage",
}


def run_options(command: Callable) -> Callable:
    """Attach the options shared by every pipeline command."""
    options = [
        click.option('--corpus', type=click.Path(path_type=Path), help='Corpus directory of CSV datasets'),
        click.option('--output', type=click.Path(path_type=Path), help='Report directory'),
        click.option('--store', type=click.Path(path_type=Path), help='Artifact store root'),
        click.option('--label-column', help='Class label column to drop'),
        click.option('--measures', help='Comma-separated validity indices'),
        click.option('--algorithms', help='Comma-separated algorithm ids'),
        click.option('--average/--no-average', default=None, help='Build the average-ranking table'),
        click.option('--repeats', type=int, help='Seeded runs per grid point'),
        click.option('--k-min', type=int),
        click.option('--k-max', type=int),
        click.option('--seed', type=int, help='Master seed'),
        click.option('--jobs', type=int, help='Worker processes'),
        click.option('--pca/--no-pca', default=None, help='Reduce with PCA before building graphs'),
        click.option('--variance-target', type=float, help='PCA explained-variance target'),
        click.option('--threshold', type=float, help='Cosine similarity edge threshold'),
        click.option('--pca-ablation/--no-pca-ablation', default=None, help='Benchmark a no-PCA variant too'),
        click.option('--walks', type=int, help='DeepWalk walks per node'),
        click.option('--walk-length', type=int),
        click.option('--node-dim', type=int, help='DeepWalk node feature size'),
        click.option('--layers', type=int, help='GCN convolution layers (2..6)'),
        click.option('--emb', type=int, help='Graph embedding size'),
        click.option('--lr', type=float, help='GCN learning rate'),
        click.option('--epochs', type=int, help='GCN maximum epochs'),
        click.option('--patience', type=int, help='GCN early-stopping patience'),
        click.option('--strict-loo/--no-strict-loo', default=None, help='Retrain the GCN per benchmark fold'),
        click.option('--trees', type=int, help='Ranker boosting rounds'),
        click.option('--depth', type=int, help='Ranker tree depth'),
        click.option('--shrinkage', type=float, help='Ranker learning rate'),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _overrides(options: Dict[str, Any]) -> Dict[str, Any]:
    return {
        _RUN_OPTIONS[name]: value
        for name, value in options.items()
        if name in _RUN_OPTIONS and value is not None
    }


def setup_logging(level: str):
    """Route package logging through rich."""
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(rich_tracebacks=True, show_path=False)],
        force=True
    )


def handle_errors(command: Callable) -> Callable:
    """Map exceptions onto the exit-code contract."""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except ClustRecError as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(e.exit_code)
        except ValidationError as e:
            click.echo(f"Invalid configuration: {e}", err=True)
            sys.exit(ConfigError.exit_code)
        except Exception as e:
            logger.exception("Unexpected failure")
            click.echo(f"Internal error: {e}", err=True)
            sys.exit(3)
    return wrapper


def _load(ctx: click.Context, options: Dict[str, Any]) -> RunConfig:
    config = load_run_config(ctx.obj.get("config_file"), _overrides(options))
    setup_logging("DEBUG" if ctx.obj.get("verbose") else config.log_level.value)
    return config


def _console() -> Console:
    return Console()


def undefined_cells(tables: Dict[str, PerformanceTable]) -> List[Tuple[str, str, str, str, str]]:
    """(measure, dataset, algorithm, error class, message) of every cell without a score."""
    rows = []
    for measure, t in tables.items():
        if measure == AVERAGE_RANKING:
            continue
        for d, row in t.errors.items():
            for a, message in sorted(row.items()):
                reason = message.removeprefix("undefined: ")
                kind, _, detail = reason.partition(": ")
                if not detail:
                    kind, detail = "Undefined", reason
                rows.append((measure, d, a, kind, detail))
    return rows


def _print_stats(pipeline: MetaLearningPipeline):
    stats = pipeline.get_statistics()
    click.echo(
        f"Algorithm runs: {stats['algorithm_runs']}, cache hits: {stats['cache_hits']}, "
        f"cache misses: {stats['cache_misses']}"
    )


@click.group()
@click.option('--config', 'config_file', type=click.Path(path_type=Path), help='KEY=VALUE config file')
@click.option('--verbose', '-v', is_flag=True, help='Enable verbose logging')
@click.version_option(version=__version__, prog_name="clustrec")
@click.pass_context
def cli(ctx: click.Context, config_file: Optional[Path], verbose: bool):
    """clustrec: recommend clustering algorithms for a dataset."""
    ctx.ensure_object(dict)
    ctx.obj["config_file"] = config_file
    ctx.obj["verbose"] = verbose


@cli.command()
@run_options
@click.pass_context
@handle_errors
def evaluate(ctx: click.Context, **options):
    """Build the performance table of every measure."""
    config = _load(ctx, options)
    pipeline = MetaLearningPipeline(config)
    tables = pipeline.evaluate()
    paths = pipeline.write_evaluation_reports(tables)

    table = Table(title="Performance tables")
    table.add_column("Measure")
    table.add_column("Datasets", justify="right")
    table.add_column("Algorithms", justify="right")
    table.add_column("Undefined cells", justify="right")
    for measure, t in tables.items():
        undefined = sum(len(row) for row in t.errors.values())
        table.add_row(measure, str(len(t.datasets)), str(len(t.algorithms)), str(undefined))
    _console().print(table)
    _print_stats(pipeline)
    click.echo(f"Wrote {len(paths)} reports to {config.output_dir}")

    failures = undefined_cells(tables)
    if failures:
        errors = Table(title="Undefined cells")
        for column in ("Measure", "Dataset", "Algorithm", "Error", "Message"):
            errors.add_column(column)
        for row in failures:
            errors.add_row(*row)
        _console().print(errors)
        raise UndefinedCells(f"{len(failures)} undefined cells; see the *_errors.csv reports in {config.output_dir}")


@cli.command()
@run_options
@click.pass_context
@handle_errors
def train(ctx: click.Context, **options):
    """Train and persist the GCN and ranker of every measure."""
    config = _load(ctx, options)
    pipeline = MetaLearningPipeline(config)
    receipts = pipeline.train()

    table = Table(title="Trained models")
    table.add_column("Measure")
    table.add_column("Artifact")
    table.add_column("Bytes", justify="right")
    for measure, stored in receipts.items():
        for receipt in stored:
            table.add_row(measure, Path(receipt.path).name, str(receipt.size))
    _console().print(table)
    _print_stats(pipeline)


@cli.command()
@click.argument('dataset', type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option('--measure', required=True, help='Measure whose models rank the algorithms')
@run_options
@click.pass_context
@handle_errors
def recommend(ctx: click.Context, dataset: Path, measure: str, **options):
    """Rank the configured algorithms for DATASET."""
    config = _load(ctx, options)
    pipeline = MetaLearningPipeline(config)
    recommendation = pipeline.recommend(dataset, measure.lower())

    table = Table(title=f"Recommendation for {recommendation.dataset} ({recommendation.measure})")
    table.add_column("#", justify="right")
    table.add_column("Algorithm")
    table.add_column("Score", justify="right")
    table.add_column("Typical K", justify="right")
    for position, item in enumerate(recommendation.items, start=1):
        typical = "" if item.typical_k is None else f"{item.typical_k:g}"
        table.add_row(str(position), item.algorithm, f"{item.score:.6f}", typical)
    _console().print(table)


@cli.command()
@run_options
@click.pass_context
@handle_errors
def benchmark(ctx: click.Context, **options):
    """Leave-one-out comparison of the recommendation methods."""
    config = _load(ctx, options)
    pipeline = MetaLearningPipeline(config)
    results = pipeline.benchmark()

    console = _console()
    for measure, result in results.items():
        table = Table(title=f"Leave-one-out on {measure}")
        table.add_column("Method")
        table.add_column("SRC", justify="right")
        table.add_column("MRR", justify="right")
        table.add_column("Top-1 hits", justify="right")
        table.add_column("Failed folds", justify="right")
        for summary in result.summaries:
            table.add_row(
                summary.method,
                f"{summary.mean_src:.4f}",
                f"{summary.mean_mrr:.4f}",
                str(summary.top1_hits),
                str(summary.failed_folds)
            )
        console.print(table)
    click.echo(f"Reports written to {config.output_dir}")


@cli.command()
@run_options
@click.option('--layers-range', default='2,3,4,5,6', show_default=True, help='GCN depths to try')
@click.option('--emb-sizes', default='50,100,200,300,400,500', show_default=True, help='Embedding sizes to try')
@click.option('--grid-epochs', type=int, help='Maximum epochs per grid point')
@click.pass_context
@handle_errors
def sensitivity(ctx: click.Context, layers_range: str, emb_sizes: str, grid_epochs: Optional[int], **options):
    """Mean SRC and MRR over a grid of GCN depths and embedding sizes."""
    config = _load(ctx, options)
    try:
        layers = [int(v) for v in layers_range.split(",") if v.strip()]
        sizes = [int(v) for v in emb_sizes.split(",") if v.strip()]
    except ValueError as e:
        raise ConfigError(f"Grid values must be integers: {e}") from e
    pipeline = MetaLearningPipeline(config)
    frames = pipeline.sensitivity(layers, sizes, grid_epochs)
    for measure, frame in frames.items():
        click.echo(f"{measure}:")
        click.echo(frame.to_string(index=False))


@cli.command('generate-corpus')
@click.argument('out_dir', type=click.Path(file_okay=False, path_type=Path))
@click.option('--per-regime', default=12, show_default=True, type=int, help='Datasets per structural regime')
@click.option('--seed', default=42, show_default=True, type=int, help='Master seed')
@click.pass_context
@handle_errors
def generate_corpus_command(ctx: click.Context, out_dir: Path, per_regime: int, seed: int):
    """Write a synthetic benchmark corpus to OUT_DIR."""
    setup_logging("DEBUG" if ctx.obj.get("verbose") else "INFO")
    paths = generate_corpus(out_dir, per_regime=per_regime, seed=seed)
    click.echo(f"Generated {len(paths)} datasets in {out_dir}")


@cli.command()
def registry():
    """Print algorithm ordinals and index orientations."""
    click.echo(registry_table().to_csv(index=False, lineterminator="\n"), nl=False)


@cli.group()
@click.option('--store', 'store_root', type=click.Path(path_type=Path), help='Artifact store root')
@click.pass_context
def store(ctx: click.Context, store_root: Optional[Path]):
    """Inspect and prune the artifact store."""
    ctx.obj["store_root"] = store_root


def _open_store(ctx: click.Context) -> ArtifactStore:
    overrides = {"store": ctx.obj.get("store_root")}
    config = load_run_config(ctx.obj.get("config_file"), overrides)
    return ArtifactStore(config.store)


@store.command('ls')
@click.pass_context
@handle_errors
def store_ls(ctx: click.Context):
    """List stored artifact keys."""
    artifacts = _open_store(ctx)
    table = Table(title=f"Artifacts in {artifacts.root}")
    table.add_column("Kind")
    table.add_column("Identifier")
    table.add_column("Config hash")
    for key in artifacts.list_keys():
        table.add_row(key.kind.value, key.identifier, key.config_hash)
    _console().print(table)


@store.command('rm')
@click.argument('prefix', default='')
@click.pass_context
@handle_errors
def store_rm(ctx: click.Context, prefix: str):
    """Remove artifacts whose key starts with PREFIX."""
    removed = _open_store(ctx).invalidate(prefix)
    click.echo(f"Removed {removed} artifacts")


@store.command('verify')
@click.pass_context
@handle_errors
def store_verify(ctx: click.Context):
    """Check every stored checksum."""
    results = _open_store(ctx).verify_all()
    bad = [key for key, ok in results if not ok]
    for key in bad:
        click.echo(f"Corrupt: {key.prefix}", err=True)
    click.echo(f"Verified {len(results)} artifacts, {len(bad)} corrupt")
    if bad:
        sys.exit(2)


if __name__ == '__main__':
    cli()
