"""Batch-stream experiment harness.

Protocol per run: shuffle the source data into disjoint batches plus a fixed
held-out test set, train the initial tree on batch 0, then for each later
batch apply the configured algorithm to the cumulative training data and
record test accuracy, node count, change count against the previous tree,
and partial-match similarity.  Runs derive their seeds from (base seed, run
index), so a config reproduces its result tables byte for byte; wall times
go to a separate timings file to keep the tables deterministic.

The retrain and keep-original baselines correspond to the conventional
beta=-100 / beta=100 sweep endpoints and are tagged that way in the output.
"""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from . import __version__
from .data import (
    Dataset,
    SyntheticSpec,
    Rectangle,
    builtin_dataset_path,
    dataset_from_manifest,
    load_csv,
    load_manifest,
    make_batch_plan,
    synthetic,
)
from .diff import structural_diff
from .errors import ConfigError
from .grow import GrowthConfig
from .loss import LossParams, misclassification_count
from .tree import Tree, node_count, save_tree
from .update import keep_original, retrain, update

__all__ = [
    "VALID_ALGORITHMS",
    "AlgorithmSpec",
    "ExperimentConfig",
    "RunRecord",
    "SummaryRow",
    "run_experiment",
    "sweep",
    "summarize",
    "accuracy_ci_halfwidth",
    "write_results",
    "write_summary",
    "write_timings",
    "run_eval",
    "config_from_dict",
    "iris_demo",
    "IrisDemo",
    "DEFAULT_SWEEP_ALPHAS",
    "DEFAULT_SWEEP_BETAS",
    "DEMO_SEED",
]

VALID_ALGORITHMS = ("keep_regrow", "retrain", "keep_original")

# Sweep grids; both contain the suggested defaults alpha=5, beta=1.
DEFAULT_SWEEP_ALPHAS = (0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0)
DEFAULT_SWEEP_BETAS = (0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0)

_BASELINE_LABELS = {"retrain": "beta=-100", "keep_original": "beta=100"}


@dataclass(frozen=True)
class AlgorithmSpec:
    """Which updater to run. alpha always applies (the initial tree needs it);
    beta only matters for keep_regrow."""

    name: str
    alpha: float = 5.0
    beta: float = 1.0

    def __post_init__(self):
        if self.name not in VALID_ALGORITHMS:
            raise ConfigError(
                f"unknown algorithm {self.name!r}; valid names: {', '.join(VALID_ALGORITHMS)}"
            )
        LossParams(self.alpha, self.beta)  # range check


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: Dataset
    dataset_name: str
    algorithm: AlgorithmSpec
    n_runs: int = 12
    n_batches: int = 10
    batch_size: int = 1000
    test_size: int = 100000
    seed: int = 0
    growth: GrowthConfig = field(default_factory=GrowthConfig)

    def __post_init__(self):
        if self.n_runs < 1:
            raise ConfigError("n_runs must be >= 1")
        if self.n_batches < 1:
            raise ConfigError("n_batches must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.test_size < 0:
            raise ConfigError("test_size must be >= 0")


@dataclass(frozen=True)
class RunRecord:
    dataset: str
    algorithm: str
    alpha: float
    beta: Optional[float]  # None for the baselines
    run: int
    batch: int
    accuracy: Optional[float]  # None when the test set is empty
    nodes: int
    delta: Optional[int]  # None at batch 0 (no previous tree)
    similarity: Optional[float]
    wall_time_ms: float

    @property
    def label(self) -> str:
        return _BASELINE_LABELS.get(self.algorithm, "")


def _record_sort_key(rec: RunRecord):
    return (
        rec.dataset,
        rec.algorithm,
        rec.alpha,
        rec.beta if rec.beta is not None else -math.inf,
        rec.run,
        rec.batch,
    )


def _train_step(
    algorithm: AlgorithmSpec, t: int, prev: Optional[Tree], train: Dataset, growth: GrowthConfig
) -> Tree:
    if t == 0:
        return retrain(train, LossParams(algorithm.alpha, 0.0), growth)
    if algorithm.name == "keep_regrow":
        return update(prev, train, LossParams(algorithm.alpha, algorithm.beta), growth)
    if algorithm.name == "retrain":
        return retrain(train, LossParams(algorithm.alpha, 0.0), growth)
    return keep_original(prev)


def archive_name(record: RunRecord) -> str:
    beta = "none" if record.beta is None else f"{record.beta:g}"
    return (
        f"{record.algorithm}_a{record.alpha:g}_b{beta}"
        f"_r{record.run:02d}_t{record.batch:02d}.json"
    )


def _run_single(
    config: ExperimentConfig,
    run: int,
    archive_dir: Optional[str],
    max_batches: Optional[int],
    record_batches: Optional[set],
) -> list[RunRecord]:
    plan = make_batch_plan(
        config.dataset,
        config.n_batches,
        config.batch_size,
        config.test_size,
        (config.seed, run),
    )
    n_steps = plan.n_batches if max_batches is None else min(max_batches, plan.n_batches)
    test = plan.test
    records = []
    prev: Optional[Tree] = None
    for t in range(n_steps):
        train = plan.cumulative(t)
        started = time.perf_counter()
        tree = _train_step(config.algorithm, t, prev, train, config.growth)
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        accuracy = None
        if test.n_rows:
            accuracy = 1.0 - misclassification_count(tree, test) / test.n_rows
        delta = sim = None
        if t > 0:
            report = structural_diff(prev, tree)
            delta, sim = report.delta, report.similarity
        record = RunRecord(
            dataset=config.dataset_name,
            algorithm=config.algorithm.name,
            alpha=config.algorithm.alpha,
            beta=config.algorithm.beta if config.algorithm.name == "keep_regrow" else None,
            run=run,
            batch=t,
            accuracy=accuracy,
            nodes=node_count(tree),
            delta=delta,
            similarity=sim,
            wall_time_ms=elapsed_ms,
        )
        if archive_dir is not None:
            save_tree(tree, os.path.join(archive_dir, archive_name(record)))
        if record_batches is None or t in record_batches:
            records.append(record)
        prev = tree
    return records


def _run_all(
    config: ExperimentConfig,
    archive_dir=None,
    max_batches=None,
    record_batches=None,
) -> list[RunRecord]:
    records = []
    for run in range(config.n_runs):
        records.extend(_run_single(config, run, archive_dir, max_batches, record_batches))
    return records


def run_experiment(config: ExperimentConfig, archive_dir: Optional[str] = None) -> list[RunRecord]:
    """All runs of one algorithm over the batch stream; canonically sorted."""
    records = _run_all(config, archive_dir)
    records.sort(key=_record_sort_key)
    return records


def sweep(
    config: ExperimentConfig,
    alphas: Sequence[float] = DEFAULT_SWEEP_ALPHAS,
    betas: Sequence[float] = DEFAULT_SWEEP_BETAS,
    archive_dir: Optional[str] = None,
) -> list[RunRecord]:
    """Parameter exploration around one config.

    The alpha sweep prunes the very first batch's tree at each alpha (no
    updating involved, batch 0 only).  The beta sweep holds alpha at the
    config's value and records batch-1 metrics for each beta, alongside the
    retrain and keep-original baseline rows for the same batch.
    """
    if not alphas and not betas:
        raise ConfigError("sweep needs at least one alpha or beta value")
    records: list[RunRecord] = []
    for alpha in alphas:
        cfg = replace(config, algorithm=AlgorithmSpec("retrain", alpha=alpha))
        records.extend(_run_all(cfg, archive_dir, max_batches=1, record_batches={0}))
    if betas:
        if config.n_batches < 2:
            raise ConfigError("a beta sweep needs n_batches >= 2")
        fixed_alpha = config.algorithm.alpha
        for beta in betas:
            cfg = replace(config, algorithm=AlgorithmSpec("keep_regrow", fixed_alpha, beta))
            records.extend(_run_all(cfg, archive_dir, max_batches=2, record_batches={1}))
        for baseline in ("retrain", "keep_original"):
            cfg = replace(config, algorithm=AlgorithmSpec(baseline, fixed_alpha))
            records.extend(_run_all(cfg, archive_dir, max_batches=2, record_batches={1}))
    records.sort(key=_record_sort_key)
    return records


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------


def accuracy_ci_halfwidth(p: float, test_size: int) -> Optional[float]:
    """Normal-approximation 95% CI half-width for an accuracy estimate."""
    if test_size <= 0:
        return None
    return 1.96 * math.sqrt(p * (1.0 - p) / test_size)


def _mean(values):
    values = [v for v in values if v is not None]
    return sum(values) / len(values) if values else None


def _stdev(values):
    values = [v for v in values if v is not None]
    if not values:
        return None
    if len(values) < 2:
        return 0.0
    m = sum(values) / len(values)
    return math.sqrt(sum((v - m) ** 2 for v in values) / (len(values) - 1))


@dataclass(frozen=True)
class SummaryRow:
    dataset: str
    algorithm: str
    alpha: float
    beta: Optional[float]
    batch: int
    runs: int
    accuracy_mean: Optional[float]
    accuracy_stdev: Optional[float]
    accuracy_ci95: Optional[float]
    nodes_mean: float
    nodes_stdev: float
    delta_mean: Optional[float]
    delta_stdev: Optional[float]
    similarity_mean: Optional[float]
    similarity_stdev: Optional[float]
    label: str


def summarize(records: Sequence[RunRecord], test_size: int) -> list[SummaryRow]:
    """Per (dataset, algorithm, alpha, beta, batch) cell: mean, stdev, 95% CI.

    The accuracy CI is the binomial normal approximation at the cell's mean
    accuracy over a test set of ``test_size`` rows.
    """
    if not records:
        raise ValueError("summarize needs at least one record")
    groups: dict[tuple, list[RunRecord]] = {}
    for rec in records:
        key = (rec.dataset, rec.algorithm, rec.alpha, rec.beta, rec.batch)
        groups.setdefault(key, []).append(rec)
    rows = []
    for key in sorted(
        groups, key=lambda k: (k[0], k[1], k[2], k[3] if k[3] is not None else -math.inf, k[4])
    ):
        dataset, algorithm, alpha, beta, batch = key
        recs = groups[key]
        acc_mean = _mean([r.accuracy for r in recs])
        rows.append(
            SummaryRow(
                dataset=dataset,
                algorithm=algorithm,
                alpha=alpha,
                beta=beta,
                batch=batch,
                runs=len(recs),
                accuracy_mean=acc_mean,
                accuracy_stdev=_stdev([r.accuracy for r in recs]),
                accuracy_ci95=None if acc_mean is None else accuracy_ci_halfwidth(acc_mean, test_size),
                nodes_mean=_mean([r.nodes for r in recs]),
                nodes_stdev=_stdev([r.nodes for r in recs]),
                delta_mean=_mean([r.delta for r in recs]),
                delta_stdev=_stdev([r.delta for r in recs]),
                similarity_mean=_mean([r.similarity for r in recs]),
                similarity_stdev=_stdev([r.similarity for r in recs]),
                label=_BASELINE_LABELS.get(algorithm, ""),
            )
        )
    return rows


# ---------------------------------------------------------------------------
# Result files
# ---------------------------------------------------------------------------


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))  # plain-float repr even for numpy scalars
    return str(value)


RESULT_COLUMNS = (
    "dataset",
    "algorithm",
    "alpha",
    "beta",
    "run",
    "batch",
    "accuracy",
    "nodes",
    "delta",
    "similarity",
    "label",
)


def write_results(records: Sequence[RunRecord], path) -> None:
    """Canonical result table; deterministic bytes for a fixed config."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(RESULT_COLUMNS) + "\n")
        for r in records:
            fh.write(
                ",".join(
                    [
                        r.dataset,
                        r.algorithm,
                        _cell(r.alpha),
                        _cell(r.beta),
                        str(r.run),
                        str(r.batch),
                        _cell(r.accuracy),
                        str(r.nodes),
                        _cell(r.delta),
                        _cell(r.similarity),
                        r.label,
                    ]
                )
                + "\n"
            )


def write_summary(rows: Sequence[SummaryRow], path) -> None:
    columns = (
        "dataset,algorithm,alpha,beta,batch,runs,accuracy_mean,accuracy_stdev,"
        "accuracy_ci95,nodes_mean,nodes_stdev,delta_mean,delta_stdev,"
        "similarity_mean,similarity_stdev,label"
    )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(columns + "\n")
        for s in rows:
            fh.write(
                ",".join(
                    [
                        s.dataset,
                        s.algorithm,
                        _cell(s.alpha),
                        _cell(s.beta),
                        str(s.batch),
                        str(s.runs),
                        _cell(s.accuracy_mean),
                        _cell(s.accuracy_stdev),
                        _cell(s.accuracy_ci95),
                        _cell(s.nodes_mean),
                        _cell(s.nodes_stdev),
                        _cell(s.delta_mean),
                        _cell(s.delta_stdev),
                        _cell(s.similarity_mean),
                        _cell(s.similarity_stdev),
                        s.label,
                    ]
                )
                + "\n"
            )


def write_timings(records: Sequence[RunRecord], path) -> None:
    """Wall times live here, outside the deterministic result table."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("dataset,algorithm,alpha,beta,run,batch,wall_time_ms\n")
        for r in records:
            fh.write(
                ",".join(
                    [
                        r.dataset,
                        r.algorithm,
                        _cell(r.alpha),
                        _cell(r.beta),
                        str(r.run),
                        str(r.batch),
                        f"{r.wall_time_ms:.3f}",
                    ]
                )
                + "\n"
            )


def run_eval(
    config: ExperimentConfig,
    out_dir,
    alphas: Optional[Sequence[float]] = None,
    betas: Optional[Sequence[float]] = None,
) -> list[RunRecord]:
    """Run the experiment (or a sweep when grids are given) and write artifacts.

    Produces results.csv and summary.csv (deterministic), timings.csv,
    manifest.json, and one tree file per (run, batch) under trees/.
    """
    started = time.perf_counter()
    trees_dir = os.path.join(out_dir, "trees")
    os.makedirs(trees_dir, exist_ok=True)
    if alphas is not None or betas is not None:
        records = sweep(config, alphas or (), betas or (), archive_dir=trees_dir)
        mode = "sweep"
    else:
        records = run_experiment(config, archive_dir=trees_dir)
        mode = "stream"
    write_results(records, os.path.join(out_dir, "results.csv"))
    write_summary(summarize(records, config.test_size), os.path.join(out_dir, "summary.csv"))
    write_timings(records, os.path.join(out_dir, "timings.csv"))
    manifest = {
        "mode": mode,
        "dataset": config.dataset_name,
        "dataset_rows": config.dataset.n_rows,
        "algorithm": {
            "name": config.algorithm.name,
            "alpha": config.algorithm.alpha,
            "beta": config.algorithm.beta,
        },
        "n_runs": config.n_runs,
        "n_batches": config.n_batches,
        "batch_size": config.batch_size,
        "test_size": config.test_size,
        "seed": config.seed,
        "growth": {
            "max_depth": config.growth.max_depth,
            "min_samples_split": config.growth.min_samples_split,
            "impurity": config.growth.impurity,
        },
        "sweep_alphas": list(alphas) if alphas is not None else None,
        "sweep_betas": list(betas) if betas is not None else None,
        "n_records": len(records),
        "results": "results.csv",
        "summary": "summary.csv",
        "timings": "timings.csv",
        "trees_dir": "trees",
        "tree_files": sorted(os.listdir(trees_dir)),
        "version": __version__,
        "elapsed_s": round(time.perf_counter() - started, 3),
    }
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return records


# ---------------------------------------------------------------------------
# Config files
# ---------------------------------------------------------------------------

_CONFIG_KEYS = {
    "dataset",
    "algorithm",
    "n_runs",
    "n_batches",
    "batch_size",
    "test_size",
    "seed",
    "growth",
    "sweep",
}


def _dataset_from_ref(ref, base_dir: str) -> tuple[str, Dataset]:
    if not isinstance(ref, dict):
        raise ConfigError("'dataset' must be an object")
    if "builtin" in ref:
        name = ref["builtin"]
        return name, load_csv(builtin_dataset_path(name), ref.get("label_column", -1), True)
    if "manifest" in ref:
        manifest = load_manifest(os.path.join(base_dir, ref["manifest"]))
        return manifest.name, dataset_from_manifest(manifest)
    if "path" in ref:
        if "label_column" not in ref:
            raise ConfigError("dataset with 'path' needs 'label_column'")
        path = os.path.join(base_dir, ref["path"])
        name = ref.get("name") or os.path.splitext(os.path.basename(ref["path"]))[0]
        return name, load_csv(path, ref["label_column"], bool(ref.get("has_header", False)))
    if "synthetic" in ref:
        spec_obj = dict(ref["synthetic"])
        name = ref.get("name", "synthetic")
        seed = spec_obj.pop("seed", 0)
        rects = tuple(
            Rectangle(tuple(r["lows"]), tuple(r["highs"]), int(r["label"]))
            for r in spec_obj.pop("rectangles", [])
        )
        try:
            spec = SyntheticSpec(rectangles=rects, **spec_obj)
        except TypeError as exc:
            raise ConfigError(f"invalid synthetic spec: {exc}") from exc
        return name, synthetic(spec, seed)
    raise ConfigError(
        "dataset must specify one of: 'builtin', 'path', 'manifest', 'synthetic'"
    )


def config_from_dict(obj: dict, base_dir: str = "."):
    """Build (ExperimentConfig, sweep_alphas, sweep_betas) from a config document.

    The document mirrors the config field names; see README for the format.
    """
    if not isinstance(obj, dict):
        raise ConfigError("config document must be an object")
    unknown = set(obj) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "dataset" not in obj:
        raise ConfigError("config needs a 'dataset' entry")
    name, dataset = _dataset_from_ref(obj["dataset"], base_dir)

    algo_obj = obj.get("algorithm", {})
    if not isinstance(algo_obj, dict) or "name" not in algo_obj:
        raise ConfigError("config needs algorithm: {name, alpha, beta}")
    try:
        algorithm = AlgorithmSpec(
            algo_obj["name"],
            float(algo_obj.get("alpha", 5.0)),
            float(algo_obj.get("beta", 1.0)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    growth_obj = obj.get("growth", {})
    try:
        growth = GrowthConfig(
            max_depth=growth_obj.get("max_depth", 20),
            min_samples_split=int(growth_obj.get("min_samples_split", 2)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    try:
        config = ExperimentConfig(
            dataset=dataset,
            dataset_name=name,
            algorithm=algorithm,
            n_runs=int(obj.get("n_runs", 12)),
            n_batches=int(obj.get("n_batches", 10)),
            batch_size=int(obj.get("batch_size", 1000)),
            test_size=int(obj.get("test_size", 100000)),
            seed=int(obj.get("seed", 0)),
            growth=growth,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    alphas = betas = None
    if "sweep" in obj:
        sweep_obj = obj["sweep"]
        if not isinstance(sweep_obj, dict) or set(sweep_obj) - {"alphas", "betas"}:
            raise ConfigError("'sweep' takes only 'alphas' and 'betas' lists")
        alphas = [float(a) for a in sweep_obj.get("alphas", [])]
        betas = [float(b) for b in sweep_obj.get("betas", [])]
    return config, alphas, betas


# ---------------------------------------------------------------------------
# The iris walkthrough: a tenth of the data first, the rest later
# ---------------------------------------------------------------------------

# Chosen so the walkthrough shows the intended shape: upper structure kept,
# one lower condition regrown with a shifted threshold.
DEMO_SEED = 21


@dataclass(frozen=True)
class IrisDemo:
    initial: Tree
    updated: Tree
    delta: int
    similarity: float
    initial_misclassified: int
    updated_misclassified: int


def iris_demo(alpha: float = 1.0, beta: float = 1.0, seed: int = DEMO_SEED) -> IrisDemo:
    """Train on a one-tenth iris sample, then update on the full dataset.

    With alpha=1, beta=1 the update keeps the sample-grown root split and
    regrows lower structure where the extra data disagrees with it.
    """
    iris = load_csv(builtin_dataset_path("iris"), "species", has_header=True)
    plan = make_batch_plan(iris, 1, iris.n_rows // 10, 0, seed)
    params = LossParams(alpha, beta)
    initial = retrain(plan.batch(0), params)
    updated = update(initial, iris, params)
    report = structural_diff(initial, updated)
    return IrisDemo(
        initial=initial,
        updated=updated,
        delta=report.delta,
        similarity=report.similarity,
        initial_misclassified=misclassification_count(initial, iris),
        updated_misclassified=misclassification_count(updated, iris),
    )
