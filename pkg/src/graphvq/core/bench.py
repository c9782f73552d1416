"""
Benchmark harness: accuracy and speedup over linear search.

Every method quantizes the same query stream (all features of all frames, for
every seed) with a fresh DistanceMeter per image. Accuracy is the fraction of
features whose word equals the linear-scan word; speedup is the vocabulary
size divided by the mean number of distance evaluations per feature. Since
accuracy cannot be set directly, methods are swept over parameter grids and
reported at the grid point nearest a target accuracy.
"""

import csv
import io
import itertools
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from tqdm import tqdm

from graphvq.core.bow import quantize_image
from graphvq.core.config import settings
from graphvq.core.errors import ContractViolationError, ParameterError
from graphvq.core.indexes import IndexFactory, NearestNeighborIndex, exact_nearest
from graphvq.core.parallel import ordered_map
from graphvq.core.sequence import (
    FreshFeatureModel,
    SequenceDataset,
    generate,
    propagate_hints,
    synthetic_descriptors,
)
from graphvq.core.vectors import Rng
from graphvq.core.vocabulary import Vocabulary, build_vocabulary, load_vocabulary
from graphvq.models.build_config import (
    CalibrationSpec,
    KMeansConfig,
    SequenceConfig,
    SyntheticVocabSpec,
)
from graphvq.models.experiment import ExperimentConfig, ParamGrid
from graphvq.models.report import (
    BenchReport,
    FrontierPoint,
    Histogram,
    MethodResult,
    ReportMetadata,
    SubsetMetrics,
)
from graphvq.models.search_params import METHOD_LABELS, MethodSpec

logger = logging.getLogger(__name__)

TABLE_ORDER = ["kd", "hkm", "gnns", "sgnns", "linear"]


# --- Metrics ---------------------------------------------------------------


def _word_ids(results: Sequence[Any]) -> np.ndarray:
    if len(results) and hasattr(results[0], "word_id"):
        return np.asarray([r.word_id for r in results], dtype=np.int64)
    return np.asarray(results, dtype=np.int64).reshape(-1)


def _eval_counts(results: Sequence[Any]) -> np.ndarray:
    if len(results) and hasattr(results[0], "dist_evals"):
        return np.asarray([r.dist_evals for r in results], dtype=np.int64)
    return np.asarray(results, dtype=np.int64).reshape(-1)


def measure_accuracy(results: Sequence[Any], oracle: Sequence[int]) -> float:
    """
    Fraction of queries whose word id equals the oracle's.

    Args:
        results: QuantizationResults or plain word ids
        oracle: Linear-scan word ids for the same queries

    Raises:
        ContractViolationError: length mismatch or no queries
    """
    words = _word_ids(results)
    truth = np.asarray(oracle, dtype=np.int64).reshape(-1)
    if words.size != truth.size:
        raise ContractViolationError(f"{words.size} results but {truth.size} oracle answers")
    if words.size == 0:
        raise ContractViolationError("Cannot measure accuracy over zero queries")
    return float(np.count_nonzero(words == truth) / words.size)


def measure_speedup(results: Sequence[Any], n: int) -> float:
    """
    n / mean distance evaluations per query.

    Raises:
        ContractViolationError: no queries, or zero evaluations
    """
    evals = _eval_counts(results)
    if evals.size == 0:
        raise ContractViolationError("Cannot measure speedup over zero queries")
    mean = float(evals.mean())
    if mean == 0.0:
        raise ContractViolationError("Mean distance evaluations is zero")
    return n / mean


def shared_word_fraction(
    links: Sequence[np.ndarray], words: Sequence[np.ndarray]
) -> Optional[float]:
    """
    Over all linked feature pairs, the fraction assigned the same word.

    Args:
        links: Per frame, (current index, previous index) pairs
        words: Per frame, the word assigned to each feature

    Returns:
        The fraction, or None when there are no links
    """
    same = 0
    total = 0
    for t in range(1, len(links)):
        pairs = links[t]
        if len(pairs) == 0:
            continue
        same += int(np.count_nonzero(words[t][pairs[:, 0]] == words[t - 1][pairs[:, 1]]))
        total += len(pairs)
    if total == 0:
        return None
    return same / total


def _histogram(values: np.ndarray, edges: List[int]) -> Histogram:
    bins = np.searchsorted(np.asarray(edges), values, side="right") - 1
    counts = np.bincount(bins, minlength=len(edges) - 1)[: len(edges) - 1]
    return Histogram(edges=edges, counts=counts.tolist())


def _eval_edges(upper: int) -> List[int]:
    """0, 1, 2, 4, ... up to the first power of two above `upper`"""
    edges = [0, 1]
    while edges[-1] <= upper:
        edges.append(edges[-1] * 2)
    return edges


# --- Calibration -----------------------------------------------------------


@dataclass
class CalibrationResult:
    sigma: float
    shared_fraction: float
    trace: List[Tuple[float, float]] = field(default_factory=list)


def calibrate_sigma(
    vocab: Vocabulary,
    target: float = 0.64,
    sigmas: Optional[Sequence[float]] = None,
    samples: int = 4000,
    iterations: int = 24,
    sequence: Optional[SequenceConfig] = None,
    seed: int = 0,
) -> CalibrationResult:
    """
    Carry noise at which a feature and its noisy copy share their true word
    with probability `target`.

    Base features follow the sequence's fresh-feature model. The same base
    features and unit noise are reused for every sigma, so the shared fraction
    is a deterministic, nearly monotone function of sigma. With `sigmas` the
    grid point nearest the target wins (ties: smaller sigma); without, sigma
    is found by bisection.
    """
    if not 0.0 < target < 1.0:
        raise ParameterError(f"target must be in (0, 1), got {target}")
    if sequence is None:
        sequence = SequenceConfig(num_frames=1)
    gen = Rng(seed).generator
    base = FreshFeatureModel(sequence, vocab).sample(gen, samples)
    noise = gen.normal(size=base.shape)
    base_words = exact_nearest(vocab.words, base)
    trace: List[Tuple[float, float]] = []

    def shared(sigma: float) -> float:
        fraction = float(np.mean(exact_nearest(vocab.words, base + sigma * noise) == base_words))
        trace.append((sigma, fraction))
        logger.debug(f"Calibration: sigma={sigma:.6g} shared={fraction:.4f}")
        return fraction

    if sigmas is not None:
        if len(sigmas) == 0:
            raise ParameterError("Empty sigma grid")
        scored = [(abs(shared(float(s)) - target), float(s)) for s in sigmas]
        _, best = min(scored)
        fraction = next(f for s, f in trace if s == best)
        return CalibrationResult(sigma=best, shared_fraction=fraction, trace=trace)

    lo = 0.0
    hi = float(vocab.median_word_spacing() / np.sqrt(vocab.words.dim))
    for _ in range(40):
        if shared(hi) <= target:
            break
        lo, hi = hi, hi * 2.0
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if shared(mid) > target:
            lo = mid
        else:
            hi = mid

    sigma = 0.5 * (lo + hi)
    fraction = shared(sigma)
    logger.info(f"Calibrated carry noise sigma={sigma:.6g} (shared fraction {fraction:.4f})")
    return CalibrationResult(sigma=sigma, shared_fraction=fraction, trace=trace)


# --- Experiment context ----------------------------------------------------


@dataclass
class FrameRun:
    words: np.ndarray
    evals: np.ndarray
    hops: np.ndarray
    hinted: np.ndarray


@dataclass
class MethodRun:
    """Per-frame outputs of one method under one seed"""

    method: str
    seed: int
    params: Dict[str, Any]
    frames: List[FrameRun]

    def words(self) -> List[np.ndarray]:
        return [f.words for f in self.frames]


@dataclass
class BenchContext:
    """Everything shared by all methods of one experiment"""

    config: ExperimentConfig
    vocabulary: Vocabulary
    dataset: SequenceDataset
    oracle: List[np.ndarray]
    links: List[np.ndarray]
    matched: List[np.ndarray]
    matcher_evals: int = 0
    carry_noise_sigma: Optional[float] = None
    timing: Dict[str, float] = field(default_factory=dict)
    _indexes: Dict[Tuple[str, str, int], NearestNeighborIndex] = field(
        default_factory=dict, init=False, repr=False
    )

    @property
    def n(self) -> int:
        return self.vocabulary.size

    def index_for(self, spec: MethodSpec, seed: int) -> NearestNeighborIndex:
        """Build an index, reusing trees across search budgets"""
        build_params = spec.model_dump(exclude={"checks"})
        key = (spec.method, json.dumps(build_params, sort_keys=True), seed)
        cached = self._indexes.get(key)
        if cached is None:
            cached = IndexFactory.create_index(spec, self.vocabulary, seed=seed)
            self._indexes[key] = cached
            return cached
        if hasattr(cached, "with_checks"):
            return cached.with_checks(spec.checks)
        return cached


def build_synthetic_vocabulary(spec: SyntheticVocabSpec, threads: Optional[int] = None) -> Vocabulary:
    train = synthetic_descriptors(spec.training)
    cfg = KMeansConfig(C=spec.clusters, max_iters=spec.max_iters, tol=spec.tol, seed=spec.seed)
    return build_vocabulary(train, cfg, spec.graph_k, threads=threads)


def resolve_vocabulary(cfg: ExperimentConfig) -> Vocabulary:
    if cfg.vocab_path is not None:
        return load_vocabulary(cfg.vocab_path)
    return build_synthetic_vocabulary(cfg.synthetic_vocab, threads=cfg.threads)


def resolve_dataset(
    cfg: ExperimentConfig, vocab: Vocabulary
) -> Tuple[SequenceDataset, Optional[float]]:
    if cfg.dataset_path is not None:
        dataset = SequenceDataset.load(cfg.dataset_path)
        sigma = dataset.config.carry_noise_sigma if dataset.config else None
        return dataset, sigma

    seq_cfg = cfg.sequence
    if cfg.calibration is not None:
        spec: CalibrationSpec = cfg.calibration
        reference = vocab
        if spec.reference_vocab is not None:
            reference = build_synthetic_vocabulary(spec.reference_vocab, threads=cfg.threads)
        result = calibrate_sigma(
            reference,
            target=spec.target,
            samples=spec.samples,
            iterations=spec.iterations,
            sequence=seq_cfg,
            seed=spec.seed if spec.seed is not None else seq_cfg.seed,
        )
        seq_cfg = seq_cfg.model_copy(update={"carry_noise_sigma": result.sigma})
    return generate(seq_cfg, vocab), seq_cfg.carry_noise_sigma


def prepare(
    cfg: ExperimentConfig,
    vocabulary: Optional[Vocabulary] = None,
    dataset: Optional[SequenceDataset] = None,
) -> BenchContext:
    """
    Resolve vocabulary and dataset, compute the linear-scan oracle and the links
    that define the matched subset and the hints.

    Raises:
        ContractViolationError: dataset and vocabulary dimensions differ
    """
    started = time.perf_counter()
    if vocabulary is None:
        vocabulary = resolve_vocabulary(cfg)
    sigma: Optional[float] = None
    if dataset is None:
        dataset, sigma = resolve_dataset(cfg, vocabulary)
    elif dataset.config is not None:
        sigma = dataset.config.carry_noise_sigma
    if dataset.dim != vocabulary.words.dim:
        raise ContractViolationError(
            f"Dataset dimension {dataset.dim} differs from vocabulary dimension "
            f"{vocabulary.words.dim}"
        )

    oracle = ordered_map(
        lambda frame: exact_nearest(vocabulary.words, frame), dataset.frames, threads=cfg.threads
    )

    matcher_evals = 0
    if cfg.hint_source == "ratio":
        links, matcher_evals = dataset.ratio_links(cfg.ratio, threads=cfg.threads)
    else:
        links = dataset.truth_links
    matched = []
    for t, frame in enumerate(dataset.frames):
        mask = np.zeros(frame.shape[0], dtype=bool)
        mask[links[t][:, 0]] = True
        matched.append(mask)

    ctx = BenchContext(
        config=cfg,
        vocabulary=vocabulary,
        dataset=dataset,
        oracle=oracle,
        links=links,
        matched=matched,
        matcher_evals=matcher_evals,
        carry_noise_sigma=sigma,
    )
    ctx.timing["prepare"] = time.perf_counter() - started
    logger.info(
        f"Prepared experiment '{cfg.id}': {vocabulary.size} words, {dataset.num_frames} frames, "
        f"{dataset.num_features} features, {int(sum(m.sum() for m in matched))} matched"
    )
    return ctx


# --- Running methods -------------------------------------------------------


def _run_frame(
    index: NearestNeighborIndex,
    features: np.ndarray,
    hints: Optional[List[Optional[int]]],
    rng: Rng,
) -> FrameRun:
    _, results = quantize_image(index, features, hints=hints, rng=rng)
    hinted = np.zeros(len(results), dtype=bool)
    if hints is not None:
        hinted = np.asarray([h is not None for h in hints], dtype=bool)
    return FrameRun(
        words=np.asarray([r.word_id for r in results], dtype=np.int64),
        evals=np.asarray([r.dist_evals for r in results], dtype=np.int64),
        hops=np.asarray([r.hops for r in results], dtype=np.int64),
        hinted=hinted,
    )


def run_method(ctx: BenchContext, spec: MethodSpec, seed: int) -> MethodRun:
    """
    Quantize every feature of every frame with one method.

    Feature i of frame t draws its randomness from Rng(seed).child(t).child(i)
    whatever the method, so methods differing only in hints see identical
    start nodes. Hinted methods go frame by frame, each frame's hints coming
    from the words this method assigned to the previous frame.
    """
    index = ctx.index_for(spec, seed)
    frames = ctx.dataset.frames
    root = Rng(seed)
    label = METHOD_LABELS.get(spec.method, spec.method)
    use_hints = index.supports_hints and ctx.config.hint_source != "none"

    with tqdm(total=len(frames), desc=f"{label} seed={seed}", disable=not settings.progress) as bar:
        if use_hints:
            runs: List[FrameRun] = []
            for t, features in enumerate(frames):
                hints = None
                if t > 0:
                    hints = propagate_hints(ctx.links[t], runs[t - 1].words, features.shape[0])
                runs.append(_run_frame(index, features, hints, root.child(t)))
                bar.update(1)
        else:

            def frame_job(t: int) -> FrameRun:
                out = _run_frame(index, frames[t], None, root.child(t))
                bar.update(1)
                return out

            runs = ordered_map(frame_job, range(len(frames)), threads=ctx.config.threads)

    params = {k: v for k, v in index.describe().items() if k not in ("method", "size")}
    return MethodRun(method=spec.method, seed=seed, params=params, frames=runs)


def _pooled(
    ctx: BenchContext, runs: Sequence[MethodRun], subset: str
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    words, oracle, evals, hops, hinted = [], [], [], [], []
    for run in runs:
        for t, frame in enumerate(run.frames):
            mask = ctx.matched[t] if subset == "matched" else slice(None)
            words.append(frame.words[mask])
            oracle.append(ctx.oracle[t][mask])
            evals.append(frame.evals[mask])
            hops.append(frame.hops[mask])
            hinted.append(frame.hinted[mask])

    def cat(parts: List[np.ndarray]) -> np.ndarray:
        return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)

    return cat(words), cat(oracle), cat(evals), cat(hops), cat(hinted)


def summarize(ctx: BenchContext, runs: Sequence[MethodRun], subset: str) -> SubsetMetrics:
    """Pooled metrics of one method over all seeds for one feature subset"""
    words, oracle, evals, hops, hinted = _pooled(ctx, runs, subset)
    if words.size == 0:
        return SubsetMetrics(queries=0)
    return SubsetMetrics(
        queries=int(words.size),
        accuracy=measure_accuracy(words, oracle),
        mean_evals=float(evals.mean()),
        speedup=measure_speedup(evals, ctx.n),
        evals_histogram=_histogram(evals, _eval_edges(max(ctx.n, int(evals.max())))),
        hops_histogram=_histogram(hops, list(range(int(hops.max()) + 2))),
        hinted_queries=int(np.count_nonzero(hinted)),
    )


def evaluate_method(ctx: BenchContext, spec: MethodSpec) -> Tuple[MethodResult, List[MethodRun]]:
    started = time.perf_counter()
    runs = [run_method(ctx, spec, seed) for seed in ctx.config.seeds]
    columns = {subset: summarize(ctx, runs, subset) for subset in ctx.config.feature_subsets}

    fractions = [shared_word_fraction(ctx.links, run.words()) for run in runs]
    fractions = [f for f in fractions if f is not None]
    shared = float(np.mean(fractions)) if fractions else None

    result = MethodResult(
        method=spec.method,
        label=METHOD_LABELS.get(spec.method, spec.method),
        params=runs[0].params,
        columns=columns,
        shared_word_fraction=shared,
    )
    ctx.timing[f"method:{spec.method}"] = ctx.timing.get(f"method:{spec.method}", 0.0) + (
        time.perf_counter() - started
    )
    summary = ", ".join(
        f"{s}: acc={m.accuracy:.4f} speedup={m.speedup:.2f}"
        for s, m in columns.items()
        if m.accuracy is not None
    )
    logger.info(f"{result.label} {result.params}: {summary}")
    return result, runs


# --- Sweeps ----------------------------------------------------------------


def grid_points(spec: MethodSpec, grid: Optional[ParamGrid]) -> List[MethodSpec]:
    """Every combination of grid values applied to spec (keys in sorted order)"""
    if not grid:
        return [spec]
    keys = sorted(grid)
    points = []
    for values in itertools.product(*(grid[k] for k in keys)):
        data = spec.model_dump()
        data.update(dict(zip(keys, values)))
        points.append(type(spec).model_validate(data))
    return points


def sweep(
    ctx: BenchContext, grids: Optional[Dict[str, ParamGrid]] = None
) -> List[FrontierPoint]:
    """
    Run every grid point of every configured method.

    Methods without a grid contribute their configured point. Within each
    (method, subset), points are sorted by accuracy, then by speedup
    descending.
    """
    cfg = ctx.config
    grids = cfg.grids if grids is None else grids
    points: List[FrontierPoint] = []

    for spec in cfg.methods:
        variants = grid_points(spec, grids.get(spec.method))
        logger.info(f"Sweeping {spec.method} over {len(variants)} grid point(s)")
        method_points: List[FrontierPoint] = []
        for variant in variants:
            result, _ = evaluate_method(ctx, variant)
            for subset, metrics in result.columns.items():
                if metrics.accuracy is None:
                    continue
                method_points.append(
                    FrontierPoint(
                        method=spec.method,
                        subset=subset,
                        params=result.params,
                        accuracy=metrics.accuracy,
                        speedup=metrics.speedup,
                        mean_evals=metrics.mean_evals,
                    )
                )
            logger.debug(f"Sweep point {spec.method} {result.params} done")
        method_points.sort(key=lambda p: (p.subset, p.accuracy, -p.speedup))
        points.extend(method_points)
    return points


def frontier(points: Sequence[FrontierPoint], method: str, subset: str) -> List[FrontierPoint]:
    return [p for p in points if p.method == method and p.subset == subset]


def select_at_accuracy(points: Sequence[FrontierPoint], target: float) -> FrontierPoint:
    """
    The frontier point whose accuracy is nearest the target; ties go to the
    higher speedup.

    Raises:
        ParameterError: empty frontier
    """
    if not points:
        raise ParameterError("Cannot select from an empty frontier")
    return min(points, key=lambda p: (abs(p.accuracy - target), -p.speedup))


# --- Experiment ------------------------------------------------------------


def _ordered_specs(specs: Sequence[MethodSpec]) -> List[MethodSpec]:
    rank = {m: i for i, m in enumerate(TABLE_ORDER)}
    return sorted(specs, key=lambda s: rank.get(s.method, len(rank)))


def run_experiment(
    cfg: ExperimentConfig,
    vocabulary: Optional[Vocabulary] = None,
    dataset: Optional[SequenceDataset] = None,
    include_sweep: bool = False,
    context: Optional[BenchContext] = None,
) -> BenchReport:
    """
    Run every configured method on the experiment's query stream.

    With include_sweep (or whenever a target accuracy is configured) the grids
    are swept too; the report then carries the frontier and, for a target, the
    point selected per method and subset.
    """
    started = time.perf_counter()
    ctx = context or prepare(cfg, vocabulary=vocabulary, dataset=dataset)

    method_results: List[MethodResult] = []
    oracle_shared = shared_word_fraction(ctx.links, ctx.oracle)
    for spec in _ordered_specs(cfg.methods):
        result, _ = evaluate_method(ctx, spec)
        method_results.append(result)

    points: List[FrontierPoint] = []
    selected: List[FrontierPoint] = []
    if include_sweep or cfg.target_accuracy is not None:
        points = sweep(ctx)
        if cfg.target_accuracy is not None:
            for spec in _ordered_specs(cfg.methods):
                for subset in cfg.feature_subsets:
                    candidates = frontier(points, spec.method, subset)
                    if candidates:
                        selected.append(select_at_accuracy(candidates, cfg.target_accuracy))

    seq_cfg = ctx.dataset.config
    metadata = ReportMetadata(
        experiment_id=cfg.id,
        experiment_name=cfg.name,
        seeds=list(cfg.seeds),
        vocabulary_size=ctx.n,
        graph_k=ctx.vocabulary.graph.k,
        dim=ctx.vocabulary.words.dim,
        num_frames=ctx.dataset.num_frames,
        num_features=ctx.dataset.num_features,
        num_matched=int(sum(int(m.sum()) for m in ctx.matched)),
        hint_source=cfg.hint_source,
        ratio=cfg.ratio if cfg.hint_source == "ratio" else None,
        carry_noise_sigma=ctx.carry_noise_sigma,
        overlap=seq_cfg.overlap if seq_cfg else None,
        target_accuracy=cfg.target_accuracy,
    )
    ctx.timing["total"] = time.perf_counter() - started
    report = BenchReport(
        metadata=metadata,
        methods=method_results,
        oracle_shared_word_fraction=oracle_shared,
        matcher_distance_evals=ctx.matcher_evals,
        frontier=points,
        selected=selected,
        timing=dict(ctx.timing),
    )
    logger.info(f"Experiment '{cfg.id}' finished in {ctx.timing['total']:.1f}s")
    return report


# --- Output ----------------------------------------------------------------


def report_json(report: BenchReport, include_timing: bool = True) -> str:
    """Canonical JSON (sorted keys); identical configs give identical text without timing"""
    data = report.model_dump(mode="json", exclude=None if include_timing else {"timing"})
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def write_report(report: BenchReport, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        path.write_text(report_json(report))
    except OSError as e:
        logger.error(f"Failed to write report to {path}: {e}")
        raise
    logger.info(f"Wrote report to {path}")
    return path


def load_report(path: Union[str, Path]) -> BenchReport:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Report not found: {path}")
    return BenchReport.model_validate_json(path.read_text())


def _table_cells(report: BenchReport) -> List[Tuple[str, Dict[str, Tuple[float, float]]]]:
    rows: Dict[str, Dict[str, Tuple[float, float]]] = {}
    if report.selected:
        for point in report.selected:
            rows.setdefault(point.method, {})[point.subset] = (point.accuracy, point.speedup)
    else:
        for result in report.methods:
            for subset, metrics in result.columns.items():
                if metrics.accuracy is not None:
                    rows.setdefault(result.method, {})[subset] = (
                        metrics.accuracy,
                        metrics.speedup,
                    )
    rank = {m: i for i, m in enumerate(TABLE_ORDER)}
    ordered = sorted(rows.items(), key=lambda item: rank.get(item[0], len(rank)))
    return [(METHOD_LABELS.get(m, m), cells) for m, cells in ordered]


def render_table(report: BenchReport) -> str:
    """
    Aligned text table: one row per method, accuracy and speedup for all
    features and for matched features only.
    """
    header = (
        f"{'Method':<8}  {'All: accuracy':>13}  {'speedup':>9}  "
        f"{'Matched: accuracy':>17}  {'speedup':>9}"
    )
    lines = [header, "-" * len(header)]
    for label, cells in _table_cells(report):
        parts = [f"{label:<8}"]
        for subset, width in (("all", 13), ("matched", 17)):
            if subset in cells:
                acc, speedup = cells[subset]
                parts.append(f"{acc:>{width}.4f}  {speedup:>9.4f}")
            else:
                parts.append(f"{'-':>{width}}  {'-':>9}")
        lines.append("  ".join(parts))

    meta = report.metadata
    lines.append("")
    lines.append(
        f"vocabulary={meta.vocabulary_size} graph_k={meta.graph_k} frames={meta.num_frames} "
        f"features={meta.num_features} matched={meta.num_matched} hints={meta.hint_source}"
    )
    if report.oracle_shared_word_fraction is not None:
        lines.append(f"linked pairs sharing their true word: {report.oracle_shared_word_fraction:.4f}")
    return "\n".join(lines) + "\n"


def frontier_csv(points: Sequence[FrontierPoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["method", "subset", "params", "accuracy", "speedup", "mean_evals"])
    for p in points:
        writer.writerow(
            [
                p.method,
                p.subset,
                json.dumps(p.params, sort_keys=True),
                f"{p.accuracy:.6f}",
                f"{p.speedup:.6f}",
                f"{p.mean_evals:.6f}",
            ]
        )
    return buf.getvalue()
