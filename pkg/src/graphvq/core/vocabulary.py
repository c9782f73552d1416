"""
Flat k-means visual vocabulary with an embedded k-NN graph.

The vocabulary is trained with Lloyd iterations from a k-means++ seeding. The
final iteration, whose assignment step already measures every training point
against the returned words, also measures every word against every other
word and keeps the k nearest. That yields the exact k-NN graph over the words
for an extra C*(C-1) distance evaluations.
"""

import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from graphvq.core.errors import FormatError, IntegrityError, ParameterError
from graphvq.core.knn_graph import (
    DEFAULT_BLOCK_SIZE,
    KnnGraph,
    check_degree,
    nearest_rows,
    pairwise_rows,
)
from graphvq.core.parallel import ordered_map
from graphvq.core.vectors import Rng, VectorStore
from graphvq.models.build_config import KMeansConfig

logger = logging.getLogger(__name__)

VOCAB_MAGIC = b"GVC1"
_VOCAB_META = struct.Struct("<4sIIIQd")  # magic, C, d, k, seed, objective

_ASSIGN_BLOCK = 4096


@dataclass
class KMeansResult:
    """Outcome of a k-means run"""

    centroids: VectorStore
    assignments: np.ndarray
    objective: float
    history: List[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    graph: Optional[KnnGraph] = None
    centroid_distance_evals: int = 0


@dataclass
class VocabularyMeta:
    C: int
    d: int
    k: int
    seed: int
    objective: float


@dataclass
class VocabularyBuildStats:
    """
    Distance work of the final k-means iteration (not persisted).

    final_assignment_evals is the n*C point-to-word work that iteration does
    anyway; centroid_distance_evals is the word-to-word work the graph adds.
    """

    kmeans_iterations: int = 0
    final_assignment_evals: int = 0
    centroid_distance_evals: int = 0


@dataclass
class Vocabulary:
    """Visual words, their k-NN graph and build metadata"""

    words: VectorStore
    graph: KnnGraph
    meta: VocabularyMeta
    stats: Optional[VocabularyBuildStats] = None

    def __post_init__(self):
        if self.graph.n != self.words.count:
            raise IntegrityError(
                f"Graph has {self.graph.n} nodes but vocabulary has {self.words.count} words"
            )

    @property
    def size(self) -> int:
        return self.words.count

    def median_word_spacing(self) -> float:
        """Median distance from a word to its nearest other word"""
        return float(np.median(self.graph.neighbor_dists[:, 0]))


def _assign(
    points: np.ndarray, point_sq: np.ndarray, centroids: np.ndarray, threads: Optional[int]
) -> Tuple[np.ndarray, np.ndarray]:
    """Nearest centroid per point (ties to the lower id) and the exact squared distance"""
    centroid_sq = np.square(centroids).sum(axis=1)
    n = points.shape[0]
    blocks = [(s, min(s + _ASSIGN_BLOCK, n)) for s in range(0, n, _ASSIGN_BLOCK)]

    def assign_block(bounds: Tuple[int, int]) -> np.ndarray:
        s, e = bounds
        approx = point_sq[s:e, None] - 2.0 * (points[s:e] @ centroids.T) + centroid_sq[None, :]
        return np.argmin(approx, axis=1)

    labels = np.concatenate(ordered_map(assign_block, blocks, threads=threads))
    d2 = np.square(points - centroids[labels]).sum(axis=1)
    return labels, d2


def _seed_plus_plus(points: np.ndarray, C: int, rng: Rng) -> np.ndarray:
    """k-means++ seeding: each next centroid drawn with probability proportional to D^2"""
    n = points.shape[0]
    gen = rng.generator
    chosen = [int(gen.integers(0, n))]
    min_d2 = np.square(points - points[chosen[0]]).sum(axis=1)

    for _ in range(1, C):
        total = min_d2.sum()
        if total > 0:
            idx = int(gen.choice(n, p=min_d2 / total))
        else:
            # every point coincides with a chosen centroid
            remaining = np.setdiff1d(np.arange(n), np.asarray(chosen))
            idx = int(gen.choice(remaining))
        chosen.append(idx)
        min_d2 = np.minimum(min_d2, np.square(points - points[idx]).sum(axis=1))

    return points[np.asarray(chosen)].copy()


def _update(points: np.ndarray, labels: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """
    Member means; an empty cluster is reseeded at the point farthest from its
    own (updated) centroid, distinct points for distinct empty clusters.
    """
    C, d = centroids.shape
    sums = np.stack(
        [np.bincount(labels, weights=points[:, j], minlength=C) for j in range(d)], axis=1
    )
    counts = np.bincount(labels, minlength=C)

    updated = centroids.copy()
    filled = counts > 0
    updated[filled] = sums[filled] / counts[filled, None]

    empty = np.flatnonzero(~filled)
    if empty.size:
        d2 = np.square(points - updated[labels]).sum(axis=1)
        farthest = np.argsort(-d2, kind="stable")[: empty.size]
        updated[empty] = points[farthest]
        logger.warning(f"Reseeded {empty.size} empty cluster(s) from farthest points")
    return updated


def _centroid_graph(
    words: VectorStore, graph_k: int, threads: Optional[int]
) -> Tuple[KnnGraph, int]:
    """Exact k-NN graph over the words and the C*(C-1) evaluations it took"""
    C = words.count
    blocks = [np.arange(s, min(s + DEFAULT_BLOCK_SIZE, C)) for s in range(0, C, DEFAULT_BLOCK_SIZE)]

    def graph_block(rows: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return nearest_rows(pairwise_rows(words, rows), rows, graph_k)

    parts = ordered_map(graph_block, blocks, threads=threads)
    graph = KnnGraph(
        np.concatenate([p[0] for p in parts]),
        np.concatenate([p[1] for p in parts]).astype(np.float32),
    )
    return graph, C * (C - 1)


def kmeans(
    train: VectorStore,
    cfg: KMeansConfig,
    threads: Optional[int] = None,
    graph_k: Optional[int] = None,
) -> KMeansResult:
    """
    Lloyd k-means from a k-means++ seeding.

    Stops after cfg.max_iters updates, when assignments stop changing, or when
    the relative objective decrease drops below cfg.tol. The objective (sum of
    squared distances to assigned centroids) never increases between
    iterations.

    With graph_k, the final iteration also measures the returned centroids
    against each other and the result carries their exact graph_k-NN graph.
    The returned assignments and objective are that iteration's; no point is
    re-assigned.

    Raises:
        ParameterError: C larger than the training set, or graph_k outside [1, C-1]
    """
    n = train.count
    if n == 0:
        raise ParameterError("Cannot run k-means on an empty training set")
    if cfg.C > n:
        raise ParameterError(f"C={cfg.C} exceeds training set size {n}")
    if graph_k is not None:
        check_degree(cfg.C, graph_k)

    points = train.data64
    point_sq = np.square(points).sum(axis=1)
    centroids = _seed_plus_plus(points, cfg.C, Rng(cfg.seed))
    labels, d2 = _assign(points, point_sq, centroids, threads)
    objective = float(d2.sum())
    history = [objective]
    converged = False
    iterations = 0

    for iterations in range(1, cfg.max_iters + 1):
        centroids = _update(points, labels, centroids)
        new_labels, d2 = _assign(points, point_sq, centroids, threads)
        new_objective = float(d2.sum())
        history.append(new_objective)

        changed = int(np.count_nonzero(new_labels != labels))
        labels = new_labels
        empty = cfg.C - np.unique(labels).size
        logger.debug(
            f"k-means iter {iterations}: objective={new_objective:.6g} changed={changed} "
            f"empty={empty}"
        )

        settled = (
            changed == 0
            or new_objective == 0.0
            or (objective - new_objective) < cfg.tol * objective
        )
        objective = new_objective
        if settled and empty == 0:
            converged = True
            break

    # clusters emptied by the last assignment get reseeded before returning
    repairs = 0
    while cfg.C - np.unique(labels).size > 0 and repairs < cfg.C:
        centroids = _update(points, labels, centroids)
        labels, d2 = _assign(points, point_sq, centroids, threads)
        objective = float(d2.sum())
        history.append(objective)
        repairs += 1

    words = VectorStore(centroids.astype(np.float32), dim=train.dim)
    graph, centroid_evals = (None, 0)
    if graph_k is not None:
        graph, centroid_evals = _centroid_graph(words, graph_k, threads)

    return KMeansResult(
        centroids=words,
        assignments=labels,
        objective=objective,
        history=history,
        iterations=iterations,
        converged=converged,
        graph=graph,
        centroid_distance_evals=centroid_evals,
    )


def build_vocabulary(
    train: VectorStore,
    cfg: KMeansConfig,
    graph_k: int,
    threads: Optional[int] = None,
) -> Vocabulary:
    """
    Train the words; the final k-means iteration also emits their k-NN graph.

    Beyond k-means itself this costs C*(C-1) word-to-word evaluations (both
    directions counted). The graph is identical to
    build_brute_force(words, graph_k).

    Raises:
        ParameterError: graph_k outside [1, C-1], or C larger than the training set
    """
    if not 1 <= graph_k <= cfg.C - 1:
        raise ParameterError(f"graph_k={graph_k} must be in [1, C-1] with C={cfg.C}")

    logger.info(f"Training {cfg.C}-word vocabulary on {train.count} descriptors")
    result = kmeans(train, cfg, threads=threads, graph_k=graph_k)
    words, graph, objective = result.centroids, result.graph, result.objective
    C = words.count
    stats = VocabularyBuildStats(
        kmeans_iterations=result.iterations,
        final_assignment_evals=train.count * C,
        centroid_distance_evals=result.centroid_distance_evals,
    )

    logger.info(
        f"Vocabulary ready: C={C}, d={words.dim}, graph k={graph_k}, "
        f"objective={objective:.6g}, k-means iterations={result.iterations}"
    )
    return Vocabulary(
        words=words,
        graph=graph,
        meta=VocabularyMeta(C=C, d=words.dim, k=graph_k, seed=cfg.seed, objective=objective),
        stats=stats,
    )


# Vocabulary file: "GVC1" + meta (u32 C, u32 d, u32 k, u64 seed, f64 objective),
# then a GVQ1 words block and a GKG1 graph block.


def save_vocabulary(vocab: Vocabulary, path: Union[str, Path]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = vocab.meta
    with open(path, "wb") as fh:
        fh.write(_VOCAB_META.pack(VOCAB_MAGIC, meta.C, meta.d, meta.k, meta.seed, meta.objective))
        vocab.words.write_to(fh)
        vocab.graph.write_to(fh)
    logger.info(f"Saved vocabulary ({meta.C} words, {meta.k}-NN graph) to {path}")


def load_vocabulary(path: Union[str, Path]) -> Vocabulary:
    """
    Load a vocabulary file.

    Raises:
        FileNotFoundError: missing file
        FormatError: bad magic, version or truncated blocks
        IntegrityError: words, graph and metadata disagree
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Vocabulary file not found: {path}")

    with open(path, "rb") as fh:
        header = fh.read(_VOCAB_META.size)
        if len(header) != _VOCAB_META.size:
            raise FormatError(f"Truncated vocabulary header in {path}")
        magic, C, d, k, seed, objective = _VOCAB_META.unpack(header)
        if magic[:3] != VOCAB_MAGIC[:3]:
            raise FormatError(f"Bad vocabulary magic {magic!r} in {path}")
        if magic != VOCAB_MAGIC:
            raise FormatError(f"Unsupported vocabulary format version {magic[3:]!r}")

        words = VectorStore.read_from(fh)
        graph = KnnGraph.read_from(fh)
        if fh.read(1):
            raise FormatError(f"Trailing bytes after vocabulary in {path}")

    if words.count != C or words.dim != d:
        raise IntegrityError(
            f"Vocabulary metadata says {C}x{d} but words block is {words.count}x{words.dim}"
        )
    if graph.k != k:
        raise IntegrityError(f"Vocabulary metadata says k={k} but graph has k={graph.k}")

    vocab = Vocabulary(
        words=words, graph=graph, meta=VocabularyMeta(C=C, d=d, k=k, seed=seed, objective=objective)
    )
    logger.info(f"Loaded vocabulary ({C} words, {k}-NN graph) from {path}")
    return vocab
