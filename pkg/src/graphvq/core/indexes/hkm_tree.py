"""
Hierarchical k-means tree with priority search.

The points are split into `branching` clusters by a short k-means run, and each
cluster is split again until it holds at most `branching` points. A query
descends greedily to the closest child centroid, queuing the unvisited
siblings by centroid distance, then keeps popping the closest queued branch
until `checks` leaf points have been collected. Centroids are d-dimensional
vectors, so their distances are charged to the meter alongside leaf points.
"""

import heapq
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from graphvq.core.errors import EmptyStoreError, ParameterError
from graphvq.core.outcomes import SearchOutcome
from graphvq.core.vectors import ArrayLike, DistanceMeter, Rng, VectorStore
from graphvq.core.vocabulary import kmeans
from graphvq.models.build_config import KMeansConfig

from .base import NearestNeighborIndex

logger = logging.getLogger(__name__)


@dataclass
class HkmNode:
    """Internal node (children + their centroids) or leaf (points)"""

    centroid: np.ndarray
    children: List[int] = field(default_factory=list)
    child_centroids: Optional[np.ndarray] = None
    points: Optional[np.ndarray] = None

    @property
    def is_leaf(self) -> bool:
        return self.points is not None


def _build_nodes(
    store: VectorStore, branching: int, iterations: int, rng: Rng
) -> List[HkmNode]:
    data = store.data64
    root_members = np.arange(store.count)
    nodes = [HkmNode(centroid=data.mean(axis=0))]
    stack: List[Tuple[int, np.ndarray]] = [(0, root_members)]

    while stack:
        node_idx, members = stack.pop()
        node = nodes[node_idx]
        if members.size <= branching:
            node.points = members
            continue

        split_seed = int(rng.generator.integers(0, 2**63))
        cfg = KMeansConfig(C=branching, max_iters=iterations, tol=0.0, seed=split_seed)
        result = kmeans(VectorStore(data[members], dim=store.dim), cfg, threads=1)
        groups = [members[result.assignments == c] for c in range(branching)]
        groups = [g for g in groups if g.size]
        if len(groups) < 2:
            # duplicates that k-means cannot separate
            node.points = members
            continue

        for group in groups:
            child = HkmNode(centroid=data[group].mean(axis=0))
            nodes.append(child)
            node.children.append(len(nodes) - 1)
            stack.append((len(nodes) - 1, group))
        node.child_centroids = np.stack([nodes[c].centroid for c in node.children])

    return nodes


class HkmTree(NearestNeighborIndex):
    """Hierarchical k-means tree searched with a centroid-distance priority queue"""

    name = "hkm"

    def __init__(
        self,
        store: VectorStore,
        nodes: List[HkmNode],
        branching: int,
        iterations: int,
        checks: int,
        seed: int = 0,
    ):
        super().__init__(store, seed=seed)
        if checks < 1:
            raise ParameterError(f"checks must be >= 1, got {checks}")
        self.nodes = nodes
        self.branching = branching
        self.iterations = iterations
        self.checks = checks

    @classmethod
    def build(
        cls, store: VectorStore, branching: int, iterations: int, seed: int, checks: int = 1
    ) -> "HkmTree":
        if branching < 2:
            raise ParameterError(f"branching must be >= 2, got {branching}")
        if iterations < 1:
            raise ParameterError(f"iterations must be >= 1, got {iterations}")
        if store.count == 0:
            raise EmptyStoreError("Cannot build an HKM tree over an empty store")

        nodes = _build_nodes(store, branching, iterations, Rng(seed))
        leaves = sum(1 for node in nodes if node.is_leaf)
        logger.info(
            f"Built HKM tree over {store.count} points: branching={branching}, "
            f"iterations={iterations}, {len(nodes)} nodes, {leaves} leaves"
        )
        return cls(store, nodes, branching, iterations, checks=checks, seed=seed)

    @classmethod
    def from_spec(cls, spec, vocabulary, seed: int) -> "HkmTree":
        return cls.build(
            vocabulary.words,
            branching=spec.branching,
            iterations=spec.iterations,
            seed=seed,
            checks=spec.checks,
        )

    def with_checks(self, checks: int) -> "HkmTree":
        return HkmTree(
            self.store, self.nodes, self.branching, self.iterations, checks=checks, seed=self.seed
        )

    def leaves(self) -> List[np.ndarray]:
        return [node.points for node in self.nodes if node.is_leaf]

    def search(
        self,
        q: ArrayLike,
        meter: Optional[DistanceMeter] = None,
        rng: Optional[Rng] = None,
        hint: Optional[int] = None,
    ) -> SearchOutcome:
        if meter is None:
            meter = self.new_meter()
        meter.begin_query(q)
        before = meter.evaluations

        visit: List[np.ndarray] = []
        collected = 0
        heap: List[Tuple[float, int, int]] = []
        counter = 0

        def descend(node_idx: int) -> None:
            nonlocal counter, collected
            node = self.nodes[node_idx]
            while not node.is_leaf:
                dists = meter.charge_external(node.child_centroids)
                order = np.argsort(dists, kind="stable")
                for c in order[1:]:
                    counter += 1
                    heapq.heappush(heap, (float(dists[c]), counter, node.children[c]))
                node = self.nodes[node.children[order[0]]]
            visit.append(node.points)
            collected += node.points.size

        descend(0)
        while heap and collected < self.checks:
            _, _, node_idx = heapq.heappop(heap)
            descend(node_idx)

        ids = np.concatenate(visit)
        dists = meter.distances(ids)
        best = dists.min()
        best_id = int(ids[dists == best].min())
        return SearchOutcome(
            results=[(best_id, float(best))], dist_evals=meter.evaluations - before
        )

    def describe(self) -> dict:
        return {
            "method": self.name,
            "size": self.size,
            "branching": self.branching,
            "iterations": self.iterations,
            "checks": self.checks,
        }


def hkm_build(store: VectorStore, branching: int, iterations: int, seed: int) -> HkmTree:
    return HkmTree.build(store, branching=branching, iterations=iterations, seed=seed)


def hkm_search(
    tree: HkmTree, q: ArrayLike, checks: int, meter: Optional[DistanceMeter] = None
) -> SearchOutcome:
    return tree.with_checks(checks).search(q, meter=meter)
