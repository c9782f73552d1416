"""
Randomized KD-tree forest with best-bin-first search.

Each tree splits on a dimension drawn at random among the five highest-variance
dimensions of the node's points, at the mean value. A query first descends every
tree to a leaf, then keeps popping the pending branch with the smallest
boundary distance from a queue shared by all trees until `checks` leaf points
have been evaluated. Split comparisons are scalar and never charged; only leaf
points count as distance evaluations.
"""

import heapq
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from graphvq.core.errors import EmptyStoreError, ParameterError
from graphvq.core.outcomes import SearchOutcome
from graphvq.core.vectors import ArrayLike, DistanceMeter, Rng, VectorStore

from .base import NearestNeighborIndex

logger = logging.getLogger(__name__)

TOP_VARIANCE_DIMS = 5


@dataclass
class KdTree:
    """
    One randomized tree in flat arrays. Node i is a leaf when split_dim[i] < 0;
    its points are perm[leaf_start[i]:leaf_end[i]].
    """

    split_dim: np.ndarray
    split_value: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_start: np.ndarray
    leaf_end: np.ndarray
    perm: np.ndarray

    def leaves(self) -> List[np.ndarray]:
        return [
            self.perm[self.leaf_start[i] : self.leaf_end[i]]
            for i in range(self.split_dim.size)
            if self.split_dim[i] < 0
        ]


def _build_tree(points: np.ndarray, rng: np.random.Generator) -> KdTree:
    split_dim: List[int] = []
    split_value: List[float] = []
    left: List[int] = []
    right: List[int] = []
    leaf_start: List[int] = []
    leaf_end: List[int] = []
    perm: List[np.ndarray] = []
    cursor = 0

    def new_node() -> int:
        for column in (split_dim, left, right, leaf_start, leaf_end):
            column.append(-1)
        split_value.append(0.0)
        return len(split_dim) - 1

    stack = [(new_node(), np.arange(points.shape[0]))]
    while stack:
        node, members = stack.pop()

        split = None
        if members.size > 1:
            values = points[members]
            variance = values.var(axis=0)
            top = np.argsort(-variance, kind="stable")[:TOP_VARIANCE_DIMS]
            top = top[variance[top] > 0]
            for dim in rng.permutation(top):
                threshold = float(values[:, dim].mean())
                goes_left = values[:, dim] < threshold
                if 0 < np.count_nonzero(goes_left) < members.size:
                    split = (int(dim), threshold, goes_left)
                    break

        if split is None:
            # single point, or duplicates that no split can separate
            leaf_start[node] = cursor
            cursor += members.size
            leaf_end[node] = cursor
            perm.append(members)
            continue

        dim, threshold, goes_left = split
        split_dim[node] = dim
        split_value[node] = threshold
        left[node] = new_node()
        right[node] = new_node()
        stack.append((right[node], members[~goes_left]))
        stack.append((left[node], members[goes_left]))

    return KdTree(
        split_dim=np.asarray(split_dim, dtype=np.int64),
        split_value=np.asarray(split_value, dtype=np.float64),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        leaf_start=np.asarray(leaf_start, dtype=np.int64),
        leaf_end=np.asarray(leaf_end, dtype=np.int64),
        perm=np.concatenate(perm) if perm else np.zeros(0, dtype=np.int64),
    )


class KdForest(NearestNeighborIndex):
    """Forest of randomized KD-trees searched best-bin-first"""

    name = "kd"

    def __init__(self, store: VectorStore, trees: List[KdTree], checks: int, seed: int = 0):
        super().__init__(store, seed=seed)
        if checks < 1:
            raise ParameterError(f"checks must be >= 1, got {checks}")
        self.trees = trees
        self.checks = checks

    @classmethod
    def build(cls, store: VectorStore, trees: int, seed: int, checks: int = 1) -> "KdForest":
        if trees < 1:
            raise ParameterError(f"trees must be >= 1, got {trees}")
        if store.count == 0:
            raise EmptyStoreError("Cannot build a KD forest over an empty store")
        rng = Rng(seed)
        built = [_build_tree(store.data64, rng.child(t).generator) for t in range(trees)]
        logger.info(f"Built KD forest: {trees} tree(s) over {store.count} points")
        return cls(store, built, checks=checks, seed=seed)

    @classmethod
    def from_spec(cls, spec, vocabulary, seed: int) -> "KdForest":
        return cls.build(vocabulary.words, trees=spec.trees, seed=seed, checks=spec.checks)

    def with_checks(self, checks: int) -> "KdForest":
        """Same trees, different search budget"""
        return KdForest(self.store, self.trees, checks=checks, seed=self.seed)

    def search(
        self,
        q: ArrayLike,
        meter: Optional[DistanceMeter] = None,
        rng: Optional[Rng] = None,
        hint: Optional[int] = None,
    ) -> SearchOutcome:
        if meter is None:
            meter = self.new_meter()
        q64 = meter.begin_query(q)
        before = meter.evaluations

        # Visit order never depends on point distances (no pruning), so leaf
        # points are collected first and measured in one batch.
        checked = np.zeros(self.store.count, dtype=bool)
        visit: List[int] = []
        heap: List[Tuple[float, int, int, int]] = []
        counter = 0

        def descend(tree_idx: int, node: int, mindist: float) -> None:
            nonlocal counter
            tree = self.trees[tree_idx]
            while tree.split_dim[node] >= 0:
                diff = q64[tree.split_dim[node]] - tree.split_value[node]
                if diff < 0:
                    near, far = tree.left[node], tree.right[node]
                else:
                    near, far = tree.right[node], tree.left[node]
                counter += 1
                heapq.heappush(heap, (mindist + diff * diff, counter, tree_idx, int(far)))
                node = near
            if len(visit) >= self.checks:
                return
            for pid in tree.perm[tree.leaf_start[node] : tree.leaf_end[node]]:
                if not checked[pid]:
                    checked[pid] = True
                    visit.append(int(pid))

        for tree_idx in range(len(self.trees)):
            descend(tree_idx, 0, 0.0)
        while heap and len(visit) < self.checks:
            mindist, _, tree_idx, node = heapq.heappop(heap)
            descend(tree_idx, node, mindist)

        ids = np.asarray(visit, dtype=np.int64)
        dists = meter.distances(ids)
        best = dists.min()
        best_id = int(ids[dists == best].min())
        return SearchOutcome(
            results=[(best_id, float(best))], dist_evals=meter.evaluations - before
        )

    def describe(self) -> dict:
        return {"method": self.name, "size": self.size, "trees": len(self.trees), "checks": self.checks}


def kd_build(store: VectorStore, trees: int, seed: int) -> KdForest:
    return KdForest.build(store, trees=trees, seed=seed)


def kd_search(
    forest: KdForest, q: ArrayLike, checks: int, meter: Optional[DistanceMeter] = None
) -> SearchOutcome:
    return forest.with_checks(checks).search(q, meter=meter)
