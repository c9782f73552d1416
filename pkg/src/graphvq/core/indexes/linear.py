"""Exhaustive linear scan - the accuracy oracle and the speedup reference"""

from typing import Optional

import numpy as np

from graphvq.core.errors import EmptyStoreError
from graphvq.core.outcomes import SearchOutcome
from graphvq.core.vectors import ArrayLike, DistanceMeter, Rng, VectorStore, l2_rows

from .base import NearestNeighborIndex

ORACLE_SHORTLIST = 8
_ORACLE_BLOCK = 1024


def linear_nn(
    store: VectorStore, q: ArrayLike, meter: Optional[DistanceMeter] = None
) -> SearchOutcome:
    """
    Exact nearest neighbor by scanning every vector; charges exactly n evaluations.

    Raises:
        EmptyStoreError: empty store
    """
    if store.count == 0:
        raise EmptyStoreError("Cannot search an empty store")
    if meter is None:
        meter = DistanceMeter(store)
    meter.begin_query(q)
    before = meter.evaluations

    dists = meter.distances(np.arange(store.count))
    best = int(np.argmin(dists))  # first occurrence: lowest id among ties
    return SearchOutcome(
        results=[(best, float(dists[best]))], dist_evals=meter.evaluations - before
    )


def exact_nearest(store: VectorStore, queries: np.ndarray) -> np.ndarray:
    """
    Exact nearest word id for every query row, without metering.

    A matrix-product pass shortlists candidates; the shortlist is re-ranked with
    the same distance routine linear_nn uses, so the answers agree with it.
    """
    if store.count == 0:
        raise EmptyStoreError("Cannot search an empty store")
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    words = store.data64
    word_sq = np.square(words).sum(axis=1)
    shortlist = min(ORACLE_SHORTLIST, store.count)
    out = np.empty(queries.shape[0], dtype=np.int64)

    for s in range(0, queries.shape[0], _ORACLE_BLOCK):
        block = queries[s : s + _ORACLE_BLOCK]
        approx = np.square(block).sum(axis=1)[:, None] - 2.0 * (block @ words.T) + word_sq[None, :]
        if shortlist < store.count:
            cand = np.argpartition(approx, shortlist - 1, axis=1)[:, :shortlist]
        else:
            cand = np.broadcast_to(np.arange(store.count), approx.shape)
        for row, ids in enumerate(cand):
            ids = np.sort(ids)
            dists = l2_rows(words[ids], block[row])
            out[s + row] = ids[int(np.argmin(dists))]
    return out


class LinearIndex(NearestNeighborIndex):
    """Linear search over the whole vocabulary"""

    name = "linear"

    def search(
        self,
        q: ArrayLike,
        meter: Optional[DistanceMeter] = None,
        rng: Optional[Rng] = None,
        hint: Optional[int] = None,
    ) -> SearchOutcome:
        return linear_nn(self.store, q, meter=meter)

    @classmethod
    def from_spec(cls, spec, vocabulary, seed: int) -> "LinearIndex":
        return cls(vocabulary.words, seed=seed)
