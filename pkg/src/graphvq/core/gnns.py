"""
Graph nearest neighbor search (GNNS) on a k-NN graph.

A walk starts at a node, evaluates the first E neighbors of the current node
and moves to the closest of them. It stops after T steps, or, when T is not
given, as soon as no examined neighbor is strictly closer to the query than
the current node. R walks are run; every node whose distance was evaluated
joins the candidate pool and the K best pooled candidates are returned.

Sequential warm start: when a feature has a match in the previous frame, the
walk starts from the word assigned to that match instead of a random node,
with a single walk (R = 1) run to its local minimum.
"""

import logging
from typing import Dict, Optional, Protocol, Tuple, Union

import numpy as np

from graphvq.core.errors import ContractViolationError, EmptyStoreError, ParameterError
from graphvq.core.knn_graph import GraphView, KnnGraph
from graphvq.core.outcomes import QuantizationResult, SearchOutcome
from graphvq.core.vectors import ArrayLike, DistanceMeter, Rng, VectorStore, uniform_node
from graphvq.models.search_params import GnnsParams

logger = logging.getLogger(__name__)

Graph = Union[KnnGraph, GraphView]


def _closest(ids: np.ndarray, dists: np.ndarray) -> Tuple[int, float]:
    """Closest examined neighbor; equal distances go to the lower id"""
    best = dists.min()
    return int(ids[dists == best].min()), float(best)


def search(
    graph: Graph,
    store: VectorStore,
    q: ArrayLike,
    params: GnnsParams,
    start: Optional[int] = None,
    meter: Optional[DistanceMeter] = None,
    rng: Optional[Rng] = None,
) -> SearchOutcome:
    """
    Run GNNS for one query.

    Args:
        graph: k-NN graph over the store (or a truncated view of one)
        store: Vectors the graph links
        q: Query vector
        params: K, R, T, E and seed
        start: Start node for the first walk (random when absent)
        meter: Distance meter for this query (a fresh one when absent)
        rng: Random stream for start nodes (Rng(params.seed) when absent)

    Returns:
        SearchOutcome with the K best pooled candidates

    Raises:
        EmptyStoreError: empty graph
        ParameterError: E larger than the graph degree, or start out of range
        ContractViolationError: graph and store sizes disagree, or bad query dimension
    """
    n = graph.n
    if n == 0 or store.count == 0:
        raise EmptyStoreError("Cannot search an empty graph")
    if store.count != n:
        raise ContractViolationError(f"Graph has {n} nodes but store has {store.count} vectors")
    if params.E > graph.k:
        raise ParameterError(f"E={params.E} exceeds graph degree k={graph.k}")
    if start is not None and not 0 <= start < n:
        raise ParameterError(f"Start node {start} out of range [0, {n})")

    if meter is None:
        meter = DistanceMeter(store)
    elif meter.store is not store:
        raise ContractViolationError("Meter is bound to a different store")
    if rng is None:
        rng = Rng(params.seed)
    meter.begin_query(q)
    evals_before = meter.evaluations

    neighbors = graph.neighbors[:, : params.E]
    pool: Dict[int, float] = {}
    hops = 0
    first_start: Optional[int] = None

    for restart in range(params.R):
        if restart == 0 and start is not None:
            node = int(start)
        else:
            node = uniform_node(rng, n)
        if first_start is None:
            first_start = node

        node_dist = meter.distance(node)
        pool[node] = node_dist

        steps = 0
        while params.T is None or steps < params.T:
            ids = neighbors[node]
            dists = meter.distances(ids)
            pool.update(zip(ids.tolist(), dists.tolist()))
            steps += 1

            best_id, best_dist = _closest(ids, dists)
            if params.T is None and not best_dist < node_dist:
                break  # local minimum
            node, node_dist = best_id, best_dist
            hops += 1

    ranked = sorted(pool.items(), key=lambda item: (item[1], item[0]))
    return SearchOutcome(
        results=ranked[: params.K],
        dist_evals=meter.evaluations - evals_before,
        hops=hops,
        start_id=first_start,
    )


class VocabularyIndex(Protocol):
    """Anything holding a word store, its k-NN graph and default search parameters"""

    graph: Graph
    store: VectorStore
    params: GnnsParams


def quantize(
    index: VocabularyIndex,
    q: ArrayLike,
    hint: Optional[int] = None,
    meter: Optional[DistanceMeter] = None,
    rng: Optional[Rng] = None,
) -> QuantizationResult:
    """
    Assign q to a single visual word (K = 1).

    With a hint the search is one walk (R = 1) starting at the hinted word;
    without one it is plain GNNS with the index's parameters.
    """
    params = index.params
    if params.K != 1:
        params = params.model_copy(update={"K": 1})
    if hint is not None and params.R != 1:
        params = params.model_copy(update={"R": 1})

    outcome = search(index.graph, index.store, q, params, start=hint, meter=meter, rng=rng)
    return QuantizationResult.from_outcome(outcome)
