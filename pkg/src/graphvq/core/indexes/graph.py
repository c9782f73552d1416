"""Graph search over the vocabulary's embedded k-NN graph (GNNS and sequential GNNS)"""

import logging
from typing import Optional

from graphvq.core import gnns
from graphvq.core.knn_graph import GraphView, KnnGraph
from graphvq.core.outcomes import SearchOutcome
from graphvq.core.vectors import ArrayLike, DistanceMeter, Rng, VectorStore
from graphvq.models.search_params import GnnsParams

from .base import NearestNeighborIndex

logger = logging.getLogger(__name__)


class GraphIndex(NearestNeighborIndex):
    """
    GNNS from uniformly random start nodes.

    The graph may be wider than the search needs; E selects how many of each
    node's nearest neighbors a step examines.
    """

    name = "gnns"

    def __init__(
        self,
        store: VectorStore,
        graph: KnnGraph,
        E: Optional[int] = None,
        R: int = 1,
        T: Optional[int] = None,
        seed: int = 0,
    ):
        super().__init__(store, seed=seed)
        E = graph.k if E is None else E
        # GraphView validates E against the graph degree
        self.graph = GraphView(graph, E)
        self.params = GnnsParams(K=1, R=R, T=T, E=E, seed=seed)

    @classmethod
    def from_spec(cls, spec, vocabulary, seed: int) -> "GraphIndex":
        return cls(vocabulary.words, vocabulary.graph, E=spec.E, R=spec.R, T=spec.T, seed=seed)

    def search(
        self,
        q: ArrayLike,
        meter: Optional[DistanceMeter] = None,
        rng: Optional[Rng] = None,
        hint: Optional[int] = None,
    ) -> SearchOutcome:
        return gnns.search(self.graph, self.store, q, self.params, meter=meter, rng=rng)

    def describe(self) -> dict:
        return {
            "method": self.name,
            "size": self.size,
            "E": self.params.E,
            "R": self.params.R,
            "T": self.params.T,
        }


class SequentialGraphIndex(GraphIndex):
    """
    GNNS warm-started from a hint.

    A hinted feature runs one walk from the hinted word to its local minimum
    (or for T steps); an unhinted feature falls back to GNNS with R restarts.
    """

    name = "sgnns"
    supports_hints = True

    def search(
        self,
        q: ArrayLike,
        meter: Optional[DistanceMeter] = None,
        rng: Optional[Rng] = None,
        hint: Optional[int] = None,
    ) -> SearchOutcome:
        params = self.params
        if hint is not None and params.R != 1:
            params = params.model_copy(update={"R": 1})
        return gnns.search(self.graph, self.store, q, params, start=hint, meter=meter, rng=rng)
