"""
Base class for nearest neighbor search methods.

Every method that can quantize a feature against the vocabulary (linear scan,
KD forest, HKM tree, graph search) implements NearestNeighborIndex so the
benchmark harness, the CLI and the service can drive them interchangeably.
"""

from abc import ABC, abstractmethod
from typing import Any, Optional

from graphvq.core.outcomes import QuantizationResult, SearchOutcome
from graphvq.core.vectors import ArrayLike, DistanceMeter, Rng, VectorStore


class NearestNeighborIndex(ABC):
    """
    Abstract search index over a fixed vocabulary.

    Indexes are immutable once built and may be shared by concurrent queries;
    each query brings its own DistanceMeter and Rng.
    """

    name: str = "abstract"
    supports_hints: bool = False

    def __init__(self, store: VectorStore, seed: int = 0):
        self.store = store
        self.seed = seed

    @property
    def size(self) -> int:
        return self.store.count

    def new_meter(self) -> DistanceMeter:
        return DistanceMeter(self.store)

    @abstractmethod
    def search(
        self,
        q: ArrayLike,
        meter: Optional[DistanceMeter] = None,
        rng: Optional[Rng] = None,
        hint: Optional[int] = None,
    ) -> SearchOutcome:
        """
        Find the nearest vocabulary word(s) to q.

        Args:
            q: Query vector
            meter: Meter charged for this query (fresh when absent)
            rng: Random stream for this query (derived from the index seed when absent)
            hint: Word to start from; ignored by methods that cannot use one

        Returns:
            SearchOutcome whose dist_evals is the meter delta for this query
        """
        pass

    def quantize(
        self,
        q: ArrayLike,
        meter: Optional[DistanceMeter] = None,
        rng: Optional[Rng] = None,
        hint: Optional[int] = None,
    ) -> QuantizationResult:
        return QuantizationResult.from_outcome(self.search(q, meter=meter, rng=rng, hint=hint))

    @classmethod
    @abstractmethod
    def from_spec(cls, spec: Any, vocabulary: Any, seed: int) -> "NearestNeighborIndex":
        """Build the index for a method spec over a vocabulary"""
        pass

    def describe(self) -> dict:
        return {"method": self.name, "size": self.size}
