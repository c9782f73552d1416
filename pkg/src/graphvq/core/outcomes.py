"""Per-query search results shared by every search method"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple


@dataclass
class SearchOutcome:
    """
    Result of one nearest neighbor query.

    Attributes:
        results: (word id, distance) pairs sorted by distance, then id
        dist_evals: distance evaluations charged to this query
        hops: greedy moves made (graph search only)
        start_id: node the first walk started from (graph search only)
    """

    results: List[Tuple[int, float]] = field(default_factory=list)
    dist_evals: int = 0
    hops: int = 0
    start_id: Optional[int] = None

    @property
    def nearest_id(self) -> int:
        return self.results[0][0]

    @property
    def nearest_distance(self) -> float:
        return self.results[0][1]


@dataclass(frozen=True)
class QuantizationResult:
    """Assignment of one feature to one visual word"""

    word_id: int
    distance: float
    dist_evals: int
    hops: int = 0

    @classmethod
    def from_outcome(cls, outcome: SearchOutcome) -> "QuantizationResult":
        word_id, dist = outcome.results[0]
        return cls(word_id=word_id, distance=dist, dist_evals=outcome.dist_evals, hops=outcome.hops)
