"""Benchmark report models"""

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

REPORT_VERSION = 1


class Histogram(BaseModel):
    """Counts per bin; bin i covers [edges[i], edges[i+1])"""

    edges: List[int]
    counts: List[int]


class SubsetMetrics(BaseModel):
    """One method on one feature subset ("all" or "matched")"""

    queries: int
    accuracy: Optional[float] = Field(None, ge=0.0, le=1.0)
    mean_evals: Optional[float] = None
    speedup: Optional[float] = None
    evals_histogram: Optional[Histogram] = None
    hops_histogram: Optional[Histogram] = None
    hinted_queries: int = 0


class FrontierPoint(BaseModel):
    """One sweep grid point of one method on one subset"""

    method: str
    subset: str
    params: Dict[str, Any]
    accuracy: float
    speedup: float
    mean_evals: float


class MethodResult(BaseModel):
    method: str
    label: str
    params: Dict[str, Any]
    columns: Dict[str, SubsetMetrics]
    shared_word_fraction: Optional[float] = None


class ReportMetadata(BaseModel):
    report_version: int = REPORT_VERSION
    experiment_id: str
    experiment_name: str
    accuracy_averaged_over: str = "features"
    seeds: List[int]
    vocabulary_size: int
    graph_k: int
    dim: int
    num_frames: int
    num_features: int
    num_matched: int
    hint_source: str
    ratio: Optional[float] = None
    carry_noise_sigma: Optional[float] = None
    overlap: Optional[float] = None
    target_accuracy: Optional[float] = None


class BenchReport(BaseModel):
    """
    Result of run_experiment (and optionally sweep).

    Everything except `timing` is a deterministic function of the experiment
    config and seeds.
    """

    metadata: ReportMetadata
    methods: List[MethodResult]
    oracle_shared_word_fraction: Optional[float] = None
    matcher_distance_evals: int = 0
    frontier: List[FrontierPoint] = Field(default_factory=list)
    selected: List[FrontierPoint] = Field(
        default_factory=list, description="Frontier points nearest the target accuracy"
    )
    timing: Dict[str, float] = Field(default_factory=dict, description="Wall-clock seconds")

    def method(self, name: str) -> MethodResult:
        for result in self.methods:
            if result.method == name:
                return result
        raise KeyError(name)
