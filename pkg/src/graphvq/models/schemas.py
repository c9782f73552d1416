"""Pydantic models for API requests and responses"""

from typing import List, Optional, Tuple

from pydantic import BaseModel, Field

from graphvq.models.search_params import GnnsSpec, MethodSpec


class FeatureBatch(BaseModel):
    """Features of one image; every row must match the vocabulary dimension"""

    features: List[List[float]] = Field(..., description="Feature vectors, one per row")
    method: MethodSpec = Field(default_factory=GnnsSpec, description="Search method")
    seed: Optional[int] = Field(None, ge=0, lt=2**64)


class QuantizeRequest(FeatureBatch):
    hints: Optional[List[Optional[int]]] = Field(
        None, description="Start word per feature (sequential graph search only)"
    )


class QuantizedFeature(BaseModel):
    word_id: int
    distance: float
    dist_evals: int
    hops: int


class QuantizeResponse(BaseModel):
    features: List[QuantizedFeature]
    words: List[Tuple[int, float]] = Field(..., description="tf histogram (word id, weight)")
    evals_total: int
    evals_per_feature: float


class AddImageRequest(FeatureBatch):
    image_id: int = Field(..., ge=0)


class AddImageResponse(BaseModel):
    image_id: int
    distinct_words: int
    evals_total: int
    indexed_images: int


class QueryRequest(FeatureBatch):
    top_n: int = Field(default=10, ge=0)


class ScoredImage(BaseModel):
    image_id: int
    score: float


class QueryResponse(BaseModel):
    results: List[ScoredImage]
    evals_total: int


class HealthResponse(BaseModel):
    status: str
    vocabulary_loaded: bool
    vocabulary_size: Optional[int] = None
    graph_k: Optional[int] = None
    indexed_images: int = 0
