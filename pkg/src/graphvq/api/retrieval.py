"""Place-recognition endpoints: quantize features, index images, query the index"""

import logging
import threading
from typing import Dict, List, Optional, Tuple

import numpy as np
from fastapi import APIRouter, Depends, HTTPException

from graphvq.core.bow import BowVector, DuplicateImageError, InvertedIndex, quantize_image
from graphvq.core.errors import EmptyStoreError, GraphVQError
from graphvq.core.indexes import IndexFactory, NearestNeighborIndex
from graphvq.core.outcomes import QuantizationResult
from graphvq.core.vectors import Rng
from graphvq.core.vocabulary import Vocabulary
from graphvq.models.schemas import (
    AddImageRequest,
    AddImageResponse,
    FeatureBatch,
    QuantizedFeature,
    QuantizeRequest,
    QuantizeResponse,
    QueryRequest,
    QueryResponse,
    ScoredImage,
)
from graphvq.models.search_params import MethodSpec

router = APIRouter()
logger = logging.getLogger(__name__)


class RetrievalService:
    """
    Vocabulary, search indexes built on demand, and one inverted index.

    Indexes are cached per method spec; building one is serialized, searching
    is not.
    """

    def __init__(self, vocabulary: Vocabulary, seed: int = 0):
        self.vocabulary = vocabulary
        self.seed = seed
        self.inverted = InvertedIndex(vocabulary.size, weighting="tfidf")
        self._indexes: Dict[str, NearestNeighborIndex] = {}
        self._lock = threading.Lock()

    def index_for(self, spec: MethodSpec) -> NearestNeighborIndex:
        key = spec.model_dump_json()
        with self._lock:
            if key not in self._indexes:
                logger.info(f"Building {spec.method} index for the service")
                self._indexes[key] = IndexFactory.create_index(spec, self.vocabulary, seed=self.seed)
            return self._indexes[key]

    def quantize(
        self, batch: FeatureBatch, hints: Optional[List[Optional[int]]] = None
    ) -> Tuple[BowVector, List[QuantizationResult]]:
        features = np.asarray(batch.features, dtype=np.float64)
        if features.size and (features.ndim != 2 or features.shape[1] != self.vocabulary.words.dim):
            raise GraphVQError(
                f"Features must be rows of dimension {self.vocabulary.words.dim}"
            )
        index = self.index_for(batch.method)
        rng = Rng(batch.seed if batch.seed is not None else self.seed)
        return quantize_image(index, features, hints=hints, rng=rng)


# Set by the application lifespan; None until a vocabulary is loaded
_service: Optional[RetrievalService] = None


def set_service(service: Optional[RetrievalService]) -> None:
    global _service
    _service = service


def current_service() -> Optional[RetrievalService]:
    return _service


def get_service() -> RetrievalService:
    if _service is None:
        raise HTTPException(status_code=503, detail="No vocabulary loaded (set GVQ_VOCAB_PATH)")
    return _service


@router.post("/quantize", response_model=QuantizeResponse)
def quantize(request: QuantizeRequest, service: RetrievalService = Depends(get_service)):
    """Quantize one image's features to visual words"""
    if request.hints is not None and len(request.hints) != len(request.features):
        raise HTTPException(status_code=400, detail="hints must match features in length")
    try:
        tf, results = service.quantize(request, hints=request.hints)
    except (GraphVQError, ValueError) as e:
        raise HTTPException(status_code=400, detail=str(e))

    evals = sum(r.dist_evals for r in results)
    return QuantizeResponse(
        features=[
            QuantizedFeature(
                word_id=r.word_id, distance=r.distance, dist_evals=r.dist_evals, hops=r.hops
            )
            for r in results
        ],
        words=tf.items(),
        evals_total=evals,
        evals_per_feature=evals / len(results) if results else 0.0,
    )


@router.post("/images", response_model=AddImageResponse)
def add_image(request: AddImageRequest, service: RetrievalService = Depends(get_service)):
    """Quantize an image and add its tf vector to the inverted index"""
    try:
        tf, results = service.quantize(request)
        service.inverted.index_add(request.image_id, tf)
    except DuplicateImageError as e:
        raise HTTPException(status_code=409, detail=str(e))
    except (GraphVQError, ValueError) as e:
        raise HTTPException(status_code=400, detail=str(e))

    return AddImageResponse(
        image_id=request.image_id,
        distinct_words=len(tf),
        evals_total=sum(r.dist_evals for r in results),
        indexed_images=len(service.inverted),
    )


@router.post("/query", response_model=QueryResponse)
def query(request: QueryRequest, service: RetrievalService = Depends(get_service)):
    """Rank indexed images by cosine similarity to the query image"""
    try:
        tf, results = service.quantize(request)
        ranked = service.inverted.query(tf, top_n=request.top_n)
    except EmptyStoreError as e:
        raise HTTPException(status_code=404, detail=str(e))
    except (GraphVQError, ValueError) as e:
        raise HTTPException(status_code=400, detail=str(e))

    return QueryResponse(
        results=[ScoredImage(image_id=i, score=s) for i, s in ranked],
        evals_total=sum(r.dist_evals for r in results),
    )
