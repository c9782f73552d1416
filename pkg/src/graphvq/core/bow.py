"""
Bag-of-words image representation and inverted-index retrieval.

An image's features are quantized to visual words and summarized as a sparse
term-frequency histogram (counts divided by the number of features). The
inverted index maps every word to the images containing it, so a query only
touches the postings of its own words; images are ranked by cosine similarity
of their tf or tf-idf vectors.
"""

import bisect
import logging
import math
import threading
from dataclasses import dataclass
from typing import Dict, Iterable, List, Literal, Optional, Sequence, Tuple

import numpy as np

from graphvq.core.errors import ContractViolationError, EmptyStoreError, GraphVQError
from graphvq.core.outcomes import QuantizationResult
from graphvq.core.vectors import ArrayLike, Rng

logger = logging.getLogger(__name__)

Weighting = Literal["tf", "tfidf"]


class DuplicateImageError(GraphVQError, ValueError):
    """Raised when an image id is added to an inverted index twice"""

    pass


class BowVector:
    """
    Sparse weighted visual-word histogram.

    Word ids are strictly increasing and every stored weight is positive;
    zero weights are dropped on construction.
    """

    __slots__ = ("ids", "weights", "norm")

    def __init__(self, ids: Sequence[int] = (), weights: Sequence[float] = ()):
        ids_arr = np.asarray(ids, dtype=np.int64).reshape(-1)
        w_arr = np.asarray(weights, dtype=np.float64).reshape(-1)
        if ids_arr.shape != w_arr.shape:
            raise ContractViolationError(
                f"{ids_arr.size} word ids but {w_arr.size} weights in BoW vector"
            )
        if np.any(w_arr < 0):
            raise ContractViolationError("BoW weights must be non-negative")
        if ids_arr.size > 1 and np.any(np.diff(ids_arr) <= 0):
            raise ContractViolationError("BoW word ids must be strictly increasing")

        keep = w_arr > 0
        self.ids = ids_arr[keep]
        self.weights = w_arr[keep]
        self.ids.setflags(write=False)
        self.weights.setflags(write=False)
        self.norm = float(np.sqrt(np.square(self.weights).sum()))

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[int, float]]) -> "BowVector":
        pairs = sorted(pairs)
        return cls([p[0] for p in pairs], [p[1] for p in pairs])

    @classmethod
    def term_frequency(cls, word_ids: Sequence[int]) -> "BowVector":
        """Histogram of word occurrences divided by the number of features"""
        word_ids = np.asarray(word_ids, dtype=np.int64)
        if word_ids.size == 0:
            return cls()
        ids, counts = np.unique(word_ids, return_counts=True)
        return cls(ids, counts / word_ids.size)

    def __len__(self) -> int:
        return int(self.ids.size)

    def items(self) -> List[Tuple[int, float]]:
        return list(zip(self.ids.tolist(), self.weights.tolist()))

    def weight(self, word_id: int) -> float:
        pos = np.searchsorted(self.ids, word_id)
        if pos < self.ids.size and self.ids[pos] == word_id:
            return float(self.weights[pos])
        return 0.0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BowVector):
            return NotImplemented
        return np.array_equal(self.ids, other.ids) and np.array_equal(self.weights, other.weights)

    def __repr__(self) -> str:
        return f"BowVector(words={len(self)}, norm={self.norm:.6g})"


@dataclass(frozen=True)
class IdfModel:
    """idf_w = ln(doc_count / doc_freq_w), 0 for unseen words or an empty index"""

    doc_count: int
    doc_freq: np.ndarray

    @property
    def values(self) -> np.ndarray:
        df = self.doc_freq.astype(np.float64)
        idf = np.zeros_like(df)
        if self.doc_count > 0:
            seen = df > 0
            idf[seen] = np.log(self.doc_count / df[seen])
        return idf

    def idf(self, word_id: int) -> float:
        df = int(self.doc_freq[word_id]) if word_id < self.doc_freq.size else 0
        if df == 0 or self.doc_count == 0:
            return 0.0
        return math.log(self.doc_count / df)


def apply_idf(v: BowVector, idf: IdfModel) -> BowVector:
    """Scale tf weights by idf; words with idf 0 drop out"""
    if len(v) == 0:
        return v
    values = idf.values
    in_range = v.ids < values.size
    factors = np.zeros(len(v), dtype=np.float64)
    factors[in_range] = values[v.ids[in_range]]
    return BowVector(v.ids, v.weights * factors)


def quantize_image(
    quantizer,
    features: ArrayLike,
    hints: Optional[Sequence[Optional[int]]] = None,
    rng: Optional[Rng] = None,
) -> Tuple[BowVector, List[QuantizationResult]]:
    """
    Quantize one image's features and build its tf vector.

    Args:
        quantizer: NearestNeighborIndex over the vocabulary
        features: (m, d) feature matrix; m may be 0
        hints: Optional per-feature start word (used by methods that support hints)
        rng: Per-image random stream; feature i uses rng.child(i)

    Returns:
        (tf BowVector, per-feature QuantizationResult)
    """
    feats = np.asarray(features, dtype=np.float64)
    if feats.size == 0:
        return BowVector(), []
    feats = np.atleast_2d(feats)
    if hints is not None and len(hints) != feats.shape[0]:
        raise ContractViolationError(
            f"{len(hints)} hints for {feats.shape[0]} features"
        )
    if rng is None:
        rng = Rng(quantizer.seed)

    meter = quantizer.new_meter()
    results = []
    for i, feature in enumerate(feats):
        hint = hints[i] if hints is not None else None
        results.append(quantizer.quantize(feature, meter=meter, rng=rng.child(i), hint=hint))

    return BowVector.term_frequency([r.word_id for r in results]), results


class InvertedIndex:
    """
    Word-to-image postings over tf vectors, ranked by cosine similarity.

    With weighting="tfidf" the idf model is recomputed lazily after images were
    added; freeze_idf() pins the current model until thaw_idf(). Mutation
    (index_add, freeze/thaw) is exclusive; queries may run concurrently between
    mutations.
    """

    def __init__(self, num_words: int, weighting: Weighting = "tfidf"):
        if num_words < 1:
            raise ContractViolationError("Inverted index needs at least one word")
        if weighting not in ("tf", "tfidf"):
            raise ContractViolationError(f"Unknown weighting: {weighting}")
        self.num_words = num_words
        self.weighting = weighting

        self._postings: Dict[int, Tuple[List[int], List[float]]] = {}
        self._docs: Dict[int, BowVector] = {}
        self._doc_freq = np.zeros(num_words, dtype=np.int64)
        self._lock = threading.RLock()

        self._idf: Optional[IdfModel] = None
        self._doc_norms: Dict[int, float] = {}
        self._frozen = False

    @property
    def doc_count(self) -> int:
        return len(self._docs)

    @property
    def doc_freq(self) -> np.ndarray:
        return self._doc_freq.copy()

    def __len__(self) -> int:
        return self.doc_count

    def __contains__(self, image_id: int) -> bool:
        return image_id in self._docs

    def postings(self, word_id: int) -> List[Tuple[int, float]]:
        images, weights = self._postings.get(word_id, ([], []))
        return list(zip(images, weights))

    def index_add(self, image_id: int, v: BowVector) -> None:
        """
        Add an image's tf vector.

        Raises:
            DuplicateImageError: image id already indexed
            ContractViolationError: word id outside the vocabulary
        """
        image_id = int(image_id)
        if len(v) and (v.ids[0] < 0 or v.ids[-1] >= self.num_words):
            raise ContractViolationError(
                f"Word ids must be in [0, {self.num_words}), got {v.ids[0]}..{v.ids[-1]}"
            )
        with self._lock:
            if image_id in self._docs:
                raise DuplicateImageError(f"Image {image_id} is already indexed")
            self._docs[image_id] = v
            for word_id, weight in v.items():
                images, weights = self._postings.setdefault(word_id, ([], []))
                pos = bisect.bisect_left(images, image_id)
                images.insert(pos, image_id)
                weights.insert(pos, weight)
            self._doc_freq[v.ids] += 1
            if not self._frozen:
                self._idf = None
        logger.debug(f"Indexed image {image_id} with {len(v)} words")

    def freeze_idf(self) -> IdfModel:
        """Pin the current idf model; later additions keep using it"""
        with self._lock:
            model = self._current_idf()
            self._frozen = True
            return model

    def thaw_idf(self) -> None:
        with self._lock:
            self._frozen = False
            self._idf = None

    @property
    def idf_frozen(self) -> bool:
        return self._frozen

    def idf_model(self) -> IdfModel:
        with self._lock:
            return self._current_idf()

    def _current_idf(self) -> IdfModel:
        if self._idf is None:
            self._idf = IdfModel(doc_count=self.doc_count, doc_freq=self._doc_freq.copy())
            self._doc_norms = {}
            logger.debug(f"Recomputed idf over {self.doc_count} images")
        return self._idf

    def _word_factors(self) -> Optional[np.ndarray]:
        if self.weighting == "tf":
            return None
        return self._current_idf().values

    def _doc_norm(self, image_id: int, factors: Optional[np.ndarray]) -> float:
        norm = self._doc_norms.get(image_id)
        if norm is None:
            v = self._docs[image_id]
            if factors is None:
                norm = v.norm
            else:
                norm = float(np.sqrt(np.square(v.weights * factors[v.ids]).sum()))
            self._doc_norms[image_id] = norm
        return norm

    def weighted(self, v: BowVector) -> BowVector:
        """v under the index's weighting (tf as is, or tf-idf with the current model)"""
        if self.weighting == "tf":
            return v
        with self._lock:
            return apply_idf(v, self._current_idf())

    def query(self, v: BowVector, top_n: int = 10) -> List[Tuple[int, float]]:
        """
        Rank indexed images by cosine similarity to the tf vector v.

        Only postings of v's words are read. Images with score 0 are left out;
        equal scores rank the lower image id first.

        Raises:
            EmptyStoreError: nothing indexed
        """
        with self._lock:
            if self.doc_count == 0:
                raise EmptyStoreError("Cannot query an empty inverted index")
            if top_n <= 0:
                return []

            factors = self._word_factors()
            q_weights = v.weights
            if factors is not None:
                q_weights = v.weights * self._factor_at(factors, v.ids)
            q_norm = float(np.sqrt(np.square(q_weights).sum()))
            if q_norm == 0.0:
                return []

            dots: Dict[int, float] = {}
            for word_id, q_w in zip(v.ids.tolist(), q_weights.tolist()):
                if q_w == 0.0 or word_id not in self._postings:
                    continue
                factor = 1.0 if factors is None else float(factors[word_id])
                images, weights = self._postings[word_id]
                for image_id, d_w in zip(images, weights):
                    dots[image_id] = dots.get(image_id, 0.0) + q_w * d_w * factor

            scored = []
            for image_id, dot in dots.items():
                if dot <= 0.0:
                    continue
                score = min(dot / (q_norm * self._doc_norm(image_id, factors)), 1.0)
                scored.append((image_id, score))

        scored.sort(key=lambda item: (-item[1], item[0]))
        return scored[:top_n]

    def _factor_at(self, factors: np.ndarray, ids: np.ndarray) -> np.ndarray:
        out = np.zeros(ids.size, dtype=np.float64)
        in_range = ids < factors.size
        out[in_range] = factors[ids[in_range]]
        return out


def index_add(index: InvertedIndex, image_id: int, v: BowVector) -> None:
    index.index_add(image_id, v)


def query(index: InvertedIndex, v: BowVector, top_n: int = 10) -> List[Tuple[int, float]]:
    return index.query(v, top_n)
