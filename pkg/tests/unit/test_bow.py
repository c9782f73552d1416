"""Tests for BoW vectors, idf weighting and the inverted index"""

import math

import numpy as np
import pytest

from graphvq.core.bow import (
    BowVector,
    DuplicateImageError,
    IdfModel,
    InvertedIndex,
    apply_idf,
    index_add,
    query,
    quantize_image,
)
from graphvq.core.errors import ContractViolationError, EmptyStoreError
from graphvq.core.indexes import GraphIndex, LinearIndex, SequentialGraphIndex
from graphvq.core.vectors import Rng


def _dense(v: BowVector, size: int) -> np.ndarray:
    out = np.zeros(size)
    out[v.ids] = v.weights
    return out


class _AddOnAcquire:
    """Lock wrapper that runs one action right after the first acquisition"""

    def __init__(self, lock, action):
        self.lock = lock
        self.action = action

    def __enter__(self):
        self.lock.__enter__()
        action, self.action = self.action, None
        if action is not None:
            action()
        return self

    def __exit__(self, *exc):
        return self.lock.__exit__(*exc)


@pytest.mark.unit
class TestBowVector:
    """Test sparse histograms"""

    def test_term_frequency(self):
        """Test counts are divided by the number of features"""
        v = BowVector.term_frequency([3, 1, 3, 3])

        assert v.items() == [(1, 0.25), (3, 0.75)]
        assert sum(w for _, w in v.items()) == pytest.approx(1.0)

    def test_empty(self):
        """Test no features give an empty vector"""
        v = BowVector.term_frequency([])

        assert len(v) == 0
        assert v.norm == 0.0

    def test_zero_weights_dropped(self):
        """Test zero weights are not stored"""
        v = BowVector([1, 2, 5], [0.5, 0.0, 0.5])

        assert v.ids.tolist() == [1, 5]
        assert v.weight(2) == 0.0
        assert v.weight(5) == 0.5

    def test_rejects_unsorted_ids(self):
        """Test ids must be strictly increasing"""
        with pytest.raises(ContractViolationError):
            BowVector([2, 1], [0.5, 0.5])
        with pytest.raises(ContractViolationError):
            BowVector([1, 1], [0.5, 0.5])

    def test_rejects_negative_weights(self):
        """Test weights must be non-negative"""
        with pytest.raises(ContractViolationError):
            BowVector([1], [-0.1])

    def test_from_pairs_sorts(self):
        """Test pairs may arrive in any order"""
        assert BowVector.from_pairs([(4, 1.0), (2, 2.0)]) == BowVector([2, 4], [2.0, 1.0])


@pytest.mark.unit
class TestIdf:
    """Test inverse document frequency"""

    def test_values(self):
        """Test idf = ln(N / df) and 0 for unseen words"""
        model = IdfModel(doc_count=4, doc_freq=np.array([4, 2, 0, 1]))

        assert model.values.tolist() == pytest.approx([0.0, math.log(2), 0.0, math.log(4)])
        assert model.idf(3) == pytest.approx(math.log(4))
        assert model.idf(2) == 0.0

    def test_apply_idf_drops_ubiquitous_words(self):
        """Test words present in every image vanish under tf-idf"""
        model = IdfModel(doc_count=2, doc_freq=np.array([2, 1]))
        v = apply_idf(BowVector([0, 1], [0.5, 0.5]), model)

        assert v.ids.tolist() == [1]
        assert v.weight(1) == pytest.approx(0.5 * math.log(2))


@pytest.mark.unit
class TestInvertedIndex:
    """Test posting lists and cosine ranking"""

    def _index(self, weighting="tfidf"):
        index = InvertedIndex(10, weighting=weighting)
        index.index_add(0, BowVector([0, 1], [0.5, 0.5]))
        index.index_add(1, BowVector([1, 2], [0.5, 0.5]))
        index.index_add(2, BowVector([2, 3], [0.5, 0.5]))
        return index

    def test_postings_sorted_by_image(self):
        """Test postings are kept in image-id order regardless of insertion"""
        index = InvertedIndex(5, weighting="tf")
        index.index_add(9, BowVector([1], [1.0]))
        index.index_add(2, BowVector([1], [1.0]))
        index.index_add(5, BowVector([1, 3], [0.5, 0.5]))

        assert [image for image, _ in index.postings(1)] == [2, 5, 9]
        assert index.doc_freq.tolist() == [0, 3, 0, 1, 0]

    def test_self_query_ranks_first(self):
        """Test an indexed image is its own best match with score 1"""
        index = self._index()
        ranked = index.query(BowVector([1, 2], [0.5, 0.5]))

        assert ranked[0][0] == 1
        assert ranked[0][1] == pytest.approx(1.0)
        assert all(score <= 1.0 for _, score in ranked)

    def test_disjoint_images_not_returned(self):
        """Test images sharing no word with the query are omitted"""
        index = self._index()
        ranked = index.query(BowVector([0], [1.0]))

        assert [image for image, _ in ranked] == [0]

    def test_ties_rank_lower_id_first(self):
        """Test equal scores are ordered by image id"""
        index = InvertedIndex(4, weighting="tf")
        index.index_add(7, BowVector([0], [1.0]))
        index.index_add(3, BowVector([0], [1.0]))

        assert [image for image, _ in index.query(BowVector([0], [1.0]))] == [3, 7]

    def test_top_n(self):
        """Test top_n truncates and top_n <= 0 returns nothing"""
        index = self._index(weighting="tf")
        query_vec = BowVector([1, 2], [0.5, 0.5])

        assert len(index.query(query_vec, top_n=1)) == 1
        assert index.query(query_vec, top_n=0) == []

    def test_empty_query_vector(self):
        """Test a query without words matches nothing"""
        assert self._index().query(BowVector()) == []

    def test_empty_index(self):
        """Test querying an empty index fails"""
        with pytest.raises(EmptyStoreError):
            InvertedIndex(3).query(BowVector([0], [1.0]))

    def test_emptiness_checked_under_lock(self):
        """Test an image added while the query waits for the lock is seen"""
        index = InvertedIndex(4, weighting="tf")
        index._lock = _AddOnAcquire(
            index._lock, lambda: index.index_add(0, BowVector([1], [1.0]))
        )

        assert index.query(BowVector([1], [1.0])) == [(0, pytest.approx(1.0))]

    def test_insertion_order_independent(self):
        """Test rankings do not depend on the order images were added"""
        gen = np.random.default_rng(3)
        docs = {i: BowVector.term_frequency(gen.integers(0, 20, size=6)) for i in range(25)}
        q = BowVector.term_frequency(gen.integers(0, 20, size=6))
        forward = InvertedIndex(20)
        backward = InvertedIndex(20)
        for image_id in range(25):
            forward.index_add(image_id, docs[image_id])
        for image_id in reversed(range(25)):
            backward.index_add(image_id, docs[image_id])

        assert forward.query(q, top_n=25) == backward.query(q, top_n=25)

    def test_duplicate_image(self):
        """Test an image id can be indexed once"""
        index = self._index()

        with pytest.raises(DuplicateImageError):
            index.index_add(1, BowVector([4], [1.0]))
        assert len(index) == 3

    def test_word_out_of_range(self):
        """Test word ids beyond the vocabulary are refused"""
        with pytest.raises(ContractViolationError):
            InvertedIndex(3).index_add(0, BowVector([3], [1.0]))

    def test_matches_dense_cosine(self):
        """Test tf-idf scores equal a dense cosine computation"""
        gen = np.random.default_rng(0)
        size = 50
        index = InvertedIndex(size, weighting="tfidf")
        docs = {}
        for image_id in range(30):
            words = gen.integers(0, size, size=gen.integers(1, 12))
            docs[image_id] = BowVector.term_frequency(words)
            index_add(index, image_id, docs[image_id])

        idf = index.idf_model().values
        matrix = np.stack([_dense(docs[i], size) * idf for i in range(30)])
        q = BowVector.term_frequency(gen.integers(0, size, size=8))
        qd = _dense(q, size) * idf
        dense = matrix @ qd / (np.linalg.norm(matrix, axis=1) * np.linalg.norm(qd) + 1e-300)

        ranked = dict(query(index, q, top_n=30))
        for image_id in range(30):
            if dense[image_id] > 1e-12:
                assert ranked[image_id] == pytest.approx(dense[image_id], rel=1e-9)
            else:
                assert image_id not in ranked

    def test_tf_weighting_ignores_idf(self):
        """Test tf mode scores by raw cosine"""
        index = InvertedIndex(4, weighting="tf")
        index.index_add(0, BowVector([0, 1], [0.5, 0.5]))
        index.index_add(1, BowVector([0], [1.0]))
        ranked = dict(index.query(BowVector([0], [1.0])))

        assert ranked[1] == pytest.approx(1.0)
        assert ranked[0] == pytest.approx(1.0 / math.sqrt(2))


@pytest.mark.unit
class TestIdfFreezing:
    """Test lazy and pinned idf models"""

    def test_idf_tracks_additions(self):
        """Test the model is recomputed after each addition"""
        index = InvertedIndex(3)
        index.index_add(0, BowVector([0], [1.0]))
        first = index.idf_model()
        index.index_add(1, BowVector([1], [1.0]))

        assert first.doc_count == 1
        assert index.idf_model().doc_count == 2

    def test_frozen_model_is_kept(self):
        """Test additions after freeze_idf keep the pinned model"""
        index = InvertedIndex(3)
        index.index_add(0, BowVector([0], [1.0]))
        index.index_add(1, BowVector([1], [1.0]))
        pinned = index.freeze_idf()
        index.index_add(2, BowVector([0, 2], [0.5, 0.5]))

        assert index.idf_frozen
        assert index.idf_model() is pinned
        index.thaw_idf()
        assert index.idf_model().doc_count == 3

    def test_weighted(self):
        """Test weighted() applies the current idf"""
        index = InvertedIndex(3)
        index.index_add(0, BowVector([0], [1.0]))
        index.index_add(1, BowVector([1], [1.0]))

        assert index.weighted(BowVector([0], [1.0])).weight(0) == pytest.approx(math.log(2))
        assert InvertedIndex(3, weighting="tf").weighted(BowVector([0], [1.0])).weight(0) == 1.0


@pytest.mark.unit
class TestQuantizeImage:
    """Test per-image quantization"""

    def test_linear_words_and_cost(self, small_store):
        """Test every feature is charged n evaluations under linear scan"""
        index = LinearIndex(small_store)
        tf, results = quantize_image(index, small_store.data[:5])

        assert [r.word_id for r in results] == [0, 1, 2, 3, 4]
        assert sum(r.dist_evals for r in results) == 5 * small_store.count
        assert tf.items() == [(i, 0.2) for i in range(5)]

    def test_tf_weights_sum_to_one(self, small_store, small_graph):
        """Test the tf histogram of any image sums to 1"""
        index = GraphIndex(small_store, small_graph, E=4)
        feats = np.random.default_rng(2).normal(size=(37, 8))
        tf, _ = quantize_image(index, feats, rng=Rng(1))

        assert sum(w for _, w in tf.items()) == pytest.approx(1.0, abs=1e-12)

    def test_empty_image(self, small_store):
        """Test an image without features quantizes to an empty vector"""
        tf, results = quantize_image(LinearIndex(small_store), np.zeros((0, 8)))

        assert len(tf) == 0
        assert results == []

    def test_hint_count_must_match(self, small_store, small_graph):
        """Test hints must pair up with features"""
        index = SequentialGraphIndex(small_store, small_graph)

        with pytest.raises(ContractViolationError):
            quantize_image(index, small_store.data[:3], hints=[1, 2])

    def test_hints_use_warm_start(self, small_store, small_graph):
        """Test hinted features start at their hinted word"""
        index = SequentialGraphIndex(small_store, small_graph)
        _, results = quantize_image(index, small_store.data[:3], hints=[0, 1, None])

        assert [r.hops for r in results[:2]] == [0, 0]
        assert [r.word_id for r in results[:2]] == [0, 1]
        assert [r.dist_evals for r in results[:2]] == [11, 11]

    def test_deterministic_per_rng(self, small_store, small_graph):
        """Test the same stream reproduces the same words and costs"""
        index = GraphIndex(small_store, small_graph, E=4, R=2)
        feats = np.random.default_rng(1).normal(size=(10, 8))

        assert quantize_image(index, feats, rng=Rng(5)) == quantize_image(index, feats, rng=Rng(5))
