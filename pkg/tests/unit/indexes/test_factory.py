"""Unit tests for IndexFactory."""

from types import SimpleNamespace

import numpy as np
import pytest

from graphvq.core.indexes import (
    GraphIndex,
    HkmTree,
    IndexFactory,
    KdForest,
    LinearIndex,
    NearestNeighborIndex,
    SequentialGraphIndex,
)
from graphvq.core.vectors import Rng
from graphvq.models.search_params import GnnsSpec, HkmSpec, KdSpec, LinearSpec, SgnnsSpec


@pytest.fixture
def vocab_like(small_store, small_graph):
    """Anything with words and a graph is enough for from_spec"""
    return SimpleNamespace(words=small_store, graph=small_graph)


@pytest.mark.unit
class TestIndexRegistration:
    """Test index registration in the factory."""

    def setup_method(self):
        """Save factory state before each test."""
        self.original_indexes = IndexFactory._indexes.copy()

    def teardown_method(self):
        """Restore factory state after each test."""
        IndexFactory._indexes = self.original_indexes

    def test_builtin_methods_registered(self):
        """Test all five search methods are available."""
        assert IndexFactory.list_indexes() == ["gnns", "hkm", "kd", "linear", "sgnns"]

    def test_register_index(self):
        """Test registering a new index class."""

        class EchoIndex(LinearIndex):
            name = "echo"

        IndexFactory.register_index("echo", EchoIndex)

        assert IndexFactory.is_index_available("echo")
        assert IndexFactory._indexes["echo"] is EchoIndex

    def test_register_duplicate_overwrites(self):
        """Test registering a name twice keeps the last class."""

        class First(LinearIndex):
            pass

        class Second(LinearIndex):
            pass

        IndexFactory.register_index("dup", First)
        IndexFactory.register_index("dup", Second)

        assert IndexFactory._indexes["dup"] is Second

    def test_register_rejects_non_index(self):
        """Test only NearestNeighborIndex subclasses can be registered."""

        class NotAnIndex:
            pass

        with pytest.raises(TypeError):
            IndexFactory.register_index("bad", NotAnIndex)

    def test_abstract_base_cannot_be_instantiated(self, small_store):
        """Test the base class requires search and from_spec."""
        with pytest.raises(TypeError):
            NearestNeighborIndex(small_store)


@pytest.mark.unit
class TestCreateIndex:
    """Test building indexes from method specs."""

    @pytest.mark.parametrize(
        "spec,expected",
        [
            (LinearSpec(), LinearIndex),
            (KdSpec(trees=2, checks=20), KdForest),
            (HkmSpec(branching=4, checks=20), HkmTree),
            (GnnsSpec(E=5), GraphIndex),
            (SgnnsSpec(E=5), SequentialGraphIndex),
        ],
    )
    def test_create_each_method(self, vocab_like, spec, expected):
        """Test each spec builds its index class."""
        index = IndexFactory.create_index(spec, vocab_like, seed=3)

        assert type(index) is expected
        assert index.size == 200
        assert index.seed == 3
        assert index.describe()["method"] == spec.method

    def test_unknown_method(self, vocab_like):
        """Test an unregistered method name fails with the available list."""
        spec = SimpleNamespace(method="flann")

        with pytest.raises(ValueError, match="Available methods"):
            IndexFactory.create_index(spec, vocab_like)

    def test_only_sequential_search_takes_hints(self, vocab_like):
        """Test the hint capability flag."""
        assert IndexFactory.create_index(SgnnsSpec(), vocab_like).supports_hints
        assert not IndexFactory.create_index(GnnsSpec(), vocab_like).supports_hints
        assert not IndexFactory.create_index(LinearSpec(), vocab_like).supports_hints


@pytest.mark.unit
@pytest.mark.slow
class TestMeterLaw:
    """Test per-query evaluation counts over 10k queries."""

    QUERIES = 10_000

    @pytest.mark.parametrize(
        "spec",
        [
            KdSpec(trees=4, checks=64),
            HkmSpec(branching=4, iterations=3, checks=32),
            GnnsSpec(E=10, R=8),
            SgnnsSpec(E=10, R=8),
        ],
    )
    def test_never_above_vocabulary_size(self, vocab_like, spec):
        """Test no method charges more than n evaluations to one query."""
        index = IndexFactory.create_index(spec, vocab_like, seed=1)
        gen = np.random.default_rng(51)
        queries = gen.normal(size=(self.QUERIES, 8))
        hints = gen.integers(0, 200, size=self.QUERIES).tolist()
        rng = Rng(2)

        evals = [
            index.search(q, rng=rng.child(i), hint=hints[i] if index.supports_hints else None)
            .dist_evals
            for i, q in enumerate(queries)
        ]

        assert max(evals) <= 200
        assert min(evals) >= 1

    def test_linear_charges_exactly_n(self, vocab_like):
        """Test the linear scan charges every word once per query."""
        index = IndexFactory.create_index(LinearSpec(), vocab_like)
        queries = np.random.default_rng(52).normal(size=(self.QUERIES, 8))

        assert {index.search(q).dist_evals for q in queries} == {200}
