"""Tests for the graph search indexes"""

import numpy as np
import pytest

from graphvq.core import gnns
from graphvq.core.errors import ParameterError
from graphvq.core.indexes import GraphIndex, SequentialGraphIndex
from graphvq.core.vectors import Rng
from graphvq.models.search_params import GnnsParams


@pytest.mark.unit
class TestGraphIndex:
    """Test GNNS behind the index interface"""

    def test_defaults_to_graph_degree(self, small_store, small_graph):
        """Test E defaults to the stored graph's k"""
        index = GraphIndex(small_store, small_graph)

        assert index.params.E == 10
        assert index.graph.k == 10
        assert index.params.K == 1

    def test_truncated_view(self, small_store, small_graph):
        """Test a smaller E searches the first E neighbors only"""
        index = GraphIndex(small_store, small_graph, E=3)

        assert index.graph.neighbors.shape == (200, 3)

    def test_e_above_degree(self, small_store, small_graph):
        """Test E > k is refused at construction"""
        with pytest.raises(ParameterError):
            GraphIndex(small_store, small_graph, E=11)

    def test_matches_plain_search(self, small_store, small_graph):
        """Test the index returns what gnns.search returns"""
        index = GraphIndex(small_store, small_graph, E=4, R=3, seed=2)
        q = np.full(8, -0.2)
        expected = gnns.search(small_graph, small_store, q, GnnsParams(E=4, R=3, seed=2))

        assert index.search(q) == expected

    def test_hint_is_ignored(self, small_store, small_graph):
        """Test plain GNNS does not use hints"""
        index = GraphIndex(small_store, small_graph, E=4, R=2)
        q = np.full(8, 0.4)

        assert index.search(q, rng=Rng(1), hint=17) == index.search(q, rng=Rng(1))

    def test_describe(self, small_store, small_graph):
        """Test describe reports the walk parameters"""
        info = GraphIndex(small_store, small_graph, E=4, R=2, T=5).describe()

        assert info == {"method": "gnns", "size": 200, "E": 4, "R": 2, "T": 5}


@pytest.mark.unit
class TestSequentialGraphIndex:
    """Test the warm-started graph search"""

    def test_hint_sets_start(self, small_store, small_graph):
        """Test a hinted search starts at the hinted word with one walk"""
        index = SequentialGraphIndex(small_store, small_graph, R=8)
        outcome = index.search(small_store.data[30], hint=30)

        assert outcome.start_id == 30
        assert outcome.nearest_id == 30
        assert outcome.hops == 0
        assert outcome.dist_evals == 1 + 10

    def test_unhinted_equals_gnns(self, small_store, small_graph):
        """Test without a hint the result is bitwise identical to GNNS"""
        plain = GraphIndex(small_store, small_graph, E=5, R=2, seed=4)
        warm = SequentialGraphIndex(small_store, small_graph, E=5, R=2, seed=4)
        queries = np.random.default_rng(3).normal(size=(20, 8))

        for i, q in enumerate(queries):
            assert warm.search(q, rng=Rng(4).child(i)) == plain.search(q, rng=Rng(4).child(i))

    def test_hint_beats_random_start(self, small_store, small_graph):
        """Test starting at the true word costs less than a random start on average"""
        index = SequentialGraphIndex(small_store, small_graph, E=10, R=1)
        gen = np.random.default_rng(16)
        targets = gen.integers(0, 200, size=100)
        noise = 0.01 * gen.normal(size=(100, 8))
        hinted = cold = 0
        for i, (t, n) in enumerate(zip(targets, noise)):
            q = small_store.data64[t] + n
            hinted += index.search(q, rng=Rng(i), hint=int(t)).dist_evals
            cold += index.search(q, rng=Rng(i)).dist_evals

        assert hinted < cold
