"""Pytest configuration and shared fixtures."""

import numpy as np
import pytest

from graphvq.core.knn_graph import build_brute_force
from graphvq.core.sequence import generate, synthetic_descriptors
from graphvq.core.vectors import VectorStore
from graphvq.core.vocabulary import build_vocabulary
from graphvq.models.build_config import KMeansConfig, SequenceConfig, TrainingSetConfig


def random_store(count: int, dim: int, seed: int = 0) -> VectorStore:
    """Gaussian vectors, deterministic per seed"""
    gen = np.random.default_rng(seed)
    return VectorStore(gen.normal(size=(count, dim)).astype(np.float32))


def line_store(count: int) -> VectorStore:
    """Points 0, 1, ..., count-1 on a line"""
    return VectorStore(np.arange(count, dtype=np.float32).reshape(count, 1))


@pytest.fixture
def small_store():
    """200 random 8-d vectors"""
    return random_store(200, 8, seed=1)


@pytest.fixture
def small_graph(small_store):
    """Exact 10-NN graph over small_store"""
    return build_brute_force(small_store, 10, threads=1)


@pytest.fixture
def line_graph():
    """(store, 2-NN graph) over the points 0..9 on a line"""
    store = line_store(10)
    return store, build_brute_force(store, 2, threads=1)


@pytest.fixture(scope="session")
def training_config():
    return TrainingSetConfig(count=2000, dim=16, clusters=8, intrinsic_dim=4, seed=3)


@pytest.fixture(scope="session")
def tiny_vocab(training_config):
    """100-word vocabulary with a 15-NN graph, built once per session"""
    train = synthetic_descriptors(training_config)
    return build_vocabulary(train, KMeansConfig(C=100, max_iters=10, seed=3), graph_k=15, threads=1)


@pytest.fixture(scope="session")
def tiny_sequence(tiny_vocab):
    """8 frames of about 40 features, half carried over without noise"""
    cfg = SequenceConfig(num_frames=8, features_per_frame=40, overlap=0.5, seed=5)
    return generate(cfg, tiny_vocab)


@pytest.fixture
def smoke_experiment():
    """Raw experiment mapping with an embedded vocabulary and sequence"""
    return {
        "id": "unit-smoke",
        "name": "Unit smoke",
        "synthetic_vocab": {
            "training": {"count": 1500, "dim": 12, "clusters": 6, "intrinsic_dim": 4, "seed": 1},
            "clusters": 60,
            "graph_k": 12,
            "max_iters": 8,
            "seed": 2,
        },
        "sequence": {
            "num_frames": 5,
            "features_per_frame": 30,
            "overlap": 0.5,
            "carry_noise_sigma": 0.01,
            "seed": 4,
        },
        "methods": [
            {"method": "linear"},
            {"method": "kd", "trees": 2, "checks": 30},
            {"method": "hkm", "branching": 4, "checks": 20},
            {"method": "gnns", "E": 6, "R": 2},
            {"method": "sgnns", "E": 6},
        ],
        "seeds": [0],
        "threads": 1,
    }
