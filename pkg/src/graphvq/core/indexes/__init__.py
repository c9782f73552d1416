"""
Search methods for vector quantization.

Every method implements NearestNeighborIndex and is registered with the
IndexFactory under the name experiment configs use.
"""

from .base import NearestNeighborIndex
from .factory import IndexFactory
from .linear import LinearIndex, exact_nearest, linear_nn
from .kd_forest import KdForest, kd_build, kd_search
from .hkm_tree import HkmTree, hkm_build, hkm_search
from .graph import GraphIndex, SequentialGraphIndex

# Register methods
IndexFactory.register_index("linear", LinearIndex)
IndexFactory.register_index("kd", KdForest)
IndexFactory.register_index("hkm", HkmTree)
IndexFactory.register_index("gnns", GraphIndex)
IndexFactory.register_index("sgnns", SequentialGraphIndex)

__all__ = [
    "NearestNeighborIndex",
    "IndexFactory",
    "LinearIndex",
    "KdForest",
    "HkmTree",
    "GraphIndex",
    "SequentialGraphIndex",
    "exact_nearest",
    "linear_nn",
    "kd_build",
    "kd_search",
    "hkm_build",
    "hkm_search",
]
