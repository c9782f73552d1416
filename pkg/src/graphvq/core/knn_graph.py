"""
Directed k-NN graph over vocabulary words.

Node i links to its k nearest other nodes, sorted by ascending distance with
ties broken by lower id. The graph is built once, exactly, by brute force;
searches that only want the first E neighbors use a truncated view instead of
a rebuilt graph.
"""

import logging
import struct
from pathlib import Path
from typing import BinaryIO, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial.distance import cdist

from graphvq.core.errors import EmptyStoreError, FormatError, ParameterError
from graphvq.core.parallel import ordered_map
from graphvq.core.vectors import VectorStore

logger = logging.getLogger(__name__)

GRAPH_MAGIC = b"GKG1"
_GRAPH_HEADER = struct.Struct("<4sIQ")  # magic, k, n
_ROW_DTYPE = np.dtype([("id", "<u4"), ("dist", "<f4")])

DEFAULT_BLOCK_SIZE = 256


class KnnGraph:
    """Exact k-NN graph: `neighbors[i]` are the k nearest nodes to i, nearest first"""

    def __init__(self, neighbors: np.ndarray, neighbor_dists: np.ndarray):
        neighbors = np.asarray(neighbors, dtype=np.int64)
        neighbor_dists = np.asarray(neighbor_dists, dtype=np.float32)
        if neighbors.ndim != 2 or neighbors.shape != neighbor_dists.shape:
            raise ParameterError(
                f"Neighbor ids {neighbors.shape} and distances {neighbor_dists.shape} must be "
                "matching n x k arrays"
            )
        if neighbors.shape[1] < 1:
            raise ParameterError("Graph degree k must be positive")

        self._neighbors = np.ascontiguousarray(neighbors)
        self._neighbors.setflags(write=False)
        self._dists = np.ascontiguousarray(neighbor_dists)
        self._dists.setflags(write=False)

    @property
    def k(self) -> int:
        return int(self._neighbors.shape[1])

    @property
    def n(self) -> int:
        return int(self._neighbors.shape[0])

    @property
    def neighbors(self) -> np.ndarray:
        return self._neighbors

    @property
    def neighbor_dists(self) -> np.ndarray:
        return self._dists

    def neighbors_of(self, node: int) -> np.ndarray:
        return self._neighbors[node]

    def truncate(self, e: int) -> "GraphView":
        return GraphView(self, e)

    def audit(self) -> None:
        """
        Check the structural invariants: no self-loops, k distinct in-range ids
        per row, non-decreasing distances.

        Raises:
            FormatError: on the first violated invariant
        """
        rows = np.arange(self.n)[:, None]
        if np.any(self._neighbors == rows):
            raise FormatError("Graph contains a self-loop")
        if self.n and (self._neighbors.min() < 0 or self._neighbors.max() >= self.n):
            raise FormatError("Graph neighbor id out of range")
        sorted_ids = np.sort(self._neighbors, axis=1)
        if np.any(sorted_ids[:, 1:] == sorted_ids[:, :-1]):
            raise FormatError("Graph neighbor list contains duplicates")
        if np.any(np.diff(self._dists, axis=1) < 0):
            raise FormatError("Graph neighbor distances are not sorted")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KnnGraph):
            return NotImplemented
        return np.array_equal(self._neighbors, other._neighbors) and np.array_equal(
            self._dists, other._dists
        )

    def __repr__(self) -> str:
        return f"KnnGraph(n={self.n}, k={self.k})"

    # Binary container: magic "GKG1", u32 k, u64 n, then n rows of k x (u32 id, f32 dist)

    def write_to(self, fh: BinaryIO) -> None:
        fh.write(_GRAPH_HEADER.pack(GRAPH_MAGIC, self.k, self.n))
        rows = np.empty(self._neighbors.shape, dtype=_ROW_DTYPE)
        rows["id"] = self._neighbors
        rows["dist"] = self._dists
        fh.write(rows.tobytes(order="C"))

    @classmethod
    def read_from(cls, fh: BinaryIO) -> "KnnGraph":
        header = fh.read(_GRAPH_HEADER.size)
        if len(header) != _GRAPH_HEADER.size:
            raise FormatError("Truncated graph header")
        magic, k, n = _GRAPH_HEADER.unpack(header)
        if magic[:3] != GRAPH_MAGIC[:3]:
            raise FormatError(f"Bad graph magic {magic!r}")
        if magic != GRAPH_MAGIC:
            raise FormatError(f"Unsupported graph format version {magic[3:]!r}")
        if k < 1:
            raise FormatError("Graph degree must be positive")

        nbytes = n * k * _ROW_DTYPE.itemsize
        payload = fh.read(nbytes)
        if len(payload) != nbytes:
            raise FormatError(f"Truncated graph payload: expected {nbytes} bytes, got {len(payload)}")
        rows = np.frombuffer(payload, dtype=_ROW_DTYPE).reshape(n, k)
        ids = rows["id"].astype(np.int64)
        if n and ids.max() >= n:
            raise FormatError("Graph neighbor id out of range")
        return cls(ids, rows["dist"].astype(np.float32))

    def save(self, path: Union[str, Path]) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as fh:
            self.write_to(fh)
        logger.info(f"Saved {self.k}-NN graph over {self.n} nodes to {path}")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "KnnGraph":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Graph file not found: {path}")
        with open(path, "rb") as fh:
            graph = cls.read_from(fh)
            if fh.read(1):
                raise FormatError(f"Trailing bytes after graph block in {path}")
        return graph


class GraphView:
    """First-e-neighbors view of a KnnGraph; shares the graph's arrays"""

    def __init__(self, graph: KnnGraph, e: int):
        if not 1 <= e <= graph.k:
            raise ParameterError(f"Expansion count e={e} must be in [1, {graph.k}]")
        self.graph = graph
        self.e = e
        self._neighbors = graph.neighbors[:, :e]
        self._dists = graph.neighbor_dists[:, :e]

    @property
    def k(self) -> int:
        return self.e

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def neighbors(self) -> np.ndarray:
        return self._neighbors

    @property
    def neighbor_dists(self) -> np.ndarray:
        return self._dists

    def neighbors_of(self, node: int) -> np.ndarray:
        return self._neighbors[node]


def truncate(graph: KnnGraph, e: int) -> GraphView:
    """View exposing only the first e neighbors of every node"""
    return GraphView(graph, e)


def pairwise_rows(store: VectorStore, row_ids: Sequence[int]) -> np.ndarray:
    """Exact Euclidean distances from the given rows to every stored vector"""
    return cdist(store.data64[np.asarray(row_ids, dtype=np.int64)], store.data64, "euclidean")


def nearest_rows(
    dists: np.ndarray, row_ids: Sequence[int], k: int
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Pick the k nearest columns of each distance row, excluding the row's own id.

    A stable sort keeps equal distances in column order, so ties go to the
    lower id.
    """
    row_ids = np.asarray(row_ids, dtype=np.int64)
    masked = np.array(dists, dtype=np.float64, copy=True)
    masked[np.arange(row_ids.size), row_ids] = np.inf
    order = np.argsort(masked, axis=1, kind="stable")[:, :k]
    return order, np.take_along_axis(masked, order, axis=1)


def check_degree(n: int, k: int) -> None:
    if n == 0:
        raise EmptyStoreError("Cannot build a k-NN graph over an empty store")
    if not 1 <= k <= n - 1:
        raise ParameterError(f"Graph degree k={k} must be in [1, n-1] with n={n}")


def build_brute_force(
    store: VectorStore,
    k: int,
    threads: Optional[int] = None,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> KnnGraph:
    """
    Build the exact k-NN graph by evaluating all pairwise distances.

    Rows are processed in independent blocks (in parallel when threads > 1);
    the result does not depend on block order.

    Args:
        store: Vectors to link
        k: Graph degree, 1 <= k <= n-1
        threads: Worker cap (defaults to settings.threads)
        block_size: Rows per distance block

    Returns:
        KnnGraph with neighbors sorted by (distance, id)

    Raises:
        ParameterError: k outside [1, n-1]
        EmptyStoreError: empty store
    """
    n = store.count
    check_degree(n, k)
    logger.info(f"Building exact {k}-NN graph over {n} vectors")

    blocks = [np.arange(start, min(start + block_size, n)) for start in range(0, n, block_size)]

    def build_block(rows: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return nearest_rows(pairwise_rows(store, rows), rows, k)

    parts = ordered_map(build_block, blocks, threads=threads)
    neighbors = np.concatenate([ids for ids, _ in parts])
    dists = np.concatenate([d for _, d in parts])
    return KnnGraph(neighbors, dists.astype(np.float32))
