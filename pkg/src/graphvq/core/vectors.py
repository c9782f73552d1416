"""
Vector storage, metered Euclidean distance and seeded randomness.

Every search method in graphvq pays for its work through a DistanceMeter:
one evaluation per uncached distance between the current query and a stored
vector. The meter memoizes per query, so a vocabulary word is charged at most
once no matter how many times a search revisits it.
"""

import logging
import struct
from pathlib import Path
from typing import BinaryIO, Optional, Sequence, Union

import numpy as np

from graphvq.core.errors import ContractViolationError, EmptyStoreError, FormatError

logger = logging.getLogger(__name__)

VECTOR_MAGIC = b"GVQ1"
_VECTOR_HEADER = struct.Struct("<4sIQ")  # magic, dim, count

ArrayLike = Union[np.ndarray, Sequence[Sequence[float]]]


def l2_rows(rows: np.ndarray, q: np.ndarray) -> np.ndarray:
    """
    Euclidean distances from q to every row, accumulated in float64.

    All exact distance computations in the package go through this function so
    that two methods evaluating the same (row, query) pair agree bit for bit.
    """
    diff = rows - q
    return np.sqrt(np.square(diff).sum(axis=1))


class VectorStore:
    """
    Immutable, id-addressed block of d-dimensional vectors.

    Values are kept as float32 (the on-disk type) plus a float64 copy used for
    distance accumulation. Ids are the dense row indices 0..count-1.
    """

    def __init__(self, data: ArrayLike, dim: Optional[int] = None):
        arr = np.asarray(data, dtype=np.float32)
        if arr.size == 0 and dim is not None:
            arr = arr.reshape(0, dim)
        if arr.ndim != 2:
            raise ContractViolationError(f"Vector data must be 2-D, got shape {arr.shape}")
        if arr.shape[1] < 1:
            raise ContractViolationError("Vector dimension must be positive")
        if dim is not None and arr.shape[1] != dim:
            raise ContractViolationError(f"Expected dimension {dim}, got {arr.shape[1]}")
        if not np.all(np.isfinite(arr)):
            raise ContractViolationError("Vectors must have finite components")

        self._data = np.ascontiguousarray(arr)
        self._data.setflags(write=False)
        self._data64 = self._data.astype(np.float64)
        self._data64.setflags(write=False)

    @classmethod
    def empty(cls, dim: int) -> "VectorStore":
        return cls(np.zeros((0, dim), dtype=np.float32))

    @property
    def dim(self) -> int:
        return int(self._data.shape[1])

    @property
    def count(self) -> int:
        return int(self._data.shape[0])

    def __len__(self) -> int:
        return self.count

    @property
    def data(self) -> np.ndarray:
        """Read-only float32 rows"""
        return self._data

    @property
    def data64(self) -> np.ndarray:
        """Read-only float64 rows used for distance accumulation"""
        return self._data64

    def vector(self, vector_id: int) -> np.ndarray:
        return self._data64[vector_id]

    def take(self, ids: Sequence[int]) -> "VectorStore":
        """New store holding the given rows, renumbered 0..len(ids)-1"""
        return VectorStore(self._data[np.asarray(ids, dtype=np.int64)], dim=self.dim)

    def check_query(self, q: ArrayLike) -> np.ndarray:
        """Validate a query vector against this store and return it as float64"""
        q64 = np.asarray(q, dtype=np.float64)
        if q64.ndim != 1 or q64.shape[0] != self.dim:
            raise ContractViolationError(
                f"Query has shape {q64.shape}, store dimension is {self.dim}"
            )
        return q64

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VectorStore):
            return NotImplemented
        return self._data.shape == other._data.shape and np.array_equal(self._data, other._data)

    def __repr__(self) -> str:
        return f"VectorStore(count={self.count}, dim={self.dim})"

    # Binary container: magic "GVQ1", u32 dim, u64 count, count*dim little-endian f32

    def write_to(self, fh: BinaryIO) -> None:
        fh.write(_VECTOR_HEADER.pack(VECTOR_MAGIC, self.dim, self.count))
        fh.write(self._data.astype("<f4", copy=False).tobytes(order="C"))

    @classmethod
    def read_from(cls, fh: BinaryIO) -> "VectorStore":
        header = fh.read(_VECTOR_HEADER.size)
        if len(header) != _VECTOR_HEADER.size:
            raise FormatError("Truncated vector header")
        magic, dim, count = _VECTOR_HEADER.unpack(header)
        if magic[:3] != VECTOR_MAGIC[:3]:
            raise FormatError(f"Bad vector magic {magic!r}")
        if magic != VECTOR_MAGIC:
            raise FormatError(f"Unsupported vector format version {magic[3:]!r}")
        if dim < 1:
            raise FormatError("Vector dimension must be positive")

        nbytes = dim * count * 4
        payload = fh.read(nbytes)
        if len(payload) != nbytes:
            raise FormatError(f"Truncated vector payload: expected {nbytes} bytes, got {len(payload)}")
        data = np.frombuffer(payload, dtype="<f4").reshape(count, dim)
        try:
            return cls(data.astype(np.float32), dim=dim)
        except ContractViolationError as e:
            raise FormatError(f"Invalid vector payload: {e}")

    def save(self, path: Union[str, Path]) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as fh:
            self.write_to(fh)
        logger.info(f"Saved {self.count} vectors (dim {self.dim}) to {path}")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "VectorStore":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Vector file not found: {path}")
        with open(path, "rb") as fh:
            store = cls.read_from(fh)
            if fh.read(1):
                raise FormatError(f"Trailing bytes after vector block in {path}")
        logger.info(f"Loaded {store.count} vectors (dim {store.dim}) from {path}")
        return store


class DistanceMeter:
    """
    Counts Euclidean distance evaluations for one query at a time.

    A meter is bound to a store and owned by a single in-flight query; it is
    never shared between threads. Call begin_query() before each query; it
    clears the memo but keeps the running evaluation count.
    """

    def __init__(self, store: VectorStore, memoize: bool = True):
        self.store = store
        self.memoize = memoize
        self.evaluations = 0
        self._query: Optional[np.ndarray] = None
        self._memo: Optional[np.ndarray] = np.full(store.count, np.nan) if memoize else None
        self._touched: list[np.ndarray] = []

    @property
    def query(self) -> Optional[np.ndarray]:
        return self._query

    def begin_query(self, q: ArrayLike) -> np.ndarray:
        q64 = self.store.check_query(q)
        self._clear_memo()
        self._query = q64
        return q64

    def _clear_memo(self) -> None:
        if self._memo is None or not self._touched:
            return
        touched = np.concatenate(self._touched)
        if touched.size * 4 > self._memo.size:
            self._memo.fill(np.nan)
        else:
            self._memo[touched] = np.nan
        self._touched = []

    def _require_query(self) -> np.ndarray:
        if self._query is None:
            raise ContractViolationError("begin_query() must be called before measuring")
        return self._query

    def _check_ids(self, ids: np.ndarray) -> None:
        if ids.size and (ids.min() < 0 or ids.max() >= self.store.count):
            raise ContractViolationError(
                f"Vector id out of range [0, {self.store.count}): {ids.min()}..{ids.max()}"
            )

    def distance(self, vector_id: int) -> float:
        return float(self.distances(np.array([vector_id], dtype=np.int64))[0])

    def distances(self, ids: Union[np.ndarray, Sequence[int]]) -> np.ndarray:
        """Distances from the current query to the given store ids"""
        q = self._require_query()
        ids = np.asarray(ids, dtype=np.int64)
        if ids.size == 0:
            return np.zeros(0, dtype=np.float64)
        self._check_ids(ids)

        if self._memo is None:
            self.evaluations += int(ids.size)
            return l2_rows(self.store.data64[ids], q)

        cached = self._memo[ids]
        missing = ids[np.isnan(cached)]
        if missing.size:
            missing = np.unique(missing)
            self._memo[missing] = l2_rows(self.store.data64[missing], q)
            self._touched.append(missing)
            self.evaluations += int(missing.size)
        return self._memo[ids]

    def charge_external(self, rows: np.ndarray) -> np.ndarray:
        """Distances to vectors outside the store (e.g. tree centroids); always charged"""
        q = self._require_query()
        rows = np.asarray(rows, dtype=np.float64)
        self.evaluations += int(rows.shape[0])
        return l2_rows(rows, q)


def distance(meter: DistanceMeter, store: VectorStore, vector_id: int, q: ArrayLike) -> float:
    """
    Metered Euclidean distance between stored vector `vector_id` and q.

    Starts a new query on the meter when q differs from the meter's current
    query, which clears the memo.

    Raises:
        ContractViolationError: dimension mismatch, id out of range, or a meter
            bound to another store
    """
    if meter.store is not store:
        raise ContractViolationError("Meter is bound to a different store")
    q64 = store.check_query(q)
    if meter.query is None or not np.array_equal(meter.query, q64):
        meter.begin_query(q64)
    return meter.distance(vector_id)


class Rng:
    """
    Seeded, splittable random generator (PCG64 over numpy SeedSequence).

    child(key) derives an independent stream from the seed and key alone, so
    per-query streams do not depend on how many draws the parent made.
    """

    def __init__(self, seed: Union[int, np.random.SeedSequence]):
        if isinstance(seed, np.random.SeedSequence):
            self._seq = seed
        else:
            if not 0 <= int(seed) < 2**64:
                raise ContractViolationError(f"Seed must be a 64-bit unsigned integer, got {seed}")
            self._seq = np.random.SeedSequence(int(seed))
        self.generator = np.random.Generator(np.random.PCG64(self._seq))

    @property
    def seed(self) -> int:
        return int(self._seq.entropy)

    def child(self, key: int) -> "Rng":
        return Rng(
            np.random.SeedSequence(self._seq.entropy, spawn_key=self._seq.spawn_key + (int(key),))
        )

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed}, spawn_key={self._seq.spawn_key})"


def uniform_node(rng: Rng, n: int) -> int:
    """Uniformly random vector id in [0, n)"""
    if n < 1:
        raise EmptyStoreError("Cannot draw a node from an empty store")
    return int(rng.generator.integers(0, n))
