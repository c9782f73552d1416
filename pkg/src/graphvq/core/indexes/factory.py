"""
Factory for creating search indexes.

Implements the registry pattern: each method registers its index class under
the method name used in experiment configs.
"""

from typing import Any, Dict, Type

from .base import NearestNeighborIndex


class IndexFactory:
    """
    Registry of search index classes keyed by method name.
    """

    _indexes: Dict[str, Type[NearestNeighborIndex]] = {}

    @classmethod
    def register_index(cls, name: str, index_class: Type[NearestNeighborIndex]):
        """
        Register an index class.

        Raises:
            TypeError: If index_class doesn't implement NearestNeighborIndex
        """
        if not issubclass(index_class, NearestNeighborIndex):
            raise TypeError(f"Index class must implement NearestNeighborIndex, got {index_class}")
        cls._indexes[name] = index_class

    @classmethod
    def create_index(cls, spec: Any, vocabulary: Any, seed: int = 0) -> NearestNeighborIndex:
        """
        Build the index described by a method spec.

        Args:
            spec: Method spec with a `method` field (see models.search_params)
            vocabulary: Vocabulary to index
            seed: Build/search seed

        Raises:
            ValueError: If the method is unknown

        Example:
            >>> index = IndexFactory.create_index(KdSpec(trees=4, checks=600), vocab, seed=7)
        """
        method = spec.method
        if method not in cls._indexes:
            available = ", ".join(cls.list_indexes())
            raise ValueError(f"Unknown search method: {method}. Available methods: {available}")
        return cls._indexes[method].from_spec(spec, vocabulary, seed)

    @classmethod
    def list_indexes(cls) -> list[str]:
        return sorted(cls._indexes.keys())

    @classmethod
    def is_index_available(cls, method: str) -> bool:
        return method in cls._indexes
