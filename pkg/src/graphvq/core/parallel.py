"""Ordered parallel map over a bounded thread pool"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from graphvq.core.config import settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(threads: Optional[int] = None) -> int:
    """Worker count: explicit value, else GVQ_THREADS, never below 1"""
    if threads is None:
        threads = settings.threads
    return max(1, int(threads))


def ordered_map(
    fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None
) -> List[R]:
    """
    Apply fn to every item and return the results in input order.

    Completion order never leaks into the output, so reductions over the
    returned list are deterministic regardless of scheduling.

    Args:
        fn: Function to apply; must not share mutable state between calls
        items: Inputs
        threads: Worker cap (defaults to settings.threads)

    Returns:
        List of fn(item) in the order of items
    """
    items = list(items)
    workers = min(resolve_threads(threads), max(1, len(items)))
    if workers == 1:
        return [fn(item) for item in items]

    logger.debug(f"Mapping {len(items)} items over {workers} threads")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
