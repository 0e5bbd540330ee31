from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, Sequence, TypeVar

import numpy as np
import structlog

from .ffield import IntArray
from .settings import get_settings

logger = structlog.get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def worker_count(workers: Optional[int] = None) -> int:
    return max(1, workers if workers is not None else get_settings().threads)


def chunked_map(
    func: Callable[[T], R], items: Sequence[T], workers: Optional[int] = None
) -> list[R]:
    """Map ``func`` over ``items``; results come back in input order."""
    workers = worker_count(workers)
    logger.debug("chunked_map", items=len(items), workers=workers)
    if workers == 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def split(array: IntArray, workers: Optional[int] = None, min_chunk: int = 4096) -> list[IntArray]:
    """Contiguous pieces of ``array`` for data-parallel numpy work."""
    pieces = min(worker_count(workers), max(1, len(array) // min_chunk))
    return np.array_split(array, pieces) if pieces > 1 else [array]


def trial_rngs(seed: int, trials: int) -> list[np.random.Generator]:
    """One independent stream per trial; trial ``i`` depends only on (seed, i)."""
    return [
        np.random.default_rng(child)
        for child in np.random.SeedSequence(seed).spawn(trials)
    ]
