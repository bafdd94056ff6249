import asyncio
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, Tuple, TypeVar

import numpy as np

logger = logging.getLogger(__name__)

BLOCK_SIZE = 1 << 16

T = TypeVar("T")


def block_bounds(start: int, stop: int, block_size: int = BLOCK_SIZE) -> List[Tuple[int, int]]:
    """
    Split [start, stop) into consecutive half-open blocks.

    Boundaries depend only on the range and the block size, never on how many
    workers will process them.
    """
    if block_size < 1:
        raise ValueError("block_size must be positive")
    return [(lo, min(lo + block_size, stop)) for lo in range(start, stop, block_size)]


def pairwise_sum(values: Sequence[complex]) -> complex:
    """Sum in a fixed balanced tree: split at the midpoint, add the halves."""
    count = len(values)
    if count == 0:
        return 0j
    if count == 1:
        return complex(values[0])
    middle = count // 2
    return pairwise_sum(values[:middle]) + pairwise_sum(values[middle:])


async def _gather_blocks(fn: Callable[[int, int], T], bounds: List[Tuple[int, int]],
                         threads: int) -> List[T]:
    loop = asyncio.get_running_loop()
    with ThreadPoolExecutor(max_workers=threads) as executor:
        tasks = [loop.run_in_executor(executor, fn, lo, hi) for lo, hi in bounds]
        # gather keeps submission order, so the result list is in block order
        return await asyncio.gather(*tasks)


def map_blocks(fn: Callable[[int, int], T], bounds: List[Tuple[int, int]],
               threads: int = 1) -> List[T]:
    """Evaluate ``fn(lo, hi)`` for every block, in block order."""
    if threads <= 1 or len(bounds) <= 1:
        return [fn(lo, hi) for lo, hi in bounds]
    logger.debug(f"Dispatching {len(bounds)} blocks to {threads} workers")
    return asyncio.run(_gather_blocks(fn, bounds, threads))


def reduce_sum(fn: Callable[[int, int], complex], start: int, stop: int,
               threads: int = 1, block_size: int = BLOCK_SIZE) -> complex:
    """Deterministic parallel sum of ``fn`` over the blocks of [start, stop)."""
    partials = map_blocks(fn, block_bounds(start, stop, block_size), threads)
    return pairwise_sum(partials)


def array_sum(values: np.ndarray, threads: int = 1, block_size: int = BLOCK_SIZE) -> complex:
    """Same block/tree order as ``reduce_sum`` for an array already in memory."""
    return reduce_sum(lambda lo, hi: complex(np.sum(values[lo:hi])), 0, len(values),
                      threads=threads, block_size=block_size)
