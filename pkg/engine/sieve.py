import logging
from math import isqrt
from typing import Iterable

import numpy as np

from common.config import DEFAULT_MEMORY_BUDGET, DEFAULT_SEGMENT_SIZE
from common.errors import ResourceExhausted
from common.table import MertensSeries, MobiusTable, TableKind
from engine.reducer import block_bounds, map_blocks

logger = logging.getLogger(__name__)


def base_primes(limit: int) -> np.ndarray:
    """Primes <= limit by a plain Eratosthenes sieve."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p::p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


def _first_multiple(lo: int, m: int) -> int:
    return ((lo + m - 1) // m) * m


def _mobius_segment(lo: int, hi: int, primes: np.ndarray) -> np.ndarray:
    # mu(n) for lo <= n < hi; prod tracks the product of distinct primes found
    mu = np.ones(hi - lo, dtype=np.int8)
    prod = np.ones(hi - lo, dtype=np.int64)
    root = isqrt(hi - 1)
    for p in primes:
        p = int(p)
        if p > root:
            break
        start = _first_multiple(lo, p) - lo
        mu[start::p] *= -1
        prod[start::p] *= p
        square = p * p
        mu[_first_multiple(lo, square) - lo::square] = 0
    # one prime factor above sqrt(n) is left wherever prod != n
    leftover = prod != np.arange(lo, hi, dtype=np.int64)
    mu[leftover] *= -1
    return mu


def _liouville_segment(lo: int, hi: int, primes: np.ndarray) -> np.ndarray:
    lam = np.ones(hi - lo, dtype=np.int8)
    prod = np.ones(hi - lo, dtype=np.int64)
    root = isqrt(hi - 1)
    for p in primes:
        p = int(p)
        if p > root:
            break
        power = p
        while power <= hi - 1:
            start = _first_multiple(lo, power) - lo
            lam[start::power] *= -1
            prod[start::power] *= p
            power *= p
    leftover = prod != np.arange(lo, hi, dtype=np.int64)
    lam[leftover] *= -1
    return lam


def _check_budget(n_max: int, segment_size: int, memory_budget: int) -> None:
    # int8 table plus an int8 and an int64 workspace per segment
    needed = (n_max + 1) + 17 * min(segment_size, n_max)
    if needed > memory_budget:
        raise ResourceExhausted(
            f"sieving to {n_max} needs ~{needed} bytes, budget is {memory_budget}")


def _sieve(kind: TableKind, n_max: int, segment_size: int, threads: int,
           memory_budget: int) -> MobiusTable:
    if n_max < 1 or segment_size < 1:
        raise ValueError("n_max and segment_size must be positive")
    _check_budget(n_max, segment_size, memory_budget)

    primes = base_primes(isqrt(n_max))
    values = np.zeros(n_max + 1, dtype=np.int8)
    segment = _mobius_segment if kind is TableKind.MOEBIUS else _liouville_segment

    def fill(lo: int, hi: int) -> None:
        # segments write to disjoint slices of the shared table
        values[lo:hi] = segment(lo, hi, primes)

    bounds = block_bounds(1, n_max + 1, segment_size)
    map_blocks(fill, bounds, threads)
    logger.info(f"Sieved {kind.value} to {n_max} in {len(bounds)} segments")
    return MobiusTable(n_max=n_max, values=values, kind=kind)


def mobius_sieve(n_max: int, segment_size: int = DEFAULT_SEGMENT_SIZE, threads: int = 1,
                 memory_budget: int = DEFAULT_MEMORY_BUDGET) -> MobiusTable:
    """mu(n) for 1 <= n <= n_max by a segmented sieve."""
    return _sieve(TableKind.MOEBIUS, n_max, segment_size, threads, memory_budget)


def liouville_sieve(n_max: int, segment_size: int = DEFAULT_SEGMENT_SIZE, threads: int = 1,
                    memory_budget: int = DEFAULT_MEMORY_BUDGET) -> MobiusTable:
    """lambda(n) = (-1)^Omega(n), prime factors counted with multiplicity."""
    return _sieve(TableKind.LIOUVILLE, n_max, segment_size, threads, memory_budget)


def _factor_exponents(n: int):
    exponents = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            exponents.append(e)
        d += 1 if d == 2 else 2
    if n > 1:
        exponents.append(1)
    return exponents


def mobius_single(n: int) -> int:
    """mu(n) by trial division; the oracle the sieve is checked against."""
    if n < 1:
        raise ValueError("n must be positive")
    exponents = _factor_exponents(n)
    if any(e > 1 for e in exponents):
        return 0
    return -1 if len(exponents) % 2 else 1


def liouville_single(n: int) -> int:
    if n < 1:
        raise ValueError("n must be positive")
    return -1 if sum(_factor_exponents(n)) % 2 else 1


def summatory(table: MobiusTable) -> np.ndarray:
    """Prefix sums: result[N] = sum of values[1..N], result[0] = 0."""
    return np.cumsum(table.values, dtype=np.int64)


def mertens(table: MobiusTable, checkpoints: Iterable[int]) -> MertensSeries:
    points = sorted(set(int(N) for N in checkpoints))
    if points and (points[0] < 1 or points[-1] > table.n_max):
        raise ValueError(f"checkpoints must lie in [1, {table.n_max}]")
    prefix = summatory(table)
    return MertensSeries(checkpoints=[(N, int(prefix[N])) for N in points])


def squarefree_count(table: MobiusTable, N: int) -> int:
    if table.kind is not TableKind.MOEBIUS:
        raise ValueError("squarefree count needs a Moebius table")
    return int(np.count_nonzero(table.window(N)))
