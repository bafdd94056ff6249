"""
Moebius-weighted sums: correlations with observables, the skew-product sum
S(N), its reduced form, Davenport sums, the Fourier coefficients of
e(2 c_1 cos 2 pi x), and a decay-exponent fit.

Every sum over n runs through engine.reducer, so block boundaries and the
order partial sums are combined in depend only on N.
"""
import logging
import math
from fractions import Fraction
from typing import Callable, List, Sequence, Tuple, Union

import numpy as np
from mpmath import mp, mpf

from common.errors import (DegenerateFit, IndexOutOfRange, PrecisionInsufficient,
                           QuadratureNotConverged)
from common.series import CorrelationSeries, DecayFit, PhiCoefficient
from common.table import MobiusTable
from engine.confrac import FixedPointPhase
from engine.flows import FurstenbergCocycle, cocycle_phases, truncation_cutoff
from engine.reducer import BLOCK_SIZE, reduce_sum

logger = logging.getLogger(__name__)

# |a_l(c_1)| <= (4 pi |c_1| + 16 pi^2 c_1^2) / l^2 after integrating by parts twice
PHI_BOUND_CONSTANT = 4 * math.pi + 16 * math.pi ** 2
# largest circle error tolerated in a per-n phase
PHASE_TOLERANCE = 1e-9

Observable = Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]


def _check_N(table: MobiusTable, N: int) -> None:
    if N < 1 or N > table.n_max:
        raise IndexOutOfRange(f"N={N} outside [1, {table.n_max}]")


def _weighted_sum(table: MobiusTable, N: int, phase_fn, threads: int) -> complex:
    """sum_{n <= N} mu(n) e(phase_fn(n)), block by block."""
    def block(lo: int, hi: int) -> complex:
        ns = np.arange(lo, hi, dtype=np.int64)
        mu = table.values[lo:hi]
        return complex(np.sum(mu * np.exp(2j * np.pi * phase_fn(ns))))

    return reduce_sum(block, 1, N + 1, threads=threads, block_size=BLOCK_SIZE)


def mobius_correlation(table: MobiusTable, xi: Observable, N: int, threads: int = 1) -> complex:
    """
    (1/N) sum_{n <= N} mu(n) xi(n).

    xi is either an array holding xi(1..N) or a function of an integer array.
    """
    _check_N(table, N)
    if callable(xi):
        fn = xi
    else:
        values = np.asarray(xi)
        if len(values) < N:
            raise ValueError(f"observable has {len(values)} values, need {N}")
        fn = lambda ns: values[ns - 1]

    def block(lo: int, hi: int) -> complex:
        ns = np.arange(lo, hi, dtype=np.int64)
        return complex(np.sum(table.values[lo:hi] * fn(ns)))

    return reduce_sum(block, 1, N + 1, threads=threads) / N


def _check_phases(cocycle: FurstenbergCocycle, N: int, ks) -> None:
    for k in ks:
        bound = cocycle.phase(k).bound(N)
        if bound > PHASE_TOLERANCE:
            raise PrecisionInsufficient(
                f"frac(n delta_{k}) for n <= {N} certified only to {bound:.2e}", achieved=bound)


def _cutoff(cocycle: FurstenbergCocycle, N: int) -> int:
    K = truncation_cutoff(cocycle.alpha, N)
    if K > cocycle.K_support:
        raise IndexOutOfRange(f"N={N} needs K={K}, cocycle supports up to {cocycle.K_support}")
    return K


def furstenberg_S(cocycle: FurstenbergCocycle, table: MobiusTable, N_grid: Sequence[int],
                  threads: int = 1) -> CorrelationSeries:
    """
    S(N) = sum_{n <= N} mu(n) e(sum_{j < n} h(j alpha)) on a grid.

    The inner cocycle sum is the telescoped closed form truncated at
    K = truncation_cutoff(alpha, N), one K per grid point.
    """
    series = CorrelationSeries(meta={"observable": "furstenberg", "kind": table.kind.value,
                                     "alpha": list(cocycle.alpha.a), "C": cocycle.C,
                                     "K": {}})
    for N in sorted(set(int(N) for N in N_grid)):
        _check_N(table, N)
        K = _cutoff(cocycle, N)
        _check_phases(cocycle, N, range(1, K + 1))
        value = _weighted_sum(table, N, lambda ns: cocycle_phases(cocycle, ns, K), threads)
        series.append(N, value)
        series.meta["K"][N] = K
        logger.info(f"S({N}) with K={K}: |S|/N = {abs(value) / N:.6e}")
    return series


def s_tilde(cocycle: FurstenbergCocycle, table: MobiusTable, N: int, threads: int = 1) -> complex:
    """sum_{n <= N} mu(n) e(sum_{1 <= |k| <= K-1} c_k e(n q_k alpha))."""
    _check_N(table, N)
    K = _cutoff(cocycle, N)
    ks = [k for k in range(1, K) if cocycle.coefficient(k) != 0]
    _check_phases(cocycle, N, ks)

    def phase(ns: np.ndarray) -> np.ndarray:
        total = np.zeros(ns.shape, dtype=np.float64)
        for k in ks:
            total += 2 * cocycle.coefficient(k) * np.cos(2 * np.pi * cocycle.phase(k).frac(ns))
        return total

    return _weighted_sum(table, N, phase, threads)


def s_tilde_tail_bound(cocycle: FurstenbergCocycle, N: int) -> float:
    """
    Bound on | |S(N)| - |S~(N)| |.

    The two phases differ, up to a constant, by the pair +-K only, which moves
    the n-th term by at most 8 pi^2 C n |delta_K|; summed over n <= N this
    is kappa C with kappa = 4 pi^2 N (N + 1) |delta_K|.
    """
    K = _cutoff(cocycle, N)
    d = cocycle.delta(K)
    kappa = 4 * mp.pi ** 2 * N * (N + 1) * (d.theta + d.error)
    return float(kappa * cocycle.C)


def davenport_sum(table: MobiusTable, theta, N: int, threads: int = 1) -> complex:
    """sum_{n <= N} mu(n) e(n theta); theta a float or an exact Fraction."""
    _check_N(table, N)
    phase = FixedPointPhase.from_real(theta)
    return _weighted_sum(table, N, phase.frac, threads)


def combined_frequency(l_vec: Sequence[int], theta_vec: Sequence) -> Fraction:
    """<l, theta> mod 1, formed exactly from the binary values of theta."""
    if len(l_vec) != len(theta_vec):
        raise ValueError("l and theta must have the same length")
    total = sum((int(l) * Fraction(theta) for l, theta in zip(l_vec, theta_vec)), Fraction(0))
    return total % 1


def multifreq_davenport(table: MobiusTable, l_vec: Sequence[int], theta_vec: Sequence,
                        N: int, threads: int = 1) -> complex:
    return davenport_sum(table, combined_frequency(l_vec, theta_vec), N, threads)


def sup_davenport(table: MobiusTable, N: int, grid_count: int) -> Tuple[float, complex]:
    """
    max over theta = j/G of |sum_{n <= N} mu(n) e(n theta)|.

    mu is folded into residue classes mod G, after which all G sums are one
    real FFT.  |S(1 - theta)| = |S(theta)|, so only j <= G/2 is searched;
    the smallest maximiser is returned.
    """
    _check_N(table, N)
    if grid_count < 2:
        raise ValueError("grid_count must be >= 2")
    ns = np.arange(1, N + 1, dtype=np.int64)
    buckets = np.bincount(ns % grid_count, weights=table.window(N).astype(np.float64),
                          minlength=grid_count)
    # rfft uses e(-r j / G), i.e. the conjugate of S(j / G)
    sums = np.conj(np.fft.rfft(buckets))
    j_star = int(np.argmax(np.abs(sums)))
    return j_star / grid_count, complex(sums[j_star])


# -- Fourier coefficients of e(2 c_1 cos 2 pi x) ------------------------------

def _bessel_tail(c1: float, orders: List[int]) -> float:
    """sum of (2 pi |c1|)^m / m! over the given orders: |J_m(4 pi c1)| <= that."""
    if c1 == 0:
        return 0.0
    log_half_z = math.log(2 * math.pi * abs(c1))
    return sum(math.exp(m * log_half_z - math.lgamma(m + 1)) for m in orders)


def _aliasing_bound(c1: float, l: int, nodes: int) -> float:
    orders = []
    for t in range(1, 64):
        orders.extend([abs(l + t * nodes), abs(l - t * nodes)])
    # floating-point rounding of an n-point FFT of unit-modulus data
    return _bessel_tail(c1, orders) + 4 * math.log2(nodes) * 2.0 ** -52


def bessel_j_series(m: int, z: float, precision_bits: int = 53) -> complex:
    """J_m(z) from its power series in mpmath, with enough extra bits for the cancellation."""
    order = abs(m)
    guard = int(2 * abs(z) / math.log(2)) + 32
    with mp.workprec(precision_bits + guard):
        half = mpf(z) / 2
        term = half ** order / mp.factorial(order)
        total = mpf(0)
        k = 0
        while True:
            total += term
            k += 1
            term *= -half * half / (k * (k + order))
            if k > abs(z) and abs(term) < mpf(2) ** (-precision_bits - 8) * (1 + abs(total)):
                break
        if m < 0 and order % 2:
            total = -total
        return complex(float(total), 0.0)


def _oracle(c1: float, l: int) -> complex:
    return (1j ** (l % 4)) * bessel_j_series(l, 4 * math.pi * c1)


def phi_fourier_coeffs(c1: float, l_max: int, quad_nodes: int = 256,
                       tol: float = 1e-12, with_oracle: bool = True) -> List[PhiCoefficient]:
    """
    a_l = int_0^1 e(2 c1 cos 2 pi x) e(-l x) dx for l = 0..l_max.

    Periodic trapezoid rule: one FFT of the integrand at quad_nodes points.
    Its error is the aliased sum of a_{l + t M}, bounded through |J_m|.
    """
    if quad_nodes < 16:
        raise ValueError("quad_nodes must be >= 16")
    xs = np.arange(quad_nodes) / quad_nodes
    f = np.exp(2j * np.pi * 2 * c1 * np.cos(2 * np.pi * xs))
    transform = np.fft.fft(f) / quad_nodes

    coefficients = []
    for l in range(l_max + 1):
        error = _aliasing_bound(c1, l, quad_nodes)
        if error > tol or 2 * l >= quad_nodes:
            raise QuadratureNotConverged(
                f"a_{l}({c1}) with {quad_nodes} nodes: error bound {error:.2e} > tol {tol:.2e}")
        oracle = _oracle(c1, l) if with_oracle else None
        coefficients.append(PhiCoefficient(l=l, c1=c1, value=complex(transform[l % quad_nodes]),
                                           quad_error=error, oracle=oracle))
    return coefficients


def phi_fourier_coeff(c1: float, l: int, quad_nodes: int = 256, tol: float = 1e-12) -> PhiCoefficient:
    """Single coefficient; negative l use a_{-l} = a_l (phi is even)."""
    coefficient = phi_fourier_coeffs(c1, abs(l), quad_nodes, tol, with_oracle=False)[-1]
    coefficient.l = l
    coefficient.oracle = _oracle(c1, l)
    return coefficient


def phi_coefficient_bound(c1: float, l: int) -> float:
    """PHI_BOUND_CONSTANT C^2 / l^2 with C = max(1, |c1|)."""
    if l == 0:
        raise ValueError("the bound is stated for l != 0")
    C = max(1.0, abs(c1))
    return PHI_BOUND_CONSTANT * C * C / (l * l)


# -- fitting -------------------------------------------------------------------

def decay_fit(series: CorrelationSeries, min_entries: int = 4, min_decades: float = 2.0) -> DecayFit:
    """
    Least squares of log(N/|S(N)|) on log log N.

    Entries with S(N) = 0 (or N < 3, where log log N is not positive) are
    dropped and listed in the result and in ``series.meta["dropped"]``.
    """
    kept: List[Tuple[int, float]] = []
    dropped: List[int] = []
    for N, value in series.entries:
        if abs(value) == 0 or N < 3:
            dropped.append(N)
        else:
            kept.append((N, abs(value)))
    series.meta["dropped"] = dropped
    if dropped:
        logger.warning(f"Dropped {len(dropped)} entries from the fit: {dropped}")

    if len(kept) < min_entries:
        raise DegenerateFit(f"{len(kept)} usable entries, need {min_entries}")
    Ns = np.array([N for N, _ in kept], dtype=np.float64)
    if math.log10(Ns[-1] / Ns[0]) < min_decades:
        raise DegenerateFit(f"grid spans {Ns[0]:.0f}..{Ns[-1]:.0f}, need {min_decades} decades")

    y = np.log(Ns) - np.log(np.array([s for _, s in kept]))
    design = np.column_stack([np.log(np.log(Ns)), np.ones(len(Ns))])
    (A_hat, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = y - design @ np.array([A_hat, intercept])
    return DecayFit(A_hat=float(A_hat), scale=float(math.exp(-intercept)),
                    residual_rms=float(np.sqrt(np.mean(residual ** 2))),
                    N_range=(kept[0][0], kept[-1][0]), dropped=dropped)


def constant_bound_diagnostic(C: float, K: int, N: int) -> dict:
    """Both sides of C^{2(K-1)} <= log N at the given finite parameters."""
    lhs = C ** (2 * (K - 1))
    rhs = math.log(N) if N > 1 else 0.0
    return {"C": C, "K": K, "N": N, "lhs": lhs, "rhs": rhs, "holds": lhs <= rhs}
