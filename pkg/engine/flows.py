"""
Distal flows: affine maps of the torus, skew products over a rotation, and
the Furstenberg cocycle h(x) = sum_{k != 0} c_k (1 - e(q_k alpha)) e(q_k x).

Coefficients are real with c_{-k} = c_k, so the pair k, -k always combines to
2 Re[c_k (1 - e(q_k alpha)) e(q_k x)] and every value here is a real number.
The phases q_k x are never formed in floating point when x = j alpha: since
q_k alpha = l_k + delta_k, e(q_k j alpha) = e(j delta_k).
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy
from mpmath import mp, mpf

from common.config import DEFAULT_PRECISION_BITS
from common.errors import (BadConfig, IndexOutOfRange, InsufficientQuotients,
                           PrecisionInsufficient)
from common.series import IrregularityReport
from engine.confrac import (GUARD_BITS, CFSource, FixedPointPhase, PartialQuotients,
                            SignedError, alpha_phase, delta, frac_multiple, frac_scaled,
                            value_interval)
from engine.reducer import array_sum, reduce_sum

logger = logging.getLogger(__name__)

Real = Union[int, float, Fraction]
# tower values above this are reported as infinite instead of exponentiated
TOWER_OVERFLOW = 10**6


# -- affine maps of the torus ------------------------------------------------

def is_zero_entropy(A) -> bool:
    """True iff every eigenvalue of the integer matrix A is a root of unity."""
    M = sympy.Matrix(A)
    if not M.is_square:
        raise ValueError("is_zero_entropy needs a square matrix")
    dim = M.shape[0]
    x = sympy.Symbol("x")
    poly = sympy.Poly(M.charpoly(x).as_expr(), x)
    # phi(m) <= dim forces m <= 2 dim^2
    for m in range(1, 2 * dim * dim + 3):
        cyclotomic = sympy.Poly(sympy.cyclotomic_poly(m, x), x)
        while poly.degree() >= cyclotomic.degree():
            quotient, remainder = sympy.div(poly, cyclotomic)
            if not remainder.is_zero:
                break
            poly = quotient
        if poly.degree() == 0:
            break
    return poly.degree() == 0 and poly.as_expr() == 1


@dataclass
class AffineTorusMap:
    """T(x) = A x + b mod 1 on the dim-torus."""
    dim: int
    A: np.ndarray
    b: np.ndarray
    zero_entropy: bool = field(init=False)

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=np.int64)
        self.b = np.asarray(self.b, dtype=np.float64) % 1.0
        if self.A.shape != (self.dim, self.dim) or self.b.shape != (self.dim,):
            raise ValueError(f"A must be {self.dim}x{self.dim} and b of length {self.dim}")
        det = int(sympy.Matrix(self.A.tolist()).det())
        if det not in (1, -1):
            raise ValueError(f"det A must be +-1, got {det}")
        self.zero_entropy = is_zero_entropy(self.A.tolist())

    def apply(self, x: np.ndarray) -> np.ndarray:
        out = (self.A @ x + self.b) % 1.0
        out[out >= 1.0] = 0.0
        return out


def affine_orbit(T: AffineTorusMap, x0, N: int) -> np.ndarray:
    x = np.asarray(x0, dtype=np.float64) % 1.0
    if x.shape != (T.dim,):
        raise ValueError(f"starting point must have {T.dim} coordinates")
    orbit = np.empty((N + 1, T.dim), dtype=np.float64)
    orbit[0] = x
    for n in range(1, N + 1):
        x = T.apply(x)
        orbit[n] = x
    return orbit


# -- observables ---------------------------------------------------------------

@dataclass
class AnalyticFourierSeries:
    """
    Finitely supported h(x) = sum_m coeffs[m] e(m x) with
    |coeffs[m]| <= k1 e^{-tau |m|} and, when tau2 is given,
    |coeffs[m]| >= k2 e^{-tau2 |m|} for every |m| <= support.

    k1 and k2 are fitted from the coefficients when omitted.
    """
    coeffs: Dict[int, complex]
    tau: float
    tau2: Optional[float] = None
    k1: Optional[float] = None
    k2: Optional[float] = None

    def __post_init__(self):
        self.coeffs = {int(m): complex(v) for m, v in self.coeffs.items()}
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        fitted_k1 = max((abs(v) * math.exp(self.tau * abs(m)) for m, v in self.coeffs.items()),
                        default=0.0)
        if self.k1 is not None and fitted_k1 > self.k1 * (1 + 1e-12):
            raise ValueError(f"coefficients exceed {self.k1} e^(-{self.tau}|m|)")
        if self.k1 is None:
            self.k1 = fitted_k1

        if self.tau2 is None:
            return
        if self.tau2 < self.tau:
            raise ValueError("tau2 must be >= tau")
        fitted_k2 = min(abs(self.coeffs.get(m, 0)) * math.exp(self.tau2 * abs(m))
                        for m in range(-self.support, self.support + 1))
        if fitted_k2 == 0 or (self.k2 is not None and fitted_k2 < self.k2 * (1 - 1e-12)):
            raise ValueError(f"lower bound e^(-{self.tau2}|m|) fails on [-{self.support}, {self.support}]")
        if self.k2 is None:
            self.k2 = fitted_k2

    @classmethod
    def exponential(cls, tau: float, M: int, amplitude: float = 1.0,
                    tau2: Optional[float] = None) -> "AnalyticFourierSeries":
        """coeffs[m] = amplitude e^{-tau |m|} for |m| <= M: real, with matching lower bound."""
        coeffs = {m: amplitude * math.exp(-tau * abs(m)) for m in range(-M, M + 1)}
        return cls(coeffs, tau, tau2=tau if tau2 is None else tau2)

    @property
    def support(self) -> int:
        return max((abs(m) for m in self.coeffs), default=0)

    @property
    def mean(self) -> complex:
        """beta = coeffs[0], the integral of h."""
        return self.coeffs.get(0, 0j)

    @property
    def is_real(self) -> bool:
        return all(abs(v - self.coeffs.get(-m, 0).conjugate()) <= 1e-15 * (1 + abs(v))
                   for m, v in self.coeffs.items())

    def evaluate(self, x) -> np.ndarray:
        xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
        total = np.zeros(xs.shape, dtype=np.complex128)
        for m, v in sorted(self.coeffs.items()):
            total += v * np.exp(2j * np.pi * frac_scaled(xs, m))
        return total

    def evaluate_mp(self, x: mpf) -> mpf:
        total = mp.mpc(0)
        for m, v in sorted(self.coeffs.items()):
            total += mp.mpc(v.real, v.imag) * mp.expjpi(2 * m * x)
        return total.real


@dataclass
class FurstenbergCocycle:
    """
    Coefficients c_k, k >= 1, of the cocycle over the rotation by alpha;
    c_{-k} = c_k is implied and a missing c_k is 0.  ``K_support`` is the
    largest k whose delta_k is certified; delta_k and its phase are computed
    once, here, for every k <= K_support.
    """
    alpha: PartialQuotients
    c: Dict[int, float]
    C: float = 1.0
    precision_bits: int = DEFAULT_PRECISION_BITS
    K_support: int = field(init=False)
    _deltas: Dict[int, SignedError] = field(init=False, repr=False, default_factory=dict)
    _phases: Dict[int, FixedPointPhase] = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        self.c = {int(k): float(v) for k, v in self.c.items()}
        if self.C < 1:
            raise ValueError(f"C must be >= 1, got {self.C}")
        if any(k < 1 for k in self.c):
            raise ValueError("coefficients are indexed by k >= 1")
        too_big = [k for k, v in self.c.items() if abs(v) > self.C * (1 + 1e-12)]
        if too_big:
            raise ValueError(f"|c_k| > C={self.C} at k={too_big}")
        # delta_J needs a_{J+1}, known only for the Liouville construction
        known_tail = self.alpha.source is CFSource.LIOUVILLE or self.alpha.exact
        last_delta = self.alpha.J if known_tail else self.alpha.J - 1
        self.K_support = max(0, last_delta)
        for k in range(1, self.K_support + 1):
            d = delta(self.alpha, k, self.precision_bits)
            self._deltas[k] = d
            self._phases[k] = FixedPointPhase.from_mpf(d.mantissa, d.error, self.precision_bits)

    @classmethod
    def furstenberg(cls, alpha: PartialQuotients,
                    precision_bits: int = DEFAULT_PRECISION_BITS) -> "FurstenbergCocycle":
        """The classical instance c_k = -1/k, a coboundary of g(x) = sum 1/|k| e(q_k x)."""
        return cls(alpha, {k: -1.0 / k for k in range(1, alpha.J + 1)}, 1.0, precision_bits)

    @classmethod
    def constant(cls, alpha: PartialQuotients, value: float,
                 precision_bits: int = DEFAULT_PRECISION_BITS) -> "FurstenbergCocycle":
        return cls(alpha, {k: value for k in range(1, alpha.J + 1)},
                   max(1.0, abs(value)), precision_bits)

    @classmethod
    def from_file(cls, alpha: PartialQuotients, path, C: Optional[float] = None,
                  precision_bits: int = DEFAULT_PRECISION_BITS) -> "FurstenbergCocycle":
        """One ``k c_k`` pair per line; ``#`` starts a comment."""
        coeffs: Dict[int, float] = {}
        try:
            lines = Path(path).read_text().splitlines()
        except OSError as e:
            raise BadConfig(f"cannot read coefficient file {path}: {e}")
        for number, raw in enumerate(lines, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                k, value = int(parts[0]), float(parts[1])
            except (ValueError, IndexError):
                raise BadConfig(f"{path}:{number}: expected 'k c_k'")
            if len(parts) != 2 or k < 1:
                raise BadConfig(f"{path}:{number}: expected 'k c_k' with k >= 1")
            coeffs[k] = value
        if C is None:
            C = max([1.0] + [abs(v) for v in coeffs.values()])
        try:
            return cls(alpha, coeffs, C, precision_bits)
        except ValueError as e:
            raise BadConfig(f"{path}: {e}")

    def coefficient(self, k: int) -> float:
        return self.c.get(abs(k), 0.0)

    def delta(self, k: int) -> SignedError:
        if k in self._deltas:
            return self._deltas[k]
        return delta(self.alpha, k, self.precision_bits)

    def phase(self, k: int) -> FixedPointPhase:
        if k in self._phases:
            return self._phases[k]
        d = self.delta(k)
        return FixedPointPhase.from_mpf(d.mantissa, d.error, self.precision_bits)

    def weight(self, k: int) -> complex:
        """2 c_k (1 - e(delta_k)), formed in mpmath so tiny delta_k keep their size."""
        with mp.workprec(self.precision_bits + GUARD_BITS):
            w = 2 * self.coefficient(k) * (1 - mp.expjpi(2 * self.delta(k).mantissa))
        return complex(w)

    def check_K(self, K: Optional[int]) -> int:
        if K is None:
            return self.K_support
        if K < 0 or K > self.K_support:
            raise IndexOutOfRange(f"truncation K={K} outside [0, {self.K_support}]")
        return K


# -- cocycle evaluation --------------------------------------------------------

def h_eval(cocycle: FurstenbergCocycle, x, K: Optional[int] = None):
    """h truncated to 1 <= |k| <= K at x (scalar or array)."""
    K = cocycle.check_K(K)
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    total = np.zeros(xs.shape, dtype=np.float64)
    for k in range(1, K + 1):
        if cocycle.coefficient(k) == 0:
            continue
        phase = frac_scaled(xs, cocycle.alpha.q(k))
        total += (cocycle.weight(k) * np.exp(2j * np.pi * phase)).real
    return total if np.ndim(x) else float(total[0])


def h_eval_mp(cocycle: FurstenbergCocycle, x: mpf, K: Optional[int] = None) -> mpf:
    K = cocycle.check_K(K)
    total = mpf(0)
    for k in range(1, K + 1):
        c_k = cocycle.coefficient(k)
        if c_k == 0:
            continue
        t = cocycle.alpha.q(k) * x
        total += 2 * c_k * (mp.cospi(2 * t) - mp.cospi(2 * (t + cocycle.delta(k).mantissa)))
    return total


def g_partial(alpha: PartialQuotients, x, K: int, shift: int = 0,
              precision_bits: int = DEFAULT_PRECISION_BITS):
    """
    sum_{1 <= |k| <= K} (1/|k|) e(q_k (x + shift alpha)).

    The shift enters as e(shift delta_k), exact modulo the certified error
    of delta_k.
    """
    if K < 0 or K > alpha.J:
        raise IndexOutOfRange(f"K={K} outside [0, {alpha.J}]")
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    total = np.zeros(xs.shape, dtype=np.complex128)
    for k in range(1, K + 1):
        phase = frac_scaled(xs, alpha.q(k))
        if shift:
            d = delta(alpha, k, precision_bits)
            phase = phase + FixedPointPhase.from_mpf(d.mantissa, d.error, precision_bits).frac(shift)[0]
        total += (2.0 / k) * np.cos(2 * np.pi * phase)
    return total if np.ndim(x) else complex(total[0])


def cocycle_sum_naive(cocycle: FurstenbergCocycle, n: int, K: Optional[int] = None,
                      threads: int = 1) -> float:
    """sum_{j < n} h(j alpha), term by term."""
    if n < 1:
        raise ValueError("n must be >= 1")
    K = cocycle.check_K(K)
    ks = [k for k in range(1, K + 1) if cocycle.coefficient(k) != 0]
    weights = {k: cocycle.weight(k) for k in ks}
    phases = {k: cocycle.phase(k) for k in ks}
    for k in ks:
        if phases[k].bound(n) > 1e-9:
            logger.warning(f"delta_{k} known only to {phases[k].error:.2e}; naive sum is approximate")

    def block(lo: int, hi: int) -> complex:
        js = np.arange(lo, hi, dtype=np.int64)
        terms = np.zeros(hi - lo, dtype=np.float64)
        for k in ks:
            terms += (weights[k] * np.exp(2j * np.pi * phases[k].frac(js))).real
        return complex(np.sum(terms))

    return reduce_sum(block, 0, n, threads=threads).real


def cocycle_sum_telescoped(cocycle: FurstenbergCocycle, n: int, K: Optional[int] = None,
                           eps: float = 1e-12) -> float:
    """
    sum_{1 <= |k| <= K} c_k (1 - e(n q_k alpha)) = 2 sum_k c_k (1 - cos 2 pi frac(n delta_k)).

    O(K) in mpmath; raises PrecisionInsufficient when frac(n delta_k) is not
    certified to eps.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    K = cocycle.check_K(K)
    bits = cocycle.precision_bits
    total = mpf(0)
    with mp.workprec(bits + GUARD_BITS):
        for k in range(1, K + 1):
            c_k = cocycle.coefficient(k)
            if c_k == 0:
                continue
            f = frac_multiple(cocycle.alpha, n, k, eps, bits)
            total += 2 * c_k * (1 - mp.cospi(2 * f))
    return float(total)


def cocycle_phases(cocycle: FurstenbergCocycle, ns, K: Optional[int] = None) -> np.ndarray:
    """The telescoped sum for a whole array of n at once, in float64."""
    K = cocycle.check_K(K)
    ns = np.atleast_1d(np.asarray(ns, dtype=np.int64))
    total = np.zeros(ns.shape, dtype=np.float64)
    for k in range(1, K + 1):
        c_k = cocycle.coefficient(k)
        if c_k == 0:
            continue
        # 1 - cos(2 pi f) = 2 sin^2(pi f)
        total += 4 * c_k * np.sin(np.pi * cocycle.phase(k).frac(ns)) ** 2
    return total


def truncation_tail_bound(cocycle: FurstenbergCocycle, n: int, K: int) -> float:
    """4 pi C n |delta_{K+1}|: what dropping the pair +-(K+1) can change for sums up to n."""
    if K + 1 > cocycle.K_support:
        raise IndexOutOfRange(f"bound needs delta_{K + 1}, cocycle has up to {cocycle.K_support}")
    d = cocycle.delta(K + 1)
    return float(4 * mp.pi * cocycle.C * n * (d.theta + d.error))


def truncation_cutoff(alpha: PartialQuotients, N: int) -> int:
    """The unique K >= 1 with q_{K-1} < 2 log N <= q_K; 1 for N <= 1."""
    if N <= 1:
        return 1
    with mp.workprec(96):
        target = 2 * mp.log(N)
    for K in range(1, alpha.J + 1):
        if alpha.q(K - 1) < target <= alpha.q(K):
            return K
    raise InsufficientQuotients(
        f"2 log N = {float(target):.4f} exceeds q_{alpha.J} = {alpha.q(alpha.J)}")


def tower(K: int) -> mpf:
    """exp(exp(...exp(2))) with K - 3 exponentials; +inf once it stops fitting."""
    if K < 3:
        raise ValueError("tower is defined for K >= 3")
    value = mpf(2)
    for _ in range(K - 3):
        if value > TOWER_OVERFLOW:
            return mp.inf
        value = mp.exp(value)
    return value


def tower_diagnostic(alpha: PartialQuotients, N: int) -> dict:
    K = truncation_cutoff(alpha, N)
    two_log_N = 2 * math.log(N) if N > 1 else 0.0
    result = {"N": N, "K": K, "two_log_N": two_log_N, "tower": None,
              "holds": None, "applicable": K >= 4}
    if K >= 3:
        value = tower(K)
        result["tower"] = float(value)
        result["holds"] = bool(value <= two_log_N)
    return result


# -- skew products -------------------------------------------------------------

Observable = Union[AnalyticFourierSeries, FurstenbergCocycle, None]


@dataclass
class SkewProductMap:
    """T(x, y) = (a x + alpha, c x + d y + h(x)) on the 2-torus, a d = +-1."""
    a: int
    c: int
    d: int
    alpha: Union[PartialQuotients, Real]
    h: Observable = None

    def __post_init__(self):
        if self.a * self.d not in (1, -1):
            raise ValueError(f"a*d must be +-1, got {self.a * self.d}")
        if self.a not in (1, -1):
            raise ValueError("the x-rotation needs a = +-1")
        if isinstance(self.h, FurstenbergCocycle) and self.h.alpha != self.alpha:
            raise ValueError("cocycle and map must rotate by the same alpha")
        if isinstance(self.h, AnalyticFourierSeries) and not self.h.is_real:
            raise ValueError("h must be real-valued (coeffs[-m] = conj coeffs[m])")

    @property
    def generic(self) -> bool:
        """False for rational alpha (finite orbits in x); floats count as rational."""
        return isinstance(self.alpha, PartialQuotients) and not self.alpha.exact

    def h_values(self, xs: np.ndarray) -> np.ndarray:
        if self.h is None:
            return np.zeros(len(xs))
        if isinstance(self.h, FurstenbergCocycle):
            return h_eval(self.h, xs)
        return self.h.evaluate(xs).real

    def h_value_mp(self, x: mpf) -> mpf:
        if self.h is None:
            return mpf(0)
        if isinstance(self.h, FurstenbergCocycle):
            return h_eval_mp(self.h, x)
        return self.h.evaluate_mp(x)


def _x_coordinates(T: SkewProductMap, x0: float, N: int, precision_bits: int) -> np.ndarray:
    # x_n = a^n x0 + s_n alpha, s_n = n (a = 1) or n mod 2 (a = -1)
    ns = np.arange(N + 1, dtype=np.int64)
    s = ns if T.a == 1 else ns % 2
    signs = np.ones(N + 1) if T.a == 1 else np.where(ns % 2 == 0, 1.0, -1.0)
    phase = alpha_phase(T.alpha, precision_bits)
    if phase.bound(N) > 1e-9:
        logger.warning(f"alpha known only to {phase.error:.2e}; orbit drifts by up to {phase.bound(N):.2e}")
    xs = (phase.frac(s) + signs * x0) % 1.0
    xs[xs >= 1.0] = 0.0
    return xs


def _alpha_mpf(alpha, precision_bits: int) -> Tuple[mpf, mpf]:
    if isinstance(alpha, PartialQuotients):
        lo, hi = value_interval(alpha, precision_bits)
        return (lo + hi) / 2, (hi - lo) / 2
    if isinstance(alpha, float):
        return mpf(alpha), mpf(0)
    value = Fraction(alpha)
    return mpf(value.numerator) / value.denominator, mpf(2) ** -precision_bits


def skew_orbit(T: SkewProductMap, p0: Tuple[float, float], N: int,
               precision_mode: str = "double",
               precision_bits: int = DEFAULT_PRECISION_BITS) -> np.ndarray:
    """Points p_0..p_N of the orbit of p0, as an (N+1, 2) array in [0, 1)^2."""
    if precision_mode == "double":
        return _skew_orbit_double(T, p0, N, precision_bits)
    if precision_mode == "extended":
        return _skew_orbit_extended(T, p0, N, max(precision_bits, 96))
    raise ValueError(f"unknown precision mode {precision_mode!r}")


def _skew_orbit_double(T: SkewProductMap, p0, N: int, precision_bits: int) -> np.ndarray:
    xs = _x_coordinates(T, float(p0[0]) % 1.0, N, precision_bits)
    hs = T.h_values(xs)
    orbit = np.empty((N + 1, 2), dtype=np.float64)
    orbit[:, 0] = xs
    y = float(p0[1]) % 1.0
    for n in range(N + 1):
        orbit[n, 1] = y
        y = (T.c * xs[n] + T.d * y + hs[n]) % 1.0
        if y >= 1.0:
            y = 0.0
    return orbit


def _skew_orbit_extended(T: SkewProductMap, p0, N: int, precision_bits: int) -> np.ndarray:
    with mp.workprec(precision_bits + GUARD_BITS):
        alpha, alpha_err = _alpha_mpf(T.alpha, precision_bits)
        q_max = 1
        if isinstance(T.h, FurstenbergCocycle):
            used = [k for k in range(1, T.h.K_support + 1) if T.h.coefficient(k) != 0]
            q_max = T.h.alpha.q(max(used, default=0))
        drift = (N + 1) * alpha_err * q_max
        if drift > mpf(2) ** -64:
            raise PrecisionInsufficient(
                f"alpha certified to {float(alpha_err):.2e}; phases up to q={q_max} over "
                f"{N} steps drift by {float(drift):.2e}", achieved=float(drift))

        x0, y = mpf(p0[0]), mpf(p0[1])
        x0 -= mp.floor(x0)
        y -= mp.floor(y)
        orbit = np.empty((N + 1, 2), dtype=np.float64)
        for n in range(N + 1):
            s = n if T.a == 1 else n % 2
            x = (x0 if T.a == 1 or n % 2 == 0 else -x0) + s * alpha
            x -= mp.floor(x)
            orbit[n] = (float(x), float(y))
            y = T.c * x + T.d * y + T.h_value_mp(x)
            y -= mp.floor(y)
    orbit[orbit >= 1.0] = 0.0
    return orbit


# -- averages ------------------------------------------------------------------

def birkhoff_average(values, threads: int = 1) -> complex:
    values = np.asarray(values)
    if len(values) < 1:
        raise ValueError("need at least one value")
    return array_sum(values, threads=threads) / len(values)


def irregularity_scan(T: SkewProductMap, observable: Tuple[int, int], N_grid: Sequence[int],
                      p0: Tuple[float, float] = (0.0, 0.0), precision_mode: str = "double",
                      precision_bits: int = DEFAULT_PRECISION_BITS,
                      threads: int = 1) -> IrregularityReport:
    """Birkhoff averages of e(m1 x + m2 y) along the orbit, at every N of the grid."""
    grid = sorted(set(int(N) for N in N_grid))
    if not grid or grid[0] < 1:
        raise ValueError("grid points must be >= 1")
    m1, m2 = observable
    orbit = skew_orbit(T, p0, grid[-1], precision_mode, precision_bits)
    phase = (frac_scaled(orbit[1:, 0], m1) + frac_scaled(orbit[1:, 1], m2)) % 1.0
    xi = np.exp(2j * np.pi * phase)

    averages: List[Tuple[int, complex]] = [(N, birkhoff_average(xi[:N], threads)) for N in grid]
    values = np.array([v for _, v in averages])
    moduli = np.abs(values)
    oscillation = float(np.max(np.abs(values[:, None] - values[None, :])))
    logger.debug(f"Scanned ({m1},{m2}) at {len(grid)} grid points, oscillation {oscillation:.3e}")
    return IrregularityReport(observable=(m1, m2), averages=averages,
                              min_abs=float(moduli.min()), max_abs=float(moduli.max()),
                              oscillation=oscillation, generic=T.generic)
