"""
Continued fractions with exact big-integer convergents and certified tails.

alpha = [a_0; a_1, a_2, ...].  Only a finite prefix a_0..a_J is ever held in
memory.  What lies beyond a_J is described by a tail model:

* explicit and float-expanded expansions of irrationals: alpha_{J+1} >= 1;
* the Liouville construction: a_{J+1} = ceil(e^{q_J}) is known in closed form,
  so alpha_{J+1} lies in [e^{q_J}, e^{q_J} + 2] even when a_{J+1} has millions
  of digits;
* exact (terminated) expansions of rationals: there is no tail.

Quantities depending on the tail are evaluated with ``mpmath.iv`` intervals
over that model, so every number handed out comes with a certified bound.
"""
import logging
import math
from contextlib import contextmanager
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import List, Tuple, Union

import numpy as np
from mpmath import iv, mp, mpf

from common.config import DEFAULT_PRECISION_BITS, DEFAULT_Q_CAP
from common.errors import (IndexOutOfRange, InsufficientTail, PrecisionExhausted,
                           PrecisionInsufficient)

logger = logging.getLogger(__name__)

GUARD_BITS = 16
TWO64 = 1 << 64


class CFSource(Enum):
    EXPLICIT = "explicit"
    LIOUVILLE = "liouville-constructed"
    FLOAT_EXPANDED = "float-expanded"


@dataclass(frozen=True)
class Convergent:
    k: int
    l: int
    q: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.l, self.q)


@dataclass(frozen=True)
class PartialQuotients:
    a: Tuple[int, ...]
    source: CFSource = CFSource.EXPLICIT
    # True when the finite expansion is the whole value (alpha rational)
    exact: bool = False

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(v) for v in self.a))
        if not self.a:
            raise ValueError("at least a_0 is required")
        if self.a[0] < 0:
            raise ValueError(f"a_0 must be >= 0, got {self.a[0]}")
        if any(v < 1 for v in self.a[1:]):
            raise ValueError("partial quotients a_k, k >= 1, must be >= 1")

    def __len__(self) -> int:
        return len(self.a)

    @property
    def J(self) -> int:
        """Index of the last materialised quotient."""
        return len(self.a) - 1

    @cached_property
    def _table(self) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        ls, qs = [], []
        l_prev, l_prev2 = 1, 0
        q_prev, q_prev2 = 0, 1
        for a_k in self.a:
            l_k = a_k * l_prev + l_prev2
            q_k = a_k * q_prev + q_prev2
            ls.append(l_k)
            qs.append(q_k)
            l_prev2, l_prev = l_prev, l_k
            q_prev2, q_prev = q_prev, q_k
        return tuple(ls), tuple(qs)

    @property
    def l_values(self) -> Tuple[int, ...]:
        return self._table[0]

    @property
    def q_values(self) -> Tuple[int, ...]:
        return self._table[1]

    def q(self, k: int) -> int:
        """q_k with the convention q_{-1} = 0."""
        return 0 if k == -1 else self.q_values[k]

    def __float__(self) -> float:
        lo, hi = value_interval(self, 64)
        return float((lo + hi) / 2)


@dataclass(frozen=True)
class SignedError:
    """delta_k = q_k*alpha - l_k, as a midpoint and a certified radius."""
    k: int
    mantissa: mpf
    error: mpf

    @property
    def theta(self) -> mpf:
        """theta_k = ||q_k alpha|| = |delta_k| (for k >= 1)."""
        return abs(self.mantissa)

    @property
    def sign(self) -> int:
        return -1 if self.mantissa < 0 else 1

    def interval(self):
        return iv.mpf(self.mantissa) + iv.mpf([-self.error, self.error])


@contextmanager
def _iv_precision(bits: int):
    saved = iv.prec
    iv.prec = bits
    try:
        yield
    finally:
        iv.prec = saved


def _endpoints(x) -> Tuple[mpf, mpf]:
    lo, hi = x._mpi_
    return mp.make_mpf(lo), mp.make_mpf(hi)


def _fraction(x: mpf) -> Fraction:
    sign, man, exp, _ = x._mpf_
    value = Fraction(int(man)) * (Fraction(2) ** int(exp))
    return -value if sign else value


# -- construction ------------------------------------------------------------

def convergents(pq: PartialQuotients, K: int) -> List[Convergent]:
    """l_k/q_k for k = 0..K from l_k = a_k l_{k-1} + l_{k-2}, q_k = a_k q_{k-1} + q_{k-2}."""
    if K < 0 or K >= len(pq):
        raise IndexOutOfRange(f"K={K} outside [0, {pq.J}]")
    return [Convergent(k, pq.l_values[k], pq.q_values[k]) for k in range(K + 1)]


def golden_ratio(length: int) -> PartialQuotients:
    return PartialQuotients((1,) * length, CFSource.EXPLICIT)


def silver_ratio(length: int) -> PartialQuotients:
    """[0; 2, 2, 2, ...] = sqrt(2) - 1."""
    return PartialQuotients((0,) + (2,) * (length - 1), CFSource.EXPLICIT)


def ceil_exp(q: int) -> int:
    """ceil(e^q) for an integer q >= 0, certified by interval arithmetic."""
    if q < 0:
        raise ValueError("q must be >= 0")
    if q == 0:
        return 1
    bits = int(q * 1.4426950408889634) + 64
    while True:
        with _iv_precision(bits):
            lo, hi = _endpoints(iv.exp(iv.mpf(q)))
            floor_lo, floor_hi = int(mp.floor(lo)), int(mp.floor(hi))
        # e^q is irrational, so it is never equal to its floor
        if floor_lo == floor_hi:
            return floor_lo + 1
        bits *= 2


def build_liouville_alpha(q_cap: int = DEFAULT_Q_CAP) -> PartialQuotients:
    """
    alpha = [0; 2, a_2, a_3, ...] with a_{k+1} = ceil(e^{q_k}), so that
    q_{k+1} >= e^{q_k}.  Stops before the next q_k would exceed q_cap.
    """
    if q_cap < 2:
        raise ValueError("q_cap must be >= 2 (q_1 = 2)")
    a = [0, 2]
    q_prev, q = 1, 2
    log_cap = math.log(q_cap)
    while True:
        # q_{k+1} > e^{q_k}; skip computing a quotient we would throw away
        if q > log_cap + 1:
            break
        a_next = ceil_exp(q)
        q_next = a_next * q + q_prev
        if q_next > q_cap:
            break
        a.append(a_next)
        q_prev, q = q, q_next
    logger.debug(f"Liouville alpha with {len(a)} quotients, last q = {q}")
    return PartialQuotients(tuple(a), CFSource.LIOUVILLE)


def liouville_condition_holds(pq: PartialQuotients) -> bool:
    """q_{k+1} >= e^{q_k} for every materialised k >= 1, as exact integer comparisons."""
    qs = pq.q_values
    return all(qs[k + 1] >= ceil_exp(qs[k]) for k in range(1, len(qs) - 1))


# -- expansion of reals ------------------------------------------------------

_NAMED_CONSTANTS = {
    "pi": lambda: +mp.pi,
    "e": lambda: +mp.e,
    "phi": lambda: +mp.phi,
    "golden": lambda: +mp.phi,
    "sqrt2": lambda: mp.sqrt(2),
    "silver": lambda: mp.sqrt(2) - 1,
}


def _enclosure(x, precision_bits: int) -> Tuple[Fraction, Fraction, bool]:
    """Exact rational bounds for x; the flag says whether x is exactly rational."""
    if isinstance(x, (int, float, Fraction)):
        value = Fraction(x)
        return value, value, True
    if isinstance(x, str):
        name = x.strip().lower()
        if name in _NAMED_CONSTANTS:
            # guard bits keep the total error below one ulp after rounding
            with mp.workprec(precision_bits + GUARD_BITS):
                x = _NAMED_CONSTANTS[name]()
        else:
            try:
                value = Fraction(name)
            except ValueError:
                raise ValueError(f"cannot interpret {x!r} as a real number")
            return value, value, True
    with mp.workprec(precision_bits):
        v = +mp.mpf(x)
    sign, man, exp, bc = v._mpf_
    if not man:
        return Fraction(0), Fraction(0), True
    # one unit in the last place at the working precision
    ulp = Fraction(2) ** (int(exp) + int(bc) - precision_bits)
    center = _fraction(v)
    return center - ulp, center + ulp, False


def expand_real(x, K: int, precision_bits: int = DEFAULT_PRECISION_BITS,
                strict: bool = False) -> PartialQuotients:
    """
    Gauss-map expansion of x into at most K+1 quotients a_0..a_K.

    Exact rationals (int, float, Fraction, "3/7", "0.5") expand by Euclid's
    algorithm and end canonically.  Anything else is treated as known to one
    ulp at ``precision_bits`` and is expanded while both ends of the enclosing
    interval agree on the next quotient.
    """
    lo, hi, exact = _enclosure(x, precision_bits)
    if lo < 0:
        raise ValueError("only non-negative reals are expanded (a_0 >= 0)")
    quotients: List[int] = []
    terminated = False
    while len(quotients) < K + 1:
        a_k = math.floor(lo)
        if math.floor(hi) != a_k:
            break
        quotients.append(a_k)
        r_lo, r_hi = lo - a_k, hi - a_k
        if r_hi == 0:
            terminated = True
            break
        if r_lo == 0:
            # x may be an integer or just above it: next quotient unbounded
            break
        lo, hi = 1 / r_hi, 1 / r_lo

    if not quotients:
        raise PrecisionExhausted(f"no quotient of {x!r} certified at {precision_bits} bits",
                                 certified=0)
    if strict and len(quotients) < K + 1 and not terminated:
        raise PrecisionExhausted(
            f"only {len(quotients)} quotients certified at {precision_bits} bits",
            certified=len(quotients))
    return PartialQuotients(tuple(quotients), CFSource.FLOAT_EXPANDED, exact and terminated)


# -- tails and signed errors -------------------------------------------------

def _tail_reciprocal(pq: PartialQuotients):
    """Interval for 1/alpha_{J+1}."""
    if pq.exact:
        return iv.mpf(0)
    if pq.source is CFSource.LIOUVILLE:
        return 1 / _liouville_next_tail(pq)
    return iv.mpf([0, 1])


def _liouville_next_tail(pq: PartialQuotients):
    # a_{J+1} in [e^{q_J}, e^{q_J} + 1], plus 1/alpha_{J+2} in [0, 1]
    return iv.exp(iv.mpf(pq.q_values[-1])) + iv.mpf([0, 2])


def _complete_quotient(pq: PartialQuotients, j: int):
    """Interval for alpha_j = [a_j; a_{j+1}, ...], 1 <= j <= J+1."""
    if j == pq.J + 1:
        if pq.source is not CFSource.LIOUVILLE or pq.exact:
            raise InsufficientTail(f"alpha_{j} needs quotient a_{j}, have a_0..a_{pq.J}")
        return _liouville_next_tail(pq)
    x = iv.mpf(pq.a[pq.J]) + _tail_reciprocal(pq)
    for i in range(pq.J - 1, j - 1, -1):
        x = pq.a[i] + 1 / x
    return x


def delta(pq: PartialQuotients, k: int, precision_bits: int = DEFAULT_PRECISION_BITS) -> SignedError:
    """
    delta_k = q_k alpha - l_k = (-1)^k / (alpha_{k+1} q_k + q_{k-1}).

    The result's ``error`` is the certified radius around ``mantissa``.
    """
    if k < 0 or k > pq.J:
        raise IndexOutOfRange(f"k={k} outside [0, {pq.J}]")
    if pq.exact and k == pq.J:
        return SignedError(k, mpf(0), mpf(0))
    with _iv_precision(precision_bits + GUARD_BITS):
        tail = _complete_quotient(pq, k + 1)
        value = (-1) ** k / (tail * pq.q(k) + pq.q(k - 1))
        lo, hi = _endpoints(value)
    with mp.workprec(precision_bits + GUARD_BITS):
        mid = (lo + hi) / 2
        radius = max(hi - mid, mid - lo)
    return SignedError(k, mid, radius)


def value_interval(pq: PartialQuotients, precision_bits: int = DEFAULT_PRECISION_BITS) -> Tuple[mpf, mpf]:
    """Certified enclosure of alpha itself."""
    d = delta(pq, 0, precision_bits)
    with mp.workprec(precision_bits + GUARD_BITS):
        return pq.a[0] + d.mantissa - d.error, pq.a[0] + d.mantissa + d.error


def frac_multiple(pq: PartialQuotients, n: int, k: int, eps: float = 1e-15,
                  precision_bits: int = DEFAULT_PRECISION_BITS) -> mpf:
    """
    frac(n q_k alpha) = frac(n delta_k), since n l_k is an integer.

    The error is measured on the circle R/Z and certified to be <= eps;
    otherwise PrecisionInsufficient is raised and the caller has to raise
    precision_bits (or supply more quotients).
    """
    if n == 0:
        return mpf(0)
    d = delta(pq, k, precision_bits)
    with mp.workprec(precision_bits + GUARD_BITS):
        product = n * d.mantissa
        bound = abs(n) * d.error + mpf(2) ** (-precision_bits)
        if bound > eps:
            raise PrecisionInsufficient(
                f"frac({n}*delta_{k}) certified only to {float(bound):.3e} > eps={eps:.3e}",
                achieved=float(bound))
        result = product - mp.floor(product)
        if result >= 1:
            result = mpf(0)
    return result


def approx_inequality_check(pq: PartialQuotients, k: int) -> bool:
    """
    1/(2 q_k q_{k+1}) < |alpha - l_k/q_k| < 1/(q_k q_{k+1}), decided exactly.

    |alpha - l_k/q_k| = 1/(q_k Q) with Q = alpha_{k+1} q_k + q_{k-1}, so the
    check is q_{k+1} < Q < 2 q_{k+1}.  Q is a monotone function of the unknown
    tail t = 1/alpha_{J+1}; both ends of the tail range are tested with exact
    rationals.  For irrational alpha t = 0 is excluded, so that end only needs
    the non-strict inequalities.
    """
    if k < 2:
        raise IndexOutOfRange("the two-sided bound is stated for k >= 2")
    if k + 1 > pq.J:
        raise InsufficientTail(f"check at k={k} needs a_{k + 1}, have a_0..a_{pq.J}")
    qs = pq.q_values

    def Q(t: Fraction) -> Fraction:
        x = pq.a[pq.J] + t
        for i in range(pq.J - 1, k, -1):
            x = pq.a[i] + 1 / x
        return x * qs[k] + qs[k - 1]

    lower, upper = qs[k + 1], 2 * qs[k + 1]
    at_zero = Q(Fraction(0))
    if pq.exact:
        return lower < at_zero < upper
    at_one = Q(Fraction(1))
    return (lower < at_one < upper) and (lower <= at_zero <= upper)


def exponent_ratios(pq: PartialQuotients) -> List[float]:
    qs = pq.q_values
    return [math.log(qs[k + 1]) / math.log(qs[k]) for k in range(len(qs) - 1) if qs[k] >= 2]


def diophantine_exponent_estimate(pq: PartialQuotients) -> float:
    """max_k log q_{k+1} / log q_k over the materialised convergents."""
    return max(exponent_ratios(pq), default=1.0)


# -- extended-precision phases for many n at once ----------------------------

@dataclass(frozen=True)
class FixedPointPhase:
    """
    A real x mod 1 as limb/2^64 + remainder, limb a 64-bit integer and
    0 <= remainder < 2^-64 a float (about 117 fractional bits together).

    ``frac(ns)`` evaluates frac(n x) for a whole integer array: the limb part
    is multiplied in uint64 arithmetic, whose wrap-around is exactly the
    reduction mod 1.
    """
    limb: int
    remainder: float
    error: float = 0.0

    @classmethod
    def from_mpf(cls, x: mpf, error=0.0, precision_bits: int = DEFAULT_PRECISION_BITS) -> "FixedPointPhase":
        with mp.workprec(precision_bits + GUARD_BITS):
            f = x - mp.floor(x)
            scaled = f * TWO64
            limb = int(mp.floor(scaled))
            remainder = float((scaled - limb) / TWO64)
        if limb >= TWO64:
            limb, remainder = 0, 0.0
        return cls(limb, remainder, float(error) + 2.0 ** -precision_bits + 2.0 ** -117)

    @classmethod
    def from_real(cls, x: Union[int, float, Fraction]) -> "FixedPointPhase":
        """Exact for floats and for rationals whose bits stop within 117 places."""
        f = Fraction(x) % 1
        limb = math.floor(f * TWO64)
        rest = (f * TWO64 - limb) / TWO64
        return cls(limb, float(rest), 2.0 ** -117)

    def frac(self, ns) -> np.ndarray:
        ns = np.atleast_1d(np.asarray(ns, dtype=np.int64))
        wrapped = ns.astype(np.uint64) * np.uint64(self.limb)
        out = wrapped.astype(np.float64) * 2.0 ** -64 + ns.astype(np.float64) * self.remainder
        out -= np.floor(out)
        out[out >= 1.0] = 0.0
        return out

    def bound(self, n_max: int) -> float:
        """Certified circle error of frac(n x) for |n| <= n_max."""
        return abs(n_max) * self.error + 2.0 ** -52


def frac_scaled(xs, m: int) -> np.ndarray:
    """frac(m x) for a float array x and an integer m, without forming m*x in floating point."""
    xs = np.atleast_1d(np.asarray(xs, dtype=np.float64))
    f = xs - np.floor(xs)
    f[f >= 1.0] = 0.0
    scaled = np.ldexp(f, 64)
    limbs = np.floor(scaled)
    rest = np.ldexp(scaled - limbs, -64)
    wrapped = limbs.astype(np.uint64) * np.uint64(m % TWO64)
    out = np.ldexp(wrapped.astype(np.float64), -64) + float(m) * rest
    out -= np.floor(out)
    out[out >= 1.0] = 0.0
    return out


def phase_of(pq: PartialQuotients, k: int,
             precision_bits: int = DEFAULT_PRECISION_BITS) -> FixedPointPhase:
    """Fixed-point delta_k; k = 0 gives frac(alpha)."""
    d = delta(pq, k, precision_bits)
    return FixedPointPhase.from_mpf(d.mantissa, d.error, precision_bits)


def alpha_phase(alpha, precision_bits: int = DEFAULT_PRECISION_BITS) -> FixedPointPhase:
    if isinstance(alpha, PartialQuotients):
        return phase_of(alpha, 0, precision_bits)
    return FixedPointPhase.from_real(alpha)
