import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from mpmath import mp

from common.errors import BadConfig, IndexOutOfRange, InsufficientQuotients, PrecisionInsufficient
from engine.confrac import golden_ratio, value_interval
from engine.flows import (AffineTorusMap, AnalyticFourierSeries, FurstenbergCocycle,
                          SkewProductMap, affine_orbit, birkhoff_average, cocycle_phases,
                          cocycle_sum_naive, cocycle_sum_telescoped, g_partial, h_eval,
                          irregularity_scan, is_zero_entropy, skew_orbit, tower,
                          tower_diagnostic, truncation_cutoff, truncation_tail_bound)


def circle_distance(a, b):
    d = np.abs(np.asarray(a) - np.asarray(b)) % 1.0
    return np.minimum(d, 1.0 - d)


@pytest.fixture(scope="module")
def furstenberg(liouville_alpha):
    return FurstenbergCocycle.furstenberg(liouville_alpha)


def test_zero_entropy():
    assert is_zero_entropy([[1, 0], [0, 1]])
    assert is_zero_entropy([[1, 0], [7, 1]])
    assert is_zero_entropy([[0, -1], [1, 0]])
    assert is_zero_entropy([[0, 1], [-1, -1]])
    assert is_zero_entropy([[1, 1, 0], [0, 1, 1], [0, 0, 1]])
    assert not is_zero_entropy([[2, 1], [1, 1]])
    assert not is_zero_entropy([[2, 0], [0, 1]])


def test_zero_entropy_matches_eigenvalue_moduli():
    entries = range(-3, 4)
    for a, b, c, d in itertools.product(entries, repeat=4):
        A = [[a, b], [c, d]]
        on_circle = bool(np.all(np.abs(np.abs(np.linalg.eigvals(np.array(A, dtype=float))) - 1) < 1e-6))
        assert is_zero_entropy(A) == on_circle, A


def test_affine_map_checks_determinant():
    with pytest.raises(ValueError):
        AffineTorusMap(2, [[2, 0], [0, 1]], [0.0, 0.0])
    assert not AffineTorusMap(2, [[2, 1], [1, 1]], [0.0, 0.0]).zero_entropy
    assert AffineTorusMap(2, [[1, 0], [1, 1]], [0.1, 0.0]).zero_entropy


def test_affine_orbit_rotation():
    T = AffineTorusMap(1, [[1]], [0.1234])
    orbit = affine_orbit(T, [0.5], 100)
    expected = [(0.5 + n * 0.1234) % 1.0 for n in range(101)]
    assert np.all(circle_distance(orbit[:, 0], expected) < 1e-12)
    assert np.all(affine_orbit(AffineTorusMap(1, [[1]], [0.0]), [0.3], 5) == 0.3)


def test_affine_orbit_quadratic_coordinate():
    alpha = 0.1234
    T = AffineTorusMap(2, [[1, 0], [1, 1]], [alpha, 0.0])
    orbit = affine_orbit(T, [0.0, 0.0], 200)
    expected = [float((Fraction(alpha) * n * (n - 1) / 2) % 1) for n in range(201)]
    assert np.all(circle_distance(orbit[:, 1], expected) < 1e-10)


def test_analytic_series():
    h = AnalyticFourierSeries.exponential(0.5, 5, amplitude=2.0)
    assert h.is_real
    assert h.mean == 2.0
    assert h.support == 5
    assert h.k1 == pytest.approx(2.0)
    x = 0.3
    direct = sum(2.0 * math.exp(-0.5 * abs(m)) * math.cos(2 * math.pi * m * x) for m in range(-5, 6))
    assert h.evaluate(x)[0].real == pytest.approx(direct, abs=1e-12)


def test_analytic_series_rejects_bad_decay():
    with pytest.raises(ValueError):
        AnalyticFourierSeries({1: 1.0, -1: 1.0}, tau=1.0, k1=0.1)
    with pytest.raises(ValueError):
        AnalyticFourierSeries({2: 0.1, -2: 0.1}, tau=1.0, tau2=2.0)
    assert not AnalyticFourierSeries({1: 1j}, tau=1.0).is_real


def test_cocycle_construction(liouville_alpha, golden, tmp_path):
    assert FurstenbergCocycle.furstenberg(liouville_alpha).K_support == 3
    assert FurstenbergCocycle.furstenberg(golden).K_support == golden.J - 1
    with pytest.raises(ValueError):
        FurstenbergCocycle(golden, {1: 2.0}, C=1.0)
    with pytest.raises(ValueError):
        FurstenbergCocycle(golden, {1: 0.5}, C=0.5)

    path = tmp_path / "coeffs.txt"
    path.write_text("# k c_k\n1 0.5\n2 -0.25\n")
    cocycle = FurstenbergCocycle.from_file(liouville_alpha, path)
    assert cocycle.coefficient(-2) == -0.25
    assert cocycle.coefficient(3) == 0.0
    assert cocycle.K_support == 3
    path.write_text("1 0.5 extra\n")
    with pytest.raises(BadConfig):
        FurstenbergCocycle.from_file(liouville_alpha, path)


def test_cocycle_is_filled_on_construction(liouville_alpha, golden):
    cocycle = FurstenbergCocycle(liouville_alpha, {1: 0.5})
    assert sorted(cocycle._deltas) == sorted(cocycle._phases) == [1, 2, 3]
    phases = dict(cocycle._phases)
    cocycle_phases(cocycle, np.arange(1, 1000), 3)
    cocycle_sum_telescoped(cocycle, 999, 3)
    assert cocycle._phases.keys() == phases.keys()
    assert all(cocycle.phase(k) is phases[k] for k in phases)
    assert len(FurstenbergCocycle.furstenberg(golden)._deltas) == golden.J - 1


def test_h_eval_zero_and_first_term(liouville_alpha, furstenberg):
    zero = FurstenbergCocycle.constant(liouville_alpha, 0.0)
    assert h_eval(zero, 0.37) == 0.0
    alpha = float(liouville_alpha)
    expected = 2 * -1.0 * (1 - math.cos(2 * math.pi * 2 * alpha))
    assert h_eval(furstenberg, 0.0, K=1) == pytest.approx(expected, abs=1e-12)
    with pytest.raises(IndexOutOfRange):
        h_eval(furstenberg, 0.0, K=4)


def test_h_eval_against_direct_sum(liouville_alpha, furstenberg):
    x = 0.25
    with mp.workprec(200):
        lo, hi = value_interval(liouville_alpha, 200)
        alpha = (lo + hi) / 2
        direct = mp.mpf(0)
        for k in range(1, 4):
            q = liouville_alpha.q(k)
            c = -mp.mpf(1) / k
            direct += 2 * (c * (1 - mp.expjpi(2 * q * alpha)) * mp.expjpi(2 * q * x)).real
    assert h_eval(furstenberg, x, K=3) == pytest.approx(float(direct), abs=1e-12)


def test_g_partial_at_zero(golden):
    assert g_partial(golden, 0.0, 6).real == pytest.approx(2 * sum(1 / k for k in range(1, 7)))


def test_g_partial_parseval(golden):
    xs = np.arange(4096) / 4096
    previous = 0.0
    for K in (2, 4, 8):
        energy = np.mean(np.abs(g_partial(golden, xs, K)) ** 2)
        expected = 2 * sum(1 / k ** 2 for k in range(1, K + 1))
        assert energy == pytest.approx(expected, abs=1e-10)
        assert previous < energy < math.pi ** 2 / 3
        previous = energy


@pytest.mark.parametrize("K", [1, 2, 3])
def test_coboundary_liouville(liouville_alpha, furstenberg, K):
    xs = np.linspace(0, 1, 37, endpoint=False)
    shifted = g_partial(liouville_alpha, xs, K, shift=1) - g_partial(liouville_alpha, xs, K)
    assert np.allclose(shifted.real, h_eval(furstenberg, xs, K), rtol=0, atol=1e-12)


def test_coboundary_golden(golden):
    cocycle = FurstenbergCocycle.furstenberg(golden)
    xs = np.linspace(0, 1, 29, endpoint=False)
    shifted = g_partial(golden, xs, 10, shift=1) - g_partial(golden, xs, 10)
    assert np.allclose(shifted.real, h_eval(cocycle, xs, 10), rtol=0, atol=1e-12)


def test_naive_single_term(furstenberg):
    assert cocycle_sum_naive(furstenberg, 1) == pytest.approx(h_eval(furstenberg, 0.0), abs=1e-15)
    assert cocycle_sum_telescoped(furstenberg, 1) == pytest.approx(h_eval(furstenberg, 0.0), abs=1e-12)


def test_zero_cocycle_sums(liouville_alpha):
    zero = FurstenbergCocycle.constant(liouville_alpha, 0.0)
    assert cocycle_sum_naive(zero, 50) == 0.0
    assert cocycle_sum_telescoped(zero, 12345) == 0.0


def test_naive_agrees_with_telescoped(furstenberg):
    naive = cocycle_sum_naive(furstenberg, 1000)
    assert naive == pytest.approx(cocycle_sum_telescoped(furstenberg, 1000), abs=1e-8)
    assert cocycle_sum_naive(furstenberg, 1000, threads=3) == naive


def test_naive_agrees_with_telescoped_on_random_cases(furstenberg):
    rng = np.random.default_rng(404)
    for _ in range(200):
        n = int(rng.integers(1, 10**4 + 1))
        K = int(rng.integers(0, 4))
        naive = cocycle_sum_naive(furstenberg, n, K)
        assert naive == pytest.approx(cocycle_sum_telescoped(furstenberg, n, K), abs=1e-8)


def test_cocycle_phases_vectorised(furstenberg):
    ns = [1, 2, 10, 999, 10**6]
    phases = cocycle_phases(furstenberg, ns, 3)
    for n, value in zip(ns, phases):
        assert value == pytest.approx(cocycle_sum_telescoped(furstenberg, n, 3), abs=1e-9)


def test_truncation_tail_bound(golden):
    cocycle = FurstenbergCocycle.furstenberg(golden)
    for n in (1, 10, 100, 1000):
        change = abs(cocycle_sum_telescoped(cocycle, n, 4) - cocycle_sum_telescoped(cocycle, n, 3))
        assert change <= truncation_tail_bound(cocycle, n, 3)


def test_telescoped_needs_precision():
    cocycle = FurstenbergCocycle.furstenberg(golden_ratio(8))
    with pytest.raises(PrecisionInsufficient):
        cocycle_sum_telescoped(cocycle, 10**9, 6)


def test_truncation_cutoff(liouville_alpha):
    assert truncation_cutoff(liouville_alpha, 10**3) == 2
    assert truncation_cutoff(liouville_alpha, 10**6) == 3
    assert truncation_cutoff(liouville_alpha, 1) == 1
    assert truncation_cutoff(liouville_alpha, 2) == 1
    with pytest.raises(InsufficientQuotients):
        truncation_cutoff(golden_ratio(6), 10**6)


def test_tower(liouville_alpha):
    assert tower(3) == 2
    assert float(tower(4)) == pytest.approx(math.exp(2))
    assert float(tower(5)) == pytest.approx(math.exp(math.exp(2)))
    assert tower(7) == mp.inf
    report = tower_diagnostic(liouville_alpha, 10**6)
    assert report["K"] == 3 and report["holds"] and not report["applicable"]
    assert tower_diagnostic(liouville_alpha, 10**3)["tower"] is None


def test_skew_product_validation(liouville_alpha, furstenberg, golden):
    with pytest.raises(ValueError):
        SkewProductMap(1, 0, 2, liouville_alpha)
    with pytest.raises(ValueError):
        SkewProductMap(1, 0, 1, golden, furstenberg)
    assert SkewProductMap(1, 0, 1, liouville_alpha).generic
    assert not SkewProductMap(1, 0, 1, 0.25).generic


def test_product_of_rotations():
    beta = AnalyticFourierSeries({0: 0.3}, tau=1.0)
    T = SkewProductMap(1, 0, 1, 0.125, beta)
    orbit = skew_orbit(T, (0.5, 0.1), 20)
    ns = np.arange(21)
    assert np.all(circle_distance(orbit[:, 0], 0.5 + 0.125 * ns) < 1e-14)
    assert np.all(circle_distance(orbit[:, 1], 0.1 + 0.3 * ns) < 1e-12)


def test_skew_orbit_accumulates_h():
    h = AnalyticFourierSeries.exponential(1.0, 3)
    alpha = math.sqrt(2) - 1
    T = SkewProductMap(1, 0, 1, alpha, h)
    N = 50
    orbit = skew_orbit(T, (0.2, 0.4), N)
    total = 0.4 + sum(h.evaluate((0.2 + j * alpha) % 1.0)[0].real for j in range(N))
    assert circle_distance(orbit[N, 1], total % 1.0) < 1e-10


def test_skew_orbit_flip():
    T = SkewProductMap(-1, 2, -1, 0.25)
    orbit = skew_orbit(T, (0.1, 0.0), 4)
    assert np.allclose(orbit[:, 0], [0.1, 0.15, 0.1, 0.15, 0.1])


def test_double_and_extended_agree(liouville_alpha, furstenberg):
    T = SkewProductMap(1, 1, 1, liouville_alpha, furstenberg)
    double = skew_orbit(T, (0.1, 0.2), 1000, "double")
    extended = skew_orbit(T, (0.1, 0.2), 1000, "extended")
    assert np.max(circle_distance(double, extended)) < 1e-6


def test_extended_needs_certified_alpha():
    alpha = golden_ratio(10)
    T = SkewProductMap(1, 0, 1, alpha, FurstenbergCocycle.furstenberg(alpha))
    with pytest.raises(PrecisionInsufficient):
        skew_orbit(T, (0.0, 0.0), 1000, "extended")


def test_birkhoff_average():
    assert birkhoff_average(np.ones(17)) == 1
    assert birkhoff_average((-1.0) ** np.arange(1, 101)) == 0
    alpha = math.sqrt(2) - 1
    N = 10**5
    values = np.exp(2j * np.pi * ((np.arange(1, N + 1) * alpha) % 1.0))
    distance = min(alpha, 1 - alpha)
    assert abs(birkhoff_average(values)) <= 1 / (distance * N)
    with pytest.raises(ValueError):
        birkhoff_average([])


def test_irregularity_scan(liouville_alpha, furstenberg):
    T = SkewProductMap(1, 0, 1, liouville_alpha, furstenberg)
    trivial = irregularity_scan(T, (0, 0), [10, 100, 1000])
    assert all(abs(avg - 1) < 1e-15 for _, avg in trivial.averages)
    assert trivial.oscillation == 0
    assert trivial.generic

    report = irregularity_scan(T, (1, 0), [10, 100, 1000])
    assert [N for N, _ in report.averages] == [10, 100, 1000]
    assert 0 <= report.min_abs <= report.max_abs <= 1
    assert report.oscillation >= report.max_abs - report.min_abs - 1e-15
