import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.special import jv

from common.errors import DegenerateFit, QuadratureNotConverged
from common.series import CorrelationSeries
from engine.correlation import (PHI_BOUND_CONSTANT, bessel_j_series, combined_frequency,
                                constant_bound_diagnostic, davenport_sum, decay_fit,
                                furstenberg_S, mobius_correlation, multifreq_davenport,
                                phi_coefficient_bound, phi_fourier_coeff, phi_fourier_coeffs,
                                s_tilde, s_tilde_tail_bound, sup_davenport)
from engine.flows import FurstenbergCocycle
from engine.sieve import mertens, mobius_sieve, summatory


@pytest.fixture(scope="module")
def furstenberg(liouville_alpha):
    return FurstenbergCocycle.furstenberg(liouville_alpha)


@pytest.fixture(scope="module")
def zero_cocycle(liouville_alpha):
    return FurstenbergCocycle.constant(liouville_alpha, 0.0)


def test_correlation_with_constant_is_mertens(mu_table):
    prefix = summatory(mu_table)
    for N in (1, 10, 1000, 10**5):
        assert mobius_correlation(mu_table, np.ones(N), N) == prefix[N] / N
    assert mobius_correlation(mu_table, lambda ns: 3.0 + 0 * ns, 1) == 3.0


def test_correlation_with_mu_counts_squarefree(mu_table):
    N = 10**4
    value = mobius_correlation(mu_table, mu_table.window(N), N)
    assert value == 6083 / N


def test_furstenberg_S_first_term(furstenberg, mu_table):
    series = furstenberg_S(furstenberg, mu_table, [1])
    assert abs(abs(series.entries[0][1]) - 1) < 1e-15


def test_zero_cocycle_collapses_to_mertens(zero_cocycle, mu_table):
    grid = [10, 1000, 10**4, 10**5]
    series = furstenberg_S(zero_cocycle, mu_table, grid)
    expected = mertens(mu_table, grid).checkpoints
    assert [(N, value) for N, value in series.entries] == [(N, complex(M, 0)) for N, M in expected]


def test_S_is_bounded_and_thread_independent(furstenberg, mu_table):
    grid = [100, 1000, 10**4, 10**5]
    one = furstenberg_S(furstenberg, mu_table, grid, threads=1)
    many = furstenberg_S(furstenberg, mu_table, grid, threads=4)
    assert one.entries == many.entries
    assert all(abs(value) <= N for N, value in one.entries)
    assert one.meta["K"] == {100: 2, 1000: 2, 10**4: 3, 10**5: 3}


def test_sparse_coefficients_reach_the_cutoff(liouville_alpha, mu_table, tmp_path):
    grid = [10, 1000, 10**4]
    empty = FurstenbergCocycle(liouville_alpha, {})
    series = furstenberg_S(empty, mu_table, grid)
    expected = mertens(mu_table, grid).checkpoints
    assert series.entries == [(N, complex(M, 0)) for N, M in expected]
    assert series.meta["K"][10**4] == 3

    path = tmp_path / "sparse.txt"
    path.write_text("1 0.5\n2 0.25\n")
    sparse = FurstenbergCocycle.from_file(liouville_alpha, path)
    values = furstenberg_S(sparse, mu_table, grid).entries
    assert all(abs(value) <= N for N, value in values)
    # c_3 = 0, so the reduced sum loses nothing
    assert abs(s_tilde(sparse, mu_table, 10**4)) == pytest.approx(abs(values[-1][1]), abs=1e-6)


def test_liouville_weights(furstenberg, zero_cocycle, lambda_table):
    grid = [10, 100, 1000, 10**4]
    prefix = summatory(lambda_table)
    collapsed = furstenberg_S(zero_cocycle, lambda_table, grid)
    assert collapsed.entries == [(N, complex(int(prefix[N]), 0)) for N in grid]
    assert collapsed.meta["kind"] == "liouville"
    series = furstenberg_S(furstenberg, lambda_table, grid, threads=3)
    assert all(abs(value) <= N for N, value in series.entries)
    assert series.entries == furstenberg_S(furstenberg, lambda_table, grid).entries
    for N in grid:
        assert davenport_sum(lambda_table, 0.0, N) == complex(int(prefix[N]), 0)
        assert abs(davenport_sum(lambda_table, 0.25, N)) <= N


def test_s_tilde_zero_cocycle(zero_cocycle, mu_table):
    assert s_tilde(zero_cocycle, mu_table, 1000) == mertens(mu_table, [1000])[1000]


def test_s_tilde_phi_form(furstenberg, liouville_alpha, mu_table):
    N = 1000  # K = 2: only |k| = 1 survives
    alpha = float(liouville_alpha)
    ns = np.arange(1, N + 1)
    direct = np.sum(mu_table.window(N) * np.exp(2j * np.pi * 2 * -1.0 * np.cos(2 * np.pi * ns * 2 * alpha)))
    assert abs(s_tilde(furstenberg, mu_table, N) - direct) < 1e-7


def test_s_tilde_tracks_S(furstenberg, mu_table):
    N = 10**5
    S = furstenberg_S(furstenberg, mu_table, [N]).entries[0][1]
    reduced = s_tilde(furstenberg, mu_table, N)
    assert abs(reduced) <= N
    assert abs(abs(S) - abs(reduced)) <= s_tilde_tail_bound(furstenberg, N) + 1e-6


def test_davenport_reductions(mu_table):
    N = 10**5
    prefix = summatory(mu_table)
    assert davenport_sum(mu_table, 0.0, N) == prefix[N]
    mu = mu_table.window(N).astype(np.int64)
    even, odd = mu[1::2].sum(), mu[0::2].sum()
    assert davenport_sum(mu_table, 0.5, N) == pytest.approx(even - odd, abs=1e-9)
    assert abs(davenport_sum(mu_table, 0.123, N)) <= N


def test_davenport_conjugate_symmetry(mu_table):
    N = 10**5
    theta = 0.3125
    left = davenport_sum(mu_table, theta, N)
    right = davenport_sum(mu_table, 1 - theta, N)
    assert abs(left - right.conjugate()) < 1e-9


def test_multifrequency(mu_table):
    N = 10**4
    assert multifreq_davenport(mu_table, [1], [0.37], N) == davenport_sum(mu_table, 0.37, N)
    assert multifreq_davenport(mu_table, [0, 0], [0.2, 0.9], N) == mertens(mu_table, [N])[N]
    theta = (0.1234, 0.5678)
    combined = combined_frequency([2, 3], theta)
    assert combined == (2 * Fraction(theta[0]) + 3 * Fraction(theta[1])) % 1
    value = multifreq_davenport(mu_table, [2, 3], theta, N)
    assert value == davenport_sum(mu_table, combined, N)
    assert abs(value - davenport_sum(mu_table, (2 * theta[0] + 3 * theta[1]) % 1.0, N)) < 1e-6


def test_multifrequency_random(mu_table):
    rng = np.random.default_rng(7)
    N = 10**4
    for _ in range(100):
        l_vec = rng.integers(-5, 6, size=3).tolist()
        theta_vec = rng.random(3).tolist()
        direct = davenport_sum(mu_table, float(combined_frequency(l_vec, theta_vec)), N)
        assert abs(multifreq_davenport(mu_table, l_vec, theta_vec, N) - direct) < 1e-8


def test_sup_davenport_two_points(mu_table):
    theta_star, value = sup_davenport(mu_table, 100, 2)
    mu = mu_table.window(100).astype(np.int64)
    candidates = [abs(mu.sum()), abs(np.sum(mu * (-1) ** np.arange(1, 101)))]
    assert abs(value) == pytest.approx(max(candidates))
    assert theta_star in (0.0, 0.5)


def test_sup_davenport_matches_brute_force(mu_table):
    N, G = 1000, 16
    brute = [abs(davenport_sum(mu_table, Fraction(j, G), N)) for j in range(G)]
    theta_star, value = sup_davenport(mu_table, N, G)
    assert abs(value) == pytest.approx(max(brute), abs=1e-9)
    j_star = round(theta_star * G)
    assert brute[j_star] == pytest.approx(max(brute), abs=1e-9)
    assert brute[j_star] == pytest.approx(brute[(G - j_star) % G], abs=1e-9)


def test_phi_trivial():
    coefficients = phi_fourier_coeffs(0.0, 5)
    assert coefficients[0].value == pytest.approx(1)
    assert all(abs(a.value) < 1e-15 for a in coefficients[1:])


def test_phi_against_bessel():
    for a in phi_fourier_coeffs(1.0, 10):
        oracle = (1j ** a.l) * jv(a.l, 4 * math.pi)
        assert abs(a.value - oracle) < 1e-9
        assert a.oracle_abs_err < 1e-9


@pytest.mark.parametrize("c1", [0.0, 0.25, 0.5, 1.0, 1.5, 2.0])
def test_phi_within_reported_error(c1):
    for a in phi_fourier_coeffs(c1, 50):
        assert a.oracle_abs_err <= a.quad_error + 1e-13


@pytest.mark.parametrize("c1", [0.5, 1.0, 2.0])
def test_phi_decay_bound(c1):
    C = max(1.0, abs(c1))
    for a in phi_fourier_coeffs(c1, 50)[1:]:
        assert abs(a.value) <= phi_coefficient_bound(c1, a.l)
    assert phi_coefficient_bound(c1, 1) == pytest.approx(PHI_BOUND_CONSTANT * C * C)


def test_phi_negative_index_and_convergence():
    assert phi_fourier_coeff(1.0, -3).value == pytest.approx(phi_fourier_coeff(1.0, 3).value, abs=1e-14)
    with pytest.raises(QuadratureNotConverged):
        phi_fourier_coeffs(2.0, 5, quad_nodes=16)


@pytest.mark.parametrize("z", [0.5, 4 * math.pi, 8 * math.pi])
def test_bessel_series_against_scipy(z):
    for m in range(-20, 21):
        assert bessel_j_series(m, z).real == pytest.approx(jv(m, z), abs=1e-12)


def _synthetic(A, scale=1.0):
    grid = [10**3, 10**4, 10**5, 10**6, 10**7]
    return CorrelationSeries(entries=[(N, scale * N / math.log(N) ** A + 0j) for N in grid])


@pytest.mark.parametrize("A", [0, 1, 2, 3])
def test_decay_fit_recovers_exponent(A):
    fit = decay_fit(_synthetic(A, scale=0.7))
    assert fit.A_hat == pytest.approx(A, abs=1e-6)
    assert fit.scale == pytest.approx(0.7, rel=1e-6)
    assert fit.residual_rms < 1e-6
    assert fit.N_range == (10**3, 10**7)
    assert fit.to_json_dict()["a_hat"] == fit.A_hat


def test_decay_fit_drops_zero_entries():
    series = _synthetic(2)
    series.entries.insert(2, (50000, 0j))
    fit = decay_fit(series)
    assert fit.dropped == [50000]
    assert series.meta["dropped"] == [50000]
    assert fit.A_hat == pytest.approx(2, abs=1e-6)


def test_decay_fit_degenerate():
    with pytest.raises(DegenerateFit):
        decay_fit(CorrelationSeries(entries=[(10**3, 1 + 0j), (10**4, 2 + 0j)]))
    narrow = CorrelationSeries(entries=[(N, 1 + 0j) for N in (100, 200, 300, 400, 500)])
    with pytest.raises(DegenerateFit):
        decay_fit(narrow)


def test_constant_bound_diagnostic():
    assert constant_bound_diagnostic(1.0, 5, 3)["holds"]
    report = constant_bound_diagnostic(math.e, 3, 10**6)
    assert report["lhs"] == pytest.approx(math.e ** 4)
    assert report["rhs"] == pytest.approx(13.8155, abs=1e-3)
    assert not report["holds"]
    assert constant_bound_diagnostic(1.1, 2, 10**3)["holds"]


@pytest.mark.slow
def test_squarefree_density_million():
    table = mobius_sieve(10**6)
    N = 10**6
    assert abs(mobius_correlation(table, table.window(N), N) - 6 / math.pi ** 2) < 1e-3


@pytest.mark.slow
def test_furstenberg_normalised_decay(furstenberg):
    table = mobius_sieve(10**6)
    series = furstenberg_S(furstenberg, table, [10**3, 10**4, 10**5, 10**6], threads=4)
    normalised = series.normalized()
    assert all(later < earlier for earlier, later in zip(normalised, normalised[1:]))
    assert decay_fit(series).A_hat >= 0.5


@pytest.mark.slow
def test_sup_davenport_decay():
    table = mobius_sieve(10**6)
    _, small = sup_davenport(table, 10**4, 4096)
    _, large = sup_davenport(table, 10**6, 4096)
    assert abs(large) / 10**6 < abs(small) / 10**4


@pytest.mark.slow
def test_mertens_decay_fit():
    table = mobius_sieve(10**7, threads=4)
    grid = [10**3, 10**4, 10**5, 10**6, 10**7]
    series = CorrelationSeries(entries=[(N, complex(M, 0)) for N, M in mertens(table, grid).checkpoints])
    assert decay_fit(series).A_hat >= 1
