import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from lyapflow.exact import ELL, K2Series, PolyL
from lyapflow.series import (
    L_series,
    cumulant_series,
    legendre_numeric,
    mu_series,
    mu_series_2d,
    mu_series_3d,
    rate_series,
    symmetry_check,
)
from lyapflow.spectral2d import L_2d, L_derivatives_2d, build_operator_2d
from lyapflow.spectral3d import L_3d, eigenvalues_3d


def _taylor(fn, n):
    mpmath.mp.dps = 40
    return mpmath.taylor(fn, 0, n)


def _close(exact, floats, tol=mpmath.mpf(10) ** -25):
    return all(abs(mpmath.mpf(a.numerator) / a.denominator - b) < tol for a, b in zip(exact, floats))


def test_two_dim_degree_four_against_closed_form():
    ref = _taylor(lambda x: -8 - 8 * x + 8 * mpmath.sqrt(1 - x + x * x), 6)
    assert _close(mu_series_2d(0, 6).series.at_ell(4).scalars(), ref)


def test_three_dim_degree_four_against_closed_forms():
    mu0 = _taylor(lambda x: -20 * x - 10 + 2 * mpmath.sqrt(36 * x * x - 12 * x + 25), 4)
    mu1 = _taylor(lambda x: -20 * x - 13 + mpmath.sqrt(144 * x * x - 120 * x + 49), 4)
    assert _close(mu_series_3d(0, 4).series.at_ell(4).scalars(), mu0)
    assert _close(mu_series_3d(1, 4).series.at_ell(4).scalars(), mu1)


def test_degree_two_is_exactly_linear():
    assert mu_series(2, 0, 5).series.at_ell(2).scalars() == [0, -4, 0, 0, 0, 0]
    assert mu_series(3, 0, 4).series.at_ell(2).scalars() == [0, -8, 0, 0, 0]
    assert mu_series(3, 0, 3).series.at_ell(0).scalars() == [0, 0, 0, 0]


@pytest.mark.parametrize("ell", [0.7, -1.6, 2.9])
def test_L_series_is_taylor_expansion_of_spectral_L(ell):
    # the truncation error must shrink like k^(2(order+1))
    ser = L_series(2, 5)
    errs = [abs(L_2d(k2, ell, 1e-14) - ser.evaluate(k2, ell)) for k2 in (0.04, 0.02)]
    assert errs[0] < 1e-9
    assert errs[1] < errs[0] / 2**5
    ser3 = L_series(3, 4)
    assert abs(L_3d(0.02, ell, 1e-13) - ser3.evaluate(0.02, ell)) < 1e-9


def test_excited_branch_against_spectrum():
    # branch l = 1 of d = 2 and d = 3 against the second eigenvalue at small k^2
    k2, ell = 0.01, 0.9
    ev2 = np.sort(np.linalg.eigvals(build_operator_2d(k2, ell, 40).dense()).real)[::-1]
    assert mu_series_2d(1, 4).series.evaluate(k2, ell) == pytest.approx(ev2[1], abs=1e-10)
    ev3 = eigenvalues_3d(k2, ell, 24).real
    assert mu_series_3d(1, 4).series.evaluate(k2, ell) == pytest.approx(ev3[1], abs=1e-9)


def test_cumulants_are_ell_coefficients():
    L = L_series(3, 3)
    for j in (1, 2, 3):
        assert cumulant_series(3, j, 3).coeffs == tuple(PolyL.const(c[j]) for c in L.coeffs)
    assert cumulant_series(2, 1, 3).scalars() == [1, -1, Fraction(-1, 8), Fraction(-1, 16)]
    with pytest.raises(ValueError):
        cumulant_series(2, 0, 3)


def test_rate_series_zero_at_gamma1_and_legendre_numeric():
    k2 = 0.04
    rate = rate_series(2, 5)
    for ell in (-0.5, 0.4, 1.5):
        num = legendre_numeric(lambda p: L_2d(k2, p, 1e-13), ell, (-8.0, 8.0),
                               dL=lambda p: L_derivatives_2d(k2, p, 1e-13)[1])
        assert num.convex
        assert rate.evaluate(k2, ell) == pytest.approx(num.value, abs=1e-7)
    g1 = float(cumulant_series(2, 1, 5).evaluate(k2))
    assert rate.evaluate(k2, g1) == pytest.approx(0.0, abs=1e-8)


def test_rate_series_three_dim_unperturbed():
    # gaussian with mean 2 and variance 4/3 at k = 0
    assert rate_series(3, 2)[0] == (ELL - 2) * (ELL - 2) * Fraction(3, 8)


def test_legendre_numeric_of_a_parabola():
    r = legendre_numeric(lambda p: p * p, 3.0, (-10, 10), xtol=1e-13)
    assert r.value == pytest.approx(2.25, abs=1e-10)
    assert r.p_star == pytest.approx(1.5, abs=1e-10)
    with pytest.raises(ValueError):
        legendre_numeric(lambda p: p * p, 100.0, (-1, 1))
    with pytest.raises(ValueError):
        legendre_numeric(lambda p: p * p, 0.0, (1, -1))


@pytest.mark.parametrize("d,order", [(2, 5), (3, 3)])
def test_exact_symmetry(d, order):
    rep = symmetry_check(d, L_series(d, order), Lstar=rate_series(d, order))
    assert rep.exact and rep.passed()


def test_symmetry_check_detects_violation():
    broken = L_series(2, 2) + K2Series([ELL], 2)
    assert not symmetry_check(2, broken).passed()
    assert not symmetry_check(2, lambda x: x, (0.5,)).passed(1e-3)


def test_branch_validation():
    with pytest.raises(ValueError):
        mu_series_3d(2, 2)
    with pytest.raises(ValueError):
        mu_series(4, 0, 2)
    with pytest.raises(ValueError):
        mu_series_2d(-1, 2)
