import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import ellipe, ellipk

from lyapflow.elliptic import agm_KE, elliptic_complete, gamma1_closed, gamma2_closed, small_ell_branch, zeta_constant
from lyapflow.spectral2d import L_2d, build_operator_2d

moduli = st.floats(0.0, 0.999, allow_nan=False)


@given(moduli)
def test_agm_matches_scipy(k):
    K, E = agm_KE(k)
    assert K == pytest.approx(ellipk(k * k), rel=1e-13)
    assert E == pytest.approx(ellipe(k * k), rel=1e-13)


@pytest.mark.parametrize("k", [0.1, 0.5, 1 / math.sqrt(2), 0.9])
def test_agm_matches_quadrature(k):
    mpmath.mp.dps = 30
    K = mpmath.quad(lambda t: 1 / mpmath.sqrt(1 - k**2 * mpmath.sin(t) ** 2), [0, mpmath.pi / 2])
    E = mpmath.quad(lambda t: mpmath.sqrt(1 - k**2 * mpmath.sin(t) ** 2), [0, mpmath.pi / 2])
    e = elliptic_complete(k)
    assert e.K == pytest.approx(float(K), rel=1e-14)
    assert e.E == pytest.approx(float(E), rel=1e-14)


@given(st.floats(0.01, 0.99))
def test_legendre_relation(k):
    e, ep = elliptic_complete(k), elliptic_complete(math.sqrt(1 - k * k))
    assert e.E * ep.K + ep.E * e.K - e.K * ep.K == pytest.approx(math.pi / 2, rel=1e-13)


@pytest.mark.parametrize("k", [0.2, 0.6, 0.95])
def test_nome(k):
    assert elliptic_complete(k).q == pytest.approx(float(mpmath.qfrom(k=k)), rel=1e-13)
    assert elliptic_complete(0.0).q == 0.0


def test_modulus_validation():
    for bad in (-0.1, 1.0, math.nan):
        with pytest.raises(ValueError):
            elliptic_complete(bad)


def test_zeta_constant():
    assert zeta_constant() == pytest.approx(gamma1_closed(1 / math.sqrt(2)), rel=1e-14)
    assert zeta_constant() == pytest.approx(0.456946581044464, rel=1e-14)


def test_unstrained_limits():
    assert gamma1_closed(0.0) == 1.0
    assert gamma2_closed(0.0) == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("k2", [0.1, 0.5, 0.8])
def test_cumulants_match_spectral_differences(k2):
    h = 1e-3
    lp, l0, lm = (L_2d(k2, x, 1e-13) for x in (h, 0.0, -h))
    k = math.sqrt(k2)
    assert (lp - lm) / (2 * h) == pytest.approx(gamma1_closed(k), abs=1e-6)
    assert (lp - 2 * l0 + lm) / (2 * h * h) == pytest.approx(gamma2_closed(k), abs=1e-5)


@pytest.mark.parametrize("k2", [0.3, 0.6])
def test_small_ell_branches_against_spectrum(k2):
    h = 1e-4
    spec = [np.sort(np.linalg.eigvals(build_operator_2d(k2, x, 60).dense()).real)[::-1][:4] for x in (-h, 0.0, h)]
    for n in range(4):
        mu0, mu1 = small_ell_branch(math.sqrt(k2), n)
        assert mu0 == pytest.approx(spec[1][n], rel=1e-10, abs=1e-10)
        assert mu1 == pytest.approx((spec[2][n] - spec[0][n]) / (2 * h), abs=1e-6)
    with pytest.raises(ValueError):
        small_ell_branch(0.5, -1)
