import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lyapflow.exact import PolyL
from lyapflow.spectral2d import (
    L_2d,
    L_derivatives_2d,
    build_operator_2d,
    coeff_a,
    coeff_b,
    coeff_c,
    exact_band,
    leading_mu_2d,
)


def mu_degree_four(k2):
    # largest root of mu^2 + 16(1 + k^2) mu + 192 k^2
    return -8 * (1 + k2) + 8 * math.sqrt(1 - k2 + k2 * k2)


@pytest.mark.parametrize("k2", [0.0, 0.1, 0.5, 0.9])
def test_quasi_solvable_degrees(k2):
    assert leading_mu_2d(k2, 0.0, 1e-13).mu == pytest.approx(0.0, abs=1e-12)
    assert leading_mu_2d(k2, 2.0, 1e-13).mu == pytest.approx(-4 * k2, abs=1e-11)
    assert leading_mu_2d(k2, 4.0, 1e-13).mu == pytest.approx(mu_degree_four(k2), abs=1e-11)


def test_exact_band_matches_float_band():
    for j in range(5):
        a, b, c = exact_band(j)
        for ell in (Fraction(-3, 2), Fraction(7, 3)):
            x = float(ell)
            assert float(a.eval(ell)) == pytest.approx(float(coeff_a(j, x)), rel=1e-15, abs=1e-15)
            assert float(b.eval(ell)) == pytest.approx(coeff_b(j, x), rel=1e-15)
            assert float(c.eval(ell)) == pytest.approx(coeff_c(j, x), rel=1e-15)
    assert exact_band(0)[0] == PolyL()


def test_operator_layout():
    op = build_operator_2d(0.3, 1.5, 6)
    m = op.dense()
    assert m.shape == (7, 7)
    assert m[2, 1] == pytest.approx(-0.3 * coeff_a(2, 1.5))
    assert m[2, 3] == pytest.approx(-0.3 * coeff_c(2, 1.5))
    assert m[3, 3] == pytest.approx(-16 * 9 - 0.3 * coeff_b(3, 1.5))


@settings(max_examples=15, deadline=None)
@given(st.floats(0.0, 0.9), st.floats(-4.0, 2.0))
def test_symmetry_of_L(k2, ell):
    assert L_2d(k2, ell, 1e-12) == pytest.approx(L_2d(k2, -ell - 2, 1e-12), abs=1e-9)


def test_leading_matches_dense_eigvals():
    r = leading_mu_2d(0.7, -1.3, 1e-12)
    dense = build_operator_2d(0.7, -1.3, 200).dense()
    assert r.mu == pytest.approx(max(np.linalg.eigvals(dense).real), abs=1e-10)
    assert r.eigvec.sum() == pytest.approx(1.0)
    assert r.residual < 1e-8


@pytest.mark.parametrize("k2,ell", [(0.5, 0.3), (0.2, -2.5), (0.8, 1.7)])
def test_derivatives_match_differences(k2, ell):
    L, dL, d2L = L_derivatives_2d(k2, ell, 1e-13)
    h = 1e-3
    lp, lm = L_2d(k2, ell + h, 1e-13), L_2d(k2, ell - h, 1e-13)
    assert L == pytest.approx(L_2d(k2, ell, 1e-13), abs=1e-12)
    assert dL == pytest.approx((lp - lm) / (2 * h), abs=1e-6)
    assert d2L == pytest.approx((lp - 2 * L + lm) / h**2, abs=1e-5)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        leading_mu_2d(1.0, 0.5)
    with pytest.raises(ValueError):
        build_operator_2d(0.5, 0.5, 2)
