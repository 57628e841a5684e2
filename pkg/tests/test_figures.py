import math

import pytest

from lyapflow.elliptic import gamma1_closed
from lyapflow.figures import cumulants_numeric, cumulants_vs_strain, figure_data, gaussian_check, legendre_spectral


def test_cumulants_without_strain():
    c = cumulants_numeric(2, 0.0)
    assert c == pytest.approx([1.0, 1.0, 0.0, 0.0], abs=1e-8)


def test_cumulants_vs_strain_endpoints():
    cols, rows = cumulants_vs_strain(2, 3)
    assert cols == ["strain", "k2", "gamma1", "gamma2", "gamma3", "gamma4"]
    assert rows[0][1] == 0.5 and rows[-1][1] == 0.0
    assert rows[0][2] == pytest.approx(gamma1_closed(math.sqrt(0.5)), abs=1e-9)
    assert rows[-1][2:] == pytest.approx([1.0, 1.0, 0.0, 0.0], abs=1e-8)
    with pytest.raises(ValueError):
        cumulants_vs_strain(2, 1)


def test_L_and_rate_rows():
    cols, rows = figure_data("L-and-rate", 2)
    assert cols == ["ell", "L", "Lstar", "L_quadratic", "Lstar_quadratic"]
    by_ell = {r[0]: r for r in rows}
    assert by_ell[0.0][1] == pytest.approx(0.0, abs=1e-10)
    g1 = gamma1_closed(math.sqrt(0.5))
    hit = [r for r in rows if abs(r[0] - g1) < 1e-9]
    assert hit and hit[0][2] == pytest.approx(0.0, abs=1e-10)
    assert all(r[2] >= -1e-10 for r in rows)
    assert gaussian_check(rows) < 1e-2


def test_legendre_against_three_dim_symmetry():
    # L*(ell) - L*(-ell) = -d ell
    k2, x = 1 / 3, 0.8
    assert legendre_spectral(3, k2, x) - legendre_spectral(3, k2, -x) == pytest.approx(-3 * x, abs=1e-8)


def test_unknown_figure():
    with pytest.raises(ValueError):
        figure_data("bogus")
