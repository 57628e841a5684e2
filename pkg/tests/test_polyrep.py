import math
from fractions import Fraction

import numpy as np
import pytest

from lyapflow.exact import PolyL
from lyapflow.polyrep import (
    antisymmetric_seed,
    companion_operator,
    exact_charpoly,
    generator_matrix,
    krylov_minimal_polynomial,
    largest_real_root,
    matmul,
    monomial_basis,
    operator_matrix,
    quasi_solvable_charpoly,
    quasi_solvable_mu,
    unit_power,
    verify_casimir_identity,
)


def _sub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def _entries(g):
    return [list(r) for r in g.entries]


def _commutator(a, b):
    return _sub(matmul(a, b), matmul(b, a))


def test_basis_dimension_and_order():
    b = monomial_basis(3, 4)
    assert len(b) == math.comb(6, 2)
    assert b.exponents[0] == (4, 0, 0)
    with pytest.raises(ValueError):
        monomial_basis(3, 3)
    with pytest.raises(ValueError):
        monomial_basis(1, 2)


def test_generator_validation():
    b = monomial_basis(3, 2)
    with pytest.raises(ValueError):
        generator_matrix("A", 2, 1, b)
    with pytest.raises(ValueError):
        generator_matrix("N", 1, 1, b)
    with pytest.raises(ValueError):
        generator_matrix("Q", 1, 2, b)


@pytest.mark.parametrize("d,ell", [(2, 4), (3, 2), (3, 4)])
def test_commutation_relations(d, ell):
    b = monomial_basis(d, ell)
    N = {(i, j): _entries(generator_matrix("N", i, j, b)) for i in range(1, d + 1) for j in range(1, d + 1) if i != j}
    for i in range(1, d + 1):
        for j in range(i + 1, d + 1):
            A = _entries(generator_matrix("A", i, j, b))
            K = _entries(generator_matrix("K", i, j, b))
            assert _commutator(N[i, j], N[j, i]) == A
            assert K == _sub(N[i, j], N[j, i])
            assert generator_matrix("K", i, j, b).trace() == 0
    if d == 3:
        assert _commutator(N[1, 2], N[2, 3]) == N[1, 3]


@pytest.mark.parametrize("d", [2, 3, 4])
@pytest.mark.parametrize("ell", [0, 2, 4, 6])
def test_casimir_identity_exact(d, ell):
    rep = verify_casimir_identity(d, ell)
    assert rep.holds and rep.max_discrepancy == 0


def test_unit_power_is_rotation_invariant():
    p = unit_power(3, 4)
    b = monomial_basis(3, 4)
    for i, j in ((1, 2), (1, 3), (2, 3)):
        K = _entries(generator_matrix("K", i, j, b))
        v = b.vector(p)
        assert all(sum(r[c] * v[c] for c in range(len(v))) == 0 for r in K)


@pytest.mark.parametrize("d,ell,k2", [(2, 4, Fraction(1, 2)), (2, 6, Fraction(1, 3)), (3, 4, Fraction(1, 3)), (3, 2, Fraction(1, 5))])
def test_krylov_factor_divides_full_charpoly(d, ell, k2):
    # second route: Faddeev-LeVerrier on the operator over the whole monomial basis
    b = monomial_basis(d, ell)
    full = exact_charpoly(operator_matrix(companion_operator(d, k2), b))
    for seed in (None, antisymmetric_seed(d, ell)):
        start = unit_power(d, ell) if seed is None else seed
        cp = krylov_minimal_polynomial(companion_operator(d, k2), start)
        assert full.divisible_by(cp)


@pytest.mark.parametrize("d,ell,k2", [(2, 4, Fraction(1, 2)), (2, 6, Fraction(1, 3)), (3, 4, Fraction(1, 3))])
def test_leading_root_is_top_of_full_spectrum(d, ell, k2):
    b = monomial_basis(d, ell)
    mat = np.array(operator_matrix(companion_operator(d, k2), b), dtype=float)
    top = max(np.linalg.eigvals(mat).real)
    assert quasi_solvable_mu(d, ell, k2).mu == pytest.approx(top, abs=1e-9)


def test_sturm_bracket_matches_numpy_roots():
    p = PolyL.from_roots([Fraction(-7, 3), Fraction(1, 5), Fraction(11, 4), Fraction(3)]) * PolyL((2, 0, 1))
    lo, hi = largest_real_root(p)
    assert lo <= 3 <= hi and hi - lo <= Fraction(1, 10**30)
    q = PolyL((-2, 0, 1)) * PolyL((1, 1, 1)) * PolyL((-5, 1))
    lo, hi = largest_real_root(q)
    r = max(np.roots([float(c) for c in reversed(q.coeffs)]).real)
    assert float(lo) == pytest.approx(r, rel=1e-14)
    with pytest.raises(ValueError):
        largest_real_root(PolyL((1, 0, 1)))


def test_quadratic_bracket_contains_irrational_root():
    lo, hi = largest_real_root(PolyL((-2, 0, 1)))
    assert lo * lo <= 2 <= hi * hi


def test_three_dim_degree_four_closed_forms():
    K = PolyL.x()
    sym = quasi_solvable_charpoly(3, 4)
    anti = quasi_solvable_charpoly(3, 4, antisymmetric_seed(3, 4))
    assert sym == [448 * K + 256 * K * K, 20 + 40 * K, PolyL.const(1)]
    assert anti == [120 + 640 * K + 256 * K * K, 26 + 40 * K, PolyL.const(1)]
    k2 = 0.2
    assert quasi_solvable_mu(3, 4, Fraction(1, 5)).mu == pytest.approx(
        -20 * k2 - 10 + 2 * math.sqrt(36 * k2**2 - 12 * k2 + 25), abs=1e-14
    )
    mu1 = quasi_solvable_mu(3, 4, Fraction(1, 5), antisymmetric_seed(3, 4)).mu
    assert mu1 == pytest.approx(-20 * k2 - 13 + math.sqrt(144 * k2**2 - 120 * k2 + 49), abs=1e-14)


def test_two_dim_charpolys():
    K = PolyL.x()
    assert quasi_solvable_charpoly(2, 2) == [4 * K, PolyL.const(1)]
    assert quasi_solvable_charpoly(2, 4) == [192 * K, 16 * (1 + K), PolyL.const(1)]


def test_k2_range_checked():
    with pytest.raises(ValueError):
        quasi_solvable_mu(2, 2, Fraction(3, 2))
