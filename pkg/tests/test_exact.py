from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lyapflow.exact import ELL, K2Series, PolyL, poly_eval, rational_make, rational_parse, rational_str, series_arith

fractions = st.builds(Fraction, st.integers(-200, 200), st.integers(1, 30))
polys = st.lists(fractions, max_size=5).map(PolyL)


def series_pair(order):
    one = st.lists(polys, min_size=order + 1, max_size=order + 1).map(lambda cs: K2Series(cs, order))
    return st.tuples(one, one, one)


series_triples = st.integers(0, 3).flatmap(series_pair)


def test_rational_basics():
    assert rational_make(6, -4) == Fraction(-3, 2)
    assert rational_str(Fraction(-3, 2)) == "-3/2"
    assert rational_str(5) == "5/1"
    assert rational_parse(" -34128/125125 ") == Fraction(-34128, 125125)
    with pytest.raises(ZeroDivisionError):
        rational_make(1, 0)


def test_polyl_rejects_floats():
    with pytest.raises(TypeError):
        PolyL([0.5])


def test_polyl_display_and_degree():
    p = (ELL - 2) * (ELL + 3)
    assert p.coeffs == (Fraction(-6), Fraction(1), Fraction(1))
    assert p.degree == 2 and PolyL().degree == -1
    assert str(p) == "-6 + l + l^2"


@given(fractions)
def test_rational_roundtrip(x):
    assert rational_parse(rational_str(x)) == x


@given(polys, polys, polys)
def test_polyl_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == PolyL()


@given(polys, polys, fractions)
def test_evaluation_is_a_homomorphism(a, b, x):
    assert poly_eval(a * b, x) == poly_eval(a, x) * poly_eval(b, x)
    assert (a + b).eval(x) == a.eval(x) + b.eval(x)


@given(polys, polys)
def test_leibniz_rule(a, b):
    assert (a * b).deriv() == a.deriv() * b + a * b.deriv()


@given(polys, polys)
def test_division_identity(a, b):
    if b.is_zero():
        return
    q, r = a.divmod(b)
    assert q * b + r == a
    assert r.degree < b.degree


@given(polys, polys, fractions)
def test_compose(a, b, x):
    assert a.compose(b).eval(x) == a.eval(b.eval(x))


@given(polys)
def test_polyl_json_roundtrip(a):
    assert PolyL.from_json(a.to_json()) == a


def test_float_evaluation_matches_exact():
    p = PolyL((Fraction(1, 3), -2, Fraction(5, 7)))
    assert p.eval(0.25) == pytest.approx(float(p.eval(Fraction(1, 4))), rel=1e-15)


@settings(max_examples=50)
@given(series_triples)
def test_series_ring_axioms(abc):
    a, b, c = abc
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert series_arith(a, b, "sub") + b == a
    assert a * K2Series.one(a.order) == a


@settings(max_examples=50)
@given(series_triples)
def test_series_product_commutes_with_truncation(abc):
    a, b, _ = abc
    for m in range(a.order + 1):
        assert (a * b).truncate(m) == a.truncate(m) * b.truncate(m)


@given(series_triples, fractions)
def test_series_evaluation_at_ell_is_consistent(abc, x):
    a, b, _ = abc
    assert (a * b).at_ell(x) == a.at_ell(x) * b.at_ell(x)


def test_series_order_mismatch():
    with pytest.raises(ValueError):
        K2Series.one(2) * K2Series.one(3)


def test_series_order_and_evaluation():
    s = K2Series([1, ELL, ELL * ELL], 2)
    assert s.evaluate(Fraction(1, 2), Fraction(3)) == 1 + Fraction(3, 2) + Fraction(9, 4)
    assert s.ell_coefficient(1) == [0, 1, 0]
    assert s.at_ell(2).scalars() == [1, 2, 4]
    with pytest.raises(ValueError):
        s.scalars()
    with pytest.raises(ValueError):
        K2Series([1, 2, 3], 1)
    with pytest.raises(ValueError):
        s.truncate(3)
