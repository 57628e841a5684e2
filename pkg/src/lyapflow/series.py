"""Exact perturbation series in k^2 for the companion eigenvalue.

Coefficients are polynomials in ell with rational coefficients, so every
expansion (eigenvalue branches, L, the cumulants, the rate function)
comes out as an exact identity.  Also hosts the numerical Legendre
transform and the ell -> -ell-d symmetry checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from lyapflow.exact import ELL, K2Series, PolyL
from lyapflow.spectral2d import coeff_a, coeff_b, coeff_c
from lyapflow.spectral3d import cal_A_column


@dataclass(frozen=True)
class MuSeries:
    d: int
    branch: int
    series: K2Series
    eigvec: tuple = field(default=(), repr=False, compare=False)  # v^(n) as {index: PolyL}

    @property
    def order(self) -> int:
        return self.series.order


def _add(out: dict, key, c: PolyL) -> None:
    if c.is_zero():
        return
    v = out.get(key)
    v = c if v is None else v + c
    if v.is_zero():
        out.pop(key, None)
    else:
        out[key] = v


def _poly(x) -> PolyL:
    return x if isinstance(x, PolyL) else PolyL.const(x)


def mu_series_2d(branch: int, order: int) -> MuSeries:
    """Branch ``l`` of the d=2 eigenvalue: mu = -16 l^2 + sum_n mu^(n) k^(2n)."""
    l = branch
    if l < 0 or order < 0:
        raise ValueError("branch and order must be natural numbers")
    band = {}

    def abc(j):
        if j not in band:
            band[j] = (_poly(coeff_a(j)), _poly(coeff_b(j)), _poly(coeff_c(j)))
        return band[j]

    mus = [PolyL.const(-16 * l * l)]
    vs: list[dict[int, PolyL]] = [{l: PolyL.const(1)}]
    for n in range(order):
        prev = vs[n]
        # (a v_{j-1} + b v_j + c v_{j+1}) from v^(n)
        rhs: dict[int, PolyL] = {}
        for j, v in prev.items():
            for jj in (j - 1, j, j + 1):
                if jj < 0:
                    continue
                a, b, c = abc(jj)
                coeff = {j + 1: a, j: b, j - 1: c}[jj]
                _add(rhs, jj, coeff * v)
        for r in range(1, n + 1):
            for j, v in vs[n + 1 - r].items():
                _add(rhs, j, mus[r] * v)
        mu_next = -rhs.get(l, PolyL())
        mus.append(mu_next)
        nxt: dict[int, PolyL] = {}
        for j, v in rhs.items():
            if j == l:
                continue
            _add(nxt, j, v / (16 * (l * l - j * j)))
        total = PolyL()
        for v in nxt.values():
            total = total + v
        _add(nxt, l, -total)
        vs.append(nxt)
    return MuSeries(2, l, K2Series(mus, order), tuple(vs))


def mu_series_3d(branch: int, order: int) -> MuSeries:
    """Branch ``l`` in {0, 1} of the d=3 eigenvalue, normalized by v_{l0} = 1."""
    l = branch
    if l not in (0, 1):
        raise ValueError("degenerate branch out of scope: only l = 0 and l = 1 are simple")
    if order < 0:
        raise ValueError("order must be a natural number")
    lam = lambda i: 2 * i * (2 * i + 1)  # noqa: E731
    mus = [PolyL.const(-lam(l))]
    vs: list[dict[tuple[int, int], PolyL]] = [{(l, 0): PolyL.const(1)}]
    for n in range(order):
        rhs: dict[tuple[int, int], PolyL] = {}
        for (i, j), v in vs[n].items():
            for lp, mp, c in cal_A_column(i, 2 * j):
                if mp % 2:
                    raise ArithmeticError(f"odd-m leakage from eps_{i}{j}")
                _add(rhs, (lp, mp // 2), c * v)
        for r in range(1, n + 1):
            for key, v in vs[n + 1 - r].items():
                _add(rhs, key, mus[r] * v)
        mus.append(-rhs.get((l, 0), PolyL()))
        nxt: dict[tuple[int, int], PolyL] = {}
        for (i, j), v in rhs.items():
            if i == l:
                if j != 0:
                    raise ArithmeticError("degenerate unperturbed eigenvalue")
                continue
            _add(nxt, (i, j), v / (lam(l) - lam(i)))
        vs.append(nxt)
    return MuSeries(3, l, K2Series(mus, order), tuple(vs))


def mu_series(d: int, branch: int, order: int) -> MuSeries:
    if d == 2:
        return mu_series_2d(branch, order)
    if d == 3:
        return mu_series_3d(branch, order)
    raise ValueError("series are available for d = 2 and d = 3")


def affine_shift_poly(d: int) -> PolyL:
    """(d-1) ell + (d-1)/d ell^2."""
    return PolyL((0, d - 1, Fraction(d - 1, d)))


def L_series(d: int, order: int) -> K2Series:
    """L(k, ell) / tau^2 as a k^2-series with ell-polynomial coefficients."""
    mu = mu_series(d, 0, order).series
    shift = K2Series([affine_shift_poly(d)], order)
    return mu + shift


def cumulant_series(d: int, j: int, order: int) -> K2Series:
    """gamma_j / (j! tau^2): the ell^j coefficient of L_series."""
    if j < 1:
        raise ValueError("cumulant order must be at least 1")
    return K2Series(L_series(d, order).ell_coefficient(j), order)


# rate function -----------------------------------------------------------


def _compose(poly: PolyL, arg: K2Series) -> K2Series:
    """poly(arg) where arg is a K2Series; scalar coefficients of poly."""
    acc = K2Series.zero(arg.order)
    one = K2Series.one(arg.order)
    for c in reversed(poly.coeffs):
        acc = acc * arg + one * c
    return acc


def _compose_series(f: K2Series, p: K2Series) -> K2Series:
    """sum_n k^(2n) f_n(p) with p itself a k^2-series (ell' coefficients)."""
    order = f.order
    out = K2Series.zero(order)
    shift = K2Series.one(order)
    kk = K2Series([PolyL(), PolyL.const(1)], order) if order >= 1 else None
    for n, fn in enumerate(f.coeffs):
        out = out + shift * _compose(fn, p)
        if kk is not None:
            shift = shift * kk
    return out


def rate_series(d: int, order: int) -> K2Series:
    """L*(k, ell) / tau^2 as a k^2-series in ell' = ell / tau^2.

    The stationary point of p -> p ell' - L(p) is expanded order by order.
    The unperturbed curvature is the constant 2(d-1)/d, so each correction is
    the current residual divided by that constant and no division by
    polynomials is ever needed.
    """
    F = L_series(d, order)
    dF = F.map(lambda c: c.deriv())
    curv = F[0].deriv(2)
    if curv.degree != 0:
        raise ArithmeticError("unperturbed curvature is not constant")
    c = curv[0]
    # p0 solves ell' = dF_0(p0), dF_0 linear
    slope, icpt = dF[0][1], dF[0][0]
    p = K2Series([(ELL - icpt) / slope], order)
    ellp = K2Series([ELL], order)
    for n in range(1, order + 1):
        resid = ellp - _compose_series(dF, p)
        for m in range(n):
            if not resid[m].is_zero():
                raise ArithmeticError("stationarity lost at lower order")
        corr = [PolyL()] * (order + 1)
        corr[n] = resid[n] / c
        p = p + K2Series(corr, order)
    return p * ellp - _compose_series(F, p)


# numerical Legendre transform ---------------------------------------------


@dataclass
class LegendreResult:
    value: float
    p_star: float
    convex: bool


def _numeric_derivative(L: Callable[[float], float], p: float) -> float:
    h = 1e-5 * max(1.0, abs(p))
    return (L(p + h) - L(p - h)) / (2 * h)


def legendre_numeric(
    L: Callable[[float], float],
    ell: float,
    bracket: tuple[float, float],
    dL: Callable[[float], float] | None = None,
    xtol: float = 1e-10,
) -> LegendreResult:
    """Stationary value of p -> p ell - L(p), by bisection on L'(p) = ell."""
    lo, hi = map(float, bracket)
    if not lo < hi:
        raise ValueError("bracket must satisfy lo < hi")
    deriv = dL if dL is not None else (lambda p: _numeric_derivative(L, p))
    # convexity by sampled second differences
    xs = [lo + (hi - lo) * t / 8 for t in range(9)]
    ys = [L(x) for x in xs]
    scale = max(1.0, max(abs(y) for y in ys))
    convex = all(ys[i - 1] - 2 * ys[i] + ys[i + 1] >= -1e-12 * scale for i in range(1, 8))
    glo, ghi = deriv(lo) - ell, deriv(hi) - ell
    if glo > 0 or ghi < 0:
        raise ValueError(f"no stationary point for ell={ell} in bracket {bracket}")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if deriv(mid) - ell < 0:
            lo = mid
        else:
            hi = mid
    p = 0.5 * (lo + hi)
    return LegendreResult(p * ell - L(p), p, convex)


# symmetry ell -> -ell - d --------------------------------------------------


@dataclass
class SymmetryReport:
    max_defect_L: float
    max_defect_rate: float | None = None
    exact: bool = False

    def passed(self, tol: float = 0.0) -> bool:
        ok = self.max_defect_L <= tol
        if self.max_defect_rate is not None:
            ok = ok and self.max_defect_rate <= tol
        return ok


def symmetry_check(
    d: int,
    L,
    grid: Sequence[float] = (),
    Lstar=None,
) -> SymmetryReport:
    """Defects of L(ell) = L(-ell-d) and L*(ell) = L*(-ell) - ell d.

    ``L`` (and ``Lstar``) may be exact K2Series, checked coefficient-wise by
    substitution, or callables evaluated on ``grid``.
    """
    if isinstance(L, K2Series):
        diff = L - L.substitute_ell(-ELL - d)
        defect = 0.0 if all(c.is_zero() for c in diff.coeffs) else math.inf
        rate_defect = None
        if Lstar is not None:
            rdiff = Lstar - Lstar.substitute_ell(-ELL) + K2Series([ELL * d], Lstar.order)
            rate_defect = 0.0 if all(c.is_zero() for c in rdiff.coeffs) else math.inf
        return SymmetryReport(defect, rate_defect, exact=True)
    defect = max((abs(L(x) - L(-x - d)) for x in grid), default=0.0)
    rate_defect = None
    if Lstar is not None:
        rate_defect = max((abs(Lstar(x) - Lstar(-x) + x * d) for x in grid), default=0.0)
    return SymmetryReport(defect, rate_defect)
