"""Plottable data for L, its Legendre transform, and the cumulants vs strain.

Everything is in units of tau^2 (equivalently tau = 1).
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from lyapflow.spectral2d import L_derivatives_2d
from lyapflow.spectral3d import L_derivatives_3d

FD_STEP = 0.05


def L_derivatives(d: int, k2: float, ell: float, tol: float = 1e-11) -> tuple[float, float, float]:
    if d == 2:
        return L_derivatives_2d(k2, ell, tol)
    if d == 3:
        return L_derivatives_3d(k2, ell, tol)
    raise ValueError("numeric L is available for d = 2 and d = 3")


def cumulants_numeric(d: int, k2: float, jmax: int = 4, tol: float = 1e-11) -> list[float]:
    """gamma_1..gamma_jmax / tau^2 from the spectral L at ell = 0.

    The first two come from analytic eigenvalue derivatives; the third and
    fourth from central differences of L'' with step FD_STEP.
    """
    if not 1 <= jmax <= 4:
        raise ValueError("jmax must be between 1 and 4")
    _, d1, d2 = L_derivatives(d, k2, 0.0, tol)
    out = [d1, d2]
    if jmax > 2:
        h = FD_STEP
        dp = L_derivatives(d, k2, h, tol)[2]
        dm = L_derivatives(d, k2, -h, tol)[2]
        out += [(dp - dm) / (2 * h), (dp - 2 * d2 + dm) / (h * h)]
    return out[:jmax]


def cumulants_vs_strain(d: int, points: int = 11, jmax: int = 4) -> tuple[list[str], list[list[float]]]:
    """gamma_j against the strain parameter 1/d - k^2, for k^2 from 1/d down to 0."""
    if points < 2:
        raise ValueError("need at least 2 points")
    cols = ["strain", "k2"] + [f"gamma{j}" for j in range(1, jmax + 1)]
    rows = []
    for s in np.linspace(0.0, 1.0 / d, points):
        k2 = max(1.0 / d - float(s), 0.0)
        rows.append([float(s), k2] + cumulants_numeric(d, k2, jmax))
    return cols, rows


def legendre_spectral(d: int, k2: float, x: float, tol: float = 1e-11, ptol: float = 1e-12) -> float:
    """L*(x) = sup_p (p x - L(p)) with the spectral L.

    Newton's method on L'(p) = x using the analytic L''; once the root is
    bracketed, steps leaving the bracket are replaced by bisection.
    """
    _, g1, g2 = L_derivatives(d, k2, 0.0, tol)
    p = (x - g1) / g2
    lo, hi = -math.inf, math.inf
    for _ in range(100):
        L, dL, d2L = L_derivatives(d, k2, p, tol)
        if d2L <= 0:
            raise ArithmeticError(f"L is not convex at {p}")
        r = dL - x
        if r < 0:
            lo = p
        else:
            hi = p
        step = r / d2L
        new = p - step
        if not lo < new < hi:
            new = 0.5 * (lo + hi) if math.isfinite(lo) and math.isfinite(hi) else p - 2.0 * step
        if abs(new - p) < ptol * (1.0 + abs(p)):
            L = L_derivatives(d, k2, new, tol)[0]
            return new * x - L
        p = new
    raise ArithmeticError(f"no stationary point found for {x}")


def L_and_rate(d: int, grid: Sequence[float] | None = None) -> tuple[list[str], list[list[float]]]:
    """L, L* and their two-cumulant approximations at k^2 = 1/d.

    The grid always contains ell = 0 (where L vanishes) and ell = gamma_1
    (where L* vanishes).
    """
    k2 = 1.0 / d
    _, g1, g2 = L_derivatives(d, k2, 0.0)
    if grid is None:
        grid = np.linspace(-d - 1.0, 1.0, 2 * (d + 2) * 4 + 1)
    xs = sorted(set(float(x) for x in grid) | {0.0, g1})
    rows = []
    for x in xs:
        L = L_derivatives(d, k2, x)[0]
        Ls = legendre_spectral(d, k2, x)
        rows.append([x, L, Ls, x * g1 + x * x * g2 / 2, (x - g1) ** 2 / (2 * g2)])
    return ["ell", "L", "Lstar", "L_quadratic", "Lstar_quadratic"], rows


def figure_data(which: str, d: int = 2, points: int = 11) -> tuple[list[str], list[list[float]]]:
    if which == "L-and-rate":
        return L_and_rate(d)
    if which == "cumulants-vs-strain":
        return cumulants_vs_strain(d, points)
    raise ValueError(f"unknown figure {which!r}")


def gaussian_check(rows: list[list[float]]) -> float:
    """Largest |L - L_quadratic| near ell = 0; small when the growth is near-lognormal."""
    return max((abs(r[1] - r[3]) for r in rows if abs(r[0]) <= 0.1), default=math.nan)
