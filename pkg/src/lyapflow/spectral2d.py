"""Leading eigenvalue of the d=2 companion problem in the cosine basis.

With ``v(theta) = sum_j v_j cos(4 j theta)`` the companion equation becomes the
three-term recurrence

    k^2 a_j v_{j-1} + (mu + 16 j^2 + k^2 b_j) v_j + k^2 c_j v_{j+1} = 0,

truncated at ``j = N`` with ``v_{N+1} = 0``.  ``L(k, ell) / tau^2`` is then
``ell + ell^2/2 + mu``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from lyapflow.eigen import BranchResult, quadratic_derivatives, solve_adaptive
from lyapflow.exact import ELL, PolyL


def coeff_a(j, ell=ELL):
    """Sub-diagonal recurrence coefficient; works for PolyL, float, or array ``j``."""
    if np.ndim(j) == 0:
        if j == 0:
            return ell * 0
        if j == 1:
            return (ell / 2 - 1) * ell
        return (ell / 2 + 1 - 2 * j) * (ell / 2 + 2 - 2 * j)
    j = np.asarray(j)
    out = (ell / 2 + 1 - 2 * j) * (ell / 2 + 2 - 2 * j)
    out = np.where(j == 1, (ell / 2 - 1) * ell, out)
    return np.where(j == 0, 0.0, out)


def coeff_b(j, ell=ELL):
    return ell * ell / 2 + ell - 8 * j * j


def coeff_c(j, ell=ELL):
    return (ell / 2 + 1 + 2 * j) * (ell / 2 + 2 + 2 * j)


@dataclass
class CosineOperator:
    k2: float
    ell: float
    N: int
    diag: np.ndarray
    sub: np.ndarray  # sub[j-1] = M[j, j-1]
    sup: np.ndarray  # sup[j] = M[j, j+1]

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.sub, -1) + np.diag(self.sup, 1)


def _check(k2: float, N: int | None = None) -> None:
    if not 0 <= k2 < 1:
        raise ValueError(f"k2 must lie in [0, 1), got {k2}")
    if N is not None and N < 4:
        raise ValueError("truncation N must be at least 4")


def build_operator_2d(k2: float, ell: float, N: int) -> CosineOperator:
    _check(k2, N)
    j = np.arange(N + 1, dtype=float)
    ell = float(ell)
    diag = -16.0 * j * j - k2 * coeff_b(j, ell)
    sub = -k2 * coeff_a(j[1:], ell)
    sup = -k2 * coeff_c(j[:-1], ell)
    return CosineOperator(k2, ell, N, diag, np.asarray(sub, float), np.asarray(sup, float))


def _builder(k2: float, ell: float, derivatives: bool):
    def build(N):
        dense = lambda x: build_operator_2d(k2, x, N).dense()  # noqa: E731
        if derivatives:
            return quadratic_derivatives(dense, ell)
        return dense(ell), None, None

    return build


def leading_mu_2d(
    k2: float, ell: float, tol: float = 1e-10, derivatives: bool = False, N0: int = 16, Nmax: int = 4096
) -> BranchResult:
    """Eigenvalue of largest real part; eigenvector normalized so sum_j v_j = 1."""
    _check(k2)
    return solve_adaptive(
        _builder(k2, float(ell), derivatives),
        lambda N: np.ones(N + 1),
        tol=tol,
        N0=N0,
        Nmax=Nmax,
        derivatives=derivatives,
    )


def affine_shift(d: int, ell):
    """(d-1) ell + (d-1)/d ell^2."""
    return (d - 1) * ell + (d - 1) / d * ell * ell


def L_2d(k2: float, ell: float, tol: float = 1e-10) -> float:
    """L(k, ell) / tau^2 for d = 2."""
    return affine_shift(2, float(ell)) + leading_mu_2d(k2, ell, tol).mu


def L_derivatives_2d(k2: float, ell: float, tol: float = 1e-10) -> tuple[float, float, float]:
    """(L, dL/dell, d2L/dell2) in units of tau^2, by eigenvalue perturbation."""
    r = leading_mu_2d(k2, ell, tol, derivatives=True)
    ell = float(ell)
    return ell + ell * ell / 2 + r.mu, 1.0 + ell + r.dmu, 1.0 + r.d2mu


def exact_band(j: int) -> tuple[PolyL, PolyL, PolyL]:
    """(a_j, b_j, c_j) as polynomials in ell."""
    return coeff_a(j), coeff_b(j), coeff_c(j)
