"""The d=3 companion problem on the spherical-harmonic basis.

``e_lm = P_{2l}^{2m}(cos theta) cos(2 m phi)`` for ``0 <= m <= l``.  Each
strain generator ``A_12``, ``A_13``, ``A_23`` maps ``e_lm`` to a short
combination of neighbours with coefficients linear in ell.  The operator
``cal_A = A_12^2 + A_13^2 + A_23^2`` is assembled by applying those stencils
twice, and the eigenproblem is posed on the even-m subspace
``eps_ij = e_{i,2j}``, ``0 <= j <= i // 2``:

    mu v_ij = -2i(2i+1) v_ij - k^2 (cal_A v)_ij.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from lyapflow.eigen import BranchResult, eigvals, solve_adaptive
from lyapflow.exact import ELL, PolyL

WHICH = (12, 13, 23)


class OddLeakage(ArithmeticError):
    """cal_A produced a component outside the even-m subspace."""


@dataclass(frozen=True)
class StencilTerm:
    dl: int
    dm: int
    coeff: PolyL


# sequences in l (coefficients are polynomials in ell)


def seq_a(l: int) -> PolyL:
    return (ELL + (2 * l + 1)) / (4 * (4 * l - 1) * (4 * l + 1))


def seq_b(l: int) -> PolyL:
    return -(2 * ELL + 3) / (4 * (4 * l - 1) * (4 * l + 3))


def seq_c(l: int) -> PolyL:
    return (ELL - 2 * l) / (4 * (4 * l + 1) * (4 * l + 3))


def frak_a(l: int, m: int) -> PolyL:
    return seq_a(l) * (-6 * (2 * l + 2 * m - 1) * (2 * l + 2 * m))


def frak_b(l: int, m: int) -> PolyL:
    return seq_b(l) * (4 * (2 * l * l + l - 6 * m * m))


def frak_c(l: int, m: int) -> PolyL:
    return seq_c(l) * (-6 * (2 * l - 2 * m + 1) * (2 * l - 2 * m + 2))


def _falling(top: int, count: int) -> int:
    """top (top-1) ... (top-count+1): a factorial ratio without factorials."""
    out = 1
    for t in range(count):
        out *= top - t
    return out


def alpha(l: int, m: int) -> PolyL:
    return seq_a(l) * _falling(2 * l + 2 * m, 4)


def beta(l: int, m: int) -> PolyL:
    return seq_b(l) * (_falling(2 * l + 2 * m, 2) * _falling(2 * l - 2 * m + 2, 2))


def gamma(l: int, m: int) -> PolyL:
    return seq_c(l) * _falling(2 * l - 2 * m + 4, 4)


def _m_changing(l: int, m: int) -> list[tuple[int, int, PolyL]]:
    """The m -> m-1 and m -> m+1 terms for m > 0, with the m = l-1 and m = l cuts."""
    down = [(l - 1, m - 1, alpha(l, m)), (l, m - 1, beta(l, m)), (l + 1, m - 1, gamma(l, m))]
    if m < l - 1:
        up = [(l - 1, m + 1, seq_a(l)), (l, m + 1, seq_b(l)), (l + 1, m + 1, seq_c(l))]
    elif m == l - 1:
        up = [(l, m + 1, seq_b(l)), (l + 1, m + 1, seq_c(l))]
    else:  # m == l
        up = [(l + 1, m + 1, seq_c(l))]
    return down + up


def _m_raising_from_zero(l: int) -> list[tuple[int, int, PolyL]]:
    if l == 0:
        return [(1, 1, seq_c(0))]
    if l == 1:
        return [(1, 1, seq_b(1)), (2, 1, seq_c(1))]
    return [(l - 1, 1, seq_a(l)), (l, 1, seq_b(l)), (l + 1, 1, seq_c(l))]


def _m_preserving(l: int, m: int) -> list[tuple[int, int, PolyL]]:
    if l == 0:
        return [(1, 0, frak_c(0, 0))]
    if m == l:
        return [(l, m, frak_b(l, m)), (l + 1, m, frak_c(l, m))]
    return [(l - 1, m, frak_a(l, m)), (l, m, frak_b(l, m)), (l + 1, m, frak_c(l, m))]


def apply_A(which: int, l: int, m: int) -> list[tuple[int, int, PolyL]]:
    """``A_which e_lm`` as a list of ``(l', m', coefficient)``."""
    if which not in WHICH:
        raise ValueError(f"which must be one of {WHICH}")
    if not 0 <= m <= l:
        raise ValueError(f"need 0 <= m <= l, got l={l}, m={m}")
    if which == 12:
        if m == 0:
            return [(lp, mp, c * 4) for lp, mp, c in _m_raising_from_zero(l)]
        return [(lp, mp, c * 2) for lp, mp, c in _m_changing(l, m)]
    sign = 1 if which == 13 else -1
    if m == 0:
        changing = [(lp, mp, c * (2 * sign)) for lp, mp, c in _m_raising_from_zero(l)]
    else:
        changing = [(lp, mp, c * sign) for lp, mp, c in _m_changing(l, m)]
    return _m_preserving(l, m) + changing


def stencil(which: int, l: int, m: int) -> list[StencilTerm]:
    return [StencilTerm(lp - l, mp - m, c) for lp, mp, c in apply_A(which, l, m)]


def _accumulate(out: dict, key, c: PolyL) -> None:
    v = out.get(key)
    v = c if v is None else v + c
    if v.is_zero():
        out.pop(key, None)
    else:
        out[key] = v


@lru_cache(maxsize=None)
def cal_A_column(l: int, m: int) -> tuple[tuple[int, int, PolyL], ...]:
    """Exact ``cal_A e_lm`` on the full (l, m) lattice (reaches l + 2)."""
    out: dict = {}
    for which in WHICH:
        for l1, m1, c1 in apply_A(which, l, m):
            for l2, m2, c2 in apply_A(which, l1, m1):
                _accumulate(out, (l2, m2), c1 * c2)
    return tuple(sorted((lp, mp, c) for (lp, mp), c in out.items()))


def odd_leakage(i: int, j: int) -> list[tuple[int, int, PolyL]]:
    """Odd-m components of ``cal_A eps_ij`` (exactly empty when the subspace is invariant)."""
    return [(lp, mp, c) for lp, mp, c in cal_A_column(i, 2 * j) if mp % 2]


@dataclass(frozen=True)
class EpsilonBasis:
    N: int

    @property
    def indices(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.N + 1) for j in range(i // 2 + 1)]

    def __len__(self) -> int:
        return sum(i // 2 + 1 for i in range(self.N + 1))

    def index(self, i: int, j: int) -> int:
        # sum_{i' < i} (i'//2 + 1) in closed form
        h = i // 2
        before = h * h + (h if i % 2 else 0) + (i - h)
        return before + j


@lru_cache(maxsize=64)
def _triplets(N: int) -> tuple[np.ndarray, np.ndarray, tuple[PolyL, ...]]:
    basis = EpsilonBasis(N)
    rows, cols, polys = [], [], []
    for col, (i, j) in enumerate(basis.indices):
        for lp, mp, c in cal_A_column(i, 2 * j):
            if mp % 2:
                raise OddLeakage(f"cal_A eps_{i}{j} has component on e_{lp}{mp}")
            if lp > N:
                continue  # halo dropped by the truncation
            rows.append(basis.index(lp, mp // 2))
            cols.append(col)
            polys.append(c)
    return np.array(rows, dtype=np.intp), np.array(cols, dtype=np.intp), tuple(polys)


def _casimir_diag(N: int) -> np.ndarray:
    basis = EpsilonBasis(N)
    return np.array([-2.0 * i * (2 * i + 1) for i, _ in basis.indices])


@lru_cache(maxsize=64)
def _coeff_table(N: int) -> np.ndarray:
    """Float coefficients (c0, c1, c2) of each quadratic entry polynomial."""
    _, _, polys = _triplets(N)
    table = np.zeros((len(polys), 3))
    for r, p in enumerate(polys):
        if p.degree > 2:
            raise ArithmeticError("cal_A entries must be quadratic in ell")
        table[r, : len(p.coeffs)] = [float(c) for c in p.coeffs]
    return table


@lru_cache(maxsize=64)
def _log_norms(N: int) -> np.ndarray:
    """log of the L2 norm of eps_ij = P_{2i}^{4j}(cos theta) cos(4 j phi), relative to eps_00."""
    out = []
    for i, j in EpsilonBasis(N).indices:
        n, m = 2 * i, 4 * j
        out.append(
            0.5 * (math.log(2.0 / (2 * n + 1)) + math.lgamma(n + m + 1) - math.lgamma(n - m + 1))
            + 0.5 * math.log(2.0 * math.pi if j == 0 else math.pi)
        )
    out = np.array(out)
    return out - out[0]


def cal_A_matrix(ell: float, N: int, order: int = 0, normalized: bool = False) -> np.ndarray:
    """Dense cal_A (or its ell-derivative of the given order) on the eps basis.

    With ``normalized`` the matrix is expressed in the L2-normalized basis
    (a diagonal similarity).  The raw basis has a dynamic range that grows
    like l^(4m) and overflows double precision near N = 48.
    """
    rows, cols, _ = _triplets(N)
    c = _coeff_table(N)
    if order == 0:
        vals = c[:, 0] + ell * (c[:, 1] + ell * c[:, 2])
    elif order == 1:
        vals = c[:, 1] + 2.0 * ell * c[:, 2]
    elif order == 2:
        vals = 2.0 * c[:, 2]
    else:
        vals = np.zeros(len(c))
    if normalized:
        lg = _log_norms(N)
        vals = vals * np.exp(lg[rows] - lg[cols])
    n = len(EpsilonBasis(N))
    out = np.zeros((n, n))
    np.add.at(out, (rows, cols), vals)
    return out


def _check(k2: float, N: int | None = None) -> None:
    if not 0 <= k2 < 1:
        raise ValueError(f"k2 must lie in [0, 1), got {k2}")
    if N is not None and N < 4:
        raise ValueError("truncation N must be at least 4")


def build_operator_3d(k2: float, ell: float, N: int, normalized: bool = True) -> np.ndarray:
    """Dense matrix of -2i(2i+1) Id - k2 cal_A on eps_ij, i <= N."""
    _check(k2, N)
    return np.diag(_casimir_diag(N)) - k2 * cal_A_matrix(float(ell), N, normalized=normalized)


def _builder(k2: float, ell: float, derivatives: bool):
    def build(N):
        a = build_operator_3d(k2, ell, N)
        if not derivatives:
            return a, None, None
        return a, -k2 * cal_A_matrix(ell, N, 1, True), -k2 * cal_A_matrix(ell, N, 2, True)

    return build


def leading_mu_3d(
    k2: float, ell: float, tol: float = 1e-10, derivatives: bool = False, N0: int = 8, Nmax: int = 128
) -> BranchResult:
    """Leading eigenvalue.

    The eigenvector is returned in the L2-normalized basis (relative to
    eps_00) and scaled so that its (0, 0) entry is 1.
    """
    _check(k2)

    def weights(N):
        w = np.zeros(len(EpsilonBasis(N)))
        w[0] = 1.0
        return w

    return solve_adaptive(_builder(k2, float(ell), derivatives), weights, tol, N0, Nmax, derivatives)


def eigenvalues_3d(k2: float, ell: float, N: int) -> np.ndarray:
    """All eigenvalues of the truncated operator, sorted by decreasing real part."""
    ev = eigvals(build_operator_3d(k2, ell, N))
    return ev[np.argsort(-ev.real, kind="stable")]


def L_3d(k2: float, ell: float, tol: float = 1e-10) -> float:
    """L(k, ell) / tau^2 for d = 3."""
    ell = float(ell)
    return 2.0 * ell + 2.0 / 3.0 * ell * ell + leading_mu_3d(k2, ell, tol).mu


def L_derivatives_3d(k2: float, ell: float, tol: float = 1e-10) -> tuple[float, float, float]:
    r = leading_mu_3d(k2, ell, tol, derivatives=True)
    ell = float(ell)
    return 2.0 * ell + 2.0 / 3.0 * ell * ell + r.mu, 2.0 + 4.0 / 3.0 * ell + r.dmu, 4.0 / 3.0 + r.d2mu
