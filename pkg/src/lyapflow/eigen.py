"""Dense nonsymmetric eigensolver and leading-eigenpair utilities.

Pipeline: diagonal balancing, Householder reduction to Hessenberg form (skipped
for matrices already Hessenberg, e.g. tridiagonal), Francis double-shift QR.
The leading eigenvalue (largest real part) is then polished by two-sided
inverse iteration, which also yields the left and right eigenvectors needed
for analytic derivatives.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from lyapflow import _backend

class BranchCollision(ArithmeticError):
    """The eigenvalue of largest real part is not real."""


class NonConvergence(ArithmeticError):
    """Adaptive truncation failed to settle within the size cap."""


def balance(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal similarity ``D^-1 A D`` equalizing row and column norms (powers of 2)."""
    b = np.array(a, dtype=float, order="C", copy=True)
    scale = _backend.balance(b)
    return b, np.asarray(scale)


def is_hessenberg(a: np.ndarray) -> bool:
    return not np.any(np.tril(a, -2))


def eigvals(a: np.ndarray) -> np.ndarray:
    """All eigenvalues of a real square matrix (complex array, unordered)."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("square matrix required")
    if a.shape[0] == 0:
        return np.zeros(0, dtype=complex)
    b, _ = balance(a)
    if not is_hessenberg(b):
        b = _backend.orthes(b)
    wr, wi = _backend.hqr(np.ascontiguousarray(b))
    return np.asarray(wr) + 1j * np.asarray(wi)


@dataclass
class Eigenpair:
    mu: float
    imag: float
    right: np.ndarray
    left: np.ndarray
    residual: float


def _inverse_iteration(a: np.ndarray, shift: float, iters: int = 3) -> np.ndarray:
    n = a.shape[0]
    lu = sla.lu_factor(a - shift * np.eye(n), check_finite=False)
    x = np.ones(n) / np.sqrt(n)
    for _ in range(iters):
        x = sla.lu_solve(lu, x, check_finite=False)
        nrm = np.linalg.norm(x)
        if not np.isfinite(nrm) or nrm == 0.0:
            raise ArithmeticError("inverse iteration broke down")
        x /= nrm
    return x


def leading_eigenpair(a: np.ndarray, imag_tol: float = 1e-10) -> Eigenpair:
    """Eigenvalue of largest real part with its left/right eigenvectors.

    Raises :class:`BranchCollision` when that eigenvalue has a non-negligible
    imaginary part.
    """
    a = np.asarray(a, dtype=float)
    ev = eigvals(a)
    idx = int(np.argmax(ev.real))
    mu0 = ev[idx]
    if abs(mu0.imag) > imag_tol * (1.0 + abs(mu0.real)):
        raise BranchCollision(f"leading eigenvalue {mu0} is complex")
    mu = float(mu0.real)
    # small offset keeps the shifted matrix invertible
    delta = 1e-9 * (1.0 + abs(mu))
    # stay well inside the gap to the nearest distinct eigenvalue; copies of
    # mu itself (repeated eigenvalues) do not constrain the offset
    gaps = np.abs(np.delete(ev, idx) - mu)
    gaps = gaps[gaps > 1e-12 * (1.0 + abs(mu))]
    if gaps.size:
        delta = min(delta, 1e-3 * float(gaps.min()))
    v = _inverse_iteration(a, mu + delta)
    w = _inverse_iteration(a.T, mu + delta)
    av = a @ v
    mu_ref = float(w @ av / (w @ v))
    if abs(mu_ref - mu) <= 1e-6 * (1.0 + abs(mu)):
        mu = mu_ref
    resid = float(np.max(np.abs(av - mu * v)))
    return Eigenpair(mu, float(mu0.imag), v, w, resid)


def eigen_derivatives(
    pair: Eigenpair, a: np.ndarray, da: np.ndarray, dda: np.ndarray
) -> tuple[float, float]:
    """First and second derivatives of a simple eigenvalue of ``A(t)``.

    ``da`` and ``dda`` are dA/dt and d2A/dt2 at the point.
    """
    v, w, mu = pair.right, pair.left, pair.mu
    wv = float(w @ v)
    mu1 = float(w @ (da @ v)) / wv
    n = a.shape[0]
    bordered = np.zeros((n + 1, n + 1))
    bordered[:n, :n] = a - mu * np.eye(n)
    bordered[:n, n] = v
    bordered[n, :n] = w
    rhs = np.zeros(n + 1)
    rhs[:n] = -(da @ v - mu1 * v)
    # the condition estimate is swamped by the eigenvector's tiny tail
    # components; the solution itself is accurate (checked against differences)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        dv = sla.solve(bordered, rhs, check_finite=False)[:n]
    mu2 = (float(w @ (dda @ v)) + 2.0 * float(w @ (da @ dv - mu1 * dv))) / wv
    return mu1, mu2


@dataclass
class BranchResult:
    mu: float
    eigvec: np.ndarray
    N_used: int
    residual: float
    imag: float = 0.0
    dmu: float | None = None
    d2mu: float | None = None


def _normalized(pair: Eigenpair, a: np.ndarray, norm_weights: np.ndarray) -> tuple[np.ndarray, float]:
    s = float(norm_weights @ pair.right)
    if s == 0.0:
        raise ArithmeticError("eigenvector cannot be normalized")
    v = pair.right / s
    return v, float(np.max(np.abs(a @ v - pair.mu * v)))


def solve_adaptive(
    build,
    norm_weights,
    tol: float = 1e-10,
    N0: int = 16,
    Nmax: int = 4096,
    derivatives: bool = False,
) -> BranchResult:
    """Leading eigenpair of ``build(N)`` with N doubled until |mu(2N) - mu(N)| < tol.

    ``build(N)`` returns ``(A, dA, d2A)`` where the last two are the first and
    second derivatives in ell (or None when not needed); ``norm_weights(N)``
    gives the linear functional used to normalize the eigenvector.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    N = N0
    a, _, _ = build(N)
    prev = leading_eigenpair(a)
    while True:
        if 2 * N > Nmax:
            raise NonConvergence(f"no convergence to {tol} up to N={Nmax}")
        N *= 2
        a, da, dda = build(N)
        pair = leading_eigenpair(a)
        if abs(pair.mu - prev.mu) < tol:
            break
        prev = pair
    v, resid = _normalized(pair, a, norm_weights(N))
    out = BranchResult(pair.mu, v, N, resid, pair.imag)
    if derivatives:
        out.dmu, out.d2mu = eigen_derivatives(pair, a, da, dda)
    return out


def quadratic_derivatives(fn, ell: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(F(ell), F'(ell), F''(ell)) for an array-valued ``fn`` quadratic in ell.

    Central differences with unit step are exact for quadratics.
    """
    f0, fp, fm = fn(ell), fn(ell + 1.0), fn(ell - 1.0)
    return f0, 0.5 * (fp - fm), fp - 2.0 * f0 + fm
