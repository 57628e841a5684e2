"""Complete elliptic integrals, the nome, and the d=2 small-ell closed forms.

K and E come from the arithmetic-geometric mean; the nome is
``q = exp(-pi K(k') / K(k))``.  The closed forms are the first two cumulants
of the plain d=2 product (in units of tau^2) and the first-order branch data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

AGM_RTOL = 1e-15
AGM_MAXITER = 64
QSERIES_CUTOFF = 1e-18


@dataclass(frozen=True)
class EllipticData:
    k: float
    K: float
    E: float
    kprime: float
    q: float


def _check_modulus(k: float) -> float:
    k = float(k)
    if not math.isfinite(k) or k < 0:
        raise ValueError(f"modulus must lie in [0, 1), got {k}")
    if k >= 1:
        raise ValueError("K diverges at k = 1")
    return k


def agm_KE(k: float) -> tuple[float, float]:
    """(K(k), E(k)) by the AGM with the c_n correction sum for E."""
    a, b = 1.0, math.sqrt((1.0 - k) * (1.0 + k))
    c = k
    csum = 0.5 * c * c
    scale = 0.5
    for _ in range(AGM_MAXITER):
        if abs(a - b) <= AGM_RTOL * a:
            break
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        scale *= 2.0
        csum += scale * c * c
    else:
        raise RuntimeError("AGM did not converge")
    K = math.pi / (2.0 * a)
    return K, K * (1.0 - csum)


def elliptic_complete(k: float) -> EllipticData:
    k = _check_modulus(k)
    kp = math.sqrt((1.0 - k) * (1.0 + k))
    K, E = agm_KE(k)
    if k == 0.0:
        q = 0.0
    else:
        Kp, _ = agm_KE(kp) if kp < 1.0 else (math.inf, 1.0)
        q = math.exp(-math.pi * Kp / K)
    return EllipticData(k, K, E, kp, q)


def gamma1_closed(k: float) -> float:
    """gamma_1 / tau^2 = 2E/K - 1."""
    e = elliptic_complete(k)
    return 2.0 * e.E / e.K - 1.0


def _qsum(q: float, term) -> float:
    total = 0.0
    j = 1
    while True:
        t = term(q, j)
        total += t
        if abs(t) < QSERIES_CUTOFF or j > 10_000:
            return total
        j += 1


def gamma2_closed(k: float) -> float:
    """gamma_2 / (2 tau^2), summing both q-series to below 1e-18."""
    e = elliptic_complete(k)
    q = e.q
    even = _qsum(q, lambda q, j: (q ** (2 * j) / (1.0 - q ** (4 * j))) ** 2)
    odd = _qsum(q, lambda q, j: (q ** (2 * j - 1) / (1.0 - q ** (4 * j - 2))) ** 2)
    pk = math.pi**2 / e.K**2
    return 1.5 - k * k - e.E / e.K + 2.0 * pk * even - 6.0 * pk * odd


def small_ell_branch(k: float, n: int) -> tuple[float, float]:
    """(mu_0n, mu_1n): zeroth and first ell-order of the n-th branch."""
    if n < 0:
        raise ValueError("branch index must be a natural number")
    e = elliptic_complete(k)
    w = (2.0 * math.pi / e.K) ** 2
    mu0 = -w * n * n
    mu1 = 2.0 * (e.E / e.K - 1.0)
    if n > 0:
        mu1 += w * n * e.q ** (2 * n) / (1.0 - e.q ** (4 * n))
    return mu0, mu1


def zeta_constant() -> float:
    """2 [Gamma(3/4) / Gamma(1/2)]^4, equal to gamma1_closed(1/sqrt 2)."""
    return 2.0 * (math.gamma(0.75) / math.gamma(0.5)) ** 4
