"""Monte Carlo simulation of random SL(d) products from renewing flows.

One product step is the Jacobian of a shear map: for ``i = 1..d`` the
i-th coordinate drives shears ``x_j += dt u'_ij(phi_ij) x_i``, optionally
followed by pure-strain factors ``exp(dt alpha_ij A_ij)``.  Profiles are given
as ``f = u'/sigma``, a trigonometric polynomial without constant term, so that
``dt u' = sqrt(2) tau f`` and ``dt u = sqrt(2) tau F`` with ``F' = f``.

Per-trial random streams come from ``SeedSequence(seed, spawn_key=(trial,))``
feeding a Philox generator, so results do not depend on how trials are split
across threads.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import logsumexp
from scipy.stats import kstat

from lyapflow import _backend
from lyapflow.elliptic import gamma1_closed

SQRT2 = math.sqrt(2.0)
BLOCK_FLOATS = 4_000_000  # uniforms per kernel call (32 MB)


def pair_order(d: int) -> list[tuple[int, int]]:
    """0-based (i, j), i != j, in row-major order; the slot layout of each step."""
    return [(i, j) for i in range(d) for j in range(d) if i != j]


def strain_order(d: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(d) for j in range(i + 1, d)]


@dataclass
class FlowConfig:
    """Renewing-flow parameters.

    ``cos_c[p, h]`` and ``sin_c[p, h]`` are the coefficients of ``cos((h+1) t)``
    and ``sin((h+1) t)`` in the profile of pair ``p`` (see :func:`pair_order`).
    """

    d: int = 2
    tau: float = 0.05
    cos_c: np.ndarray | None = None
    sin_c: np.ndarray | None = None
    strain_k2: float | None = None
    seed: int = 0
    symmetric: bool = True
    _checked: bool = field(default=False, repr=False)

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("dimension must be at least 2")
        if not math.isfinite(self.tau) or self.tau < 0:
            raise ValueError("tau must be a non-negative number")
        npairs = self.d * (self.d - 1)
        if self.cos_c is None and self.sin_c is None:
            self.cos_c = np.full((npairs, 1), SQRT2)
            self.sin_c = np.zeros((npairs, 1))
        cos_c = np.atleast_2d(np.asarray(self.cos_c if self.cos_c is not None else 0.0, dtype=float))
        sin_c = np.atleast_2d(np.asarray(self.sin_c if self.sin_c is not None else 0.0, dtype=float))
        h = max(cos_c.shape[1], sin_c.shape[1])
        self.cos_c = _pad(cos_c, npairs, h)
        self.sin_c = _pad(sin_c, npairs, h)
        if self.strain_k2 is not None:
            if not 0 <= self.strain_k2 <= 1 / self.d + 1e-15:
                raise ValueError(f"strain_k2 must lie in [0, 1/{self.d}]")
        if self.symmetric:
            ms = self.mean_square()
            if np.ptp(ms) > 1e-12 * max(1.0, ms.max()):
                raise ValueError("profiles declared symmetric have unequal mean squares")
        self.seed = int(self.seed) & ((1 << 64) - 1)

    @property
    def npairs(self) -> int:
        return self.d * (self.d - 1)

    @property
    def nslots(self) -> int:
        extra = len(strain_order(self.d)) if self.strain_k2 is not None else 0
        return self.npairs + extra

    @property
    def scale(self) -> float:
        """dt sigma = sqrt(2) tau."""
        return SQRT2 * self.tau

    @property
    def strain_amp(self) -> float:
        """Amplitude of dt alpha = 2 tau sqrt(1/d - k^2) cos(theta)."""
        if self.strain_k2 is None:
            return 0.0
        return 2.0 * self.tau * math.sqrt(max(1.0 / self.d - self.strain_k2, 0.0))

    def mean_square(self) -> np.ndarray:
        """E[f_p^2] over a period for each pair."""
        return 0.5 * ((self.cos_c**2).sum(axis=1) + (self.sin_c**2).sum(axis=1))

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "tau": self.tau,
            "seed": self.seed,
            "strain_k2": self.strain_k2,
            "symmetric": self.symmetric,
            "profile": {
                f"{i + 1}{j + 1}": {"cos": [0.0] + list(self.cos_c[p]), "sin": [0.0] + list(self.sin_c[p])}
                for p, (i, j) in enumerate(pair_order(self.d))
            },
        }


def _pad(arr: np.ndarray, npairs: int, h: int) -> np.ndarray:
    if arr.shape[0] == 1 and npairs > 1:
        arr = np.repeat(arr, npairs, axis=0)
    if arr.shape[0] != npairs:
        raise ValueError(f"expected {npairs} profiles, got {arr.shape[0]}")
    out = np.zeros((npairs, h))
    out[:, : arr.shape[1]] = arr
    return np.ascontiguousarray(out)


def _harmonics(entry: dict) -> tuple[list[float], list[float]]:
    cos = [float(x) for x in entry.get("cos", [])]
    sin = [float(x) for x in entry.get("sin", [])]
    # index 0 is the constant term; profiles must have zero mean
    if cos and cos[0] != 0.0:
        raise ValueError("profile has a nonzero mean (constant cosine term)")
    return cos[1:], sin[1:]


def config_from_dict(data: dict) -> FlowConfig:
    """Build a config from JSON data.

    Schema: ``{"d", "tau", "seed", "strain_k2" (null or number), "symmetric",
    "profile"}``; ``profile`` is either ``{"cos": [...], "sin": [...]}`` shared
    by all pairs, or a mapping from pair keys like ``"12"`` to such objects.
    Coefficient lists start at the constant term, which must be zero.
    """
    known = {"d", "tau", "seed", "strain_k2", "symmetric", "profile"}
    extra = set(data) - known
    if extra:
        raise ValueError(f"unknown config keys: {sorted(extra)}")
    d = int(data.get("d", 2))
    kwargs = dict(
        d=d,
        tau=float(data.get("tau", 0.05)),
        seed=int(data.get("seed", 0)),
        strain_k2=None if data.get("strain_k2") is None else float(data["strain_k2"]),
        symmetric=bool(data.get("symmetric", True)),
    )
    prof = data.get("profile")
    if prof is not None:
        if "cos" in prof or "sin" in prof:
            entries = {f"{i + 1}{j + 1}": prof for i, j in pair_order(d)}
        else:
            entries = prof
            missing = {f"{i + 1}{j + 1}" for i, j in pair_order(d)} - set(entries)
            if missing:
                raise ValueError(f"profile missing pairs {sorted(missing)}")
        rows = [_harmonics(entries[f"{i + 1}{j + 1}"]) for i, j in pair_order(d)]
        h = max(1, max(max(len(c), len(s)) for c, s in rows))
        cos_c = np.zeros((len(rows), h))
        sin_c = np.zeros((len(rows), h))
        for p, (c, s) in enumerate(rows):
            cos_c[p, : len(c)] = c
            sin_c[p, : len(s)] = s
        kwargs.update(cos_c=cos_c, sin_c=sin_c)
    return FlowConfig(**kwargs)


def load_config(path: str) -> FlowConfig:
    with open(path, encoding="utf-8") as fh:
        return config_from_dict(json.load(fh))


# random streams -----------------------------------------------------------


def trial_generator(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(trial,))))


def trial_uniforms(cfg: FlowConfig, trial: int, steps: int) -> np.ndarray:
    return trial_generator(cfg.seed, trial).random((steps, cfg.nslots))


# single factors (reference implementation) --------------------------------


def _profile_values(cfg: FlowConfig, p: int, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    h = np.arange(1, cfg.cos_c.shape[1] + 1)
    mt = np.multiply.outer(theta, h)
    c, s = np.cos(mt), np.sin(mt)
    f = c @ cfg.cos_c[p] + s @ cfg.sin_c[p]
    big = s @ (cfg.cos_c[p] / h) - c @ (cfg.sin_c[p] / h)
    return f, big


def shear_variables(cfg: FlowConfig, u: np.ndarray) -> np.ndarray:
    """xi_ij = f_ij(phi_ij) for uniforms ``u`` of shape (..., nslots).

    Angles of pairs with j < i are the raw draws; for j > i the draw is shifted
    by ``dt sum_{k != j} u_jk(phi_jk)``, which needs row j first, so rows are
    processed from d down to 1.
    """
    d = cfg.d
    pairs = pair_order(d)
    index = {pq: n for n, pq in enumerate(pairs)}
    u = np.asarray(u, dtype=float)
    xi = np.empty(u.shape[:-1] + (cfg.npairs,))
    big = np.empty_like(xi)
    for i in range(d - 1, -1, -1):
        for j in range(d):
            if i == j:
                continue
            p = index[i, j]
            ang = np.pi * (2.0 * u[..., p] - 1.0)
            if j > i:
                ang = ang + cfg.scale * sum(big[..., index[j, k]] for k in range(d) if k != j)
            xi[..., p], big[..., p] = _profile_values(cfg, p, ang)
    return xi


def factors_from_uniforms(cfg: FlowConfig, u: np.ndarray) -> np.ndarray:
    """Product factors g for a batch of uniforms of shape (..., nslots).

    g = B_1 S_1 B_2 S_2 ... B_d, where B_i = I + dt sum_j u'_ij N_ij (the
    shears driven by coordinate i; N_ij is nilpotent so the exponential is
    exact) and S_i = prod_{j>i} exp(dt alpha_ij A_ij) is diagonal.
    """
    d = cfg.d
    u = np.asarray(u, dtype=float)
    xi = shear_variables(cfg, u)
    index = {pq: n for n, pq in enumerate(pair_order(d))}
    sidx = {pq: cfg.npairs + n for n, pq in enumerate(strain_order(d))}
    batch = u.shape[:-1]
    g = np.broadcast_to(np.eye(d), batch + (d, d)).copy()
    for i in range(d):
        shear = np.broadcast_to(np.eye(d), batch + (d, d)).copy()
        for j in range(d):
            if j != i:
                shear[..., i, j] = cfg.scale * xi[..., index[i, j]]
        g = g @ shear
        if cfg.strain_k2 is not None and i < d - 1:
            for j in range(i + 1, d):
                a = cfg.strain_amp * np.cos(np.pi * (2.0 * u[..., sidx[i, j]] - 1.0))
                # right-multiplying by a diagonal matrix scales columns
                g[..., :, i] *= np.exp(a)[..., None]
                g[..., :, j] *= np.exp(-a)[..., None]
    return g


def factor_from_uniforms(cfg: FlowConfig, u: Sequence[float]) -> np.ndarray:
    """The product factor g built from one step's uniforms."""
    return factors_from_uniforms(cfg, np.asarray(u, dtype=float))


def sample_factor(cfg: FlowConfig, rng: np.random.Generator) -> np.ndarray:
    return factor_from_uniforms(cfg, rng.random(cfg.nslots))


# products ------------------------------------------------------------------


def _block_run(cfg: FlowConfig, trials: Sequence[int], n: int, burn: int, backend=None):
    kern = backend or _backend
    steps = n + burn
    u = np.empty((len(trials), steps, cfg.nslots))
    for r, t in enumerate(trials):
        u[r] = trial_uniforms(cfg, t, steps)
    return kern.run_trials(u, cfg.d, cfg.scale, cfg.cos_c, cfg.sin_c, cfg.strain_amp, burn)


def run_product(cfg: FlowConfig, n: int, trial: int = 0, burn: int = 0, backend=None) -> tuple[float, np.ndarray]:
    """(log|x Pi_n|, final direction) for one trial, starting from x = e_1."""
    if n < 1:
        raise ValueError("n must be at least 1")
    total, x = _block_run(cfg, [trial], n, burn, backend)
    return float(total[0]), x[0]


def log_norms(
    cfg: FlowConfig, n: int, trials: int, threads: int = 1, burn: int = 0, backend=None
) -> np.ndarray:
    """log|x Pi_n| for trials 0..trials-1, in trial order."""
    if n < 1 or trials < 1:
        raise ValueError("n and trials must be positive")
    per = max(1, BLOCK_FLOATS // ((n + burn) * cfg.nslots))
    blocks = [list(range(s, min(s + per, trials))) for s in range(0, trials, per)]
    run = lambda b: _block_run(cfg, b, n, burn, backend)[0]  # noqa: E731
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, blocks))
    else:
        parts = [run(b) for b in blocks]
    return np.concatenate(parts)


@dataclass
class CumulantEstimate:
    j: int
    value: float
    stderr: float
    trials: int
    n: int


def _batches(x: np.ndarray) -> list[np.ndarray]:
    nb = max(2, int(math.isqrt(len(x))))
    return np.array_split(x, nb)


def cumulants_from_samples(x: np.ndarray, n: int, jmax: int) -> list[CumulantEstimate]:
    """k-statistics of the log-norms, per step, with batch-means errors."""
    if jmax > 4:
        raise ValueError("cumulants beyond order 4 are too noisy to estimate")
    if jmax < 1:
        raise ValueError("jmax must be at least 1")
    if len(x) < 30:
        raise ValueError("at least 30 trials are required")
    batches = _batches(x)
    out = []
    for j in range(1, jmax + 1):
        if np.ptp(x) == 0.0:
            out.append(CumulantEstimate(j, float(x[0]) / n if j == 1 else 0.0, 0.0, len(x), n))
            continue
        val = kstat(x, j) / n
        per = np.array([kstat(b, j) for b in batches]) / n
        se = float(per.std(ddof=1) / math.sqrt(len(per)))
        out.append(CumulantEstimate(j, float(val), se, len(x), n))
    return out


def estimate_cumulants(
    cfg: FlowConfig, n: int, trials: int, jmax: int = 2, threads: int = 1, burn: int = 0
) -> list[CumulantEstimate]:
    if trials < 30:
        raise ValueError("at least 30 trials are required")
    if jmax > 4:
        raise ValueError("cumulants beyond order 4 are too noisy to estimate")
    return cumulants_from_samples(log_norms(cfg, n, trials, threads, burn), n, jmax)


@dataclass
class LEstimate:
    ell: float
    value: float
    stderr: float
    trials: int
    n: int


def L_from_samples(x: np.ndarray, ell: float, n: int) -> LEstimate:
    """(1/n) ln mean exp(ell x) with a delta-method batch-means error.

    Large |ell| weights rare trajectories, so the estimate is biased by the
    large-deviation tail unless the number of trials is very large.
    """
    if ell == 0:
        return LEstimate(0.0, 0.0, 0.0, len(x), n)
    z = ell * np.asarray(x)
    if np.max(np.abs(z)) > 700.0:
        raise OverflowError("exp(ell * log-norm) overflows; use a smaller n or ell")
    value = (logsumexp(z) - math.log(len(z))) / n
    shift = z.max()
    w = np.exp(z - shift)
    means = np.array([b.mean() for b in _batches(w)])
    m = w.mean()
    se = float(means.std(ddof=1) / math.sqrt(len(means)) / (m * n))
    return LEstimate(float(ell), float(value), se, len(x), n)


def estimate_L(cfg: FlowConfig, ell: float, n: int, trials: int, threads: int = 1, burn: int = 0) -> LEstimate:
    return L_from_samples(log_norms(cfg, n, trials, threads, burn), ell, n)


# independence of the shear variables ----------------------------------------


@dataclass
class IndependenceReport:
    status: str  # "independent", "dependent" or "degenerate"
    corr: np.ndarray
    corr_stderr: np.ndarray
    max_abs_corr: float
    corr_threshold: float
    cf_max_z: float
    cf_chi2: float
    cf_dof: int
    trials: int

    @property
    def passed(self) -> bool:
        return self.status == "independent"


S_GRID = (0.5, 1.0, 2.0)


def independence_diagnostic(cfg: FlowConfig, trials: int, seed_trial: int = 0, sigmas: float = 4.0) -> IndependenceReport:
    """Pairwise correlations and joint characteristic-function factorization of xi_ij."""
    u = trial_uniforms(cfg, seed_trial, trials)
    xi = shear_variables(cfg, u)
    npairs = cfg.npairs
    sd = xi.std(axis=0)
    if np.any(sd < 1e-300):
        eye = np.eye(npairs)
        return IndependenceReport("degenerate", eye, np.zeros_like(eye), 0.0, sigmas / math.sqrt(trials), 0.0, 0.0, 0, trials)
    z = (xi - xi.mean(axis=0)) / sd
    corr = (z.T @ z) / trials
    np.fill_diagonal(corr, 1.0)
    corr_se = (1.0 - corr**2) / math.sqrt(trials)
    off = corr[~np.eye(npairs, dtype=bool)]
    max_corr = float(np.max(np.abs(off))) if off.size else 0.0
    thresh = sigmas / math.sqrt(trials)
    # characteristic-function factorization on a grid of (s, t)
    zs, chi2, dof = [], 0.0, 0
    for p in range(npairs):
        for q in range(p + 1, npairs):
            for s in S_GRID:
                for t in S_GRID:
                    ex = np.exp(1j * s * z[:, p])
                    ey = np.exp(1j * t * z[:, q])
                    phx, phy = ex.mean(), ey.mean()
                    exy = ex * ey
                    diff = exy.mean() - phx * phy
                    infl = exy - phx * ey - phy * ex
                    infl = infl - infl.mean()
                    for part, val in ((infl.real, diff.real), (infl.imag, diff.imag)):
                        se = part.std() / math.sqrt(trials)
                        if se > 0:
                            zz = val / se
                            zs.append(abs(zz))
                            chi2 += zz * zz
                            dof += 1
    cf_max = float(max(zs)) if zs else 0.0
    ok = max_corr < thresh and cf_max < sigmas
    return IndependenceReport(
        "independent" if ok else "dependent", corr, corr_se, max_corr, thresh, cf_max, chi2, dof, trials
    )


# beyond the continuum limit ---------------------------------------------------


def gamma1_coefficients() -> list[float]:
    """gamma_{1,j}, j = 0..3, for the default d=2 flow (asymptotic in tau^2)."""
    zeta = gamma1_closed(1.0 / math.sqrt(2.0))
    return [0.0, zeta, 1.0 / 24.0 + 3.0 * zeta**2 / 8.0, 5.0 * zeta / 192.0 + 9.0 * zeta**3 / 64.0]


def gamma1_beyond_continuum(tau: float, order: int = 2) -> float:
    """Partial sum of gamma_1 in powers of tau^2.

    The full series has zero radius of convergence; only the first few terms
    are meaningful, and only for small tau.
    """
    if not 0 < tau <= 0.3:
        raise ValueError("tau must lie in (0, 0.3]")
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    c = gamma1_coefficients()
    return sum(c[j] * tau ** (2 * j) for j in range(1, order + 1))
