"""Cross-validation suite behind ``lyapflow validate``.

Each check compares an engine against an independent reference (reference
expansion, closed form, or a second numerical route) at a fixed tolerance and
returns a :class:`Check`.  Monte Carlo checks use fixed seeds.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass
from fractions import Fraction as Fr
from typing import Callable

from lyapflow import flowsim
from lyapflow.elliptic import gamma1_closed, gamma2_closed
from lyapflow.exact import ELL, K2Series, PolyL
from lyapflow.polyrep import antisymmetric_seed, quasi_solvable_charpoly, verify_casimir_identity
from lyapflow.series import L_series, cumulant_series, mu_series_3d, rate_series, symmetry_check
from lyapflow.spectral2d import L_2d, leading_mu_2d
from lyapflow.spectral3d import L_3d, eigenvalues_3d, leading_mu_3d, odd_leakage

MC_SEED = 20260417


@dataclass
class Check:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.number:2d}: {self.title} ({self.seconds:.1f} s) {self.detail}"


def _prod(*factors: PolyL) -> PolyL:
    out = PolyL.const(1)
    for f in factors:
        out = out * f
    return out


L = ELL
Q2 = _prod(L - 2, L, L + 2, L + 4)  # (l-2) l (l+2) (l+4)
Q3 = _prod(L - 2, L, L + 3, L + 5)


def reference_L2() -> K2Series:
    """Reference k^2-expansion of L/tau^2 for d = 2 through k^10."""
    return K2Series(
        [
            L * (L + 2) / 2,
            -L * (L + 2) / 2,
            Q2 / 128,
            Q2 / 256,
            -Q2 * PolyL((-5248, 16, 36, 28, 7)) / 2097152,
            -Q2 * PolyL((-7552, 48, 108, 84, 21)) / 4194304,
        ],
        5,
    )


def reference_rate2() -> K2Series:
    return K2Series(
        [
            (L - 1) * (L - 1) / 2,
            (L - 1) * (L + 1) / 2,
            -PolyL((9, 0, -74, 0, 1)) / 128,
            -PolyL((3, -14, 3)) * PolyL((3, 14, 3)) / 256,
            PolyL((-47241, 0, 1781972, 0, -211974, 0, 948, 0, 7)) / 2097152,
            PolyL((-67995, 0, 4389324, 0, -990274, 0, 15244, 0, 133)) / 4194304,
        ],
        5,
    )


def reference_L3() -> K2Series:
    return K2Series(
        [2 * L * (L + 3) / 3, -4 * L * (L + 3) / 5, 12 * Q3 / 875, -72 * Q3 * PolyL((-395, 27, 9)) / 3128125],
        3,
    )


CUMULANTS_2D = {
    1: ["1", "-1", "-1/8", "-1/16", "-41/1024", "-59/2048"],
    2: ["1/2", "-1/2", "-1/32", "-1/64", "-81/8192", "-115/16384"],
    3: ["0", "0", "1/32", "1/64", "169/16384", "251/32768"],
    4: ["0", "0", "1/128", "1/256", "361/131072", "571/262144"],
}
CUMULANTS_3D = {
    1: ["2", "-12/5", "-72/175", "-34128/125125", "-17244576/74449375", "-223736256/1010384375"],
    2: ["2/3", "-4/5", "-12/875", "5976/625625", "59358528/2605728125", "22326336/642971875"],
    3: ["0", "0", "72/875", "27432/446875", "30362256/521145625", "15082522656/247544171875"],
    4: ["0", "0", "12/875", "1584/284375", "32383188/13028640625", "60775592/1237720859375"],
}


def reference_mu1_3d() -> K2Series:
    w = _prod(L - 2, L + 5, 2 * L + 3, 2 * L + 3)
    return K2Series(
        [
            PolyL.const(-6),
            -8 * PolyL((-3, 3, 1)) / 7,
            96 * w / 41503,
            128 * w * PolyL((361, 24, 8)) / 26437411,
        ],
        3,
    )


L_MIN_SERIES = ["-1/2", "1/2", "9/128", "9/256", "47241/2097152", "67995/4194304", "13407669/1073741824", "21598857/2147483648"]
L2_MIN_SERIES = ["1", "-1", "-5/32", "-5/64", "-13109/262144", "-18847/524288", "-7424679/268435456", "-11948355/536870912"]
L_MIN_VALUE = -0.2257817708
L2_MIN_VALUE = 0.446190238842


def _fr(xs) -> list[Fr]:
    return [Fr(x) for x in xs]


# criteria ---------------------------------------------------------------------


def criterion_1() -> tuple[bool, str]:
    ok_L = L_series(2, 5) == reference_L2()
    ok_rate = rate_series(2, 5) == reference_rate2()
    return ok_L and ok_rate, f"L through k^10 exact: {ok_L}; rate function through k^10 exact: {ok_rate}"


def criterion_2() -> tuple[bool, str]:
    bad = []
    for d, table in ((2, CUMULANTS_2D), (3, CUMULANTS_3D)):
        for j, ref in table.items():
            got = cumulant_series(d, j, 5).scalars()
            if got != _fr(ref):
                bad.append(f"d={d} j={j}")
    if L_series(3, 3) != reference_L3():
        bad.append("d=3 L expansion")
    return not bad, "all 8 tables exact" if not bad else f"mismatch in {bad}"


def criterion_3() -> tuple[bool, str]:
    got = mu_series_3d(1, 3).series
    ref = reference_mu1_3d()
    match = [got[n] == ref[n] for n in range(4)]
    detail = ", ".join(f"k^{2 * n}: {'match' if m else 'differs'}" for n, m in enumerate(match))
    if not all(match):
        detail += f"; computed k^4 coefficient {got[2]}"
    return all(match), detail


def _roots_2(c: list[PolyL], k2: float) -> float:
    """Largest root of mu^2 + b mu + c with b, c polynomials in k^2."""
    b, cc = float(c[1].eval(k2)), float(c[0].eval(k2))
    return (-b + math.sqrt(b * b - 4 * cc)) / 2


def criterion_4() -> tuple[bool, str]:
    K = PolyL.x()
    exact = {
        (2, 2, "sym"): [4 * K, PolyL.const(1)],
        (2, 4, "sym"): [192 * K, 16 * (1 + K), PolyL.const(1)],
        (2, 6, "sym"): [48 * K * (3 * K + 8), 8 * (5 * K + 2), PolyL.const(1)],
        (3, 2, "sym"): [8 * K, PolyL.const(1)],
        (3, 2, "anti"): [6 + 8 * K, PolyL.const(1)],
        # (mu + 20k^2 + 10)^2 - 4(36k^4 - 12k^2 + 25) and the mu_1 analogue
        (3, 4, "sym"): [448 * K + 256 * K * K, 20 + 40 * K, PolyL.const(1)],
        (3, 4, "anti"): [120 + 640 * K + 256 * K * K, 26 + 40 * K, PolyL.const(1)],
    }
    bad = []
    for (d, ell, seed), ref in exact.items():
        s = antisymmetric_seed(d, ell) if seed == "anti" else None
        if quasi_solvable_charpoly(d, ell, s) != ref:
            bad.append(f"charpoly d={d} ell={ell} {seed}")
    worst = 0.0
    for d in (2, 3):
        for k2 in (0.1, 1.0 / d):
            for ell in (2, 4) if d == 3 else (2, 4, 6):
                mu = leading_mu_2d(k2, ell, 1e-12).mu if d == 2 else leading_mu_3d(k2, ell, 1e-12).mu
                c = exact[d, ell, "sym"]
                ref = -float(c[0].eval(k2)) if len(c) == 2 else _roots_2(c, k2)
                worst = max(worst, abs(mu - ref))
            mu1 = float(eigenvalues_3d(k2, 4, 32)[1].real) if d == 3 else None
            if mu1 is not None:
                worst = max(worst, abs(mu1 - _roots_2(exact[3, 4, "anti"], k2)))
    ok = not bad and worst < 1e-8
    return ok, f"charpolys {'exact' if not bad else bad}; max spectral deviation {worst:.2e}"


def criterion_5() -> tuple[bool, str]:
    fails = [(d, e) for d in (2, 3, 4) for e in (2, 4, 6) if not verify_casimir_identity(d, e).holds]
    return not fails, "9 cases exact" if not fails else f"fails at {fails}"


def criterion_6() -> tuple[bool, str]:
    g1 = cumulant_series(2, 1, 5)
    g2 = cumulant_series(2, 2, 5)
    worst_ratio, fd1, fd2 = 0.0, 0.0, 0.0
    h = 1e-3
    for k2 in (0.05, 0.1, 0.2):
        k = math.sqrt(k2)
        for closed, ser in ((gamma1_closed(k), g1), (gamma2_closed(k), g2)):
            last = abs(float(ser[ser.order][0]) * k2**ser.order)
            worst_ratio = max(worst_ratio, abs(closed - ser.evaluate(k2)) / last)
    for k2 in (0.05, 0.1, 0.2, 0.5):
        k = math.sqrt(k2)
        lp, l0, lm = (L_2d(k2, x, 1e-13) for x in (h, 0.0, -h))
        fd1 = max(fd1, abs((lp - lm) / (2 * h) - gamma1_closed(k)))
        fd2 = max(fd2, abs((lp - 2 * l0 + lm) / (2 * h * h) - gamma2_closed(k)))
    ok = worst_ratio <= 1.0 and fd1 < 1e-6 and fd2 < 1e-5
    return ok, f"series residual / last term <= {worst_ratio:.2f}; finite differences {fd1:.1e}, {fd2:.1e}"


def criterion_7() -> tuple[bool, str]:
    from lyapflow.spectral2d import L_derivatives_2d

    Lv, _, L2v = L_derivatives_2d(0.5, -1.0, 1e-13)
    ok_num = abs(Lv - L_MIN_VALUE) < 1e-6 and abs(L2v - L2_MIN_VALUE) < 1e-6
    ser = L_series(2, 7)
    ok_L = ser.at_ell(-1).scalars() == _fr(L_MIN_SERIES)
    ok_L2 = ser.map(lambda c: c.deriv(2)).at_ell(-1).scalars() == _fr(L2_MIN_SERIES)
    return ok_num and ok_L and ok_L2, f"L={Lv:.12f} L''={L2v:.12f}; k^14 series exact: {ok_L and ok_L2}"


def criterion_8() -> tuple[bool, str]:
    exact_ok = all(
        symmetry_check(d, L_series(d, o), Lstar=rate_series(d, o)).passed() for d, o in ((2, 5), (3, 3))
    )
    grid = (-0.5, 0.3, 1.0, 2.0)
    worst = 0.0
    for k2 in (0.1, 0.5):
        worst = max(worst, symmetry_check(2, lambda x: L_2d(k2, x, 1e-13), grid).max_defect_L)
    for k2 in (0.1, 1.0 / 3.0):
        worst = max(worst, symmetry_check(3, lambda x: L_3d(k2, x, 1e-12), grid).max_defect_L)
    return exact_ok and worst < 1e-8, f"series exact: {exact_ok}; numeric max defect {worst:.1e}"


def _z(est: flowsim.CumulantEstimate, ref: float) -> float:
    return (est.value - ref) / est.stderr


def criterion_9(threads: int) -> tuple[bool, str]:
    tau, n, burn = 0.05, 10_000, 1000
    t2 = tau * tau
    parts = []
    cfg = flowsim.FlowConfig(d=2, tau=tau, seed=MC_SEED)
    c1, c2 = flowsim.estimate_cumulants(cfg, n, 10_000, 2, threads, burn)
    parts.append(("gamma1 d=2", _z(c1, t2 * gamma1_closed(math.sqrt(0.5)))))
    parts.append(("gamma2 d=2", _z(c2, 2 * t2 * gamma2_closed(math.sqrt(0.5)))))
    for k2 in (0.0, 0.25):
        cfg = flowsim.FlowConfig(d=2, tau=tau, seed=MC_SEED + 1, strain_k2=k2)
        (c,) = flowsim.estimate_cumulants(cfg, n, 2000, 1, threads, burn)
        parts.append((f"strain k2={k2}", _z(c, t2 * gamma1_closed(math.sqrt(k2)))))
    cfg = flowsim.FlowConfig(d=3, tau=tau, seed=MC_SEED + 2)
    (c,) = flowsim.estimate_cumulants(cfg, n, 2000, 1, threads, burn)
    parts.append(("gamma1 d=3", _z(c, t2 * float(cumulant_series(3, 1, 5).evaluate(1.0 / 3.0)))))
    ok = all(abs(z) <= 3.0 for _, z in parts)
    return ok, "z-scores " + ", ".join(f"{name}: {z:+.2f}" for name, z in parts)


def criterion_10() -> tuple[bool, str]:
    reps = [flowsim.independence_diagnostic(flowsim.FlowConfig(d=d, seed=MC_SEED), 100_000) for d in (2, 3)]
    ok = all(r.passed for r in reps)
    detail = "; ".join(
        f"d={d}: max|corr| {r.max_abs_corr:.4f} (< {r.corr_threshold:.4f}), max cf z {r.cf_max_z:.2f}"
        for d, r in zip((2, 3), reps)
    )
    return ok, detail


def criterion_11() -> tuple[bool, str]:
    leaks = [(i, j) for i in range(13) for j in range(i // 2 + 1) if odd_leakage(i, j)]
    return not leaks, "no odd-m components for i <= 12" if not leaks else f"leakage at {leaks}"


def criterion_12(threads: int) -> tuple[bool, str]:
    tau = 0.1
    cfg = flowsim.FlowConfig(d=2, tau=tau, seed=MC_SEED + 3)
    (c,) = flowsim.estimate_cumulants(cfg, 10_000, 4000, 1, threads, 1000)
    ref = flowsim.gamma1_beyond_continuum(tau, 2)
    z = _z(c, ref)
    return abs(z) <= 3.0, f"MC {c.value:.7f} +- {c.stderr:.1e} vs order-2 {ref:.7f} (z {z:+.2f})"


CRITERIA: dict[int, tuple[str, Callable[..., tuple[bool, str]]]] = {
    1: ("exact L series, d=2", criterion_1),
    2: ("exact cumulant tables, d=2 and d=3", criterion_2),
    3: ("exact excited branch, d=3", criterion_3),
    4: ("quasi-solvable oracles", criterion_4),
    5: ("Casimir identity", criterion_5),
    6: ("elliptic closed forms vs series and spectral L", criterion_6),
    7: ("variance-decay checkpoints", criterion_7),
    8: ("spectral symmetry", criterion_8),
    9: ("Monte Carlo consistency", criterion_9),
    10: ("independence of shear variables", criterion_10),
    11: ("no odd-m leakage", criterion_11),
    12: ("beyond-continuum first cumulant", criterion_12),
}
NEEDS_THREADS = {9, 12}


def run_criterion(number: int, threads: int | None = None) -> Check:
    title, fn = CRITERIA[number]
    threads = threads or os.cpu_count() or 1
    t0 = time.perf_counter()
    try:
        ok, detail = fn(threads) if number in NEEDS_THREADS else fn()
    except ArithmeticError as exc:
        ok, detail = False, f"numerical failure: {exc}"
    return Check(number, title, bool(ok), detail, time.perf_counter() - t0)


def run_all(threads: int | None = None, numbers=None, echo: Callable[[str], None] | None = None) -> list[Check]:
    out = []
    for n in numbers or sorted(CRITERIA):
        chk = run_criterion(n, threads)
        if echo:
            echo(chk.line())
        out.append(chk)
    return out


def casimir_table(ds=(2, 3, 4), ells=(2, 4, 6)) -> list[list]:
    rows = []
    for d in ds:
        for e in ells:
            r = verify_casimir_identity(d, e)
            rows.append([d, e, r.dim, r.holds, r.max_discrepancy])
    return rows

