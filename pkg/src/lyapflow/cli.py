"""Command-line interface: ``lyapflow <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction

from lyapflow import __version__
from lyapflow import io as lio

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _number(text: str) -> float:
    """Float, also accepting rationals such as 1/3."""
    try:
        return float(Fraction(text)) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lyapflow", description="Generalized Lyapunov exponents of renewing flows.")
    p.add_argument("--version", action="version", version=f"lyapflow {__version__}")
    p.add_argument("--out", help="write output to this file instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("series", help="exact k^2-series of an eigenvalue branch, L, cumulants, or rate")
    s.add_argument("--d", type=int, choices=(2, 3), default=2)
    s.add_argument("--branch", type=int, default=0)
    s.add_argument("--order", type=int, default=5)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--cumulant", type=int, metavar="J", help="gamma_J/(J! tau^2) coefficients")
    g.add_argument("--L", action="store_true", help="L/tau^2 (branch 0 plus the affine shift)")
    g.add_argument("--rate", action="store_true", help="rate function in ell' = ell/tau^2")
    s.add_argument("--at-ell", help="specialize at a rational ell")

    s = sub.add_parser("spectrum", help="leading eigenvalue and L from the spectral solvers")
    s.add_argument("--d", type=int, choices=(2, 3), default=2)
    s.add_argument("--k2", type=_number, required=True)
    s.add_argument("--ell", type=_number, required=True)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--derivatives", action="store_true")
    s.add_argument("--all", type=int, metavar="N", help="list all eigenvalues at truncation N")
    s.add_argument("--nmax", type=_positive_int, help="largest truncation tried before giving up")

    s = sub.add_parser("closed-form", help="elliptic-integral formulas for the first two cumulants")
    s.add_argument("--k", type=_number, required=True, help="elliptic modulus")

    s = sub.add_parser("simulate", help="Monte Carlo of the renewing-flow matrix products")
    s.add_argument("--config", required=True, help="JSON flow configuration")
    s.add_argument("--n", type=_positive_int, required=True)
    s.add_argument("--trials", type=_positive_int, required=True)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--ell", type=_number)
    g.add_argument("--cumulants", type=int, metavar="J")
    g.add_argument("--independence", action="store_true", help="run the independence diagnostic")
    s.add_argument("--threads", type=_positive_int, default=1)
    s.add_argument("--burn", type=int, default=0, help="steps discarded before accumulating")

    s = sub.add_parser("rate", help="rate function L* by numerical Legendre transform")
    s.add_argument("--d", type=int, choices=(2, 3), default=2)
    s.add_argument("--k2", type=_number)
    s.add_argument("--ell", type=_number, nargs="+", required=True)

    s = sub.add_parser("stencil", help="action of a strain generator on e_lm (d = 3)")
    s.add_argument("--which", type=int, choices=(12, 13, 23))
    s.add_argument("--l", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--square-sum", action="store_true", help="column of A12^2 + A13^2 + A23^2 instead")

    s = sub.add_parser("validate", help="cross-validation suite")
    s.add_argument("what", choices=("casimir", "all", "criterion"))
    s.add_argument("--number", type=int, action="append", help="criterion number (repeatable)")
    s.add_argument("--threads", type=_positive_int, default=None)

    s = sub.add_parser("figure", help="plottable data for L/L* or cumulants vs strain")
    s.add_argument("--which", choices=("L-and-rate", "cumulants-vs-strain"), required=True)
    s.add_argument("--d", type=int, choices=(2, 3), default=2)
    s.add_argument("--points", type=int, default=11)
    return p


# handlers return (columns, rows) ------------------------------------------------


def _poly_rows(series) -> tuple[list[str], list[list]]:
    deg = max((c.degree for c in series.coeffs), default=0)
    deg = max(deg, 0)
    cols = ["k2_power"] + [f"ell^{i}" for i in range(deg + 1)]
    rows = [[n] + [c[i] for i in range(deg + 1)] for n, c in enumerate(series.coeffs)]
    return cols, rows


def cmd_series(a):
    from lyapflow import series as S

    if a.order < 0 or a.branch < 0:
        raise ValueError("order and branch must be non-negative")
    if a.cumulant is not None:
        ser = S.cumulant_series(a.d, a.cumulant, a.order)
    elif a.L:
        ser = S.L_series(a.d, a.order)
    elif a.rate:
        ser = S.rate_series(a.d, a.order)
    else:
        ser = S.mu_series(a.d, a.branch, a.order).series
    if a.at_ell is not None:
        ser = ser.at_ell(Fraction(a.at_ell))
    if all(c.degree <= 0 for c in ser.coeffs):
        return [f"k2^{n}" for n in range(ser.order + 1)], [ser.scalars()]
    return _poly_rows(ser)


def cmd_spectrum(a):
    if a.all is not None:
        if a.d == 2:
            from lyapflow.eigen import eigvals
            from lyapflow.spectral2d import build_operator_2d

            ev = eigvals(build_operator_2d(a.k2, a.ell, a.all).dense())
            ev = ev[(-ev.real).argsort(kind="stable")]
        else:
            from lyapflow.spectral3d import eigenvalues_3d

            ev = eigenvalues_3d(a.k2, a.ell, a.all)
        return ["index", "re", "im"], [[i, float(z.real), float(z.imag)] for i, z in enumerate(ev)]
    from lyapflow.spectral2d import affine_shift, leading_mu_2d
    from lyapflow.spectral3d import leading_mu_3d

    solve = leading_mu_2d if a.d == 2 else leading_mu_3d
    kw = {"Nmax": a.nmax} if a.nmax else {}
    r = solve(a.k2, a.ell, a.tol, derivatives=a.derivatives, **kw)
    shift = affine_shift(a.d, a.ell)
    cols = ["d", "k2", "ell", "mu", "L", "N_used", "residual"]
    row = [a.d, a.k2, a.ell, r.mu, shift + r.mu, r.N_used, r.residual]
    if a.derivatives:
        cols += ["dL", "d2L"]
        row += [(a.d - 1) * (1 + 2 * a.ell / a.d) + r.dmu, 2 * (a.d - 1) / a.d + r.d2mu]
    return cols, [row]


def cmd_closed_form(a):
    from lyapflow.elliptic import elliptic_complete, gamma1_closed, gamma2_closed

    e = elliptic_complete(a.k)
    return ["k", "K", "E", "q", "gamma1_over_tau2", "gamma2_over_2tau2"], [
        [a.k, e.K, e.E, e.q, gamma1_closed(a.k), gamma2_closed(a.k)]
    ]


def cmd_simulate(a):
    from lyapflow import flowsim

    with open(a.config, encoding="utf-8") as fh:
        cfg_data = json.load(fh)
    if "LYAPFLOW_SEED" in os.environ:
        cfg_data["seed"] = int(os.environ["LYAPFLOW_SEED"])
    cfg = flowsim.config_from_dict(cfg_data)
    a._config = cfg.to_json()
    cols = ["quantity", "value", "stderr", "trials", "n"]
    if a.independence:
        r = flowsim.independence_diagnostic(cfg, a.trials)
        rows = [
            ["status", r.status, "", r.trials, ""],
            ["max_abs_corr", r.max_abs_corr, float(r.corr_stderr.max()), r.trials, ""],
            ["corr_threshold", r.corr_threshold, "", r.trials, ""],
            ["cf_max_z", r.cf_max_z, "", r.trials, ""],
            ["cf_chi2", r.cf_chi2, math.sqrt(2 * r.cf_dof) if r.cf_dof else "", r.trials, ""],
            ["cf_dof", r.cf_dof, "", r.trials, ""],
        ]
        return cols, rows
    x = flowsim.log_norms(cfg, a.n, a.trials, a.threads, a.burn)
    if a.ell is not None:
        e = flowsim.L_from_samples(x, a.ell, a.n)
        return cols, [[f"L({a.ell:.15g})", e.value, e.stderr, e.trials, e.n]]
    jmax = a.cumulants if a.cumulants is not None else 2
    ests = flowsim.cumulants_from_samples(x, a.n, jmax)
    return cols, [[f"gamma{c.j}", c.value, c.stderr, c.trials, c.n] for c in ests]


def cmd_rate(a):
    from lyapflow.figures import legendre_spectral

    k2 = a.k2 if a.k2 is not None else 1.0 / a.d
    return ["d", "k2", "ell", "Lstar"], [[a.d, k2, x, legendre_spectral(a.d, k2, x)] for x in a.ell]


def cmd_stencil(a):
    from lyapflow.spectral3d import apply_A, cal_A_column

    if a.square_sum:
        terms = cal_A_column(a.l, a.m)
    else:
        if a.which is None:
            raise ValueError("--which is required unless --square-sum is given")
        terms = apply_A(a.which, a.l, a.m)
    deg = max((c.degree for _, _, c in terms), default=0)
    cols = ["l", "m"] + [f"ell^{i}" for i in range(deg + 1)]
    return cols, [[lp, mp] + [c[i] for i in range(deg + 1)] for lp, mp, c in terms]


def cmd_figure(a):
    from lyapflow.figures import figure_data

    return figure_data(a.which, a.d, a.points)


def cmd_validate(a):
    from lyapflow import validate as V

    if a.what == "casimir":
        return ["d", "ell", "dim", "holds", "max_discrepancy"], V.casimir_table(), EXIT_OK
    numbers = a.number if a.what == "criterion" else None
    if a.what == "criterion" and not numbers:
        raise ValueError("give at least one --number")
    if numbers and any(n not in V.CRITERIA for n in numbers):
        raise ValueError(f"criteria are numbered 1..{len(V.CRITERIA)}")
    checks = V.run_all(a.threads, numbers, echo=lambda s: print(s, file=sys.stderr, flush=True))
    rows = [[c.number, c.title, c.passed, round(c.seconds, 3), c.detail] for c in checks]
    code = EXIT_OK if all(c.passed for c in checks) else EXIT_NUMERIC
    return ["criterion", "title", "passed", "seconds", "detail"], rows, code


HANDLERS = {
    "series": cmd_series,
    "spectrum": cmd_spectrum,
    "closed-form": cmd_closed_form,
    "simulate": cmd_simulate,
    "rate": cmd_rate,
    "stencil": cmd_stencil,
    "figure": cmd_figure,
}


def _flags(a) -> dict:
    return {k: v for k, v in vars(a).items() if not k.startswith("_") and k not in ("out", "format")}


def run_cli(argv=None) -> int:
    from lyapflow.eigen import BranchCollision, NonConvergence

    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr, end="")
        return EXIT_USAGE
    code = EXIT_OK
    try:
        if a.command == "validate":
            cols, rows, code = cmd_validate(a)
        else:
            cols, rows = HANDLERS[a.command](a)
    except (ValueError, TypeError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"lyapflow {a.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BranchCollision, NonConvergence, ArithmeticError, OverflowError) as exc:
        print(f"lyapflow {a.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    manifest = lio.RunManifest.create(a.command, _flags(a), getattr(a, "_config", None))
    table = lio.Table(cols, rows, manifest)
    if a.format == "json":
        text = lio.write_json({"columns": cols, "rows": [[lio.format_value(v) for v in r] for r in rows]}, manifest)
    else:
        text = lio.write_csv(table)
    if a.out:
        with open(a.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
