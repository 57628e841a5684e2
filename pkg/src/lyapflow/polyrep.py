"""sl(d) generators acting on homogeneous polynomials of even degree.

Polynomials are sparse dicts ``{exponent tuple: Fraction}``.  Generators are
the first-order operators ``N_ij = x_i d/dx_j``, ``A_ij = x_i d/dx_i - x_j d/dx_j``
and ``K_ij = x_i d/dx_j - x_j d/dx_i`` (indices are 1-based, as in the usual
matrix-unit notation).

For even natural ``ell`` the space of degree-``ell`` polynomials is invariant
under every generator, so the companion operator ``Delta_K - k^2 sum A_ij^2``
restricted to the cyclic subspace of ``(x_1^2 + ... + x_d^2)^(ell/2)`` yields
an exact characteristic polynomial whose largest root is the leading
eigenvalue.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb, isqrt
from typing import Callable, Iterable

from lyapflow.exact import PolyL, rational_str

Poly = dict  # {tuple[int, ...]: Fraction}


@dataclass(frozen=True)
class MonomialBasis:
    d: int
    ell: int
    exponents: tuple[tuple[int, ...], ...]
    index: dict = field(repr=False, compare=False, hash=False)

    def __len__(self) -> int:
        return len(self.exponents)

    def vector(self, poly: Poly) -> list[Fraction]:
        out = [Fraction(0)] * len(self.exponents)
        for alpha, c in poly.items():
            out[self.index[alpha]] = Fraction(c)
        return out


def _compositions(total: int, parts: int) -> Iterable[tuple[int, ...]]:
    # lexicographically descending: x1^ell first
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def monomial_basis(d: int, ell: int) -> MonomialBasis:
    if d < 2:
        raise ValueError("dimension must be at least 2")
    if ell < 0 or ell % 2:
        raise ValueError(f"degree must be an even natural number, got {ell}")
    exps = tuple(_compositions(ell, d))
    assert len(exps) == comb(ell + d - 1, d - 1)
    return MonomialBasis(d, ell, exps, {a: i for i, a in enumerate(exps)})


def _add_term(out: Poly, alpha: tuple[int, ...], c) -> None:
    v = out.get(alpha, 0) + c
    if v:
        out[alpha] = v
    else:
        out.pop(alpha, None)


def _check_pair(kind: str, i: int, j: int, d: int) -> None:
    if not (1 <= i <= d and 1 <= j <= d) or i == j:
        raise ValueError(f"invalid index pair ({i}, {j}) for d={d}")
    if kind in ("A", "K") and i > j:
        raise ValueError(f"{kind}({i},{j}) requires i < j")
    if kind not in ("N", "A", "K"):
        raise ValueError(f"unknown generator kind {kind!r}")


def apply_N(i: int, j: int, poly: Poly) -> Poly:
    """x_i d/dx_j (0-based internally)."""
    out: Poly = {}
    for alpha, c in poly.items():
        aj = alpha[j]
        if aj == 0:
            continue
        beta = list(alpha)
        beta[j] -= 1
        beta[i] += 1
        _add_term(out, tuple(beta), c * aj)
    return out


def apply_A(i: int, j: int, poly: Poly) -> Poly:
    out: Poly = {}
    for alpha, c in poly.items():
        w = alpha[i] - alpha[j]
        if w:
            out[alpha] = c * w
    return out


def apply_K(i: int, j: int, poly: Poly) -> Poly:
    out = apply_N(i, j, poly)
    for alpha, c in apply_N(j, i, poly).items():
        _add_term(out, alpha, -c)
    return out


def euler_operator(poly: Poly) -> Poly:
    """sum_j x_j d/dx_j."""
    out: Poly = {}
    for alpha, c in poly.items():
        deg = sum(alpha)
        if deg:
            out[alpha] = c * deg
    return out


def generator(kind: str, i: int, j: int, d: int) -> Callable[[Poly], Poly]:
    """Operator for ``kind(i, j)`` with 1-based indices."""
    _check_pair(kind, i, j, d)
    fn = {"N": apply_N, "A": apply_A, "K": apply_K}[kind]
    return lambda p: fn(i - 1, j - 1, p)


def poly_add(*terms: tuple[object, Poly]) -> Poly:
    out: Poly = {}
    for c, p in terms:
        for alpha, v in p.items():
            _add_term(out, alpha, c * v)
    return out


@dataclass(frozen=True)
class GeneratorMatrix:
    kind: str
    i: int
    j: int
    basis: MonomialBasis
    entries: tuple[tuple[Fraction, ...], ...]  # entries[row][col]; col = image of basis[col]

    def trace(self) -> Fraction:
        return sum((self.entries[r][r] for r in range(len(self.entries))), Fraction(0))

    def to_json(self) -> list[list[str]]:
        return [[rational_str(x) for x in row] for row in self.entries]


def operator_matrix(op: Callable[[Poly], Poly], basis: MonomialBasis) -> list[list[Fraction]]:
    n = len(basis)
    cols = [basis.vector(op({alpha: Fraction(1)})) for alpha in basis.exponents]
    return [[cols[c][r] for c in range(n)] for r in range(n)]


def generator_matrix(kind: str, i: int, j: int, basis: MonomialBasis) -> GeneratorMatrix:
    op = generator(kind, i, j, basis.d)
    m = operator_matrix(op, basis)
    return GeneratorMatrix(kind, i, j, basis, tuple(tuple(row) for row in m))


def matmul(a: list[list[Fraction]], b: list[list[Fraction]]) -> list[list[Fraction]]:
    n, m, p = len(a), len(b), len(b[0]) if b else 0
    bt = list(zip(*b))
    out = []
    for r in range(n):
        row = a[r]
        nz = [(k, row[k]) for k in range(m) if row[k]]
        out.append([sum((v * bt[c][k] for k, v in nz), Fraction(0)) for c in range(p)])
    return out


def pairs(d: int) -> list[tuple[int, int]]:
    return list(combinations(range(1, d + 1), 2))


def casimir(d: int) -> Callable[[Poly], Poly]:
    """Delta_K = sum_{i<j} K_ij^2."""
    ks = [generator("K", i, j, d) for i, j in pairs(d)]
    return lambda p: poly_add(*((1, k(k(p))) for k in ks))


def sum_A_squared(d: int) -> Callable[[Poly], Poly]:
    As = [generator("A", i, j, d) for i, j in pairs(d)]
    return lambda p: poly_add(*((1, a(a(p))) for a in As))


def sum_N_squared(d: int) -> Callable[[Poly], Poly]:
    Ns = [generator("N", i, j, d) for i in range(1, d + 1) for j in range(1, d + 1) if i != j]
    return lambda p: poly_add(*((1, n(n(p))) for n in Ns))


@dataclass
class CasimirReport:
    d: int
    ell: int
    holds: bool
    max_discrepancy: Fraction
    dim: int
    worst_monomial: tuple[int, ...] | None = None

    def __bool__(self) -> bool:
        return self.holds


def verify_casimir_identity(d: int, ell: int) -> CasimirReport:
    """Check sum N_ij^2 = Delta_K + (d-1)ell + (d-1)/d ell^2 - (1/d) sum A_ij^2 exactly."""
    basis = monomial_basis(d, ell)
    lhs_op, cas, asq = sum_N_squared(d), casimir(d), sum_A_squared(d)
    shift = Fraction((d - 1) * ell) + Fraction(d - 1, d) * ell * ell
    worst, worst_alpha = Fraction(0), None
    for alpha in basis.exponents:
        p = {alpha: Fraction(1)}
        diff = poly_add((1, lhs_op(p)), (-1, cas(p)), (-shift, p), (Fraction(1, d), asq(p)))
        for v in diff.values():
            if abs(v) > worst:
                worst, worst_alpha = abs(v), alpha
    return CasimirReport(d, ell, worst == 0, worst, len(basis), worst_alpha)


def unit_power(d: int, ell: int) -> Poly:
    """(x_1^2 + ... + x_d^2)^(ell/2) expanded in monomials."""
    p: Poly = {(0,) * d: Fraction(1)}
    sq = {tuple(2 if t == s else 0 for t in range(d)): Fraction(1) for s in range(d)}
    for _ in range(ell // 2):
        out: Poly = {}
        for a, ca in p.items():
            for b, cb in sq.items():
                _add_term(out, tuple(x + y for x, y in zip(a, b)), ca * cb)
        p = out
    return p


def companion_operator(d: int, k2: Fraction) -> Callable[[Poly], Poly]:
    """Delta_K - k2 sum_{i<j} A_ij^2."""
    cas, asq = casimir(d), sum_A_squared(d)
    k2 = Fraction(k2)
    return lambda p: poly_add((1, cas(p)), (-k2, asq(p)))


def krylov_minimal_polynomial(op: Callable[[Poly], Poly], start: Poly, max_dim: int = 10_000) -> PolyL:
    """Monic minimal polynomial of ``start`` with respect to ``op``.

    Krylov vectors are reduced incrementally against an echelon basis; the
    first exact linear dependence closes the cyclic subspace.
    """
    # each echelon row: (pivot monomial, reduced vector, combination over Krylov indices)
    rows: list[tuple[tuple, Poly, dict[int, Fraction]]] = []
    current = dict(start)
    m = 0
    while m <= max_dim:
        w = dict(current)
        combo = {m: Fraction(1)}
        for piv, vec, cmb in rows:
            c = w.get(piv)
            if c:
                for alpha, v in vec.items():
                    _add_term(w, alpha, -c * v)
                for idx, v in cmb.items():
                    combo[idx] = combo.get(idx, 0) - c * v
        if not w:
            # sum_i combo[i] op^i(start) = 0 with combo[m] = 1
            return PolyL(combo.get(i, Fraction(0)) for i in range(m + 1))
        piv = max(w, key=lambda a: (abs(w[a]), a))
        scale = w[piv]
        vec = {a: v / scale for a, v in w.items()}
        cmb = {i: v / scale for i, v in combo.items() if v}
        new_rows = []
        for p2, v2, c2 in rows:
            c = v2.get(piv)
            if c:
                v2 = dict(v2)
                for alpha, v in vec.items():
                    _add_term(v2, alpha, -c * v)
                c2 = dict(c2)
                for idx, v in cmb.items():
                    c2[idx] = c2.get(idx, 0) - c * v
            new_rows.append((p2, v2, c2))
        rows = new_rows + [(piv, vec, cmb)]
        current = op(current)
        m += 1
    raise RuntimeError("Krylov subspace exceeded max_dim")


def _sturm_sequence(p: PolyL) -> list[PolyL]:
    seq = [p, p.deriv()]
    while not seq[-1].is_zero() and seq[-1].degree > 0:
        _, r = seq[-2].divmod(seq[-1])
        seq.append(-r)
    return [s for s in seq if not s.is_zero()]


def _sign_changes(seq: list[PolyL], x: Fraction) -> int:
    signs = [s.eval(x) for s in seq]
    signs = [v for v in signs if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if (a < 0) != (b < 0))


def _squarefree(p: PolyL) -> PolyL:
    g = p
    h = p.deriv()
    while not h.is_zero():
        g, h = h, g.divmod(h)[1]
    if g.degree <= 0:
        return p
    return p.divmod(g)[0]


def largest_real_root(p: PolyL, tol: Fraction = Fraction(1, 10**30)) -> tuple[Fraction, Fraction]:
    """Bracket ``[lo, hi]`` of width <= tol around the largest real root of ``p``."""
    if p.degree < 1:
        raise ValueError("polynomial has no roots")
    if p.degree == 1:
        r = -p[0] / p[1]
        return r, r
    if p.degree == 2:
        a, b, c = p[2], p[1], p[0]
        disc = b * b - 4 * a * c
        if disc < 0:
            raise ValueError("no real root")
        # sqrt(disc) bracketed via integer square roots of a scaled discriminant
        scale = 10**32
        num = disc.numerator * disc.denominator * scale * scale
        s_lo = Fraction(isqrt(num), disc.denominator * scale)
        s_hi = s_lo + Fraction(1, disc.denominator * scale)
        if a > 0:
            return (-b + s_lo) / (2 * a), (-b + s_hi) / (2 * a)
        return (-b - s_hi) / (2 * a), (-b - s_lo) / (2 * a)
    q = _squarefree(p)
    seq = _sturm_sequence(q)
    bound = 1 + max(abs(c / q.coeffs[-1]) for c in q.coeffs[:-1])
    lo, hi = -bound, bound
    if _sign_changes(seq, lo) - _sign_changes(seq, hi) == 0:
        raise ValueError("no real root")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if _sign_changes(seq, mid) - _sign_changes(seq, hi) > 0:
            lo = mid
        else:
            hi = mid
    return lo, hi


@dataclass
class QuasiSolvableResult:
    d: int
    ell: int
    k2: Fraction
    charpoly: PolyL  # monic, in mu
    bracket: tuple[Fraction, Fraction]

    @property
    def dim(self) -> int:
        return self.charpoly.degree

    @property
    def mu(self) -> float:
        lo, hi = self.bracket
        return float((lo + hi) / 2)


def antisymmetric_seed(d: int, ell: int) -> Poly:
    """x_1^ell - x_2^ell: seeds the sector that is not permutation invariant."""
    monomial_basis(d, ell)
    a = tuple(ell if t == 0 else 0 for t in range(d))
    b = tuple(ell if t == 1 else 0 for t in range(d))
    return {a: Fraction(1), b: Fraction(-1)}


def quasi_solvable_mu(d: int, ell: int, k2, seed: Poly | None = None) -> QuasiSolvableResult:
    """Leading eigenvalue of Delta_K - k2 sum A^2 on the cyclic subspace of ``seed``.

    The default seed is 1_ell = (x_1^2 + ... + x_d^2)^(ell/2), whose cyclic
    subspace carries the dominant eigenvalue.
    """
    k2 = Fraction(k2)
    if not 0 <= k2 <= 1:
        raise ValueError("k2 must lie in [0, 1]")
    monomial_basis(d, ell)  # validates ell
    start = unit_power(d, ell) if seed is None else seed
    cp = krylov_minimal_polynomial(companion_operator(d, k2), start)
    return QuasiSolvableResult(d, ell, k2, cp, largest_real_root(cp))


def _lagrange(xs: list[Fraction], ys: list[Fraction]) -> PolyL:
    out = PolyL()
    for i, (xi, yi) in enumerate(zip(xs, ys)):
        term = PolyL.const(yi)
        for j, xj in enumerate(xs):
            if j != i:
                term = term * PolyL((-xj, 1)) / (xi - xj)
        out = out + term
    return out


def quasi_solvable_charpoly(d: int, ell: int, seed: Poly | None = None) -> list[PolyL]:
    """Characteristic polynomial with coefficients polynomial in k^2.

    Returns ``c`` with ``charpoly(mu) = sum_i c[i](k^2) mu^i``.  Built by exact
    interpolation: the operator is affine in k^2, so the coefficient of
    ``mu^(m-i)`` has degree at most ``i``.
    """
    samples = []
    start = unit_power(d, ell) if seed is None else seed
    for i in range(1, 128):
        k2 = Fraction(i, 128)
        cp = krylov_minimal_polynomial(companion_operator(d, k2), start)
        samples.append((k2, cp))
        m = max(s[1].degree for s in samples)
        good = [s for s in samples if s[1].degree == m]
        if len(good) >= m + 2:
            break
    else:
        raise RuntimeError("not enough generic sample points")
    xs = [s[0] for s in good]
    return [_lagrange(xs, [s[1][i] for s in good]) for i in range(m + 1)]


def exact_charpoly(mat: list[list[Fraction]]) -> PolyL:
    """Faddeev-LeVerrier characteristic polynomial det(mu I - M), exact."""
    n = len(mat)
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    mk = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        prev = coeffs[n - k + 1]
        mk = [[mk[r][c] + (prev if r == c else 0) for c in range(n)] for r in range(n)]
        mk = matmul(mat, mk)
        coeffs[n - k] = -sum((mk[r][r] for r in range(n)), Fraction(0)) / k
    return PolyL(coeffs)
