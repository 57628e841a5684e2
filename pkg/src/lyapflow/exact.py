"""Exact arithmetic: rationals, polynomials in ell, truncated series in k^2.

Rationals are plain :class:`fractions.Fraction` values (arbitrary precision,
always reduced).  :class:`PolyL` is an immutable univariate polynomial with
rational coefficients; :class:`K2Series` is a power series in ``k^2`` whose
coefficients are ``PolyL`` values, truncated at a fixed order.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence, Union

RationalLike = Union[int, Fraction]


def rational_make(num: int, den: int = 1) -> Fraction:
    """Build a reduced rational ``num/den`` with positive denominator."""
    if den == 0:
        raise ZeroDivisionError("rational with zero denominator")
    return Fraction(int(num), int(den))


def rational_str(r: RationalLike) -> str:
    """Serialize as ``"num/den"`` (integers keep the ``/1``)."""
    r = Fraction(r)
    return f"{r.numerator}/{r.denominator}"


def rational_parse(text: str) -> Fraction:
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return rational_make(int(num), int(den))
    return Fraction(text)


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, float):
        raise TypeError("floats are not accepted in exact arithmetic")
    return Fraction(c)


class PolyL:
    """Polynomial in one variable (``ell`` by default) with rational coefficients.

    ``coeffs[i]`` multiplies ``x**i``.  Trailing zeros are stripped, so the zero
    polynomial has an empty coefficient tuple and degree -1.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[RationalLike] = ()):
        cs = [_as_fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)

    @classmethod
    def const(cls, c: RationalLike) -> "PolyL":
        return cls((c,))

    @classmethod
    def x(cls) -> "PolyL":
        return cls((0, 1))

    @classmethod
    def from_roots(cls, roots: Sequence[RationalLike], lead: RationalLike = 1) -> "PolyL":
        p = cls.const(lead)
        for r in roots:
            p = p * cls((-_as_fraction(r), 1))
        return p

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __getitem__(self, i: int) -> Fraction:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def __iter__(self):
        return iter(self.coeffs)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, PolyL):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == PolyL.const(other).coeffs
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"PolyL({[rational_str(c) for c in self.coeffs]})"

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mono = "" if i == 0 else ("l" if i == 1 else f"l^{i}")
            if mono and c in (1, -1):
                terms.append(("-" if c < 0 else "") + mono)
            else:
                terms.append(f"{c}" + (f"*{mono}" if mono else ""))
        return " + ".join(terms).replace("+ -", "- ")

    def _coerce(self, other) -> "PolyL":
        if isinstance(other, PolyL):
            return other
        return PolyL.const(_as_fraction(other))

    def __add__(self, other) -> "PolyL":
        o = self._coerce(other)
        n = max(len(self.coeffs), len(o.coeffs))
        return PolyL(self[i] + o[i] for i in range(n))

    __radd__ = __add__

    def __neg__(self) -> "PolyL":
        return PolyL(-c for c in self.coeffs)

    def __sub__(self, other) -> "PolyL":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "PolyL":
        return self._coerce(other) - self

    def __mul__(self, other) -> "PolyL":
        if not isinstance(other, PolyL):
            c = _as_fraction(other)
            return PolyL(c * a for a in self.coeffs)
        if not self.coeffs or not other.coeffs:
            return PolyL()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return PolyL(out)

    __rmul__ = __mul__

    def __truediv__(self, c: RationalLike) -> "PolyL":
        c = _as_fraction(c)
        if c == 0:
            raise ZeroDivisionError("division of a polynomial by zero")
        return PolyL(a / c for a in self.coeffs)

    def __pow__(self, n: int) -> "PolyL":
        if n < 0:
            raise ValueError("negative power")
        out = PolyL.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __call__(self, x):
        return self.eval(x)

    def eval(self, x):
        """Horner evaluation.  Exact for rational ``x``; float for float ``x``."""
        if isinstance(x, float):
            acc = 0.0
            for c in reversed(self.coeffs):
                acc = acc * x + float(c)
            return acc
        if isinstance(x, PolyL):
            acc = PolyL()
            for c in reversed(self.coeffs):
                acc = acc * x + c
            return acc
        x = _as_fraction(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def compose(self, inner: "PolyL") -> "PolyL":
        """``self(inner(x))``."""
        return self.eval(inner)

    def deriv(self, k: int = 1) -> "PolyL":
        cs = list(self.coeffs)
        for _ in range(k):
            cs = [i * c for i, c in enumerate(cs)][1:]
        return PolyL(cs)

    def divmod(self, other: "PolyL") -> tuple["PolyL", "PolyL"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        q = [Fraction(0)] * max(len(rem) - len(other.coeffs) + 1, 0)
        lead = other.coeffs[-1]
        for shift in range(len(q) - 1, -1, -1):
            c = rem[shift + len(other.coeffs) - 1] / lead
            q[shift] = c
            if c:
                for i, b in enumerate(other.coeffs):
                    rem[shift + i] -= c * b
        return PolyL(q), PolyL(rem)

    def divisible_by(self, other: "PolyL") -> bool:
        return self.divmod(other)[1].is_zero()

    def to_json(self) -> list[str]:
        return [rational_str(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, data: Sequence[str]) -> "PolyL":
        return cls(rational_parse(s) for s in data)


def poly_eval(p: PolyL, x: RationalLike) -> Fraction:
    return p.eval(x)


ELL = PolyL.x()


class K2Series:
    """Truncated power series ``sum_n c_n k^(2n)``, ``n = 0..order``.

    Coefficients are :class:`PolyL`.  Arithmetic requires equal orders and
    never extends the order.
    """

    __slots__ = ("coeffs", "order")

    def __init__(self, coeffs: Iterable, order: int):
        if order < 0:
            raise ValueError("order must be non-negative")
        cs = [c if isinstance(c, PolyL) else PolyL.const(c) for c in coeffs]
        if len(cs) > order + 1:
            raise ValueError(f"{len(cs)} coefficients exceed order {order}")
        cs += [PolyL()] * (order + 1 - len(cs))
        self.coeffs: tuple[PolyL, ...] = tuple(cs)
        self.order = order

    @classmethod
    def zero(cls, order: int) -> "K2Series":
        return cls((), order)

    @classmethod
    def one(cls, order: int) -> "K2Series":
        return cls((PolyL.const(1),), order)

    def __getitem__(self, n: int) -> PolyL:
        return self.coeffs[n]

    def __len__(self) -> int:
        return self.order + 1

    def __eq__(self, other) -> bool:
        if not isinstance(other, K2Series):
            return NotImplemented
        return self.order == other.order and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash((self.coeffs, self.order))

    def __repr__(self) -> str:
        return f"K2Series(order={self.order}, {[str(c) for c in self.coeffs]})"

    def _check(self, other: "K2Series") -> None:
        if not isinstance(other, K2Series):
            raise TypeError("expected K2Series")
        if other.order != self.order:
            raise ValueError(f"mismatched truncation orders {self.order} != {other.order}")

    def __add__(self, other: "K2Series") -> "K2Series":
        self._check(other)
        return K2Series((a + b for a, b in zip(self.coeffs, other.coeffs)), self.order)

    def __sub__(self, other: "K2Series") -> "K2Series":
        self._check(other)
        return K2Series((a - b for a, b in zip(self.coeffs, other.coeffs)), self.order)

    def __neg__(self) -> "K2Series":
        return K2Series((-a for a in self.coeffs), self.order)

    def __mul__(self, other) -> "K2Series":
        if not isinstance(other, K2Series):
            return K2Series((a * other for a in self.coeffs), self.order)
        self._check(other)
        out = [PolyL()] * (self.order + 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j in range(self.order + 1 - i):
                b = other.coeffs[j]
                if not b.is_zero():
                    out[i + j] = out[i + j] + a * b
        return K2Series(out, self.order)

    __rmul__ = __mul__

    def truncate(self, order: int) -> "K2Series":
        if order > self.order:
            raise ValueError("cannot extend a truncated series")
        return K2Series(self.coeffs[: order + 1], order)

    def map(self, fn) -> "K2Series":
        return K2Series((fn(c) for c in self.coeffs), self.order)

    def at_ell(self, ell: RationalLike) -> "K2Series":
        """Specialize every coefficient at a numeric ``ell``."""
        return self.map(lambda c: PolyL.const(c.eval(ell)))

    def substitute_ell(self, inner: PolyL) -> "K2Series":
        return self.map(lambda c: c.compose(inner))

    def ell_coefficient(self, j: int) -> list[Fraction]:
        """Coefficient of ``ell**j`` in every k^2 order."""
        return [c[j] for c in self.coeffs]

    def scalars(self) -> list[Fraction]:
        """Coefficients as rationals; each must be constant."""
        out = []
        for c in self.coeffs:
            if c.degree > 0:
                raise ValueError("series has ell-dependent coefficients")
            out.append(c[0])
        return out

    def evaluate(self, k2, ell=None):
        """Sum the series at ``k2`` (and ``ell`` if coefficients depend on it)."""
        vals = [c.eval(ell) if ell is not None else c[0] for c in self.coeffs]
        if isinstance(k2, float) or isinstance(ell, float):
            acc = 0.0
            for v in reversed(vals):
                acc = acc * float(k2) + float(v)
            return acc
        acc = Fraction(0)
        for v in reversed(vals):
            acc = acc * _as_fraction(k2) + v
        return acc

    def to_json(self) -> list[list[str]]:
        return [c.to_json() for c in self.coeffs]


def series_arith(a: K2Series, b: K2Series, op: str) -> K2Series:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown series operation {op!r}")
