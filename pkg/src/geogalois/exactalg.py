"""Exact univariate algebra over the rationals.

Rationals are :class:`fractions.Fraction`.  :class:`Poly` is a dense
immutable polynomial, :class:`RatFun` a reduced quotient of two of them.
The gcd and resultant use the subresultant PRS on integer-scaled inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Iterable, Sequence

Rat = Fraction

#: degree reported for the zero polynomial
DEG_ZERO = -1


class PoleOrderTooHigh(ValueError):
    """A denominator factor has multiplicity >= 3 (non-Fuchsian finite point)."""

    def __init__(self, factor: "Poly", multiplicity: int):
        super().__init__(f"factor {factor} has multiplicity {multiplicity} > 2")
        self.factor = factor
        self.multiplicity = multiplicity


def _as_rat(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    return Fraction(c)


def _strip(cs: list) -> tuple:
    n = len(cs)
    while n and not cs[n - 1]:
        n -= 1
    return tuple(cs[:n])


def _int_scale(cs: Sequence[Fraction]) -> tuple[list[int], int]:
    """Return integers ``a`` and ``den`` with ``cs == a / den``."""
    den = reduce(lcm, (c.denominator for c in cs), 1)
    return [c.numerator * (den // c.denominator) for c in cs], den


def _int_convolve(a: Sequence[int], b: Sequence[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


class Poly:
    """Dense univariate polynomial with rational coefficients, lowest degree first."""

    __slots__ = ("coeffs", "var")

    def __init__(self, coeffs: Iterable = (), var: str = "y"):
        self.coeffs: tuple[Fraction, ...] = _strip([_as_rat(c) for c in coeffs])
        self.var = var

    # construction helpers
    @classmethod
    def const(cls, c, var: str = "y") -> "Poly":
        return cls([c], var)

    @classmethod
    def gen(cls, var: str = "y") -> "Poly":
        return cls([0, 1], var)

    @classmethod
    def monomial(cls, k: int, c=1, var: str = "y") -> "Poly":
        return cls([0] * k + [c], var)

    @classmethod
    def from_roots(cls, roots: Iterable, var: str = "y") -> "Poly":
        p = cls([1], var)
        for r in roots:
            p = p * cls([-_as_rat(r), 1], var)
        return p

    def _wrap(self, cs) -> "Poly":
        p = Poly.__new__(Poly)
        p.coeffs = _strip(list(cs))
        p.var = self.var
        return p

    # basic properties
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lc(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_const(self) -> bool:
        return len(self.coeffs) <= 1

    def coeff(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def monic(self) -> "Poly":
        if not self.coeffs:
            return self
        c = self.coeffs[-1]
        return self if c == 1 else self._wrap(x / c for x in self.coeffs)

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == _strip([_as_rat(other)])
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            return other
        return Poly([other], self.var)

    # ring operations
    def __add__(self, other) -> "Poly":
        if not isinstance(other, (Poly, int, Fraction)):
            return NotImplemented
        o = self._coerce(other).coeffs
        a = self.coeffs
        n = max(len(a), len(o))
        return self._wrap(
            (a[i] if i < len(a) else 0) + (o[i] if i < len(o) else 0) for i in range(n)
        )

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return self._wrap(-c for c in self.coeffs)

    def __sub__(self, other) -> "Poly":
        if not isinstance(other, (Poly, int, Fraction)):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Poly":
        if isinstance(other, (int, Fraction)):
            if not other:
                return self._wrap([])
            return self._wrap(c * other for c in self.coeffs)
        if not isinstance(other, Poly):
            return NotImplemented
        if not self.coeffs or not other.coeffs:
            return self._wrap([])
        a, da = _int_scale(self.coeffs)
        b, db = _int_scale(other.coeffs)
        den = da * db
        return self._wrap(Fraction(c, den) for c in _int_convolve(a, b))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly([1], self.var)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __divmod__(self, other) -> tuple["Poly", "Poly"]:
        other = self._coerce(other)
        if not other.coeffs:
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.coeffs)
        db = other.degree
        inv = 1 / other.coeffs[-1]
        q = [Fraction(0)] * max(len(r) - db, 0)
        bc = other.coeffs
        for k in range(len(r) - 1, db - 1, -1):
            c = r[k]
            if not c:
                continue
            c = c * inv
            q[k - db] = c
            for j in range(db + 1):
                r[k - db + j] -= c * bc[j]
        return self._wrap(q), self._wrap(r[:db] if db > 0 else [])

    def __floordiv__(self, other) -> "Poly":
        return divmod(self, other)[0]

    def __mod__(self, other) -> "Poly":
        return divmod(self, other)[1]

    def exact_div(self, other) -> "Poly":
        q, r = divmod(self, other)
        if r:
            raise ArithmeticError(f"{other} does not divide {self}")
        return q

    def deriv(self) -> "Poly":
        return self._wrap(c * k for k, c in enumerate(self.coeffs) if k)

    def __call__(self, x):
        """Horner evaluation; ``x`` may be any ring element supporting ``*`` and ``+``."""
        if not self.coeffs:
            return Fraction(0) if isinstance(x, (int, Fraction)) else x * 0
        acc = self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * x + c
        return acc

    def compose(self, inner: "Poly") -> "Poly":
        acc = Poly([], inner.var)
        for c in reversed(self.coeffs):
            acc = acc * inner + c
        return acc

    def scale_var(self, s) -> "Poly":
        """Return p(s*y)."""
        s = _as_rat(s)
        return self._wrap(c * s**k for k, c in enumerate(self.coeffs))

    def reversed_coeffs(self, n: int | None = None) -> "Poly":
        """Return y^n p(1/y) with n defaulting to deg p."""
        n = self.degree if n is None else n
        cs = list(self.coeffs) + [Fraction(0)] * (n + 1 - len(self.coeffs))
        return self._wrap(reversed(cs[: n + 1]))

    def content_primitive(self) -> tuple[Fraction, list[int]]:
        """Split into (content, primitive integer coefficient list)."""
        if not self.coeffs:
            return Fraction(0), []
        a, den = _int_scale(self.coeffs)
        g = reduce(gcd, a)
        if a[-1] < 0:
            g = -g
        return Fraction(g, den), [x // g for x in a]

    def __repr__(self) -> str:
        return f"Poly({self})"

    def __str__(self) -> str:
        return format_poly(self)


def format_poly(p: Poly, var: str | None = None) -> str:
    """Render in the expression grammar accepted by the parser."""
    v = var or p.var
    if not p.coeffs:
        return "0"
    parts = []
    for k in range(p.degree, -1, -1):
        c = p.coeffs[k]
        if not c:
            continue
        sign = "-" if c < 0 else "+"
        a = abs(c)
        mono = "" if k == 0 else (v if k == 1 else f"{v}^{k}")
        if not mono:
            body = str(a)
        elif a == 1:
            body = mono
        else:
            body = f"{a}*{mono}"
        parts.append((sign, body))
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


# ---------------------------------------------------------------------------
# subresultant machinery


def _int_prem(a: list[int], b: list[int]) -> list[int]:
    """Pseudo-remainder of integer polynomials: lc(b)^(da-db+1) a mod b."""
    da, db = len(a) - 1, len(b) - 1
    r = list(a)
    lb = b[-1]
    e = da - db + 1
    for k in range(da, db - 1, -1):
        c = r[k]
        r = [x * lb for x in r]
        if c:
            for j in range(db + 1):
                r[k - db + j] -= c * b[j]
        e -= 1
        r.pop()
    if e:
        r = [x * lb**e for x in r]
    while r and not r[-1]:
        r.pop()
    return r


def _int_content(a: list[int]) -> int:
    return reduce(gcd, a, 0)


def _subresultant_res(a: list[int], b: list[int]) -> int:
    """Resultant of primitive-or-not integer polynomials (Collins/Brown)."""
    if not a or not b:
        return 0
    ca, cb = _int_content(a), _int_content(b)
    a = [x // ca for x in a]
    b = [x // cb for x in b]
    da, db = len(a) - 1, len(b) - 1
    t = ca**db * cb**da
    s = 1
    if da < db:
        a, b = b, a
        da, db = db, da
        if da % 2 and db % 2:
            s = -s
    g = h = 1
    while True:
        delta = da - db
        if da % 2 and db % 2:
            s = -s
        r = _int_prem(a, b)
        if not r:
            return 0
        a = b
        denom = g * h**delta
        b = [x // denom for x in r]
        g = a[-1]
        # h <- h^(1-delta) * g^delta
        if delta == 0:
            pass
        elif delta == 1:
            h = g
        else:
            h = g**delta // h ** (delta - 1)
        da, db = len(a) - 1, len(b) - 1
        if db == 0:
            if da == 0:
                h = 1
            elif da == 1:
                h = b[0]
            else:
                h = b[0] ** da // h ** (da - 1)
            return s * t * h


def resultant(p: Poly, q: Poly) -> Fraction:
    """Res(p, q) = lc(p)^deg(q) * prod q(alpha) over roots alpha of p."""
    if p.is_zero() or q.is_zero():
        return Fraction(0)
    if p.degree == 0:
        return p.lc**q.degree
    if q.degree == 0:
        return q.lc**p.degree
    a, dena = _int_scale(p.coeffs)
    b, denb = _int_scale(q.coeffs)
    res = _subresultant_res(a, b)
    return Fraction(res, dena**q.degree * denb**p.degree)


def _int_subresultant_gcd(a: list[int], b: list[int]) -> list[int]:
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return a
    ca, cb = _int_content(a), _int_content(b)
    a = [x // ca for x in a]
    b = [x // cb for x in b]
    g = h = 1
    while True:
        delta = len(a) - len(b)
        r = _int_prem(a, b)
        if not r:
            return b
        if len(r) == 1:
            return [1]
        a = b
        denom = g * h**delta
        b = [x // denom for x in r]
        g = a[-1]
        if delta == 0:
            pass
        elif delta == 1:
            h = g
        else:
            h = g**delta // h ** (delta - 1)


def poly_gcd(p: Poly, q: Poly) -> Poly:
    """Monic gcd; gcd(0, 0) is 0."""
    if p.is_zero():
        return q.monic()
    if q.is_zero():
        return p.monic()
    _, a = p.content_primitive()
    _, b = q.content_primitive()
    g = _int_subresultant_gcd(a, b)
    return Poly(g, p.var).monic()


def ext_gcd(p: Poly, q: Poly) -> tuple[Poly, Poly, Poly]:
    """Return (g, s, t) with s*p + t*q = g, g monic."""
    r0, r1 = p, q
    s0, s1 = Poly([1], p.var), Poly([], p.var)
    t0, t1 = Poly([], p.var), Poly([1], p.var)
    while r1:
        quo, rem = divmod(r0, r1)
        r0, r1 = r1, rem
        s0, s1 = s1, s0 - quo * s1
        t0, t1 = t1, t0 - quo * t1
    if r0.is_zero():
        return r0, s0, t0
    c = r0.lc
    return r0 * (1 / c), s0 * (1 / c), t0 * (1 / c)


def invmod(a: Poly, m: Poly) -> Poly:
    """Inverse of ``a`` modulo ``m``; raises ZeroDivisionError if not coprime."""
    g, s, _ = ext_gcd(a % m, m)
    if g.degree != 0:
        raise ZeroDivisionError(f"{a} is not invertible modulo {m}")
    return s % m


def squarefree_factorization(p: Poly) -> list[tuple[Poly, int]]:
    """Yun's algorithm.

    Returns monic, square-free, pairwise coprime ``q_i`` with strictly
    increasing multiplicities such that ``p = lc(p) * prod q_i**m_i``.
    Constant groups are omitted.
    """
    if p.is_zero():
        raise ValueError("square-free factorization of the zero polynomial")
    f = p.monic()
    out: list[tuple[Poly, int]] = []
    if f.degree <= 0:
        return out
    df = f.deriv()
    a = poly_gcd(f, df)
    b = f // a
    c = df // a - b.deriv()
    i = 1
    while b.degree > 0:
        d = poly_gcd(b, c)
        if d.degree > 0:
            out.append((d, i))
        b = b // d
        c = c // d - b.deriv()
        i += 1
    return out


def squarefree_part(p: Poly) -> Poly:
    if p.degree <= 0:
        return Poly([1], p.var)
    return p.monic() // poly_gcd(p, p.deriv())


# ---------------------------------------------------------------------------
# rational functions


class RatFun:
    """Reduced quotient num/den with monic denominator; zero is 0/1."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, *, _reduced: bool = False):
        var = num.var if isinstance(num, Poly) else (den.var if isinstance(den, Poly) else "y")
        if not isinstance(num, Poly):
            num = Poly([num], var)
        if den is None:
            den = Poly([1], num.var)
        elif not isinstance(den, Poly):
            den = Poly([den], num.var)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if not _reduced:
            if num.is_zero():
                den = Poly([1], num.var)
            else:
                g = poly_gcd(num, den)
                if g.degree > 0:
                    num = num // g
                    den = den // g
                c = den.lc
                if c != 1:
                    num = num * (1 / c)
                    den = den * (1 / c)
        self.num = num
        self.den = den

    @property
    def var(self) -> str:
        return self.num.var

    @classmethod
    def from_poly(cls, p: Poly) -> "RatFun":
        return cls(p, Poly([1], p.var), _reduced=True)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_poly(self) -> bool:
        return self.den.degree == 0

    def _coerce(self, other) -> "RatFun":
        if isinstance(other, RatFun):
            return other
        if isinstance(other, Poly):
            return RatFun.from_poly(other)
        return RatFun(Poly([other], self.var), _reduced=False)

    def __eq__(self, other) -> bool:
        if isinstance(other, (RatFun, Poly, int, Fraction)):
            o = self._coerce(other)
            return self.num == o.num and self.den == o.den
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def __add__(self, other) -> "RatFun":
        if not isinstance(other, (RatFun, Poly, int, Fraction)):
            return NotImplemented
        o = self._coerce(other)
        g = poly_gcd(self.den, o.den)
        if g.degree <= 0:
            return RatFun(self.num * o.den + o.num * self.den, self.den * o.den)
        d1 = self.den // g
        d2 = o.den // g
        return RatFun(self.num * d2 + o.num * d1, d1 * o.den)

    __radd__ = __add__

    def __neg__(self) -> "RatFun":
        return RatFun(-self.num, self.den, _reduced=True)

    def __sub__(self, other) -> "RatFun":
        if not isinstance(other, (RatFun, Poly, int, Fraction)):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "RatFun":
        return self._coerce(other) - self

    def __mul__(self, other) -> "RatFun":
        if not isinstance(other, (RatFun, Poly, int, Fraction)):
            return NotImplemented
        o = self._coerce(other)
        return RatFun(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def inverse(self) -> "RatFun":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero rational function")
        return RatFun(self.den, self.num)

    def __truediv__(self, other) -> "RatFun":
        if not isinstance(other, (RatFun, Poly, int, Fraction)):
            return NotImplemented
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other) -> "RatFun":
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int) -> "RatFun":
        if k < 0:
            return self.inverse() ** (-k)
        return RatFun(self.num**k, self.den**k, _reduced=True)

    def deriv(self) -> "RatFun":
        return RatFun(self.num.deriv() * self.den - self.num * self.den.deriv(), self.den**2)

    def __call__(self, x):
        return self.num(x) / self.den(x)

    def __repr__(self) -> str:
        return f"RatFun({self})"

    def __str__(self) -> str:
        if self.is_poly():
            return str(self.num)
        n = str(self.num)
        if len(self.num.coeffs) - sum(1 for c in self.num.coeffs if not c) > 1:
            n = f"({n})"
        d = str(self.den)
        if sum(1 for c in self.den.coeffs if c) > 1 or self.den.lc != 1:
            d = f"({d})"
        return f"{n}/{d}"


# ---------------------------------------------------------------------------
# partial fractions


@dataclass(frozen=True)
class PFTerm:
    """Terms U/q + V/q^2 over one square-free factor q (V is zero when m == 1)."""

    factor: Poly
    multiplicity: int
    u: Poly
    v: Poly


@dataclass(frozen=True)
class PartialFractions:
    poly_part: Poly
    terms: tuple[PFTerm, ...]

    def reassemble(self) -> RatFun:
        acc = RatFun.from_poly(self.poly_part)
        for t in self.terms:
            acc = acc + RatFun(t.u, t.factor)
            if t.multiplicity == 2:
                acc = acc + RatFun(t.v, t.factor**2)
        return acc


def partial_fractions(r: RatFun) -> PartialFractions:
    """Group the decomposition of ``r`` by square-free denominator factors.

    Raises :class:`PoleOrderTooHigh` if any factor has multiplicity >= 3.
    """
    poly_part, rem = divmod(r.num, r.den)
    groups = squarefree_factorization(r.den)
    for q, m in groups:
        if m >= 3:
            raise PoleOrderTooHigh(q, m)
    terms = []
    for q, m in groups:
        qm = q**m
        cofactor = r.den // qm
        a = (rem * invmod(cofactor, qm)) % qm
        u, v = divmod(a, q) if m == 2 else (a, Poly([], r.var))
        terms.append(PFTerm(q, m, u, v))
    return PartialFractions(poly_part, tuple(terms))


# ---------------------------------------------------------------------------
# helpers on the quotient ring Q[t]/(q)


def power_sums(q: Poly, count: int) -> list[Fraction]:
    """Newton power sums p_0..p_{count-1} of the roots of ``q``."""
    q = q.monic()
    n = q.degree
    c = q.coeffs  # q = y^n + c[n-1] y^(n-1) + ... + c[0]
    p = [Fraction(n)]
    for k in range(1, count):
        s = Fraction(0)
        for i in range(1, min(k - 1, n) + 1):
            s -= c[n - i] * p[k - i]
        if k <= n:
            s -= k * c[n - k]
        p.append(s)
    return p


def trace_mod(f: Poly, q: Poly) -> Fraction:
    """Sum of f(a) over the roots a of ``q`` (with multiplicity)."""
    f = f % q
    ps = power_sums(q, max(f.degree + 1, 1))
    return sum((c * ps[k] for k, c in enumerate(f.coeffs)), Fraction(0))
