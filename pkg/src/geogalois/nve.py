"""Normal variational equation of the planar geodesic on a symmetric Monge patch.

For ``z = f(x, y)`` with ``f_x(0, y) = 0`` the plane ``x = 0`` carries a
geodesic.  Linearising the geodesic flow across it gives

    xi'' + a(y) xi' + b(y) xi = 0,
    a = -f_y f_yy / (1 + f_y^2),   b = f_yy f_xx / (1 + f_y^2)   (at x = 0),

and ``w = xi * exp(1/2 int a)`` turns it into ``w'' = r w`` with
``r = a^2/4 + a'/2 - b``.  The singularity profile of ``r`` feeds the
Kovacic analysis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .exactalg import (
    PoleOrderTooHigh,
    Poly,
    RatFun,
    invmod,
    partial_fractions,
    poly_gcd,
    squarefree_factorization,
)
from .exprcore import (
    DivisionByZeroPossible,
    Expr,
    ExprError,
    Num,
    differentiate,
    eval_interval,
    free_vars,
    has_functions,
    parse,
    substitute,
    to_ratfun,
    to_string,
)
from .intervals import isolate_roots, iv_contains_zero, refine
from .numfield import sum_over_roots

X0 = {"x": Num(0)}


class SymmetryViolated(ExprError):
    def __init__(self, message: str, witness: Fraction | None = None):
        super().__init__(message)
        self.witness = witness


class NotFuchsian(ArithmeticError):
    pass


class NonConstantBeta(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# quadratic surds


def _squarefree_split(n: int) -> tuple[int, int]:
    """n = s^2 * d with d square-free (sign kept on d)."""
    sign = -1 if n < 0 else 1
    n = abs(n)
    s, d = 1, 1
    k = 2
    while k * k <= n:
        while n % (k * k) == 0:
            n //= k * k
            s *= k
        if n % k == 0:
            n //= k
            d *= k
        k += 1
    return s, sign * d * n


def rational_sqrt(q: Fraction) -> Fraction | None:
    if q < 0:
        return None
    a, b = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if a * a == q.numerator and b * b == q.denominator:
        return Fraction(a, b)
    return None


@dataclass(frozen=True)
class QuadExt:
    """rat + coef * sqrt(radicand); radicand square-free, negative for complex values."""

    rat: Fraction
    coef: Fraction = Fraction(0)
    radicand: int = 1

    @classmethod
    def sqrt_of(cls, q: Fraction) -> "QuadExt":
        q = Fraction(q)
        if q == 0:
            return cls(Fraction(0))
        s, d = _squarefree_split(q.numerator * q.denominator)
        coef = Fraction(s, q.denominator)
        if d == 1:
            return cls(coef)
        return cls(Fraction(0), coef, d)

    def is_rational(self) -> bool:
        return self.coef == 0

    def _check(self, other: "QuadExt") -> int:
        if self.coef and other.coef and self.radicand != other.radicand:
            raise ValueError("surds with different radicands")
        return self.radicand if self.coef else other.radicand

    def __add__(self, other: "QuadExt") -> "QuadExt":
        other = _lift_q(other)
        d = self._check(other)
        return QuadExt(self.rat + other.rat, self.coef + other.coef, d if self.coef + other.coef else 1)

    __radd__ = __add__

    def __neg__(self) -> "QuadExt":
        return QuadExt(-self.rat, -self.coef, self.radicand)

    def __sub__(self, other) -> "QuadExt":
        return self + (-_lift_q(other))

    def __mul__(self, other) -> "QuadExt":
        other = _lift_q(other)
        d = self._check(other)
        rat = self.rat * other.rat + self.coef * other.coef * d
        coef = self.rat * other.coef + self.coef * other.rat
        return QuadExt(rat, coef, d if coef else 1)

    __rmul__ = __mul__

    def conj(self) -> "QuadExt":
        return QuadExt(self.rat, -self.coef, self.radicand)

    def __complex__(self) -> complex:
        root = math.sqrt(abs(self.radicand))
        if self.radicand < 0:
            return complex(float(self.rat), float(self.coef) * root)
        return complex(float(self.rat) + float(self.coef) * root)

    def __str__(self) -> str:
        if self.is_rational():
            return str(self.rat)
        rad = f"sqrt({abs(self.radicand)})"
        if self.radicand < 0:
            rad = "i*" + rad
        c = abs(self.coef)
        term = rad if c == 1 else f"{c}*{rad}"
        sign = "-" if self.coef < 0 else "+"
        if self.rat == 0:
            return term if sign == "+" else "-" + term
        return f"{self.rat} {sign} {term}"


def _lift_q(x) -> QuadExt:
    return x if isinstance(x, QuadExt) else QuadExt(Fraction(x))


def indicial_exponents(beta: Fraction) -> tuple[QuadExt, QuadExt]:
    """tau_pm = (1 +- sqrt(1 + 4 beta)) / 2."""
    root = QuadExt.sqrt_of(1 + 4 * Fraction(beta))
    half = QuadExt(Fraction(1, 2))
    return half + root * Fraction(1, 2), half - root * Fraction(1, 2)


def format_tau(beta: Fraction) -> str:
    """Human form of the exponent pair, e.g. ``(1 ± i*sqrt(8))/2``."""
    disc = 1 + 4 * Fraction(beta)
    r = rational_sqrt(disc)
    if r is not None:
        hi, lo = (1 + r) / 2, (1 - r) / 2
        return f"{hi}, {lo}" if hi != lo else str(hi)
    mag = f"sqrt({abs(disc)})"
    return f"(1 ± {'i*' if disc < 0 else ''}{mag})/2"


def eset(beta: Fraction, delta_zero: bool = False, at_infinity: bool = False) -> tuple[int, ...]:
    """Candidate integers e for case II at one singular point."""
    beta = Fraction(beta)
    if beta == 0 and not at_infinity:
        return (0,) if delta_zero else (4,)
    root = rational_sqrt(1 + 4 * beta)
    if root is None:
        return (2,)
    vals = {2, 2 + 2 * root, 2 - 2 * root}
    return tuple(sorted(int(v) for v in vals if v.denominator == 1))


# ---------------------------------------------------------------------------
# surfaces and the NVE


@dataclass(frozen=True)
class MongeSurface:
    f: Expr
    symmetry_check: str  # "exact" or "numeric"

    @property
    def rational(self) -> bool:
        return not has_functions(self.f)

    def __str__(self) -> str:
        return to_string(self.f)


def sample_points(count: int = 20) -> list[Fraction]:
    """Deterministic rational sample abscissae in (0, 3), avoiding small integers."""
    return [Fraction(3 * k, count + 1) + Fraction(1, 97) for k in range(1, count + 1)]


def _numeric_nonzero(e: Expr, points, precision: int = 128) -> Fraction | None:
    for y in points:
        try:
            enc = eval_interval(e, {"y": y, "x": 0}, precision)
        except (DivisionByZeroPossible, ZeroDivisionError, ValueError):
            continue
        if not iv_contains_zero(enc):
            return y
    return None


def make_surface(f: Expr | str) -> MongeSurface:
    if isinstance(f, str):
        f = parse(f)
    bad = free_vars(f) - {"x", "y"}
    if bad:
        raise ExprError(f"surface may only use x and y, found {sorted(bad)}")
    fx0 = substitute(differentiate(f, "x"), X0)
    if not has_functions(f):
        r = to_ratfun(fx0, "y")
        if not r.is_zero():
            witness = next(y for y in sample_points() if r.den(y) != 0 and r(y) != 0)
            raise SymmetryViolated(f"f_x(0, y) = {r} is not identically zero", witness)
        return MongeSurface(f, "exact")
    w = _numeric_nonzero(fx0, sample_points())
    if w is not None:
        raise SymmetryViolated(f"f_x(0, {w}) is certified non-zero", w)
    return MongeSurface(f, "numeric")


@dataclass(frozen=True)
class NVECoefficients:
    a: RatFun
    b: RatFun


@dataclass(frozen=True)
class NormalFormODE:
    """w'' = r w, obtained from xi by w = xi * mu with mu'/mu = half_a."""

    r: RatFun
    half_a: RatFun


def _at_axis(e: Expr) -> RatFun:
    return to_ratfun(substitute(e, X0), "y")


def derive_nve(s: MongeSurface) -> NVECoefficients:
    from .exprcore import NotRational

    if not s.rational:
        raise NotRational("the NVE pipeline needs a rational surface")
    f = s.f
    fy = _at_axis(differentiate(f, "y"))
    fyy = _at_axis(differentiate(differentiate(f, "y"), "y"))
    fxx = _at_axis(differentiate(differentiate(f, "x"), "x"))
    g = 1 + fy * fy
    return NVECoefficients(-(fy * fyy) / g, (fyy * fxx) / g)


def normal_form(c: NVECoefficients) -> NormalFormODE:
    a, b = c.a, c.b
    r = a * a * Fraction(1, 4) + a.deriv() * Fraction(1, 2) - b
    return NormalFormODE(r, a * Fraction(1, 2))


def family_surface(n: int) -> MongeSurface:
    """(x^2 - y^2)^(-n), the rotated form of x^n y^n z = 1."""
    return make_surface(f"(x^2-y^2)^(-{n})")


def family_closed_form(n: int) -> RatFun:
    """2n^2(2n+1)(4n^3 - 10n^2 - y^(4n+2)(4n+5)) / (y^2 (4n^2 + y^(4n+2))^2)."""
    y = Poly.gen()
    m = 4 * n + 2
    num = 2 * n * n * (2 * n + 1) * (Poly.const(4 * n**3 - 10 * n * n) - Poly.monomial(m) * (4 * n + 5))
    den = y * y * (Poly.const(4 * n * n) + Poly.monomial(m)) ** 2
    return RatFun(num, den)


# ---------------------------------------------------------------------------
# singularity profile


@dataclass(frozen=True)
class PointData:
    """A group of singular points sharing a square-free factor (or infinity when factor is None)."""

    factor: Poly | None
    multiplicity: int
    beta: Fraction
    delta: Poly
    tau: tuple[QuadExt, QuadExt]
    eset: tuple[int, ...]

    @property
    def count(self) -> int:
        return 1 if self.factor is None else self.factor.degree

    @property
    def delta_constant(self) -> bool:
        return self.delta.degree <= 0

    @property
    def delta_zero(self) -> bool:
        return self.delta.is_zero()

    @property
    def label(self) -> str:
        return "infinity" if self.factor is None else f"roots of {self.factor}"


@dataclass(frozen=True)
class SingularityProfile:
    r: RatFun
    points: tuple[PointData, ...]
    infinity: PointData | None
    fuchsian: bool
    supported: bool = True
    reason: str = ""
    beta_inf_limit: Fraction = Fraction(0)

    @property
    def finite_count(self) -> int:
        return sum(p.count for p in self.points)

    @property
    def singular_count(self) -> int:
        """Finite singular points plus the point at infinity."""
        return self.finite_count + (1 if self.infinity is not None else 0)

    def check(self) -> "SingularityProfile":
        if not self.fuchsian:
            raise NotFuchsian(self.reason)
        if not self.supported:
            raise NonConstantBeta(self.reason)
        return self


def _beta_rep(q: Poly, v: Poly) -> Poly:
    dq = q.deriv()
    return (v * invmod(dq * dq % q, q)) % q


def _delta_rep(q: Poly, u: Poly, v: Poly) -> Poly:
    dq, ddq = q.deriv(), q.deriv().deriv()
    inv = invmod(dq % q, q)
    inv3 = (inv * inv % q) * inv % q
    return (u * inv + (v.deriv() * dq - v * ddq) * inv3) % q


def _split_by_value(q: Poly, rep: Poly) -> list[tuple[Poly, Fraction]] | None:
    """Split ``q`` into factors on whose roots ``rep`` is a rational constant.

    Candidate values are read off the certified root boxes and each one is
    confirmed exactly by a gcd.  Returns None if some root carries an
    irrational value.
    """
    if rep.degree <= 0:
        return [(q, rep.coeff(0))]
    out = []
    rest = q
    for box in isolate_roots(q):
        if rest.degree <= 0:
            break
        box = refine(q, box, Fraction(1, 2**120))
        with mpmath.workdps(50):
            val = rep(box.center_mpc()) if box.width else rep(box.re_lo)
            guess = Fraction(mpmath.nstr(mpmath.re(val), 40)).limit_denominator(10**12)
        g = poly_gcd(rest, rep - guess)
        if g.degree > 0 and not any(c == guess for _, c in out):
            out.append((g, guess))
            rest = rest.exact_div(g)
    if rest.degree > 0:
        return None
    return out


def singularity_profile(o: NormalFormODE | RatFun) -> SingularityProfile:
    r = o.r if isinstance(o, NormalFormODE) else o
    if r.is_zero():
        inf = PointData(None, 0, Fraction(0), Poly([]), indicial_exponents(Fraction(0)), eset(0, at_infinity=True))
        return SingularityProfile(r, (), inf, True)
    try:
        pf = partial_fractions(r)
    except PoleOrderTooHigh as exc:
        return SingularityProfile(
            r, (), None, False, reason=f"pole of order {exc.multiplicity} at the roots of {exc.factor}"
        )
    decay = r.den.degree - r.num.degree
    if not pf.poly_part.is_zero() or decay < 2:
        return SingularityProfile(r, (), None, False, reason="r does not decay like 1/y^2 at infinity")
    points = []
    supported = True
    reason = ""
    for term in pf.terms:
        q = term.factor
        if term.multiplicity == 1:
            groups = [(q, Fraction(0))]
        else:
            groups = _split_by_value(q, _beta_rep(q, term.v))
            if groups is None:
                supported = False
                reason = f"beta is not a rational constant on the roots of {q}"
                groups = [(q, Fraction(0))]
        if term.multiplicity == 1:
            full_delta = (term.u * invmod(q.deriv() % q, q)) % q
        else:
            full_delta = _delta_rep(q, term.u, term.v)
        for g, beta in groups:
            # derivatives of the whole factor enter delta, so reduce only afterwards
            delta = full_delta % g
            mult = term.multiplicity
            points.append(
                PointData(g, mult, beta, delta, indicial_exponents(beta), eset(beta, delta.is_zero()))
            )
    points.sort(key=lambda p: (p.factor.degree, [abs(c) for c in reversed(p.factor.coeffs)]))
    limit = r.num.lc / r.den.lc if decay == 2 else Fraction(0)
    beta_inf = sum(
        (sum_over_roots(Poly.const(p.beta) + p.delta * Poly.gen(), p.factor) for p in points),
        Fraction(0),
    )
    if supported and beta_inf != limit:
        raise ArithmeticError(f"inconsistent data at infinity: {beta_inf} != {limit}")
    inf = PointData(None, 0, limit, Poly([]), indicial_exponents(limit), eset(limit, at_infinity=True))
    return SingularityProfile(r, tuple(points), inf, True, supported, reason, limit)


def reassemble(profile: SingularityProfile) -> RatFun:
    """Rebuild r from the beta/delta data, as a consistency check."""
    acc = RatFun(Poly([]))
    for p in profile.points:
        q = p.factor
        dq = q.deriv()
        # sum over roots a of q of beta/(y-a)^2 + delta(a)/(y-a)
        #   = beta * (q'^2 - q q'')/q^2 + (sum delta(a) q/(y-a)) / q
        acc = acc + RatFun(p.beta * (dq * dq - q * dq.deriv()), q * q)
        acc = acc + RatFun(_sum_delta_numerator(q, p.delta), q)
    return acc


def _sum_delta_numerator(q: Poly, delta: Poly) -> Poly:
    """Polynomial N with N/q = sum over roots a of delta(a)/(y - a)."""
    # N(a) = delta(a) q'(a) at every root and deg N < deg q
    return (delta * q.deriv()) % q


# ---------------------------------------------------------------------------
# PDE candidate test


@dataclass(frozen=True)
class PDEResult:
    passed: bool | None  # None means "plausibly pass" in numeric mode
    mode: str  # "exact" or "numeric"
    residual: str
    witness: Fraction | None = None

    @property
    def status(self) -> str:
        if self.passed is None:
            return "plausibly pass"
        return "pass" if self.passed else "fail"


def pde_residual(f: Expr) -> Expr:
    """y f_xx - f_y along x = 0."""
    from .exprcore import Var, add, mul

    fxx = differentiate(differentiate(f, "x"), "x")
    fy = differentiate(f, "y")
    return substitute(add(mul(Var("y"), fxx), mul(Num(-1), fy)), X0)


def pde_candidate_test(f: Expr | str | MongeSurface) -> PDEResult:
    if isinstance(f, MongeSurface):
        f = f.f
    elif isinstance(f, str):
        f = parse(f)
    res = pde_residual(f)
    if not has_functions(f):
        r = to_ratfun(res, "y")
        return PDEResult(r.is_zero(), "exact", str(r))
    w = _numeric_nonzero(res, sample_points())
    if w is not None:
        return PDEResult(False, "numeric", to_string(res), w)
    return PDEResult(None, "numeric", to_string(res))


__all__ = [
    "MongeSurface",
    "NVECoefficients",
    "NonConstantBeta",
    "NormalFormODE",
    "NotFuchsian",
    "PDEResult",
    "PointData",
    "QuadExt",
    "SingularityProfile",
    "SymmetryViolated",
    "derive_nve",
    "eset",
    "family_closed_form",
    "family_surface",
    "format_tau",
    "indicial_exponents",
    "make_surface",
    "normal_form",
    "pde_candidate_test",
    "reassemble",
    "singularity_profile",
]
