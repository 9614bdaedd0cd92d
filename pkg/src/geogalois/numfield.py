"""Algebraic numbers by dynamic evaluation in Q[t]/(m).

A :class:`FieldCtx` is a quotient ring ``Q[t]/(m)`` with ``m`` monic and
square-free (not necessarily irreducible) together with certified
isolating boxes for every root of ``m`` and the index of the root that
``t`` stands for.  Arithmetic is exact on representatives; whenever an
inverse is requested for a zero divisor the modulus is split (D5 style)
and the tracked box decides which branch describes the actual complex
numbers we care about.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence, Union

import mpmath
from mpmath import iv

from .exactalg import Poly, RatFun, ext_gcd, poly_gcd, squarefree_part, trace_mod
from .exprcore import ivprec
from .intervals import (
    Box,
    IntervalCertificate,
    interval_inconsistency,
    iv_contains_zero,
    iv_poly,
    isolate_roots,
    refine,
)

T = "t"


class SplitRequired(ArithmeticError):
    """Raised by :meth:`AlgNum.inverse` when the operand is a zero divisor."""

    def __init__(self, split: "Split"):
        super().__init__("zero divisor: modulus splits")
        self.split = split


class AlgDivisionByZero(ZeroDivisionError):
    pass


# ---------------------------------------------------------------------------
# contexts


@functools.lru_cache(maxsize=4096)
def _refined_box(m: Poly, box: Box, bits: int) -> Box:
    return refine(m, box, Fraction(1, 2**bits))


def _excludes_zero(p: Poly, box: Box, bits: int = 128) -> bool:
    with ivprec(bits):
        return not iv_contains_zero(iv_poly(p, box.to_iv()))


@dataclass(frozen=True)
class FieldCtx:
    """Q[t]/(m) with one certified box per root of m and a tracked root."""

    modulus: Poly
    boxes: tuple[Box, ...]
    tracked: int = 0

    @classmethod
    def rational(cls) -> "FieldCtx":
        return cls(Poly.gen(T), (Box.point(0),), 0)

    @classmethod
    def from_modulus(cls, m: Poly, tracked: int = 0) -> "FieldCtx":
        m = Poly(m.monic().coeffs, T)
        if poly_gcd(m, m.deriv()).degree > 0:
            raise ValueError("field modulus must be square-free")
        return cls(m, tuple(isolate_roots(m)), tracked)

    @property
    def degree(self) -> int:
        return self.modulus.degree

    def generator_box(self, bits: int = 64) -> Box:
        """Box of the tracked root with width below 2^-bits (nested in the original)."""
        return _refined_box(self.modulus, self.boxes[self.tracked], bits)

    def generator_value(self, dps: int) -> mpmath.mpc:
        return self.generator_box(int(dps * 3.33) + 16).center_mpc()

    def gen(self) -> "AlgNum":
        return AlgNum(self, Poly.gen(T))

    def const(self, c) -> "AlgNum":
        return AlgNum(self, Poly.const(c, T))

    def zero(self) -> "AlgNum":
        return AlgNum(self, Poly([], T))

    def one(self) -> "AlgNum":
        return self.const(1)

    def element(self, rep: Poly) -> "AlgNum":
        return AlgNum(self, Poly((rep % self.modulus).coeffs, T))

    def split(self, g: Poly) -> "Split":
        """Split along a proper monic factor ``g`` of the modulus."""
        g = Poly(g.monic().coeffs, T)
        h = self.modulus.exact_div(g)
        parts = []
        owner = None
        for j, mod in enumerate((g, h)):
            keep = []
            for i, b in enumerate(self.boxes):
                if _root_of(mod, self.modulus, b):
                    if i == self.tracked:
                        owner = (j, len(keep))
                    keep.append(b)
            parts.append((mod, tuple(keep)))
        assert owner is not None and all(len(k) == m.degree for m, k in parts)
        branches = tuple(
            FieldCtx(mod, keep, owner[1] if j == owner[0] else 0) for j, (mod, keep) in enumerate(parts)
        )
        return Split(branches[0], branches[1], owner[0])

    def restrict(self, a: "AlgNum") -> "AlgNum":
        """Image of ``a`` (from a parent context) in this branch."""
        return self.element(a.rep)

    def __str__(self) -> str:
        return f"Q[t]/({self.modulus})"

    def __repr__(self) -> str:
        return f"FieldCtx({self.modulus}, tracked={self.tracked})"


def _root_of(factor: Poly, m: Poly, box: Box) -> bool:
    """Decide whether the root of ``m`` isolated by ``box`` is a root of ``factor``.

    ``factor`` divides ``m`` and ``m`` is square-free, so exactly one of
    ``factor`` and ``m/factor`` vanishes there; refine until one of them
    is certified non-zero on the box.
    """
    other = m.exact_div(factor)
    bits = 64
    while True:
        b = _refined_box(m, box, bits)
        if _excludes_zero(factor, b, bits + 64):
            return False
        if _excludes_zero(other, b, bits + 64):
            return True
        bits *= 2
        if bits > 1 << 16:
            raise ArithmeticError("cannot separate factors on an isolating box")


@dataclass(frozen=True)
class Split:
    """Result of meeting a zero divisor: ``m = m1 * m2``."""

    first: FieldCtx
    second: FieldCtx
    tracked_branch: int

    @property
    def branches(self) -> tuple[FieldCtx, FieldCtx]:
        return self.first, self.second

    @property
    def tracked(self) -> FieldCtx:
        return self.branches[self.tracked_branch]

    @property
    def moduli(self) -> tuple[Poly, Poly]:
        return self.first.modulus, self.second.modulus


# ---------------------------------------------------------------------------
# elements


@dataclass(frozen=True)
class AlgNum:
    ctx: FieldCtx
    rep: Poly

    def _same(self, other) -> "AlgNum":
        if isinstance(other, AlgNum):
            if other.ctx != self.ctx:
                raise ValueError("algebraic numbers from different contexts")
            return other
        return self.ctx.const(other)

    def __add__(self, other):
        other = self._same(other)
        return AlgNum(self.ctx, self.rep + other.rep)

    __radd__ = __add__

    def __neg__(self):
        return AlgNum(self.ctx, -self.rep)

    def __sub__(self, other):
        other = self._same(other)
        return AlgNum(self.ctx, self.rep - other.rep)

    def __rsub__(self, other):
        return self._same(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return AlgNum(self.ctx, self.rep * other)
        other = self._same(other)
        return AlgNum(self.ctx, (self.rep * other.rep) % self.ctx.modulus)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = self.ctx.one()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return AlgNum(self.ctx, self.rep * (1 / Fraction(other)))
        return self * self._same(other).inverse()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.rep == other
        if not isinstance(other, AlgNum):
            return NotImplemented
        return self.ctx == other.ctx and self.rep == other.rep

    def __hash__(self):
        return hash((self.ctx.modulus, self.rep))

    def is_zero(self) -> bool:
        return self.rep.is_zero()

    def is_rational(self) -> bool:
        return self.rep.degree <= 0

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("not a rational element")
        return self.rep.coeff(0)

    def inverse(self) -> "AlgNum":
        if self.is_zero():
            raise AlgDivisionByZero("inverse of zero")
        if self.is_rational():
            return self.ctx.const(1 / self.rep.coeff(0))
        g, s, _ = ext_gcd(self.rep, self.ctx.modulus)
        if g.degree > 0:
            raise SplitRequired(self.ctx.split(g))
        return AlgNum(self.ctx, s % self.ctx.modulus)

    def enclosure(self, bits: int = 64):
        """``iv.mpc`` enclosure of the tracked embedding."""
        if self.is_rational():
            return iv.mpc(_rat_iv(self.rep.coeff(0)), 0)
        b = self.ctx.generator_box(bits)
        return iv_poly(self.rep, b.to_iv())

    def nonzero_at_embedding(self, bits: int = 64) -> bool:
        with ivprec(bits + 32):
            return not iv_contains_zero(self.enclosure(bits))

    def __str__(self) -> str:
        return str(self.rep)

    __repr__ = __str__


def _rat_iv(q: Fraction):
    from .exprcore import rat_interval

    return rat_interval(q)


Outcome = Union[AlgNum, Split]


def alg_arith(op: str, a: AlgNum, b: AlgNum | None = None) -> Outcome:
    """Exact field operation; ``inv`` may return a :class:`Split` instead of a value."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "inv":
        try:
            return a.inverse()
        except SplitRequired as exc:
            return exc.split
    raise ValueError(f"unknown operation {op!r}")


def refine_box(a: AlgNum, eps: Fraction) -> Box:
    """Enclosure of the tracked embedding of ``a`` narrower than ``eps``."""
    eps = Fraction(eps)
    if a.is_rational():
        return Box.point(a.rep.coeff(0))
    bits = max(32, eps.denominator.bit_length() - eps.numerator.bit_length() + 8)
    while True:
        with ivprec(bits + 64):
            box = Box.from_iv(a.enclosure(bits))
        if box.width < eps:
            return box
        bits *= 2


def sum_over_roots(formula: Poly | RatFun, q: Poly) -> Fraction:
    """Sum of ``formula(a)`` over the roots ``a`` of square-free ``q``, as a trace."""
    if isinstance(formula, RatFun):
        num = Poly(formula.num.coeffs, q.var)
        den = Poly(formula.den.coeffs, q.var)
        _, s, _ = ext_gcd(den % q, q)
        formula = (num * s) % q
    return trace_mod(Poly(formula.coeffs, q.var), q)


# ---------------------------------------------------------------------------
# splitting fields


def _combine(v: mpmath.mpc) -> mpmath.mpf:
    # a rational relation holds for v iff it holds for Re v and Im v; fold both
    # into one real number with a transcendental weight for PSLQ
    return v.real + mpmath.e * v.imag


def _pslq(values: Sequence[mpmath.mpc], dps: int) -> list[int] | None:
    with mpmath.workdps(dps):
        xs = [_combine(v) for v in values]
        try:
            return mpmath.pslq(xs, maxcoeff=10 ** (dps // 3), maxsteps=20000 + 200 * len(xs) * dps)
        except (ValueError, ZeroDivisionError):
            return None


def _poly_at(p: Poly, x: mpmath.mpc) -> mpmath.mpc:
    acc = mpmath.mpc(0)
    for c in reversed(p.coeffs):
        acc = acc * x + mpmath.mpf(c.numerator) / c.denominator
    return acc


def _enclosed_in(rep: Poly, ctx: FieldCtx, target: Box) -> bool:
    """Is ``rep(t)`` at the tracked root certified to lie inside ``target``?"""
    for bits in (64, 128, 256, 512, 1024):
        with ivprec(bits + 64):
            enc = AlgNum(ctx, rep).enclosure(bits)
            b = Box.from_iv(enc)
        if target.contains(b):
            return True
        if not target.intersects(b):
            return False
    return False


def _recognize(ctx: FieldCtx, value: Callable[[int], mpmath.mpc], check: Callable[[Poly], bool]) -> Poly | None:
    """Express a number as a polynomial in the generator by PSLQ, then verify exactly."""
    n = ctx.degree
    for dps in (30 + 15 * n, 80 + 40 * n):
        with mpmath.workdps(dps + 20):
            t0 = ctx.generator_value(dps + 20)
            powers = [mpmath.mpc(1)]
            for _ in range(n - 1):
                powers.append(powers[-1] * t0)
            rel = _pslq([value(dps + 20)] + powers, dps)
        if rel is None or rel[0] == 0:
            continue
        rep = Poly([Fraction(-c, rel[0]) for c in rel[1:]], T)
        if check(rep):
            return rep
    return None


def _interpolate(xs: Sequence[int], ys: Sequence[Fraction], var: str) -> Poly:
    """Newton interpolation through (xs, ys)."""
    coef = list(ys)
    n = len(xs)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    p = Poly([coef[-1]], var)
    for i in range(n - 2, -1, -1):
        p = p * Poly([-xs[i], 1], var) + coef[i]
    return p


def _adjoin_resultant(m: Poly, p: Poly, k: int) -> Poly:
    """M(s) = Res_t(m(t), p(s - k t)), the modulus for s = rho + k*t."""
    deg = m.degree * p.degree
    xs = list(range(deg + 1))
    ys = []
    from .exactalg import resultant

    pt = Poly(p.coeffs, T)
    for s in xs:
        ys.append(resultant(m, pt.compose(Poly([s, -k], T))))
    return _interpolate(xs, ys, T).monic()


@dataclass
class _Tower:
    ctx: FieldCtx
    reps: list


def _value_of_root(p: Poly, box: Box) -> Callable[[int], mpmath.mpc]:
    def value(dps: int) -> mpmath.mpc:
        return _refined_box(p, box, int(dps * 3.33) + 16).center_mpc()

    return value


def _adjoin(ctx: FieldCtx, p: Poly, rho_box: Box) -> tuple[FieldCtx, Poly, Poly]:
    """Adjoin the root of ``p`` in ``rho_box``.

    Returns the new context with generator s = rho + k*t, the image T(s) of
    the old generator, and the representative of rho.
    """
    rho = _value_of_root(p, rho_box)
    for k in range(1, 64):
        M = _adjoin_resultant(ctx.modulus, p, k)
        if poly_gcd(M, M.deriv()).degree > 0:
            continue

        def s_value(dps: int, k=k) -> mpmath.mpc:
            with mpmath.workdps(dps):
                return k * ctx.generator_value(dps) + rho(dps)

        def s_enclosure(bits: int, k=k):
            with ivprec(bits + 32):
                return k * ctx.generator_box(bits).to_iv() + _refined_box(p, rho_box, bits).to_iv()

        R = _minimal_factor(M, s_value, s_enclosure, ctx.degree)
        new_ctx = _ctx_for(R, s_enclosure)
        old_box = ctx.boxes[ctx.tracked]

        def check_t(rep: Poly, new_ctx=new_ctx) -> bool:
            if (ctx.modulus.compose(rep) % new_ctx.modulus).degree >= 0:
                return False
            return _enclosed_in(rep, new_ctx, old_box)

        if ctx.degree == 1:
            t_rep = Poly([-ctx.modulus.coeff(0)], T)
        else:
            t_rep = _recognize(new_ctx, lambda dps: ctx.generator_value(dps), check_t)
        if t_rep is None:
            continue
        rho_rep = Poly.gen(T) - t_rep * k
        return new_ctx, t_rep, rho_rep
    raise ArithmeticError(f"could not adjoin a root of {p}")


def _minimal_factor(M: Poly, s_value, s_enclosure, step: int) -> Poly:
    """A factor of ``M`` vanishing at s, ideally its minimal polynomial.

    Candidates come from PSLQ on powers of s; a candidate R is accepted when
    it divides M exactly and M/R is certified non-zero at s, which proves R(s)=0.
    """
    for deg in range(step, M.degree, step):
        for dps in (30 + 10 * deg, 60 + 30 * deg):
            with mpmath.workdps(dps + 20):
                s0 = s_value(dps + 20)
                powers = [mpmath.mpc(1)]
                for _ in range(deg):
                    powers.append(powers[-1] * s0)
            rel = _pslq(powers, dps)
            if rel is None or rel[-1] == 0:
                continue
            R = Poly(rel, T).monic()
            q, r = divmod(M, R)
            if r.is_zero() and _nonzero_on(q, s_enclosure):
                return R
    return M


def _nonzero_on(q: Poly, enclosure) -> bool:
    bits = 64
    while bits <= 4096:
        with ivprec(bits + 32):
            if not iv_contains_zero(iv_poly(q, enclosure(bits))):
                return True
        bits *= 2
    return False


def _ctx_for(R: Poly, enclosure) -> FieldCtx:
    """Context for modulus R tracking the root R shares with the enclosure."""
    boxes = isolate_roots(R)
    bits = 64
    while bits <= 4096:
        with ivprec(bits + 32):
            enc = Box.from_iv(enclosure(bits))
        hits = [i for i, b in enumerate(boxes) if b.intersects(enc)]
        if len(hits) == 1:
            return FieldCtx(R, tuple(boxes), hits[0])
        bits *= 2
        boxes = [_refined_box(R, b, bits) for b in boxes]
    raise ArithmeticError("cannot locate the primitive element among the roots")


@functools.lru_cache(maxsize=64)
def roots_of(p: Poly) -> tuple[FieldCtx, tuple[AlgNum, ...]]:
    """All roots of square-free ``p`` as elements of one splitting-field context.

    Roots are returned in the order of :func:`isolate_roots` (by real part,
    then imaginary part).
    """
    p = p.monic()
    if p.degree < 1:
        raise ValueError("roots_of needs a polynomial of positive degree")
    if poly_gcd(p, p.deriv()).degree > 0:
        raise ValueError("roots_of needs a square-free polynomial")
    boxes = isolate_roots(p)
    ctx = FieldCtx.rational()
    reps: list[Poly | None] = [None] * len(boxes)
    while True:
        for i, b in enumerate(boxes):
            if reps[i] is not None:
                continue
            if b.width == 0:
                reps[i] = Poly.const(b.re_lo, T)
                continue
            reps[i] = _recognize(ctx, _value_of_root(p, b), _root_check(ctx, p, b))
        missing = [i for i, r in enumerate(reps) if r is None]
        if not missing:
            break
        i = missing[0]
        ctx, t_rep, rho_rep = _adjoin(ctx, p, boxes[i])
        reps = [None if r is None else (r.compose(t_rep) % ctx.modulus) for r in reps]
        reps[i] = rho_rep % ctx.modulus
    return ctx, tuple(AlgNum(ctx, Poly(r.coeffs, T)) for r in reps)


def _root_check(ctx: FieldCtx, p: Poly, box: Box) -> Callable[[Poly], bool]:
    def check(rep: Poly) -> bool:
        if (Poly(p.coeffs, T).compose(rep) % ctx.modulus).degree >= 0:
            return False
        return _enclosed_in(rep, ctx, box)

    return check


# ---------------------------------------------------------------------------
# linear algebra


@dataclass(frozen=True)
class Solution:
    values: tuple[AlgNum, ...]
    ctx: FieldCtx


@dataclass(frozen=True)
class Inconsistent:
    """No solution at the tracked embedding.

    ``multiplier`` is a row vector y with y^T M = 0 and y^T v invertible
    (exact certificate), or None when ``interval`` holds the certificate
    from the numeric pre-filter.
    """

    ctx: FieldCtx
    multiplier: tuple[AlgNum, ...] | None = None
    interval: IntervalCertificate | None = None


@dataclass(frozen=True)
class SplitOutcome:
    split: Split
    outcomes: tuple["LinSolveOutcome", "LinSolveOutcome"]

    @property
    def tracked(self) -> "LinSolveOutcome":
        out = self.outcomes[self.split.tracked_branch]
        return out.tracked if isinstance(out, SplitOutcome) else out


LinSolveOutcome = Union[Solution, Inconsistent, SplitOutcome]


def tracked_outcome(out: LinSolveOutcome) -> Solution | Inconsistent:
    return out.tracked if isinstance(out, SplitOutcome) else out


def _interval_prefilter(M, v, bits: int = 96) -> IntervalCertificate | None:
    with ivprec(bits + 32):
        A = [[x.enclosure(bits) for x in row] for row in M]
        b = [x.enclosure(bits) for x in v]
        return interval_inconsistency(A, b)


def linear_solve(
    M: Sequence[Sequence[AlgNum]],
    v: Sequence[AlgNum],
    ctx: FieldCtx | None = None,
    prefilter: bool = False,
) -> LinSolveOutcome:
    """Solve M x = v over the context, splitting on zero-divisor pivots.

    When ``prefilter`` is set, interval elimination at the tracked embedding
    runs first and may report Inconsistent; it never reports a solution.
    A Solution for an under-determined system sets free unknowns to zero.
    """
    if ctx is None:
        ctx = v[0].ctx if v else M[0][0].ctx
    if prefilter:
        cert = _interval_prefilter(M, v)
        if cert is not None:
            return Inconsistent(ctx, None, cert)
    try:
        return _gauss(M, v, ctx)
    except SplitRequired as exc:
        sp = exc.split
        outs = tuple(
            linear_solve(
                [[br.restrict(x) for x in row] for row in M],
                [br.restrict(x) for x in v],
                br,
            )
            for br in sp.branches
        )
        return SplitOutcome(sp, outs)


def _gauss(M, v, ctx: FieldCtx) -> Solution | Inconsistent:
    nrows = len(v)
    ncols = len(M[0]) if M else 0
    # rows are [coefficients | rhs | left multiplier]
    rows = []
    for i in range(nrows):
        unit = [ctx.zero() for _ in range(nrows)]
        unit[i] = ctx.one()
        rows.append([ctx.restrict(x) for x in M[i]] + [ctx.restrict(v[i])] + unit)
    pivots: list[tuple[int, int]] = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, nrows) if not rows[i][c].is_zero()), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = rows[r][c].inverse()
        rows[r] = [x * inv for x in rows[r]]
        for i in range(nrows):
            if i != r and not rows[i][c].is_zero():
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append((r, c))
        r += 1
        if r == nrows:
            break
    for i in range(r, nrows):
        rhs = rows[i][ncols]
        if not rhs.is_zero():
            rhs.inverse()  # raises SplitRequired on a zero divisor
            return Inconsistent(ctx, tuple(rows[i][ncols + 1 :]))
    x = [ctx.zero() for _ in range(ncols)]
    for i, c in pivots:
        x[c] = rows[i][ncols]
    return Solution(tuple(x), ctx)


def verify_certificate(M, v, out: Inconsistent) -> bool:
    """Re-check an exact inconsistency certificate by substitution."""
    if out.multiplier is None:
        return False
    y = out.multiplier
    ctx = out.ctx
    ncols = len(M[0]) if M else 0
    for c in range(ncols):
        s = ctx.zero()
        for yi, row in zip(y, M):
            s = s + yi * ctx.restrict(row[c])
        if not s.is_zero():
            return False
    s = ctx.zero()
    for yi, vi in zip(y, v):
        s = s + yi * ctx.restrict(vi)
    if s.is_zero():
        return False
    g = poly_gcd(s.rep, ctx.modulus)
    return g.degree == 0


def verify_solution(M, v, out: Solution) -> bool:
    ctx = out.ctx
    for row, vi in zip(M, v):
        s = ctx.zero()
        for a, x in zip(row, out.values):
            s = s + ctx.restrict(a) * x
        if s != ctx.restrict(vi):
            return False
    return True


__all__ = [
    "AlgDivisionByZero",
    "AlgNum",
    "FieldCtx",
    "Inconsistent",
    "LinSolveOutcome",
    "Solution",
    "Split",
    "SplitOutcome",
    "SplitRequired",
    "alg_arith",
    "linear_solve",
    "refine_box",
    "roots_of",
    "squarefree_part",
    "sum_over_roots",
    "tracked_outcome",
    "verify_certificate",
    "verify_solution",
]
