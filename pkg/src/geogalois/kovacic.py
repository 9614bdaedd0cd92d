"""Kovacic classification for Fuchsian equations w'' = r w.

Cases I and III are tested through their necessary conditions on the
exponents only; case II is decided exactly by searching every admissible
assignment of the integers e_j and asking whether a monic polynomial P of
degree d solves the third-order equation

    P''' + 3 th P'' + (3 th^2 + 3 th' - 4r) P' + (th'' + 3 th th' + th^3 - 4 r th - 2 r') P = 0,
    th = 1/2 sum e_j / (y - a_j).

Each search first tries an interval collocation certificate; if that is
inconclusive the identity is cleared of denominators and solved exactly
over the splitting field of the singular points.
"""

from __future__ import annotations

import itertools
import math
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from mpmath import iv

from .exactalg import Poly, RatFun
from .exprcore import ivprec, rat_interval
from .intervals import Box, interval_inconsistency, isolate_roots, refine
from .nve import (
    PointData,
    QuadExt,
    SingularityProfile,
    eset,
    indicial_exponents,
    rational_sqrt,
    singularity_profile,
)
from .numfield import (
    AlgNum,
    FieldCtx,
    Inconsistent,
    Solution,
    linear_solve,
    refine_box,
    roots_of,
    tracked_outcome,
)

# ---------------------------------------------------------------------------
# case I


@dataclass(frozen=True)
class ModifiedExponent:
    plus: QuadExt
    minus: QuadExt
    rule: str  # "tau", "simple-pole", "regular", "infinity-flat"


def modified_exponents(p: PointData, at_infinity: bool = False) -> ModifiedExponent:
    if p.beta != 0:
        tp, tm = indicial_exponents(p.beta)
        return ModifiedExponent(tp, tm, "tau")
    if at_infinity:
        return ModifiedExponent(QuadExt(Fraction(1)), QuadExt(Fraction(0)), "infinity-flat")
    if not p.delta_zero:
        return ModifiedExponent(QuadExt(Fraction(1)), QuadExt(Fraction(1)), "simple-pole")
    return ModifiedExponent(QuadExt(Fraction(0)), QuadExt(Fraction(0)), "regular")


@dataclass(frozen=True)
class CaseIWitness:
    plus_counts: tuple[int, ...]  # per finite point group: how many roots take alpha^+
    infinity_sign: str
    d: int


def _surd_sum(terms: Iterable[tuple[int, QuadExt]]) -> tuple[Fraction, dict[int, Fraction]]:
    rat = Fraction(0)
    rad: dict[int, Fraction] = {}
    for k, q in terms:
        rat += k * q.rat
        if q.coef:
            rad[q.radicand] = rad.get(q.radicand, Fraction(0)) + k * q.coef
    return rat, {d: c for d, c in rad.items() if c}


def case1_necessary(p: SingularityProfile) -> list[CaseIWitness]:
    """All sign choices giving d = alpha_inf - sum alpha_j in N_0.

    Square roots of distinct square-free radicands are linearly independent
    over Q, so d is rational exactly when each radicand's coefficient cancels.
    """
    finite = [(pt, modified_exponents(pt)) for pt in p.points]
    inf = modified_exponents(p.infinity, at_infinity=True)
    out = []
    ranges = [range(pt.count + 1) if me.plus != me.minus else range(pt.count, pt.count + 1) for pt, me in finite]
    inf_choices = [("+", inf.plus)] if inf.plus == inf.minus else [("+", inf.plus), ("-", inf.minus)]
    for counts in itertools.product(*ranges):
        terms = []
        for (pt, me), c in zip(finite, counts):
            terms.append((-c, me.plus))
            terms.append((-(pt.count - c), me.minus))
        for sign, a in inf_choices:
            rat, rad = _surd_sum(terms + [(1, a)])
            if not rad and rat.denominator == 1 and rat >= 0:
                out.append(CaseIWitness(tuple(counts), sign, int(rat)))
    return out


# ---------------------------------------------------------------------------
# case III and the family irrationality claim


def case3_necessary(p: SingularityProfile) -> bool:
    betas = [pt.beta for pt in p.points] + [p.infinity.beta]
    return all(rational_sqrt(1 + 4 * b) is not None for b in betas)


def irrationality_check(n: int) -> bool:
    """True iff n^2 - 2n - 1 is not a perfect square, i.e. sqrt(1+4 beta_0) is irrational."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    m = n * n - 2 * n - 1
    return m < 0 or math.isqrt(m) ** 2 != m


# ---------------------------------------------------------------------------
# case II: E-sets and assignments


@dataclass(frozen=True)
class ESets:
    finite: tuple[tuple[int, ...], ...]  # one set per point group
    counts: tuple[int, ...]  # roots per group
    infinity: tuple[int, ...]


def build_esets(p: SingularityProfile) -> ESets:
    return ESets(
        tuple(pt.eset for pt in p.points),
        tuple(pt.count for pt in p.points),
        eset(p.infinity.beta, at_infinity=True),
    )


@dataclass(frozen=True)
class AssignmentType:
    """A multiset of e-values per point group plus e_inf; stands for many ordered assignments."""

    multisets: tuple[tuple[tuple[int, int], ...], ...]  # per group: sorted (e, multiplicity)
    e_inf: int
    d: int

    @property
    def ordered_count(self) -> int:
        total = 1
        for ms in self.multisets:
            n = sum(k for _, k in ms)
            c = math.factorial(n)
            for _, k in ms:
                c //= math.factorial(k)
            total *= c
        return total


@dataclass(frozen=True)
class Assignment:
    """One e-value per root (roots ordered as by :func:`isolate_roots` within each group)."""

    per_root: tuple[tuple[int, ...], ...]
    e_inf: int
    d: int

    @property
    def key(self) -> tuple:
        return (self.d, tuple(itertools.chain.from_iterable(self.per_root)) + (self.e_inf,))

    def __str__(self) -> str:
        groups = " | ".join(",".join(map(str, g)) for g in self.per_root)
        return f"d={self.d} e=[{groups}] e_inf={self.e_inf}"


def _compositions(n: int, parts: int):
    if parts == 1:
        yield (n,)
        return
    for k in range(n + 1):
        for rest in _compositions(n - k, parts - 1):
            yield (k,) + rest


def enumerate_types(es: ESets) -> list[AssignmentType]:
    per_group = []
    for values, count in zip(es.finite, es.counts):
        options = []
        for comp in _compositions(count, len(values)):
            options.append(tuple((v, k) for v, k in zip(values, comp) if k))
        per_group.append(options)
    out = []
    for combo in itertools.product(*per_group):
        total = sum(v * k for ms in combo for v, k in ms)
        any_odd = any(v % 2 for ms in combo for v, _ in ms)
        for e_inf in es.infinity:
            twice_d = e_inf - total
            if twice_d < 0 or twice_d % 2:
                continue
            if not (any_odd or e_inf % 2):
                continue
            out.append(AssignmentType(tuple(combo), e_inf, twice_d // 2))
    return out


def _arrangements(ms: tuple[tuple[int, int], ...]) -> list[tuple[int, ...]]:
    """Distinct orderings of a multiset, in lexicographic order."""
    items = sorted(Counter(dict(ms)).elements())
    out = []

    def rec(prefix, counts):
        if len(prefix) == len(items):
            out.append(tuple(prefix))
            return
        for v in sorted(counts):
            if counts[v]:
                counts[v] -= 1
                prefix.append(v)
                rec(prefix, counts)
                prefix.pop()
                counts[v] += 1

    rec([], Counter(items))
    return out


def expand(t: AssignmentType) -> list[Assignment]:
    groups = [_arrangements(ms) for ms in t.multisets]
    return [Assignment(tuple(choice), t.e_inf, t.d) for choice in itertools.product(*groups)]


def enumerate_assignments(es: ESets) -> list[Assignment]:
    """Every ordered per-root assignment with d in N_0 and not all e even, sorted by (d, e-tuple)."""
    out = [a for t in enumerate_types(es) for a in expand(t)]
    out.sort(key=lambda a: a.key)
    return out


def assignment_counts(es: ESets) -> dict[int, tuple[int, int]]:
    """d -> (ordered count, multiset-type count)."""
    out: dict[int, list[int]] = {}
    for t in enumerate_types(es):
        c = out.setdefault(t.d, [0, 0])
        c[0] += t.ordered_count
        c[1] += 1
    return {d: (v[0], v[1]) for d, v in sorted(out.items())}


# ---------------------------------------------------------------------------
# polynomials over a field context


class KPoly:
    """Dense polynomial in y with AlgNum coefficients (low degree first)."""

    __slots__ = ("ctx", "c")

    def __init__(self, ctx: FieldCtx, coeffs: Sequence[AlgNum]):
        cs = list(coeffs)
        while cs and cs[-1].is_zero():
            cs.pop()
        self.ctx = ctx
        self.c = cs

    @classmethod
    def lift(cls, ctx: FieldCtx, p: Poly) -> "KPoly":
        return cls(ctx, [ctx.const(x) for x in p.coeffs])

    @property
    def degree(self) -> int:
        return len(self.c) - 1

    def is_zero(self) -> bool:
        return not self.c

    def coeff(self, k: int) -> AlgNum:
        return self.c[k] if 0 <= k < len(self.c) else self.ctx.zero()

    def __add__(self, o: "KPoly") -> "KPoly":
        n = max(len(self.c), len(o.c))
        return KPoly(self.ctx, [self.coeff(k) + o.coeff(k) for k in range(n)])

    def __sub__(self, o: "KPoly") -> "KPoly":
        n = max(len(self.c), len(o.c))
        return KPoly(self.ctx, [self.coeff(k) - o.coeff(k) for k in range(n)])

    def __mul__(self, o) -> "KPoly":
        if isinstance(o, (int, Fraction, AlgNum)):
            return KPoly(self.ctx, [x * o for x in self.c])
        if not self.c or not o.c:
            return KPoly(self.ctx, [])
        out = [self.ctx.zero() for _ in range(len(self.c) + len(o.c) - 1)]
        for i, a in enumerate(self.c):
            if a.is_zero():
                continue
            for j, b in enumerate(o.c):
                if not b.is_zero():
                    out[i + j] = out[i + j] + a * b
        return KPoly(self.ctx, out)

    __rmul__ = __mul__

    def deriv(self) -> "KPoly":
        return KPoly(self.ctx, [x * k for k, x in enumerate(self.c) if k])

    def div_linear(self, a: AlgNum) -> "KPoly":
        """Quotient of self by (y - a); the remainder must vanish."""
        n = len(self.c)
        q = [self.ctx.zero() for _ in range(n - 1)]
        acc = self.ctx.zero()
        for k in range(n - 1, 0, -1):
            acc = self.c[k] + acc * a
            q[k - 1] = acc
        if not (self.c[0] + acc * a).is_zero():
            raise ArithmeticError("division by a non-factor")
        return KPoly(self.ctx, q)

    def __call__(self, a: AlgNum) -> AlgNum:
        acc = self.ctx.zero()
        for x in reversed(self.c):
            acc = acc * a + x
        return acc

    def __str__(self) -> str:
        if not self.c:
            return "0"
        terms = []
        for k in range(len(self.c) - 1, -1, -1):
            x = self.c[k]
            if x.is_zero():
                continue
            coef = str(x)
            mono = "" if k == 0 else ("y" if k == 1 else f"y^{k}")
            if not mono:
                terms.append(f"({coef})" if not x.is_rational() else coef)
            elif x == 1:
                terms.append(mono)
            else:
                terms.append(f"({coef})*{mono}" if not x.is_rational() else f"{coef}*{mono}")
        return " + ".join(terms)


# ---------------------------------------------------------------------------
# case II search


@dataclass(frozen=True)
class CaseIIContext:
    """Everything a worker needs to test assignments for one r."""

    r: RatFun
    factors: tuple[Poly, ...]
    boxes: tuple[tuple[Box, ...], ...]  # certified, refined root boxes per factor

    @classmethod
    def build(cls, r: RatFun, profile: SingularityProfile, bits: int = 160) -> "CaseIIContext":
        factors = tuple(p.factor for p in profile.points)
        boxes = tuple(
            tuple(refine(q, b, Fraction(1, 2**bits)) for b in isolate_roots(q)) for q in factors
        )
        return cls(r, factors, boxes)


@dataclass(frozen=True)
class ThetaFun:
    """theta = N/D with D the square-free part of the pole locus.

    ``rational`` is the part coming from groups where every root carries
    the same e; ``alg`` (may be None) is the rest, over the splitting field.
    """

    D: Poly
    rational: RatFun
    num: KPoly | None = None


@dataclass(frozen=True)
class PResult:
    found: bool
    P: KPoly | Poly | None = None
    method: str = ""  # "interval", "exact", or "exact-solution"
    note: str = ""


def _sample_points(r: RatFun, count: int) -> list[Fraction]:
    pts = []
    k = 1
    while len(pts) < count:
        z = Fraction(k) + Fraction(1, 7)
        if r.den(z) != 0:
            pts.append(z)
        k += 1
    return pts


def _interval_test(a: Assignment, cc: CaseIIContext, bits: int = 192) -> bool:
    """True when collocation at sample points proves no P exists."""
    d = a.d
    r, dr = cc.r, cc.r.deriv()
    with ivprec(bits):
        roots = [(e, b.to_iv()) for group, bx in zip(a.per_root, cc.boxes) for e, b in zip(group, bx) if e]
        rows, rhs = [], []
        for z in _sample_points(r, d + 4):
            zi = iv.mpc(rat_interval(z), 0)
            th = iv.mpc(0, 0)
            th1 = iv.mpc(0, 0)
            th2 = iv.mpc(0, 0)
            for e, a_box in roots:
                inv = 1 / (zi - a_box)
                half = rat_interval(Fraction(e, 2))
                th += half * inv
                th1 -= half * inv * inv
                th2 += e * inv * inv * inv
            rz = rat_interval(r(z))
            drz = rat_interval(dr(z))
            c2 = 3 * th
            c1 = 3 * th * th + 3 * th1 - 4 * rz
            c0 = th2 + 3 * th * th1 + th * th * th - 4 * rz * th - 2 * drz

            def column(i):
                b0 = zi**i
                b1 = i * zi ** (i - 1) if i >= 1 else 0
                b2 = i * (i - 1) * zi ** (i - 2) if i >= 2 else 0
                b3 = i * (i - 1) * (i - 2) * zi ** (i - 3) if i >= 3 else 0
                return b3 + c2 * b2 + c1 * b1 + c0 * b0

            rows.append([column(i) for i in range(d)])
            rhs.append(-column(d))
        return interval_inconsistency(rows, rhs) is not None


def _match_roots(q: Poly, boxes: Sequence[Box], roots: Sequence[AlgNum]) -> list[AlgNum]:
    """Order the AlgNum roots of ``q`` to follow ``boxes``."""
    t = Poly(q.coeffs, "t")
    mine = [x for x in roots if (t.compose(x.rep) % x.ctx.modulus).is_zero()]
    out = []
    for b in boxes:
        for x in mine:
            eps = b.width / 4 if b.width else Fraction(1, 2**60)
            enc = refine_box(x, eps)
            if b.contains(enc) or (b.width == 0 and enc.intersects(b)):
                out.append(x)
                break
        else:
            raise ArithmeticError(f"root of {q} not matched to its box")
    return out


def build_theta(a: Assignment, cc: CaseIIContext) -> tuple[ThetaFun, FieldCtx, list[list[AlgNum] | None]]:
    D = Poly([1])
    for q in cc.factors:
        D = D * q
    rational = RatFun(Poly([]))
    mixed = []
    for i, (q, group) in enumerate(zip(cc.factors, a.per_root)):
        if len(set(group)) == 1:
            rational = rational + RatFun(q.deriv() * Fraction(group[0], 2), q)
        else:
            mixed.append(i)
    if not mixed:
        return ThetaFun(D, rational, None), FieldCtx.rational(), [None] * len(cc.factors)
    prod = Poly([1])
    for i in mixed:
        prod = prod * cc.factors[i]
    ctx, all_roots = roots_of(prod)
    per_factor: list[list[AlgNum] | None] = [None] * len(cc.factors)
    num = KPoly(ctx, [])
    for i in mixed:
        q = cc.factors[i]
        per_factor[i] = _match_roots(q, cc.boxes[i], all_roots)
        rest = KPoly.lift(ctx, D.exact_div(q))
        qk = KPoly.lift(ctx, q)
        for e, root in zip(a.per_root[i], per_factor[i]):
            if e:
                num = num + rest * qk.div_linear(root) * Fraction(e, 2)
    return ThetaFun(D, rational, num), ctx, per_factor


def _theta_numerator(th: ThetaFun, ctx: FieldCtx) -> KPoly:
    """N with theta = N/D over the context."""
    rat = th.rational
    N = KPoly.lift(ctx, (rat.num * th.D.exact_div(rat.den)) if not rat.is_zero() else Poly([]))
    if th.num is not None:
        N = N + th.num
    return N


def _cleared_coefficients(N: KPoly, D: Poly, r: RatFun, ctx: FieldCtx) -> tuple[KPoly, KPoly, KPoly, KPoly]:
    """c3..c0 of the P-equation multiplied through by D^3 * den(r)."""
    Rn, Rd = r.num, r.den
    D2 = D * D
    if not (D2 % Rd).is_zero():
        raise ArithmeticError("den(r) does not divide D^2; equation is not Fuchsian")
    L = lambda p: KPoly.lift(ctx, p)  # noqa: E731
    dD, ddD = D.deriv(), D.deriv().deriv()
    W = D * Rd
    V = D2 * Rd
    dN, ddN = N.deriv(), N.deriv().deriv()
    c3 = L(D2 * D * Rd)
    c2 = N * L(V) * 3
    NN = N * N
    c1 = NN * L(W) * 3 + dN * L(V) * 3 - N * L(dD * W) * 3 - L(Rn * D2 * D) * 4
    tail = D * D2.exact_div(Rd) * (Rn.deriv() * Rd - Rn * Rd.deriv()) * 2
    c0 = (
        ddN * L(V)
        - N * L(ddD * W)
        - dN * L(dD * W) * 2
        + N * L(dD * dD * Rd) * 2
        + N * dN * L(W) * 3
        - NN * L(dD * Rd) * 3
        + NN * N * L(Rd)
        - N * L(Rn * D2) * 4
        - L(tail)
    )
    return c3, c2, c1, c0


def _apply(cs, P: KPoly) -> KPoly:
    c3, c2, c1, c0 = cs
    d1 = P.deriv()
    d2 = d1.deriv()
    d3 = d2.deriv()
    return c3 * d3 + c2 * d2 + c1 * d1 + c0 * P


def _exact_search(a: Assignment, cc: CaseIIContext) -> PResult:
    th, ctx, _ = build_theta(a, cc)
    N = _theta_numerator(th, ctx)
    cs = _cleared_coefficients(N, th.D, cc.r, ctx)
    d = a.d
    one = ctx.one()
    cols = [_apply(cs, KPoly(ctx, [ctx.zero()] * i + [one])) for i in range(d + 1)]
    nrows = max((c.degree for c in cols), default=-1) + 1
    if nrows == 0:
        P = KPoly(ctx, [ctx.zero()] * d + [one])
        return PResult(True, P, "exact-solution")
    M = [[cols[i].coeff(k) for i in range(d)] for k in range(nrows)]
    v = [-cols[d].coeff(k) for k in range(nrows)]
    out = tracked_outcome(linear_solve(M, v, ctx))
    if isinstance(out, Inconsistent):
        return PResult(False, None, "exact")
    xs = out.values
    ctx2 = out.ctx
    P = KPoly(ctx2, [ctx2.restrict(x) for x in xs] + [ctx2.one()])
    cs2 = tuple(KPoly(ctx2, [ctx2.restrict(x) for x in c.c]) for c in cs)
    if not _apply(cs2, P).is_zero():
        raise ArithmeticError("candidate P failed re-verification")
    return PResult(True, P, "exact-solution")


def p_exists(a: Assignment, cc: CaseIIContext, prefilter: bool = True) -> PResult:
    """Decide whether a monic P of degree ``a.d`` solves the case-II equation."""
    total = sum(itertools.chain.from_iterable(a.per_root))
    if 2 * a.d != a.e_inf - total:
        raise ValueError(f"inconsistent assignment: 2d = {2 * a.d} but e_inf - sum e = {a.e_inf - total}")
    if prefilter and _interval_test(a, cc):
        return PResult(False, None, "interval")
    return _exact_search(a, cc)


def verify_p(P: KPoly, a: Assignment, cc: CaseIIContext) -> bool:
    """Substitute P back into the equation (cleared of denominators)."""
    th, ctx, _ = build_theta(a, cc)
    N = _theta_numerator(th, ctx)
    cs = _cleared_coefficients(N, th.D, cc.r, P.ctx if P.ctx.modulus == ctx.modulus else ctx)
    Pk = KPoly(cs[0].ctx, [cs[0].ctx.restrict(x) for x in P.c])
    return _apply(cs, Pk).is_zero()


# ---------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class SearchRecord:
    assignment: Assignment
    found: bool
    method: str
    P: str = ""


@dataclass(frozen=True)
class Verdict:
    kind: str  # NonIntegrable | CaseII | PossiblyCaseI | PossiblyCaseIII | NotFuchsian | Unsupported
    reason: str = ""
    profile: SingularityProfile | None = None
    case1: tuple[CaseIWitness, ...] = ()
    case3: bool = False
    esets: ESets | None = None
    counts: dict = field(default_factory=dict)
    ledger: tuple[SearchRecord, ...] = ()
    P: str = ""
    assignment: Assignment | None = None

    @property
    def exit_code(self) -> int:
        return 0 if self.kind == "NonIntegrable" else 2


def _worker(args) -> SearchRecord:
    a, cc, prefilter = args
    res = p_exists(a, cc, prefilter)
    return SearchRecord(a, res.found, res.method, str(res.P) if res.found else "")


def resolve_threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("GG_THREADS", "1") or 1)
    return max(1, threads)


def search_case2(
    r: RatFun, profile: SingularityProfile, threads: int | None = None, prefilter: bool = True
) -> tuple[ESets, list[SearchRecord]]:
    es = build_esets(profile)
    assignments = enumerate_assignments(es)
    cc = CaseIIContext.build(r, profile)
    jobs = [(a, cc, prefilter) for a in assignments]
    n = resolve_threads(threads)
    if n == 1 or len(jobs) < 2:
        records = [_worker(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n) as ex:
            records = list(ex.map(_worker, jobs, chunksize=max(1, len(jobs) // (4 * n))))
    return es, records


def classify(r: RatFun, threads: int | None = None, prefilter: bool = True) -> Verdict:
    profile = singularity_profile(r)
    if not profile.fuchsian:
        return Verdict("NotFuchsian", profile.reason, profile)
    if not profile.supported:
        return Verdict("Unsupported", profile.reason, profile)
    w1 = tuple(case1_necessary(profile))
    c3 = case3_necessary(profile)
    es, records = search_case2(r, profile, threads, prefilter)
    counts = assignment_counts(es)
    hit = next((rec for rec in records if rec.found), None)
    common = dict(profile=profile, case1=w1, case3=c3, esets=es, counts=counts, ledger=tuple(records))
    if hit is not None:
        return Verdict("CaseII", "a polynomial P solves the case-II equation", P=hit.P, assignment=hit.assignment, **common)
    if w1:
        return Verdict("PossiblyCaseI", "case-I exponent condition holds", **common)
    if c3:
        return Verdict("PossiblyCaseIII", "all exponents are rational", **common)
    return Verdict("NonIntegrable", "cases I, II and III are all excluded", **common)


__all__ = [
    "Assignment",
    "AssignmentType",
    "CaseIIContext",
    "CaseIWitness",
    "ESets",
    "KPoly",
    "ModifiedExponent",
    "PResult",
    "SearchRecord",
    "ThetaFun",
    "Verdict",
    "assignment_counts",
    "build_esets",
    "build_theta",
    "case1_necessary",
    "case3_necessary",
    "classify",
    "enumerate_assignments",
    "enumerate_types",
    "expand",
    "irrationality_check",
    "modified_exponents",
    "p_exists",
    "search_case2",
    "verify_p",
]
