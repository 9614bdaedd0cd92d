"""Certified complex root boxes and interval linear algebra.

Boxes carry rational endpoints.  Enclosures are computed with mpmath's
interval context, which rounds outward, so every containment claim made
here is rigorous at whatever precision is in use.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
from mpmath import iv

from .exactalg import Poly, poly_gcd
from .exprcore import ivprec, rat_interval


def mpf_to_fraction(x) -> Fraction:
    """Exact value of an mpf (or raw mpf tuple); no rounding is involved."""
    raw = x if isinstance(x, tuple) else x._mpf_
    sign, man, exp, _ = raw
    if sign:
        man = -man
    if exp >= 0:
        return Fraction(man * 2**exp)
    return Fraction(man, 2**-exp)


@dataclass(frozen=True)
class Box:
    """Closed rectangle [re_lo, re_hi] + i [im_lo, im_hi] with rational corners."""

    re_lo: Fraction
    re_hi: Fraction
    im_lo: Fraction
    im_hi: Fraction

    @classmethod
    def point(cls, q) -> "Box":
        q = Fraction(q)
        return cls(q, q, Fraction(0), Fraction(0))

    @classmethod
    def around(cls, re: Fraction, im: Fraction, rad: Fraction) -> "Box":
        return cls(re - rad, re + rad, im - rad, im + rad)

    @classmethod
    def from_iv(cls, z) -> "Box":
        (ra, rb), (ia, ib) = z.real._mpi_, z.imag._mpi_
        return cls(mpf_to_fraction(ra), mpf_to_fraction(rb), mpf_to_fraction(ia), mpf_to_fraction(ib))

    @property
    def width(self) -> Fraction:
        return max(self.re_hi - self.re_lo, self.im_hi - self.im_lo)

    @property
    def center(self) -> tuple[Fraction, Fraction]:
        return (self.re_lo + self.re_hi) / 2, (self.im_lo + self.im_hi) / 2

    def center_mpc(self) -> mpmath.mpc:
        re, im = self.center
        return mpmath.mpc(mpmath.mpf(re.numerator) / re.denominator, mpmath.mpf(im.numerator) / im.denominator)

    def to_iv(self):
        """Outward-rounded ``iv.mpc`` enclosure at the current ``iv.prec``."""
        re = iv.mpf([rat_interval(self.re_lo).a, rat_interval(self.re_hi).b])
        im = iv.mpf([rat_interval(self.im_lo).a, rat_interval(self.im_hi).b])
        return iv.mpc(re, im)

    def contains(self, other: "Box") -> bool:
        return (
            self.re_lo <= other.re_lo
            and other.re_hi <= self.re_hi
            and self.im_lo <= other.im_lo
            and other.im_hi <= self.im_hi
        )

    def intersects(self, other: "Box") -> bool:
        return not (
            self.re_hi < other.re_lo
            or other.re_hi < self.re_lo
            or self.im_hi < other.im_lo
            or other.im_hi < self.im_lo
        )

    def intersection(self, other: "Box") -> "Box":
        return Box(
            max(self.re_lo, other.re_lo),
            min(self.re_hi, other.re_hi),
            max(self.im_lo, other.im_lo),
            min(self.im_hi, other.im_hi),
        )

    def __str__(self) -> str:
        c = self.center_mpc()
        return f"{mpmath.nstr(c, 12)} ± {float(self.width) / 2:.1e}"


def iv_contains_zero(z) -> bool:
    if isinstance(z, iv.mpc):
        return z.real.a <= 0 <= z.real.b and z.imag.a <= 0 <= z.imag.b
    return z.a <= 0 <= z.b


def iv_width(z) -> float:
    if isinstance(z, iv.mpc):
        return float(max(z.real.delta, z.imag.delta))
    return float(z.delta)


def iv_mag_lower(z):
    """Lower bound on |z| for a complex interval (0 if it may contain 0)."""
    def gap(x):
        if x.a > 0:
            return x.a
        if x.b < 0:
            return -x.b
        return mpmath.mpf(0)

    if isinstance(z, iv.mpc):
        return max(gap(z.real), gap(z.imag))
    return gap(z)


def iv_poly(p: Poly, z):
    """Horner evaluation of a rational polynomial on an interval."""
    if p.is_zero():
        return iv.mpc(0, 0)
    acc = iv.mpc(rat_interval(p.coeffs[-1]), 0)
    for c in reversed(p.coeffs[:-1]):
        acc = acc * z + rat_interval(c)
    return acc


def _iv_inside(k, b) -> bool:
    return (
        k.real.a > b.real.a
        and k.real.b < b.real.b
        and k.imag.a > b.imag.a
        and k.imag.b < b.imag.b
    )


def krawczyk(p: Poly, dp: Poly, box: Box, bits: int):
    """Return (certified, K(box)) for the Krawczyk operator of ``p`` on ``box``.

    ``certified`` means K(box) lies in the interior of ``box``, hence ``box``
    holds exactly one root of ``p``.
    """
    with ivprec(bits):
        b = box.to_iv()
        cr, ci = box.center
        c = iv.mpc(rat_interval(cr), rat_interval(ci))
        with mpmath.workprec(bits):
            cm = box.center_mpc()
            dpc = dp(cm)
            if dpc == 0:
                return False, None
            y = 1 / dpc
        yv = iv.mpc(y.real, y.imag)
        kb = c - yv * iv_poly(p, c) + (1 - yv * iv_poly(dp, b)) * (b - c)
        return _iv_inside(kb, b), kb


def _certify(p: Poly, dp: Poly, approx: mpmath.mpc, bits: int, sep: float) -> Box | None:
    re = mpf_to_fraction(approx.real)
    im = mpf_to_fraction(approx.imag)
    with mpmath.workprec(bits):
        d = dp(approx)
        step = abs(p(approx) / d) if d != 0 else mpmath.inf
    k = bits - 8
    if step > 0 and step != mpmath.inf:
        k = min(k, int(-mpmath.log(step * 8, 2)))
    k = max(k, 2)
    while True:
        rad = Fraction(1, 2**k) if k >= 0 else Fraction(2 ** (-k))
        if float(rad) > sep:
            return None
        box = Box.around(re, im, rad)
        ok, _ = krawczyk(p, dp, box, bits)
        if ok:
            return box
        k -= 3


def _sort_key(b: Box):
    return b.center[0], b.center[1]


def isolate_roots(p: Poly, bits: int = 128) -> list[Box]:
    """Certified isolating boxes, one per complex root of square-free ``p``.

    Roots are approximated with :func:`mpmath.polyroots` and each box is
    certified by the Krawczyk test; as there are ``deg p`` pairwise disjoint
    boxes each holding exactly one root, the isolation is complete.
    Boxes are ordered by (real, imaginary) part of their centers.
    """
    if p.degree < 1:
        return []
    if poly_gcd(p, p.deriv()).degree > 0:
        raise ValueError("isolate_roots needs a square-free polynomial")
    p = p.monic()
    dp = p.deriv()
    if p.degree == 1:
        return [Box.point(-p.coeffs[0])]
    while True:
        with mpmath.workprec(bits):
            coeffs = [mpmath.mpf(c.numerator) / c.denominator for c in reversed(p.coeffs)]
            try:
                approx = mpmath.polyroots(coeffs, maxsteps=400, extraprec=2 * bits)
            except mpmath.libmp.libhyper.NoConvergence:
                approx = None
        if approx is not None:
            approx = [mpmath.mpc(a) for a in approx]
            boxes = []
            for i, a in enumerate(approx):
                sep = min((abs(a - b) for j, b in enumerate(approx) if j != i), default=1.0)
                b = _certify(p, dp, a, bits, float(sep) / 4)
                if b is None:
                    break
                boxes.append(b)
            else:
                if all(
                    not boxes[i].intersects(boxes[j])
                    for i in range(len(boxes))
                    for j in range(i + 1, len(boxes))
                ):
                    return sorted(boxes, key=_sort_key)
        bits *= 2
        if bits > 1 << 15:
            raise ArithmeticError(f"root isolation failed for {p}")


def refine(p: Poly, box: Box, eps: Fraction) -> Box:
    """Shrink an isolating box of ``p`` below width ``eps``; the result is nested."""
    p = p.monic()
    dp = p.deriv()
    if box.width < eps:
        return box
    bits = max(64, eps.denominator.bit_length() - eps.numerator.bit_length() + 64)
    while box.width >= eps:
        prev = box.width
        ok, kb = krawczyk(p, dp, box, bits)
        if kb is not None and not iv_contains_nan(kb):
            nb = box.intersection(Box.from_iv(kb))
            if nb.re_lo <= nb.re_hi and nb.im_lo <= nb.im_hi:
                box = nb
        if box.width > prev / 2:
            box = _bisect(p, box, bits)
            bits += 32
    return box


def iv_contains_nan(z) -> bool:
    vals = [z.real.a, z.real.b, z.imag.a, z.imag.b]
    return any(mpmath.isnan(v) or mpmath.isinf(v) for v in vals)


def _bisect(p: Poly, box: Box, bits: int) -> Box:
    """Keep the quadrant holding the root (exclusion test on the other three)."""
    cr, ci = box.center
    quads = [
        Box(box.re_lo, cr, box.im_lo, ci),
        Box(cr, box.re_hi, box.im_lo, ci),
        Box(box.re_lo, cr, ci, box.im_hi),
        Box(cr, box.re_hi, ci, box.im_hi),
    ]
    with ivprec(bits):
        live = [q for q in quads if iv_contains_zero(iv_poly(p, q.to_iv()))]
    if len(live) == 1:
        return live[0]
    # root sits on a shared edge: take the hull of the live quadrants
    if not live:
        return box
    return Box(
        min(q.re_lo for q in live),
        max(q.re_hi for q in live),
        min(q.im_lo for q in live),
        max(q.im_hi for q in live),
    )


# ---------------------------------------------------------------------------
# interval elimination


@dataclass(frozen=True)
class IntervalCertificate:
    """Pivot columns/rows and the residual row whose rhs excludes zero."""

    pivots: tuple[tuple[int, int], ...]
    residual_row: int
    residual_lower_bound: float


def interval_inconsistency(matrix: Sequence[Sequence], rhs: Sequence) -> IntervalCertificate | None:
    """Try to prove A x = b has no solution, for every point system inside the intervals.

    Gaussian elimination with pivots whose intervals exclude zero; if after
    eliminating every column some rhs entry of a zero row excludes zero, the
    system is inconsistent.  Returns None when inconclusive.
    """
    if not matrix:
        matrix = [[] for _ in rhs]
    rows = [list(r) + [b] for r, b in zip(matrix, rhs)]
    ncols = len(matrix[0])
    used: set[int] = set()
    pivots = []
    for col in range(ncols):
        best, best_mag = None, mpmath.mpf(0)
        for r, row in enumerate(rows):
            if r in used:
                continue
            m = iv_mag_lower(row[col])
            if m > best_mag:
                best, best_mag = r, m
        if best is None:
            return None
        used.add(best)
        pivots.append((col, best))
        prow = rows[best]
        inv = 1 / prow[col]
        for r, row in enumerate(rows):
            if r in used:
                continue
            f = row[col] * inv
            for j in range(col, ncols + 1):
                row[j] = row[j] - f * prow[j]
    best, best_mag = None, mpmath.mpf(0)
    for r, row in enumerate(rows):
        if r in used:
            continue
        m = iv_mag_lower(row[ncols])
        if m > best_mag:
            best, best_mag = r, m
    if best is None:
        return None
    return IntervalCertificate(tuple(pivots), best, float(best_mag))
