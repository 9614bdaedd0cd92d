from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geogalois.exactalg import Poly
from geogalois.numfield import (
    T,
    AlgDivisionByZero,
    FieldCtx,
    Inconsistent,
    Solution,
    SplitOutcome,
    SplitRequired,
    alg_arith,
    linear_solve,
    roots_of,
    sum_over_roots,
    tracked_outcome,
    verify_certificate,
    verify_solution,
)

from strategies import small_rat

t = Poly.gen(T)
y = Poly.gen()

CUBIC = FieldCtx.from_modulus(t**3 - 2)


def test_sqrt2_arithmetic():
    k = FieldCtx.from_modulus(t * t - 2)
    s = k.gen()
    assert s * s == k.const(2)
    assert s.inverse() == s * k.const(Fraction(1, 2))


@settings(max_examples=100)
@given(st.lists(small_rat, min_size=1, max_size=3))
def test_inverse_roundtrip_in_a_field(cs):
    a = CUBIC.element(Poly(cs, T))
    if a.is_zero():
        with pytest.raises(AlgDivisionByZero):
            a.inverse()
        return
    assert a * a.inverse() == CUBIC.one()
    assert (a / a) == CUBIC.one()


@given(st.lists(small_rat, min_size=1, max_size=3), st.lists(small_rat, min_size=1, max_size=3))
def test_ring_axioms(ca, cb):
    a, b = CUBIC.element(Poly(ca, T)), CUBIC.element(Poly(cb, T))
    assert a * b == b * a
    assert (a + b) * a == a * a + b * a
    assert alg_arith("sub", a, b) + b == a


@pytest.mark.parametrize("tracked", range(4))
def test_split_on_zero_divisor(tracked):
    # Q[t]/((t^2 - 1)(t^2 - 2)); t^2 - 1 is a zero divisor
    m = (t * t - 1) * (t * t - 2)
    k = FieldCtx.from_modulus(m, tracked)
    zd = k.element(t * t - 1)
    with pytest.raises(SplitRequired) as info:
        zd.inverse()
    sp = info.value.split
    m1, m2 = sp.moduli
    assert m1 * m2 == m.monic()
    assert {m1, m2} == {t * t - 1, t * t - 2}
    # the tracked root survives in exactly one branch, with the same box
    box = k.boxes[tracked]
    br = sp.tracked
    assert br.boxes[br.tracked] == box
    # in each branch the former zero divisor is either zero or invertible
    for b in sp.branches:
        x = b.restrict(zd)
        assert x.is_zero() or (x * x.inverse() == b.one())
    out = alg_arith("inv", zd)
    assert out == sp


def test_roots_of_splitting_field():
    ctx, roots = roots_of(y**3 - 2)
    assert ctx.degree == 6
    p = Poly((y**3 - 2).coeffs, T)
    for r in roots:
        assert (r * r * r) == ctx.const(2)
    assert len(set(roots)) == 3
    # embeddings follow the isolating-box order: conjugate pair first, real root last
    enc = [r.enclosure(64) for r in roots]
    assert enc[0].imag.b < 0 < enc[1].imag.a
    assert enc[2].imag.a <= 0 <= enc[2].imag.b and enc[2].real.a > 1
    assert all((p.compose(r.rep) % ctx.modulus).is_zero() for r in roots)


def test_roots_of_rational_factor():
    ctx, roots = roots_of((y - 1) * (y + 2))
    assert [r.rational_value() for r in roots] == [-2, 1]


def test_sum_over_roots():
    assert sum_over_roots(y * y, y**6 + 4) == 0
    assert sum_over_roots(y**6, y**6 + 4) == -24


def test_linear_solve_solution_and_certificate():
    k = FieldCtx.from_modulus(t * t - 2)
    s, one, zero = k.gen(), k.one(), k.zero()
    M = [[s, one], [one, zero]]
    v = [one, s]
    out = linear_solve(M, v)
    assert isinstance(out, Solution) and verify_solution(M, v, out)
    M2 = [[s], [s * s]]
    v2 = [one, one]
    bad = linear_solve(M2, v2)
    assert isinstance(bad, Inconsistent) and verify_certificate(M2, v2, bad)
    pre = linear_solve(M2, v2, prefilter=True)
    assert isinstance(pre, Inconsistent) and pre.interval is not None


def test_linear_solve_splits():
    k = FieldCtx.from_modulus((t - 1) * (t + 1), tracked=1)
    a = k.gen() - k.one()  # zero on the branch t = 1
    out = linear_solve([[a]], [k.one()])
    assert isinstance(out, SplitOutcome)
    branch_out = dict(zip(out.split.moduli, out.outcomes))
    assert isinstance(branch_out[t - 1], Inconsistent)
    assert isinstance(branch_out[t + 1], Solution)
    tracked = tracked_outcome(out)
    assert tracked is out.outcomes[out.split.tracked_branch]
