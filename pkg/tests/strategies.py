"""Shared hypothesis strategies for exact objects."""

from fractions import Fraction

from hypothesis import strategies as st

from geogalois.exactalg import Poly, RatFun

small_rat = st.builds(Fraction, st.integers(-9, 9), st.integers(1, 5))


@st.composite
def polys(draw, max_degree=4, nonzero=False):
    cs = draw(st.lists(small_rat, min_size=1, max_size=max_degree + 1))
    p = Poly(cs)
    if nonzero and p.is_zero():
        p = Poly([draw(st.integers(1, 9))])
    return p


@st.composite
def ratfuns(draw, nonzero=False):
    num = draw(polys(3, nonzero=nonzero))
    den = draw(polys(3, nonzero=True))
    return RatFun(num, den)


@st.composite
def monic_linear_or_quadratic(draw):
    """Random monic factor of degree 1 or 2 with small integer coefficients."""
    if draw(st.booleans()):
        return Poly([draw(st.integers(-4, 4)), 1])
    return Poly([draw(st.integers(-4, 4)), draw(st.integers(-4, 4)), 1])
