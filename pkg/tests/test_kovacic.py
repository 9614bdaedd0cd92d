import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geogalois.exactalg import Poly, RatFun
from geogalois.exprcore import parse, to_ratfun
from geogalois.kovacic import (
    Assignment,
    CaseIIContext,
    ESets,
    KPoly,
    assignment_counts,
    build_esets,
    case1_necessary,
    case3_necessary,
    classify,
    enumerate_assignments,
    irrationality_check,
    p_exists,
    search_case2,
    verify_p,
)
from geogalois.nve import family_closed_form, singularity_profile

y = Poly.gen()
XYZ_R = family_closed_form(1)
DIHEDRAL_R = to_ratfun(parse("-3/(16*y^2) - 3/(16*(y-1)^2) + 1/(8*y*(y-1))"), "y")


def brute_force(es: ESets):
    per_root = [vals for vals, count in zip(es.finite, es.counts) for _ in range(count)]
    out = set()
    for choice in itertools.product(*per_root, es.infinity):
        *fin, e_inf = choice
        twice_d = e_inf - sum(fin)
        if twice_d < 0 or twice_d % 2 or all(e % 2 == 0 for e in choice):
            continue
        out.add((twice_d // 2, tuple(choice)))
    return out


esets_strategy = st.builds(
    lambda groups, inf: ESets(tuple(g for g, _ in groups), tuple(c for _, c in groups), inf),
    st.lists(
        st.tuples(st.lists(st.integers(-3, 6), min_size=1, max_size=3, unique=True).map(sorted).map(tuple), st.integers(1, 3)),
        min_size=1,
        max_size=3,
    ),
    st.lists(st.integers(-2, 8), min_size=1, max_size=3, unique=True).map(sorted).map(tuple),
)


@settings(max_examples=150)
@given(esets_strategy)
def test_enumeration_matches_brute_force(es):
    got = enumerate_assignments(es)
    keys = [a.key for a in got]
    assert keys == sorted(keys)
    assert len(set(keys)) == len(keys)
    assert set(keys) == brute_force(es)
    counts = assignment_counts(es)
    assert sum(c[0] for c in counts.values()) == len(got)


def test_all_even_excluded():
    assert enumerate_assignments(ESets(((2,),), (1,), (0, 2, 4))) == []


def test_xyz_counts_and_case_i_iii():
    p = singularity_profile(XYZ_R)
    counts = assignment_counts(build_esets(p))
    assert {d: c[0] for d, c in counts.items()} == {0: 21, 1: 21, 2: 1, 3: 1, 4: 1}
    assert case1_necessary(p) == []
    assert not case3_necessary(p)


def test_family_two_counts():
    p = singularity_profile(family_closed_form(2))
    counts = assignment_counts(build_esets(p))
    assert {d: c[0] for d, c in counts.items()} == {0: 615, 1: 55, 2: 55, 3: 55, 4: 1, 5: 1, 6: 1}


def test_irrationality_check_small():
    assert all(irrationality_check(n) for n in range(1, 200))


def test_dihedral_control():
    v = classify(DIHEDRAL_R)
    assert v.kind == "CaseII"
    assert v.P == "1"
    assert v.assignment == Assignment(((1, 1),), 2, 0)


def test_dihedral_p_reverifies():
    p = singularity_profile(DIHEDRAL_R)
    cc = CaseIIContext.build(DIHEDRAL_R, p)
    a = Assignment(((1, 1),), 2, 0)
    res = p_exists(a, cc)
    assert res.found and isinstance(res.P, KPoly)
    assert verify_p(res.P, a, cc)


def test_single_point_toy_has_p_one():
    # theta = 5/(2y): theta'' + 3 theta theta' + theta^3 - 4 r theta - 2 r' sums to zero,
    # so P = 1 works; w = y^(5/4) solves w'' = 5/(16 y^2) w
    r = RatFun(Poly([Fraction(5, 16)]), y * y)
    cc = CaseIIContext.build(r, singularity_profile(r))
    a = Assignment(((5,),), 5, 0)
    res = p_exists(a, cc)
    assert res.found and str(res.P) == "1"
    assert verify_p(res.P, a, cc)


def test_p_exists_rejects_inconsistent_d():
    r = RatFun(Poly([Fraction(5, 16)]), y * y)
    cc = CaseIIContext.build(r, singularity_profile(r))
    with pytest.raises(ValueError):
        p_exists(Assignment(((5,),), 2, 0), cc)


@pytest.mark.parametrize("prefilter", [True, False])
def test_xyz_all_searches_inconsistent(prefilter):
    p = singularity_profile(XYZ_R)
    _, records = search_case2(XYZ_R, p, threads=1, prefilter=prefilter)
    assert len(records) == 45
    assert not any(r.found for r in records)


def test_galois_conjugate_assignments_agree():
    # every ordering of one multiset at d = 0 gives the same outcome
    p = singularity_profile(XYZ_R)
    _, records = search_case2(XYZ_R, p, threads=1)
    by_type = {}
    for r in records:
        key = (r.assignment.d, tuple(sorted(r.assignment.per_root[1])), r.assignment.e_inf)
        by_type.setdefault(key, set()).add(r.found)
    assert all(len(v) == 1 for v in by_type.values())


def test_thread_count_does_not_change_ledger():
    p = singularity_profile(XYZ_R)
    _, one = search_case2(XYZ_R, p, threads=1)
    _, many = search_case2(XYZ_R, p, threads=3)
    assert one == many


def test_trivial_and_non_fuchsian():
    assert classify(RatFun(Poly([]))).kind == "PossiblyCaseI"
    assert classify(RatFun(Poly([1]), y**3)).kind == "NotFuchsian"
