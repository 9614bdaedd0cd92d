import io
import math
import random

import mpmath
import pytest

from geogalois.geom import (
    GeodesicState,
    GeomConfig,
    ImplicitSurface,
    SingularGradient,
    WindowHitsSingularity,
    cross_validate_nve,
    gauss_curvature,
    geodesic_rhs,
    integrate_geodesic,
    planar_geodesic_profile,
    tangent_frame,
)
from geogalois.nve import make_surface

XYZ = [ImplicitSurface("x*y*z", 1), ImplicitSurface("(x*y*z)^2", 1), ImplicitSurface("(x*y*z)^3", 1)]


def monge_K_inverse_xy(x, y):
    # z = 1/(x y), derivatives by hand
    fx, fy = -1 / (x * x * y), -1 / (x * y * y)
    fxx, fyy, fxy = 2 / (x**3 * y), 2 / (x * y**3), 1 / (x * x * y * y)
    return (fxx * fyy - fxy**2) / (1 + fx * fx + fy * fy) ** 2


def surface_points(count, seed=1):
    rng = random.Random(seed)
    for _ in range(count):
        x, y = rng.uniform(0.5, 2), rng.uniform(0.5, 2)
        yield (x, y, 1 / (x * y))


def unit_tangent(S, p, angle):
    t1, t2 = tangent_frame(S, p)
    return tuple(math.cos(angle) * a + math.sin(angle) * b for a, b in zip(t1, t2))


@pytest.mark.parametrize("R", [1, 2, 5])
def test_sphere_curvature(R):
    S = ImplicitSurface("x^2+y^2+z^2", R * R)
    rng = random.Random(R)
    for _ in range(5):
        v = [rng.gauss(0, 1) for _ in range(3)]
        n = math.sqrt(sum(c * c for c in v))
        assert abs(gauss_curvature(S, [R * c / n for c in v]) - 1 / R**2) < 1e-10


def test_plane_curvature():
    assert gauss_curvature(ImplicitSurface("z"), (0.3, -1.2, 0.0)) == 0


def test_curvature_matches_monge_formula():
    for p in surface_points(20):
        assert abs(gauss_curvature(XYZ[0], p) - monge_K_inverse_xy(p[0], p[1])) < 1e-10


def test_curvature_independent_of_power():
    for p in surface_points(10, seed=7):
        k1 = gauss_curvature(XYZ[0], p)
        for S in XYZ[1:]:
            assert abs(gauss_curvature(S, p) - k1) < 1e-10


def test_high_precision_backend():
    S = ImplicitSurface("x*y*z", 1, GeomConfig(backend="mp"))
    with mpmath.workprec(160):
        p = (mpmath.mpf(1), mpmath.mpf(2), mpmath.mpf(1) / 2)
        K = gauss_curvature(S, p)
        assert abs(K - mpmath.mpf(monge_K_inverse_xy(1.0, 2.0))) < 1e-14


def test_sphere_acceleration_is_minus_position():
    S = ImplicitSurface("x^2+y^2+z^2", 1)
    p = (0.6, 0.0, 0.8)
    v = unit_tangent(S, p, 0.4)
    acc = geodesic_rhs(S, GeodesicState.make(S, p, v))
    assert max(abs(a + b) for a, b in zip(acc, p)) < 1e-14


def test_rhs_independent_of_power_and_squaring():
    rng = random.Random(3)
    for p in surface_points(10, seed=11):
        v = unit_tangent(XYZ[0], p, rng.uniform(0, 2 * math.pi))
        a1 = geodesic_rhs(XYZ[0], (p, v))
        for S in XYZ[1:]:
            assert max(abs(a - b) for a, b in zip(a1, geodesic_rhs(S, (p, v)))) < 1e-12


def test_state_validation():
    S = XYZ[0]
    with pytest.raises(ValueError):
        GeodesicState.make(S, (1.0, 1.0, 1.0), (1.0, 0.0, 0.0))
    with pytest.raises(ValueError):
        GeodesicState.make(S, (1.0, 1.0, 2.0), unit_tangent(S, (1.0, 1.0, 1.0), 0.0))
    with pytest.raises(SingularGradient):
        gauss_curvature(ImplicitSurface("x^2+y^2+z^2", 0), (0.0, 0.0, 0.0))


def test_great_circle_closes():
    S = ImplicitSurface("x^2+y^2+z^2", 1)
    ic = GeodesicState.make(S, (1.0, 0.0, 0.0), (0.0, 1.0, 0.0))
    tr = integrate_geodesic(S, ic, 2 * math.pi, 1e-3)
    assert max(abs(a - b) for a, b in zip(tr.positions[-1], (1.0, 0.0, 0.0))) < 1e-8


@pytest.fixture(scope="module")
def xyz_geodesics():
    p = (1.0, 1.0, 1.0)
    ic = GeodesicState.make(XYZ[0], p, unit_tangent(XYZ[0], p, 0.7))
    return ic, [integrate_geodesic(S, ic, 5.0, 1e-3) for S in XYZ]


def test_drift_small(xyz_geodesics):
    _, trs = xyz_geodesics
    for tr in trs:
        assert tr.fault is None
        assert tr.max_speed_drift < 1e-8
    assert trs[0].max_F_drift < 1e-8


def test_geodesic_independent_of_power(xyz_geodesics):
    _, (t1, t2, t3) = xyz_geodesics
    for other in (t2, t3):
        dev = max(max(abs(a - b) for a, b in zip(p, q)) for p, q in zip(t1.positions, other.positions))
        assert dev < 1e-9


def test_rk4_order(xyz_geodesics):
    ic, _ = xyz_geodesics
    drifts = [integrate_geodesic(XYZ[0], ic, 5.0, h).max_F_drift for h in (0.1, 0.05, 0.025)]
    for coarse, fine in zip(drifts, drifts[1:]):
        assert 12 <= coarse / fine <= 20


def test_fault_marker_on_singularity():
    # x z = 0 contains the plane x = 0, whose gradient (z, 0, 0) vanishes on z = 0;
    # a dyadic step makes the straight geodesic land exactly on that line
    S = ImplicitSurface("x*z", 0)
    ic = GeodesicState.make(S, (0.0, 0.0, 1.0), (0.0, 0.0, -1.0))
    tr = integrate_geodesic(S, ic, 3.0, 0.125)
    assert tr.fault is not None
    assert tr.s[-1] == 0.875


def test_csv_export(xyz_geodesics):
    _, (tr, *_) = xyz_geodesics
    buf = io.StringIO()
    tr.to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "s,x,y,z,vx,vy,vz,F_drift,speed_drift"
    assert len(lines) == len(tr.s) + 1
    assert all(len(l.split(",")) == 9 for l in lines[1:])


def test_planar_profile_flat():
    tab = planar_geodesic_profile(make_surface("0"), 0.5, 2.0, 1e-2)
    assert max(abs(y - (0.5 + s)) for s, y in zip(tab.s, tab.y)) < 1e-14


def test_planar_profile_paraboloid_against_quadrature():
    tab = planar_geodesic_profile(make_surface("x^2+y^2"), 0.0, 1.5, 1e-3)
    assert all(b > a for a, b in zip(tab.y, tab.y[1:]))
    for s, yv in list(zip(tab.s, tab.y))[::100]:
        arc = mpmath.quad(lambda u: mpmath.sqrt(1 + 4 * u * u), [0, yv])
        assert abs(float(arc) - s) < 1e-8


@pytest.mark.parametrize("f, window", [("1/(x^2-y^2)", (1, 2)), ("x^2+y^2", (0, 1)), ("(x^2-y^2)^(-2)", (1, 1.5))])
def test_cross_validation(f, window):
    res = cross_validate_nve(make_surface(f), window)
    assert res.deviation < 1e-6
    assert res.normal_form_deviation < 1e-6


def test_cross_validation_flat_surface():
    res = cross_validate_nve(make_surface("0"), (0, 1))
    assert res.deviation < 1e-12 and all(k == 0 for k in res.K)


def test_window_through_singularity():
    with pytest.raises(WindowHitsSingularity):
        cross_validate_nve(make_surface("1/(x^2-y^2)"), (-0.5, 0.5))
