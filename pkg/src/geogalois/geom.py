"""Numerical geometry on implicit surfaces F(x, y, z) = c.

Gauss curvature from the bordered Hessian, geodesics from
``r'' = lambda grad F`` with ``lambda = -(H r').r' / |grad F|^2``, and a
numerical cross-check of the symbolic NVE along the planar geodesic.  All
derivatives are symbolic (exprcore) and only evaluated numerically here.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
import numpy as np

from .exactalg import RatFun, squarefree_part
from .exprcore import Expr, Num, Var, add, compile_expr, differentiate, mul, parse, substitute
from .intervals import isolate_roots
from .nve import MongeSurface, derive_nve, normal_form

AXES = ("x", "y", "z")


class SingularGradient(ArithmeticError):
    pass


class WindowHitsSingularity(ArithmeticError):
    pass


@dataclass(frozen=True)
class GeomConfig:
    grad_tol: float = 1e-300
    state_tol: float = 1e-8
    backend: str = "float"  # or "mp" for software floats
    mp_bits: int = 128


class ImplicitSurface:
    """Level set F = c with symbolic gradient and Hessian compiled for evaluation."""

    def __init__(self, F: Expr | str, c=0, config: GeomConfig = GeomConfig()):
        self.F = parse(F) if isinstance(F, str) else F
        self.c = Fraction(c)
        self.config = config
        grad = [differentiate(self.F, v) for v in AXES]
        hess = [[differentiate(g, v) for v in AXES] for g in grad]
        comp = lambda e: compile_expr(e, AXES, config.backend)  # noqa: E731
        self._F = comp(self.F)
        self._grad = [comp(g) for g in grad]
        self._hess = [[comp(h) for h in row] for row in hess]

    @classmethod
    def from_monge(cls, s: MongeSurface | Expr | str, config: GeomConfig = GeomConfig()) -> "ImplicitSurface":
        f = s.f if isinstance(s, MongeSurface) else (parse(s) if isinstance(s, str) else s)
        return cls(add(Var("z"), mul(Num(-1), f)), 0, config)

    def value(self, p) -> float:
        return self._F(*p) - self._num(self.c)

    def _num(self, q: Fraction):
        if self.config.backend == "mp":
            return mpmath.mpf(q.numerator) / q.denominator
        return float(q)

    def grad(self, p) -> list:
        try:
            g = [f(*p) for f in self._grad]
        except ZeroDivisionError as exc:
            raise SingularGradient(f"gradient undefined at {tuple(map(float, p))}") from exc
        n2 = sum(x * x for x in g)
        if not n2 > self.config.grad_tol or not all(map(_finite, g)):
            raise SingularGradient(f"gradient vanishes or diverges at {tuple(map(float, p))}")
        return g

    def hessian(self, p) -> list[list]:
        try:
            return [[h(*p) for h in row] for row in self._hess]
        except ZeroDivisionError as exc:
            raise SingularGradient(f"hessian undefined at {tuple(map(float, p))}") from exc


def _finite(x) -> bool:
    try:
        return math.isfinite(float(x))
    except (OverflowError, ValueError):
        return False


def gauss_curvature(S: ImplicitSurface, p: Sequence[float]) -> float:
    """K = -det([[H, grad F], [grad F^T, 0]]) / |grad F|^4."""
    g = S.grad(p)
    H = S.hessian(p)
    if S.config.backend == "mp":
        M = mpmath.matrix(4, 4)
        for i in range(3):
            for j in range(3):
                M[i, j] = H[i][j]
            M[i, 3] = M[3, i] = g[i]
        det = mpmath.det(M)
    else:
        M = np.zeros((4, 4))
        M[:3, :3] = np.array(H, dtype=float)
        M[:3, 3] = M[3, :3] = g
        det = float(np.linalg.det(M))
    n2 = sum(x * x for x in g)
    return -det / (n2 * n2)


@dataclass(frozen=True)
class GeodesicState:
    position: tuple
    velocity: tuple

    @classmethod
    def make(cls, S: ImplicitSurface, position, velocity, tol: float | None = None) -> "GeodesicState":
        tol = S.config.state_tol if tol is None else tol
        pos, vel = tuple(position), tuple(velocity)
        speed = math.sqrt(float(sum(v * v for v in vel)))
        g = S.grad(pos)
        gn = math.sqrt(float(sum(x * x for x in g)))
        if abs(speed - 1) > tol:
            raise ValueError(f"velocity must be unit length (|v| = {speed})")
        if abs(float(sum(a * b for a, b in zip(g, vel)))) > tol * gn:
            raise ValueError("velocity is not tangent to the surface")
        if abs(float(S.value(pos))) > tol:
            raise ValueError("position is not on the surface")
        return cls(pos, vel)


def tangent_frame(S: ImplicitSurface, p) -> tuple[tuple, tuple]:
    """Two orthonormal tangent vectors at p."""
    g = np.array([float(x) for x in S.grad(p)])
    n = g / np.linalg.norm(g)
    a = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    t1 = a - n * (a @ n)
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(n, t1)
    return tuple(map(float, t1)), tuple(map(float, t2))


def geodesic_rhs(S: ImplicitSurface, st: GeodesicState | tuple) -> tuple:
    """Acceleration lambda * grad F."""
    if isinstance(st, GeodesicState):
        p, v = st.position, st.velocity
    else:
        p, v = st
    g = S.grad(p)
    H = S.hessian(p)
    hv = sum(H[i][j] * v[i] * v[j] for i in range(3) for j in range(3))
    lam = -hv / sum(x * x for x in g)
    return tuple(lam * x for x in g)


@dataclass
class Trajectory:
    s: list = field(default_factory=list)
    positions: list = field(default_factory=list)
    velocities: list = field(default_factory=list)
    F_drift: list = field(default_factory=list)
    speed_drift: list = field(default_factory=list)
    fault: str | None = None

    @property
    def max_F_drift(self) -> float:
        return max(self.F_drift, default=0.0)

    @property
    def max_speed_drift(self) -> float:
        return max(self.speed_drift, default=0.0)

    def to_csv(self, dest) -> None:
        """Write to a path or an open text stream."""
        if hasattr(dest, "write"):
            self._write_csv(dest)
            return
        with open(dest, "w", newline="") as fh:
            self._write_csv(fh)

    def _write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["s", "x", "y", "z", "vx", "vy", "vz", "F_drift", "speed_drift"])
        for k in range(len(self.s)):
            row = [self.s[k], *self.positions[k], *self.velocities[k], self.F_drift[k], self.speed_drift[k]]
            w.writerow([f"{float(x):.17g}" for x in row])


def _axpy(a, x, y):
    return tuple(a * xi + yi for xi, yi in zip(x, y))


def integrate_geodesic(
    S: ImplicitSurface, ic: GeodesicState, length: float, step: float, sample_every: int = 1
) -> Trajectory:
    """Classical RK4 at fixed step, without any projection back to the surface."""
    if step <= 0 or length <= 0:
        raise ValueError("step and length must be positive")
    nsteps = int(round(length / step))
    h = length / nsteps
    traj = Trajectory()

    def record(s, p, v):
        traj.s.append(s)
        traj.positions.append(p)
        traj.velocities.append(v)
        traj.F_drift.append(abs(float(S.value(p))))
        traj.speed_drift.append(abs(math.sqrt(float(sum(x * x for x in v))) - 1))

    def f(p, v):
        return v, geodesic_rhs(S, (p, v))

    p, v = ic.position, ic.velocity
    record(0.0, p, v)
    for k in range(1, nsteps + 1):
        try:
            k1p, k1v = f(p, v)
            k2p, k2v = f(_axpy(h / 2, k1p, p), _axpy(h / 2, k1v, v))
            k3p, k3v = f(_axpy(h / 2, k2p, p), _axpy(h / 2, k2v, v))
            k4p, k4v = f(_axpy(h, k3p, p), _axpy(h, k3v, v))
        except (SingularGradient, OverflowError, ZeroDivisionError) as exc:
            traj.fault = f"stopped at s={(k - 1) * h:.6g}: {exc}"
            break
        p = tuple(p[i] + h / 6 * (k1p[i] + 2 * k2p[i] + 2 * k3p[i] + k4p[i]) for i in range(3))
        v = tuple(v[i] + h / 6 * (k1v[i] + 2 * k2v[i] + 2 * k3v[i] + k4v[i]) for i in range(3))
        if k % sample_every == 0 or k == nsteps:
            record(k * h, p, v)
    return traj


# ---------------------------------------------------------------------------
# planar geodesic and the NVE cross-check


def _ratfun_float(r: RatFun) -> Callable[[float], float]:
    num = [float(c) for c in reversed(r.num.coeffs)]
    den = [float(c) for c in reversed(r.den.coeffs)]

    def ev(y: float) -> float:
        n = 0.0
        for c in num:
            n = n * y + c
        d = 0.0
        for c in den:
            d = d * y + c
        return n / d

    return ev


def _axis_fy(s: MongeSurface) -> Callable[[float], float]:
    fy = substitute(differentiate(s.f, "y"), {"x": Num(0)})
    fn = compile_expr(fy, ("y",))

    def ev(y):
        try:
            v = fn(y)
        except (ZeroDivisionError, OverflowError) as exc:
            raise WindowHitsSingularity(f"f_y(0, y) undefined at y={y}") from exc
        if not math.isfinite(v):
            raise WindowHitsSingularity(f"f_y(0, y) not finite at y={y}")
        return v

    return ev


@dataclass(frozen=True)
class ProfileTable:
    s: tuple[float, ...]
    y: tuple[float, ...]


def planar_geodesic_profile(s: MongeSurface, y0: float, smax: float, step: float = 1e-3) -> ProfileTable:
    """Integrate d y~/ds = (1 + f_y(0, y~)^2)^(-1/2) by RK4."""
    fy = _axis_fy(s)
    rhs = lambda y: 1.0 / math.sqrt(1.0 + fy(y) ** 2)  # noqa: E731
    n = max(1, int(round(smax / step)))
    h = smax / n
    ss, ys = [0.0], [float(y0)]
    y = float(y0)
    for k in range(1, n + 1):
        k1 = rhs(y)
        k2 = rhs(y + h / 2 * k1)
        k3 = rhs(y + h / 2 * k2)
        k4 = rhs(y + h * k3)
        y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        ss.append(k * h)
        ys.append(y)
    return ProfileTable(tuple(ss), tuple(ys))


@dataclass(frozen=True)
class CrossCheckResult:
    deviation: float  # route A (arc length) vs route B (y parameter)
    normal_form_deviation: float  # w from w'' = r w vs xi * exp(1/2 int a)
    s: tuple[float, ...]
    y: tuple[float, ...]
    K: tuple[float, ...]

    @property
    def max_deviation(self) -> float:
        return max(self.deviation, self.normal_form_deviation)


def _check_window(nve, nf, y1: Fraction, y2: Fraction) -> None:
    """Reject windows holding a real pole of a, b or r (certified root boxes)."""
    den = squarefree_part(nve.a.den * nve.b.den * nf.r.den)
    for box in isolate_roots(den):
        if box.im_lo <= 0 <= box.im_hi and box.re_lo <= y2 and y1 <= box.re_hi:
            raise WindowHitsSingularity(f"the NVE is singular near y = {float(box.center[0]):.6g}")


def cross_validate_nve(
    s: MongeSurface, window: tuple[float, float], step: float = 1e-3, xi0: float = 1.0, dxi0: float = 1.0
) -> CrossCheckResult:
    """Integrate the NVE two independent ways and compare.

    Route A works in arc length: y~' = (1+f_y^2)^(-1/2) and xi.. = -K xi with
    K from the implicit curvature formula for F = z - f.  Route B integrates
    xi'' + a xi' + b xi = 0 in y on the y~ grid of route A.  Both start from
    xi = xi0 and dxi/dy = dxi0 at y = window[0].
    """
    y1, y2 = map(float, window)
    if not y1 < y2:
        raise ValueError("window must satisfy y1 < y2")
    nve = derive_nve(s)
    nf = normal_form(nve)
    _check_window(nve, nf, Fraction(y1), Fraction(y2))
    S = ImplicitSurface.from_monge(s)
    fy = _axis_fy(s)
    f_axis = compile_expr(substitute(s.f, {"x": Num(0)}), ("y",))

    def K_at(y):
        try:
            return gauss_curvature(S, (0.0, y, f_axis(y)))
        except (SingularGradient, ZeroDivisionError) as exc:
            raise WindowHitsSingularity(str(exc)) from exc

    def rhs_a(state):
        y, xi, dxi = state
        return (1.0 / math.sqrt(1.0 + fy(y) ** 2), dxi, -K_at(y) * xi)

    # route A in arc length
    state = (y1, xi0, dxi0 / math.sqrt(1.0 + fy(y1) ** 2))
    ss, ys, xs, Ks = [0.0], [y1], [xi0], [K_at(y1)]
    h = step
    while state[0] < y2:
        k1 = rhs_a(state)
        k2 = rhs_a(_axpy(h / 2, k1, state))
        k3 = rhs_a(_axpy(h / 2, k2, state))
        k4 = rhs_a(_axpy(h, k3, state))
        state = tuple(state[i] + h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]) for i in range(3))
        if state[0] > y2:
            break
        ss.append(ss[-1] + h)
        ys.append(state[0])
        xs.append(state[1])
        Ks.append(K_at(state[0]))

    # route B in y, on the same grid, with the normal form alongside
    a, b, r = _ratfun_float(nve.a), _ratfun_float(nve.b), _ratfun_float(nf.r)

    def rhs_b(y, st):
        xi, dxi, A, w, dw = st
        return (dxi, -a(y) * dxi - b(y) * xi, a(y), dw, r(y) * w)

    st = (xi0, dxi0, 0.0, xi0, dxi0 + 0.5 * a(y1) * xi0)
    dev = nf_dev = 0.0
    scale = max(abs(x) for x in xs)
    for k in range(1, len(ys)):
        y, hk = ys[k - 1], ys[k] - ys[k - 1]
        k1 = rhs_b(y, st)
        k2 = rhs_b(y + hk / 2, _axpy(hk / 2, k1, st))
        k3 = rhs_b(y + hk / 2, _axpy(hk / 2, k2, st))
        k4 = rhs_b(y + hk, _axpy(hk, k3, st))
        st = tuple(st[i] + hk / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]) for i in range(5))
        dev = max(dev, abs(st[0] - xs[k]) / scale)
        w_pred = st[0] * math.exp(0.5 * st[2])
        nf_dev = max(nf_dev, abs(st[3] - w_pred) / max(abs(st[3]), abs(w_pred), 1e-300) if abs(w_pred) > 1e-12 else abs(st[3] - w_pred))
    return CrossCheckResult(dev, nf_dev, tuple(ss), tuple(ys), tuple(Ks))


def random_surface_points(S_f: Callable[[float, float], float], count: int, seed: int = 0, lo=0.5, hi=2.0):
    """Points (x, y, f(x, y)) with x, y drawn uniformly from [lo, hi]."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        x, y = rng.uniform(lo, hi, size=2)
        out.append((float(x), float(y), float(S_f(x, y))))
    return out


__all__ = [
    "CrossCheckResult",
    "GeodesicState",
    "GeomConfig",
    "ImplicitSurface",
    "ProfileTable",
    "SingularGradient",
    "Trajectory",
    "WindowHitsSingularity",
    "cross_validate_nve",
    "gauss_curvature",
    "geodesic_rhs",
    "integrate_geodesic",
    "planar_geodesic_profile",
    "random_surface_points",
    "tangent_frame",
]
