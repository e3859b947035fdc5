"""Power-series solver for f'' + A f = 0 and ray continuation.

The local recurrence is (k+1)(k+2) c_{k+2} = -sum_{j<=k} a_j c_{k-j}, where
a_j are the Taylor coefficients of A at the expansion center.  Continuation
along a ray re-centers the expansion with step sigma*(1 - |center|)
(sigma = 1/4), seeding each patch from the value/derivative of the previous
one; the geometric stepping matches the (1-|z|) scale of every bound used
downstream.  A patch whose last coefficients are not negligible at the step
length raises rather than silently degrading.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .expr import AnalyticExpr
from .grids import DiscGrid, circle_max
from .quadrature import boundary_integral, segment_integral
from .series import TaylorPatch, taylor_at, trust_radius_at

STEP_FACTOR = 0.25
LOCAL_DEGREE = 24
TAIL_TOL = 1e-12


class RayThroughSingularity(ValueError):
    pass


class TruncationError(RuntimeError):
    pass


@dataclass(frozen=True)
class ODEProblem:
    A: AnalyticExpr
    f0: complex
    fp0: complex

    def __post_init__(self):
        object.__setattr__(self, "f0", complex(self.f0))
        object.__setattr__(self, "fp0", complex(self.fp0))
        if self.f0 == 0 and self.fp0 == 0:
            raise ValueError("initial data (0, 0) only generates the trivial solution")
        self.A.eval(0j)  # must be evaluable at the base point


def taylor_solve(p: ODEProblem, degree: int = LOCAL_DEGREE) -> TaylorPatch:
    """Solution patch centered at 0 with f(0) = f0, f'(0) = fp0."""
    if degree < 2:
        raise ValueError("degree must be >= 2")
    a = taylor_at(p.A, 0.0, degree).coefficients
    coeffs = _kernels.ode_taylor_coeffs(a, p.f0, p.fp0, degree)
    return TaylorPatch(0j, coeffs, trust_radius_at(p.A, 0.0))


def _solution_patch(A: AnalyticExpr, center: complex, f: complex, fp: complex, degree: int) -> TaylorPatch:
    a = taylor_at(A, center, degree).coefficients
    coeffs = _kernels.ode_taylor_coeffs(a, f, fp, degree)
    return TaylorPatch(center, coeffs, trust_radius_at(A, center))


def _tail_estimate(patch: TaylorPatch, h: float) -> float:
    c = patch.coefficients
    ks = np.arange(len(c) - 4, len(c))
    scale = max(1.0, abs(c[0]), abs(c[1]) * h if len(c) > 1 else 0.0)
    return float(np.max(np.abs(c[ks]) * h ** ks) / scale)


@dataclass(frozen=True)
class RaySolution:
    theta: float
    centers: list[float]
    patches: list[TaylorPatch]
    r_max: float

    def _index(self, r: float) -> int:
        i = bisect.bisect_right(self.centers, r) - 1
        return min(max(i, 0), len(self.patches) - 1)

    def _point(self, r: float) -> complex:
        return r * complex(math.cos(self.theta), math.sin(self.theta))

    def value(self, r: float) -> complex:
        if r < 0 or r > self.r_max * (1 + 1e-12):
            raise ValueError(f"r={r} outside the continued range [0, {self.r_max}]")
        return self.patches[self._index(r)](self._point(r))

    def derivative(self, r: float) -> complex:
        if r < 0 or r > self.r_max * (1 + 1e-12):
            raise ValueError(f"r={r} outside the continued range [0, {self.r_max}]")
        return self.patches[self._index(r)].derivative()(self._point(r))

    def values(self, rs: np.ndarray) -> np.ndarray:
        rs = np.asarray(rs, dtype=np.float64)
        out = np.empty(rs.shape, dtype=np.complex128)
        idx = np.searchsorted(np.asarray(self.centers), rs, side="right") - 1
        idx = np.clip(idx, 0, len(self.patches) - 1)
        direction = complex(math.cos(self.theta), math.sin(self.theta))
        for i in np.unique(idx):
            sel = idx == i
            out[sel] = _kernels.horner(self.patches[i].coefficients, rs[sel] * direction - self.patches[i].center)
        return out

    def derivatives(self, rs: np.ndarray) -> np.ndarray:
        rs = np.asarray(rs, dtype=np.float64)
        out = np.empty(rs.shape, dtype=np.complex128)
        idx = np.searchsorted(np.asarray(self.centers), rs, side="right") - 1
        idx = np.clip(idx, 0, len(self.patches) - 1)
        direction = complex(math.cos(self.theta), math.sin(self.theta))
        for i in np.unique(idx):
            sel = idx == i
            dp = self.patches[i].derivative()
            out[sel] = _kernels.horner(dp.coefficients, rs[sel] * direction - dp.center)
        return out


def continue_along_ray(
    p: ODEProblem,
    theta: float,
    r_max: float,
    degree: int = LOCAL_DEGREE,
    sigma: float = STEP_FACTOR,
    tail_tol: float = TAIL_TOL,
) -> RaySolution:
    """Stepped re-centered Taylor patches along the ray t*exp(i*theta)."""
    if not 0.0 < r_max < 1.0:
        raise ValueError("need 0 < r_max < 1")
    direction = complex(math.cos(theta), math.sin(theta))
    for s in p.A.sing:
        if abs(s) < 1e-12 or abs(s / abs(s) - direction) < 1e-9:
            raise RayThroughSingularity(
                f"the ray theta={theta:.6g} points at the declared singularity {s:.6g}; pick another ray"
            )

    centers = [0.0]
    patches = [_solution_patch(p.A, 0j, p.f0, p.fp0, degree)]
    t = 0.0
    while t + sigma * (1.0 - t) < r_max:
        h = sigma * (1.0 - t)
        est = _tail_estimate(patches[-1], h)
        if est > tail_tol:
            raise TruncationError(
                f"local truncation estimate {est:.3e} exceeds {tail_tol:.1e} at center {t:.6f}; "
                "raise the degree or shorten the step"
            )
        t_next = t + h
        c_next = t_next * direction
        f_val = patches[-1](c_next)
        fp_val = patches[-1].derivative()(c_next)
        patches.append(_solution_patch(p.A, c_next, f_val, fp_val, degree))
        centers.append(t_next)
        t = t_next
    est = _tail_estimate(patches[-1], max(r_max - t, 0.0))
    if est > tail_tol:
        raise TruncationError(f"final patch tail estimate {est:.3e} exceeds {tail_tol:.1e}")
    return RaySolution(theta, centers, patches, r_max)


def residual(f: AnalyticExpr, A: AnalyticExpr, grid: DiscGrid) -> float:
    """max over the grid of |f'' + A f| / (1 + |f|)."""
    f2 = f.diff().diff()
    worst = 0.0
    thetas = 2.0 * np.pi * np.arange(grid.angular) / grid.angular
    for r in np.concatenate([[0.0], grid.radii]):
        zv = r * np.exp(1j * thetas) if r > 0 else np.array([0j])
        num = np.abs(f2.eval(zv) + A.eval(zv) * f.eval(zv))
        den = 1.0 + np.abs(f.eval(zv))
        worst = max(worst, float(np.max(num / den)))
    return worst


def wronskian(f1: AnalyticExpr, f2: AnalyticExpr, zv: complex) -> complex:
    """f1 f2' - f1' f2 at a point."""
    return f1.eval(zv) * f2.diff().eval(zv) - f1.diff().eval(zv) * f2.eval(zv)


class SecondSolution:
    """g = f * integral_0^z f(w)^-2 dw, the reduction-of-order companion.

    Wherever f is zero-free on the straight segment from 0, g solves the same
    equation, is independent of f, and W(f, g) = 1.
    """

    def __init__(self, f: AnalyticExpr, tol: float = 1e-10):
        self.f = f
        self.fp = f.diff()
        self.tol = tol

    def _check_segment(self, z1: complex):
        ts = np.linspace(0.0, 1.0, 513)
        vals = np.abs(self.f.eval(ts * z1)) if z1 != 0 else np.array([abs(self.f.eval(0j))])
        if float(np.min(vals)) <= 1e-12 * (1.0 + float(np.max(vals))):
            raise ValueError(f"f has a zero on the segment 0 -> {z1:.6g}; reduction of order needs a zero-free path")

    def integral(self, z1: complex) -> complex:
        z1 = complex(z1)
        if z1 == 0:
            return 0j
        self._check_segment(z1)
        return segment_integral(lambda w: 1.0 / self.f.eval(w) ** 2, 0j, z1, tol=self.tol)

    def __call__(self, z1: complex) -> complex:
        return self.f.eval(z1) * self.integral(z1)

    def derivative(self, z1: complex) -> complex:
        z1 = complex(z1)
        return self.fp.eval(z1) * self.integral(z1) + 1.0 / self.f.eval(z1)

    def wronskian_at(self, z1: complex) -> complex:
        z1 = complex(z1)
        return self.f.eval(z1) * self.derivative(z1) - self.fp.eval(z1) * self(z1)


def reduction_of_order(f: AnalyticExpr, tol: float = 1e-10) -> SecondSolution:
    return SecondSolution(f, tol)


def gronwall_bound(
    p: ODEProblem,
    theta: float,
    r0: float,
    r: float,
    degree: int = 40,
    tol: float = 1e-10,
) -> float:
    """A priori growth bound along a ray:

        (M(r0, f) + M(r0, f') (1 - r0)) * exp( integral_r0^r |A(t e^(i theta))| (1-t) dt ).
    """
    if not 0.0 <= r0 < r < 1.0:
        raise ValueError("need 0 <= r0 < r < 1")
    patch = taylor_solve(p, degree)
    if r0 > patch.trust_radius:
        raise ValueError(f"r0={r0} exceeds the base patch trust radius {patch.trust_radius:.3g}")
    dpatch = patch.derivative()

    def mod_f(thetas: np.ndarray) -> np.ndarray:
        return np.abs(patch(r0 * np.exp(1j * thetas)))

    def mod_fp(thetas: np.ndarray) -> np.ndarray:
        return np.abs(dpatch(r0 * np.exp(1j * thetas)))

    mf, _ = circle_max(mod_f, angular=256)
    mfp, _ = circle_max(mod_fp, angular=256)
    direction = complex(math.cos(theta), math.sin(theta))
    expo = boundary_integral(lambda t: abs(p.A.eval(t * direction)) * (1.0 - t), r0, r, tol=tol)
    return (mf + mfp * (1.0 - r0)) * math.exp(expo.real)


def ray_table(p: ODEProblem, theta: float, rs: np.ndarray, r0: float = 0.5) -> list[dict]:
    """Rows for the CSV ray dump: r, Re f, Im f, |f|, |f'|, growth bound, residual."""
    rs = np.asarray(sorted(float(r) for r in rs))
    ray = continue_along_ray(p, theta, float(rs[-1]))
    vals = ray.values(rs)
    ders = ray.derivatives(rs)
    direction = complex(math.cos(theta), math.sin(theta))
    av = p.A.eval(rs * direction)
    # local residual of the continued patches (second derivative from coefficients)
    res = []
    for i, r in enumerate(rs):
        patch = ray.patches[ray._index(r)]
        d2 = patch.derivative().derivative()(r * direction)
        res.append(abs(d2 + av[i] * vals[i]) / (1.0 + abs(vals[i])))
    bound_cache: dict[float, float] = {}

    def bound_at(r: float) -> float | None:
        if r <= r0:
            return None
        if r not in bound_cache:
            bound_cache[r] = gronwall_bound(p, theta, r0, r)
        return bound_cache[r]

    rows = []
    for i, r in enumerate(rs):
        rows.append(
            {
                "r": float(r),
                "re_f": float(vals[i].real),
                "im_f": float(vals[i].imag),
                "abs_f": float(abs(vals[i])),
                "abs_fp": float(abs(ders[i])),
                "bound": bound_at(float(r)),
                "residual": float(res[i]),
            }
        )
    return rows
