"""Deterministic quadrature helpers.

Three flavours cover everything the estimators need:

* `adaptive_simpson` -- classic recursive Simpson with Richardson control,
  for scalar integrands on a real interval;
* `boundary_integral` -- the same after the substitution u = -log(1-t),
  for integrands whose mass piles up against t = 1;
* `simpson_panels` -- composite Simpson per panel of a fixed knot vector,
  evaluated in one vectorized call, for cumulative radial profiles.

All routines visit nodes in a fixed order, so results are reproducible.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np


class QuadratureError(RuntimeError):
    pass


def adaptive_simpson(
    fn: Callable[[float], complex],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = 48,
    rtol: float = 1e-12,
) -> complex:
    """Integral of fn over [a, b]; fn may return complex values.

    A panel is accepted when the Richardson error estimate drops below the
    absolute budget or below rtol times the panel value, whichever is larger
    (the relative floor keeps huge-magnitude integrands from recursing to the
    depth cap in pursuit of unreachable absolute accuracy).
    """
    if a == b:
        return 0.0
    fa = fn(a)
    fb = fn(b)
    m = 0.5 * (a + b)
    fm = fn(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_rec(fn, a, b, fa, fm, fb, whole, tol, rtol, max_depth)


def _simpson_rec(fn, a, b, fa, fm, fb, whole, tol, rtol, depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = fn(lm)
    frm = fn(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    better = left + right
    err = better - whole
    if abs(err) <= 15.0 * max(tol, rtol * abs(better)) or depth <= 0:
        return better + err / 15.0
    half = 0.5 * tol
    return _simpson_rec(fn, a, m, fa, flm, fm, left, half, rtol, depth - 1) + _simpson_rec(
        fn, m, b, fm, frm, fb, right, half, rtol, depth - 1
    )


def boundary_integral(
    fn: Callable[[float], complex],
    lo: float,
    hi: float,
    tol: float = 1e-10,
    max_depth: int = 60,
) -> complex:
    """Integral of fn over [lo, hi] in t, computed in u = -log(1-t).

    Suits integrands like M(t)(1-t) whose natural scale is log(1/(1-t)).
    """
    if not (0.0 <= lo <= hi < 1.0):
        raise ValueError("need 0 <= lo <= hi < 1")

    def g(u: float) -> complex:
        t = 1.0 - math.exp(-u)
        return fn(t) * math.exp(-u)

    return adaptive_simpson(g, -math.log1p(-lo), -math.log1p(-hi), tol, max_depth)


def segment_integral(
    fn: Callable[[complex], complex],
    z0: complex,
    z1: complex,
    tol: float = 1e-10,
    max_depth: int = 60,
) -> complex:
    """Complex line integral of fn along the straight segment z0 -> z1."""
    dz = z1 - z0

    def g(t: float) -> complex:
        return fn(z0 + t * dz)

    return adaptive_simpson(g, 0.0, 1.0, tol, max_depth) * dz


def simpson_panels(fn_vec: Callable[[np.ndarray], np.ndarray], knots: np.ndarray) -> np.ndarray:
    """Per-panel Simpson integrals of a vectorized integrand over knot pairs.

    Evaluates fn_vec once on knots and panel midpoints; returns the array of
    integrals over [knots[i], knots[i+1]].
    """
    knots = np.asarray(knots, dtype=np.float64)
    mids = 0.5 * (knots[:-1] + knots[1:])
    pts = np.concatenate([knots, mids])
    vals = np.asarray(fn_vec(pts), dtype=np.float64)
    vk = vals[: len(knots)]
    vm = vals[len(knots):]
    h = np.diff(knots)
    return h / 6.0 * (vk[:-1] + 4.0 * vm + vk[1:])


def geometric_knots_u(u_lo: float, u_hi: float, step: float = 0.125) -> np.ndarray:
    """Uniform knots in u = -log(1-r), endpoints included."""
    n = max(2, int(math.ceil((u_hi - u_lo) / step)) + 1)
    return np.linspace(u_lo, u_hi, n)
