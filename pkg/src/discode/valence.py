"""Counting functions, the area-counted valence integral, and zero location.

The preimage counter integrates f'/(f - zeta) over a circle by the uniform
trapezoid rule (spectrally accurate for contours clearing all zeros) and
doubles the node count until the result sits within 1e-3 of an integer; a
result further than 0.25 from the nearest integer is rejected outright.

Real-axis zeros are found by sign-change bisection on Re f followed by a
complex Newton polish; general disc zero sets are located by Newton from a
deterministic seed lattice and certified against the argument-principle
count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .expr import AnalyticExpr
from .spaces import polar_integral_profile
from .grids import singular_angles


class ZeroOnContourError(ValueError):
    pass


class ContourError(RuntimeError):
    pass


class ZeroCountMismatch(RuntimeError):
    pass


@dataclass(frozen=True)
class CountResult:
    zeta: complex
    region: str
    count: int
    residual: float


def count_preimages(
    f: AnalyticExpr,
    zeta: complex,
    r: float,
    n0: int = 2048,
    resid_tol: float = 1e-3,
    clearance: float = 1e-8,
    max_nodes: int = 1 << 21,
) -> CountResult:
    """Number of solutions of f(z) = zeta in |z| < r, by the argument principle."""
    if not 0.0 < r < 1.0:
        raise ValueError("need 0 < r < 1")
    zeta = complex(zeta)
    fp = f.diff()

    scan = 2.0 * np.pi * np.arange(max(4096, 2 * n0)) / max(4096, 2 * n0)
    moduli = np.abs(f.eval(r * np.exp(1j * scan)) - zeta)
    if float(np.min(moduli)) < clearance:
        raise ZeroOnContourError(
            f"|f - zeta| drops to {float(np.min(moduli)):.2e} on |z| = {r}; move the contour"
        )

    n = n0
    while True:
        thetas = 2.0 * np.pi * np.arange(n) / n
        zv = r * np.exp(1j * thetas)
        integrand = fp.eval(zv) * zv / (f.eval(zv) - zeta)
        val = complex(np.mean(integrand))
        count = int(round(val.real))
        residual = abs(val - count)
        if residual < resid_tol:
            break
        if n >= max_nodes:
            if residual > 0.25:
                raise ContourError(
                    f"contour integral {val:.6g} is {residual:.3g} from an integer at n={n}"
                )
            break
        n *= 2
    if residual > 0.25:
        raise ContourError(f"contour integral {val:.6g} too far from an integer ({residual:.3g})")
    if count < 0:
        raise ContourError(f"negative winding count {count}; f is not analytic inside?")
    return CountResult(zeta, f"|z|<{r:g}", count, residual)


def valence_integral(
    f: AnalyticExpr,
    zeta0: complex,
    r_inner: float,
    base_angles: int = 512,
) -> float:
    """Area-counted preimages of the unit disc around zeta0:

        integral_{|z|<r_inner} |f'(z)|^2 [ |f(z) - zeta0| < 1 ] dm(z),

    which by the change-of-variables formula equals the integral of the
    counting function over that value disc.  Non-decreasing in r_inner.
    """
    if not 0.0 < r_inner < 1.0:
        raise ValueError("need 0 < r_inner < 1")
    zeta0 = complex(zeta0)
    fp = f.diff()

    def point_fn(zv: np.ndarray) -> np.ndarray:
        inside = np.abs(f.eval(zv) - zeta0) < 1.0
        return np.abs(fp.eval(zv)) ** 2 * inside

    depth = -math.log10(1.0 - r_inner)
    total, _ = polar_integral_profile(
        point_fn, lambda r: 1.0, singular_angles(f.sing), depth, base_angles
    )
    return float(total)


def hille_zeros(gamma: float, n_range) -> list[float]:
    """Closed-form real zeros tanh(n pi / (2 gamma)) of the oscillatory family."""
    if gamma <= 0:
        raise ValueError("gamma must be > 0")
    return [math.tanh(n * math.pi / (2.0 * gamma)) for n in n_range]


def find_zeros_on_segment(
    f: AnalyticExpr,
    a: float,
    b: float,
    n: int = 4096,
    tol: float = 1e-12,
) -> list[float]:
    """Zeros of a real-on-reals f on [a, b]: sign-change bisection + Newton."""
    if not -1.0 < a < b < 1.0:
        raise ValueError("need -1 < a < b < 1")
    xs = np.linspace(a, b, n + 1)
    vals = f.eval(xs.astype(np.complex128))
    scale = float(np.max(np.abs(vals))) + 1e-300
    if float(np.max(np.abs(vals.imag))) > 1e-9 * scale:
        raise ValueError("f is not real-valued on the segment; the sign-change scan needs Re f = f")
    g = vals.real
    fp = f.diff()

    roots: list[float] = []
    for i in range(n):
        x = None
        if g[i] == 0.0:
            x = float(xs[i])
        elif g[i] * g[i + 1] < 0.0:
            lo, hi = float(xs[i]), float(xs[i + 1])
            glo = g[i]
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                gm = f.eval(complex(mid)).real
                if gm == 0.0:
                    break
                if glo * gm < 0:
                    hi = mid
                else:
                    lo, glo = mid, gm
            x = 0.5 * (lo + hi)
        if x is None:
            continue
        for _ in range(60):
            fv = f.eval(complex(x))
            dv = fp.eval(complex(x))
            step = (fv / dv).real
            x -= step
            if abs(step) < 1e-16:
                break
        if abs(f.eval(complex(x))) > 1e-6 * scale:
            raise RuntimeError(f"Newton polish left residual {abs(f.eval(complex(x))):.2e} at {x}")
        roots.append(float(x))
    if g[n] == 0.0:
        roots.append(float(xs[n]))

    roots.sort()
    deduped: list[float] = []
    for x in roots:
        if not deduped or abs(x - deduped[-1]) > max(10 * tol, 1e-13):
            deduped.append(x)
    return deduped


def locate_zeros_in_disc(
    f: AnalyticExpr,
    radius: float,
    lattice: int = 24,
    tol: float = 1e-13,
) -> list[complex]:
    """All zeros of f in |z| < radius: Newton from a deterministic seed
    lattice (plus a dense real-axis sweep), certified against the
    argument-principle count."""
    expected = count_preimages(f, 0.0, radius).count
    if expected == 0:
        return []
    fp = f.diff()

    seeds: list[complex] = []
    for x in np.linspace(-radius * 0.999, radius * 0.999, 801):
        seeds.append(complex(x, 0.0))
    for rr in np.linspace(radius / lattice, radius * 0.98, 12):
        for t in 2.0 * np.pi * np.arange(lattice) / lattice:
            seeds.append(rr * complex(math.cos(t), math.sin(t)))

    found: list[complex] = []
    for s in seeds:
        x = complex(s)
        ok = False
        for _ in range(60):
            try:
                fv = f.eval(x)
                dv = fp.eval(x)
            except Exception:
                break
            if dv == 0:
                break
            step = fv / dv
            x -= step
            if abs(x) > 2.0:
                break
            if abs(step) < tol:
                ok = True
                break
        if not ok or abs(x) >= radius:
            continue
        if abs(f.eval(x)) > 1e-8:
            continue
        if not any(abs(x - y) < 1e-9 for y in found):
            found.append(x)
    if len(found) != expected:
        raise ZeroCountMismatch(
            f"Newton sweep found {len(found)} zeros but the contour count is {expected} in |z|<{radius}"
        )
    return sorted(found, key=lambda w: (w.real, w.imag))
