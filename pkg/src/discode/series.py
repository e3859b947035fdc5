"""Truncated power-series arithmetic and local Taylor patches.

Series are plain complex numpy arrays c[0..n] for sum c_k (z-c)^k.  The
composition rules (product, quotient, exp, log, real powers, sin/cos) are the
standard coefficient recurrences; `taylor_at` applies them bottom-up over an
expression tree, so expansions are exact up to the truncation degree.

A TaylorPatch is a series plus a trust radius: 0.75 times the distance from
the center to the nearest declared singularity (or to the unit circle when
nothing is declared, which is always a valid lower bound for a function
analytic on the disc).  Evaluation outside the trust radius raises.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .expr import Add, AnalyticExpr, Const, Cos, Div, Exp, Log, Mul, Neg, Pow, Sin, Sqrt, Var

TRUST_SAFETY = 0.75


class CenterAtSingularity(ValueError):
    """Series expansion requested at a point where a subexpression is singular."""


class TrustRadiusError(ValueError):
    """Patch evaluated outside its trust region."""


# ---------------------------------------------------------------------------
# coefficient recurrences
# ---------------------------------------------------------------------------

def ps_mul(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    return _kernels.cauchy_product(a, b, n)


def ps_div(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    if b[0] == 0:
        raise CenterAtSingularity("division by a series vanishing at the center")
    q = np.zeros(n + 1, dtype=np.complex128)
    q[0] = a[0] / b[0]
    for k in range(1, n + 1):
        acc = a[k] if k < len(a) else 0.0 + 0.0j
        jmax = min(k, len(b) - 1)
        for j in range(1, jmax + 1):
            acc -= b[j] * q[k - j]
        q[k] = acc / b[0]
    return q


def ps_exp(p: np.ndarray, n: int) -> np.ndarray:
    e = np.zeros(n + 1, dtype=np.complex128)
    e[0] = np.exp(p[0])
    for k in range(1, n + 1):
        acc = 0.0 + 0.0j
        jmax = min(k, len(p) - 1)
        for j in range(1, jmax + 1):
            acc += j * p[j] * e[k - j]
        e[k] = acc / k
    return e


def ps_log(p: np.ndarray, n: int) -> np.ndarray:
    if p[0] == 0:
        raise CenterAtSingularity("log of a series vanishing at the center")
    out = np.zeros(n + 1, dtype=np.complex128)
    out[0] = np.log(p[0])
    dp = np.array([(k + 1) * p[k + 1] for k in range(len(p) - 1)], dtype=np.complex128)
    d = ps_div(dp, p, max(n - 1, 0))
    for k in range(1, n + 1):
        out[k] = d[k - 1] / k
    return out


def ps_pow(p: np.ndarray, alpha: float, n: int) -> np.ndarray:
    # non-negative integer exponents work even when p[0] == 0
    if abs(alpha - round(alpha)) < 1e-12 and round(alpha) >= 0:
        m = int(round(alpha))
        out = np.zeros(n + 1, dtype=np.complex128)
        out[0] = 1.0
        base = np.array(p[: n + 1], dtype=np.complex128)
        while m:
            if m & 1:
                out = ps_mul(out, base, n)
            m >>= 1
            if m:
                base = ps_mul(base, base, n)
        return out
    if p[0] == 0:
        raise CenterAtSingularity("fractional power of a series vanishing at the center")
    w = np.zeros(n + 1, dtype=np.complex128)
    w[0] = p[0] ** alpha
    for k in range(1, n + 1):
        acc = 0.0 + 0.0j
        jmax = min(k, len(p) - 1)
        for j in range(1, jmax + 1):
            acc += (j * (alpha + 1) - k) * p[j] * w[k - j]
        w[k] = acc / (k * p[0])
    return w


def ps_sin_cos(p: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    s = np.zeros(n + 1, dtype=np.complex128)
    c = np.zeros(n + 1, dtype=np.complex128)
    s[0] = np.sin(p[0])
    c[0] = np.cos(p[0])
    for k in range(n):
        acc_s = 0.0 + 0.0j
        acc_c = 0.0 + 0.0j
        jmax = min(k, len(p) - 2)
        for j in range(jmax + 1):
            acc_s += (j + 1) * p[j + 1] * c[k - j]
            acc_c += (j + 1) * p[j + 1] * s[k - j]
        s[k + 1] = acc_s / (k + 1)
        c[k + 1] = -acc_c / (k + 1)
    return s, c


# ---------------------------------------------------------------------------
# Taylor patches
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TaylorPatch:
    center: complex
    coefficients: np.ndarray
    trust_radius: float

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, zv):
        w = np.asarray(zv, dtype=np.complex128) - self.center
        if np.any(np.abs(w) > self.trust_radius * (1 + 1e-12)):
            raise TrustRadiusError(
                f"evaluation at distance {np.max(np.abs(w)):.3g} exceeds trust radius "
                f"{self.trust_radius:.3g} of the patch at {self.center:.6g}"
            )
        vals = _kernels.horner(self.coefficients, np.atleast_1d(w))
        return vals if np.ndim(zv) else complex(vals[0])

    def derivative(self) -> "TaylorPatch":
        k = np.arange(1, len(self.coefficients), dtype=np.complex128)
        return TaylorPatch(self.center, self.coefficients[1:] * k, self.trust_radius)

    def eval_with_derivative(self, zv) -> tuple[complex, complex]:
        return self(zv), self.derivative()(zv)


def trust_radius_at(f: AnalyticExpr, center: complex) -> float:
    d = f.nearest_singularity(center)
    if d is None:
        d = 1.0 - abs(center)
    return TRUST_SAFETY * d


def taylor_at(f: AnalyticExpr, center: complex, degree: int) -> TaylorPatch:
    """Local expansion of an expression, by recursive series arithmetic."""
    if degree < 0:
        raise ValueError("degree must be >= 0")
    center = complex(center)
    if abs(center) >= 1:
        raise ValueError("expansion center must lie in the open unit disc")
    coeffs = _series_of(f, center, degree, {})
    return TaylorPatch(center, coeffs, trust_radius_at(f, center))


def _series_of(e: AnalyticExpr, c: complex, n: int, cache: dict) -> np.ndarray:
    key = id(e)
    hit = cache.get(key)
    if hit is not None:
        return hit
    t = type(e)
    if t is Const:
        out = np.zeros(n + 1, dtype=np.complex128)
        out[0] = e.value
    elif t is Var:
        out = np.zeros(n + 1, dtype=np.complex128)
        out[0] = c
        if n >= 1:
            out[1] = 1.0
    elif t is Add:
        out = _series_of(e.a, c, n, cache) + _series_of(e.b, c, n, cache)
    elif t is Neg:
        out = -_series_of(e.a, c, n, cache)
    elif t is Mul:
        out = ps_mul(_series_of(e.a, c, n, cache), _series_of(e.b, c, n, cache), n)
    elif t is Div:
        out = ps_div(_series_of(e.a, c, n, cache), _series_of(e.b, c, n, cache), n)
    elif t is Pow:
        out = ps_pow(_series_of(e.a, c, n, cache), e.p, n)
    elif t is Exp:
        out = ps_exp(_series_of(e.a, c, n, cache), n)
    elif t is Log:
        out = ps_log(_series_of(e.a, c, n, cache), n)
    elif t is Sqrt:
        out = ps_pow(_series_of(e.a, c, n, cache), 0.5, n)
    elif t is Sin:
        out = ps_sin_cos(_series_of(e.a, c, n, cache), n)[0]
    elif t is Cos:
        out = ps_sin_cos(_series_of(e.a, c, n, cache), n)[1]
    else:  # pragma: no cover
        raise TypeError(f"unknown node {t}")
    cache[key] = out
    return out
