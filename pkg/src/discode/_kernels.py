"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The backend is chosen once at import time from the environment variable
``DISCODE_BACKEND``:

* ``numba``  -- require numba, fail loudly if it cannot be imported;
* ``numpy``  -- force the pure-numpy implementations;
* unset     -- use numba when available, numpy otherwise.

Both paths run the same floating-point operations in the same order, so a
fixed backend gives bit-reproducible results run to run.  The benchmark in
``scripts/bench_backends.py`` compares the two.
"""

from __future__ import annotations

import os

import numpy as np

_REQUESTED = os.environ.get("DISCODE_BACKEND", "").strip().lower()
if _REQUESTED not in ("", "numba", "numpy"):
    raise RuntimeError(f"DISCODE_BACKEND must be 'numba' or 'numpy', got {_REQUESTED!r}")

NUMBA_ENABLED = False
if _REQUESTED != "numpy":
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:
        if _REQUESTED == "numba":
            raise
        NUMBA_ENABLED = False


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"


# ---------------------------------------------------------------------------
# pure-numpy reference implementations
# ---------------------------------------------------------------------------

def horner_np(coeffs: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Evaluate sum_k coeffs[k] * w**k by Horner's scheme."""
    acc = np.full_like(w, coeffs[-1], dtype=np.complex128)
    for k in range(len(coeffs) - 2, -1, -1):
        acc = acc * w + coeffs[k]
    return acc


def cauchy_product_np(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """First n+1 coefficients of the product of two power series."""
    out = np.zeros(n + 1, dtype=np.complex128)
    for k in range(n + 1):
        jmax = min(k, len(a) - 1)
        acc = 0.0 + 0.0j
        for j in range(jmax + 1):
            if k - j < len(b):
                acc += a[j] * b[k - j]
        out[k] = acc
    return out


def ode_taylor_coeffs_np(a: np.ndarray, c0: complex, c1: complex, degree: int) -> np.ndarray:
    """Taylor coefficients of the solution of f'' + A f = 0 at the center of `a`.

    `a` holds the Taylor coefficients of A; the recurrence is
    (k+1)(k+2) c_{k+2} = -sum_{j<=k} a_j c_{k-j}.
    """
    c = np.zeros(degree + 1, dtype=np.complex128)
    c[0] = c0
    if degree >= 1:
        c[1] = c1
    for k in range(degree - 1):
        acc = 0.0 + 0.0j
        jmax = min(k, len(a) - 1)
        for j in range(jmax + 1):
            acc += a[j] * c[k - j]
        c[k + 2] = -acc / ((k + 1) * (k + 2))
    return c


# ---------------------------------------------------------------------------
# backend dispatch
# ---------------------------------------------------------------------------

if NUMBA_ENABLED:

    @njit(cache=True)
    def _horner_nb(coeffs, w):  # pragma: no cover - exercised via dispatch
        acc = np.full(w.shape, coeffs[len(coeffs) - 1], dtype=np.complex128)
        for k in range(len(coeffs) - 2, -1, -1):
            for i in range(w.shape[0]):
                acc[i] = acc[i] * w[i] + coeffs[k]
        return acc

    @njit(cache=True)
    def _cauchy_nb(a, b, n):  # pragma: no cover
        out = np.zeros(n + 1, dtype=np.complex128)
        for k in range(n + 1):
            jmax = min(k, len(a) - 1)
            acc = 0.0 + 0.0j
            for j in range(jmax + 1):
                if k - j < len(b):
                    acc += a[j] * b[k - j]
            out[k] = acc
        return out

    @njit(cache=True)
    def _ode_nb(a, c0, c1, degree):  # pragma: no cover
        c = np.zeros(degree + 1, dtype=np.complex128)
        c[0] = c0
        if degree >= 1:
            c[1] = c1
        for k in range(degree - 1):
            acc = 0.0 + 0.0j
            jmax = min(k, len(a) - 1)
            for j in range(jmax + 1):
                acc += a[j] * c[k - j]
            c[k + 2] = -acc / ((k + 1) * (k + 2))
        return c

    def horner(coeffs: np.ndarray, w: np.ndarray) -> np.ndarray:
        return _horner_nb(
            np.ascontiguousarray(coeffs, dtype=np.complex128),
            np.ascontiguousarray(w, dtype=np.complex128),
        )

    def cauchy_product(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
        return _cauchy_nb(
            np.ascontiguousarray(a, dtype=np.complex128),
            np.ascontiguousarray(b, dtype=np.complex128),
            n,
        )

    def ode_taylor_coeffs(a: np.ndarray, c0: complex, c1: complex, degree: int) -> np.ndarray:
        return _ode_nb(
            np.ascontiguousarray(a, dtype=np.complex128),
            complex(c0),
            complex(c1),
            degree,
        )

else:
    horner = horner_np
    cauchy_product = cauchy_product_np
    ode_taylor_coeffs = ode_taylor_coeffs_np
