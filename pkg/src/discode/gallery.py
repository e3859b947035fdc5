"""Named coefficient/solution families with exact symbolic derivatives.

Each entry bundles a coefficient A, closed-form solutions of f'' + A f = 0,
the declared boundary singularities, and a list of machine-checkable facts.
`verify` re-derives everything numerically (ODE residual, zero sets, growth
behaviour) so a transcription slip in any formula is caught immediately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .expr import AnalyticExpr, Const, Var, cos, exp, log, pow_, sin, sqrt


@dataclass(frozen=True)
class GalleryEntry:
    name: str
    params: dict
    A: AnalyticExpr
    solutions: list[AnalyticExpr]
    singularities: tuple[complex, ...]
    facts: list[str] = field(default_factory=list)
    initial_values: list[tuple[complex, complex]] = field(default_factory=list)

    def problem(self, which: int = 0):
        """ODE initial data reproducing solution `which`."""
        from .solver import ODEProblem

        f0, fp0 = self.initial_values[which]
        return ODEProblem(self.A, f0, fp0)


def _one_minus_z() -> AnalyticExpr:
    return Const(1) - Var()


def _one_plus_z() -> AnalyticExpr:
    return Const(1) + Var()


def _hille(gamma: float) -> GalleryEntry:
    if gamma <= 0:
        raise ValueError("hille requires gamma > 0")
    zv = Var()
    one_minus_sq = Const(1) - zv * zv
    A = (Const(1.0 + 4.0 * gamma * gamma) / pow_(one_minus_sq, 2)).with_singularities([1, -1])
    big_log = log(_one_plus_z() / _one_minus_z())
    f1 = (sqrt(one_minus_sq) * sin(Const(gamma) * big_log)).with_singularities([1, -1])
    f2 = (sqrt(one_minus_sq) * cos(Const(gamma) * big_log)).with_singularities([1, -1])
    return GalleryEntry(
        name="hille",
        params={"gamma": gamma},
        A=A,
        solutions=[f1, f2],
        singularities=(1 + 0j, -1 + 0j),
        facts=[
            "all solutions are bounded, hence of slow growth",
            "f1 has infinitely many real zeros tanh(n*pi/(2*gamma)) accumulating at +-1",
            "wronskian of (f1, f2) is the constant -2*gamma",
        ],
        initial_values=[(0.0, 2.0 * gamma), (1.0, 0.0)],
    )


def _power(gamma: float) -> GalleryEntry:
    if gamma <= 1:
        raise ValueError("power requires gamma > 1")
    zv = Var()
    one_minus_sq = Const(1) - zv * zv
    A = (Const(1.0 - gamma * gamma) / pow_(one_minus_sq, 2)).with_singularities([1, -1])
    f1 = (pow_(_one_plus_z(), (gamma + 1) / 2) * pow_(_one_minus_z(), -(gamma - 1) / 2)).with_singularities([1, -1])
    f2 = (pow_(_one_minus_z(), (gamma + 1) / 2) * pow_(_one_plus_z(), -(gamma - 1) / 2)).with_singularities([1, -1])
    return GalleryEntry(
        name="power",
        params={"gamma": gamma},
        A=A,
        solutions=[f1, f2],
        singularities=(1 + 0j, -1 + 0j),
        facts=[
            "every non-trivial solution grows too fast near the boundary for the gradient condition sup|f'|(1-|z|^2)",
            "f1 and f2 blow up at distinct boundary points, so no combination is tame",
            "wronskian of (f1, f2) is the constant -2*gamma",
        ],
        initial_values=[(1.0, gamma), (1.0, -gamma)],
    )


def _exp_singular() -> GalleryEntry:
    zv = Var()
    A = ((Const(-4) * zv) / pow_(_one_minus_z(), 4)).with_singularities([1])
    f = exp(-(_one_plus_z() / _one_minus_z())).with_singularities([1])
    return GalleryEntry(
        name="exp_singular",
        params={},
        A=A,
        solutions=[f],
        singularities=(1 + 0j,),
        facts=[
            "f is bounded (|f| <= 1) and zero-free",
            "the reduction-of-order companion grows rapidly on the positive real axis",
        ],
        initial_values=[(math.exp(-1.0), -2.0 * math.exp(-1.0))],
    )


def _log_power(alpha: float) -> GalleryEntry:
    if not 0 < alpha < 1:
        raise ValueError("log_power requires 0 < alpha < 1")
    ell = log(Const(math.e) / _one_minus_z())
    # stored exactly in the printed two-term form; verify() guards transcription
    bracket = Const(alpha - 1.0) * pow_(ell, -2) + pow_(ell, -1)
    A = ((Const(-alpha) / pow_(_one_minus_z(), 2)) * bracket).with_singularities([1])
    f = pow_(ell, alpha).with_singularities([1])
    return GalleryEntry(
        name="log_power",
        params={"alpha": alpha},
        A=A,
        solutions=[f],
        singularities=(1 + 0j,),
        facts=[
            "f = (log(e/(1-z)))^alpha is unbounded but of logarithmic growth",
            "the weighted coefficient norm with one log factor scales like alpha",
            "f is finitely valent for rational alpha in (0,1)",
        ],
        initial_values=[(1.0, alpha)],
    )


def _loglog_power(alpha: float) -> GalleryEntry:
    if alpha <= 0:
        raise ValueError("loglog_power requires alpha > 0")
    big = log(Const(math.exp(math.e)) / _one_minus_z())
    u = log(big)
    numer = Const(alpha - 1.0) + (big - Const(1)) * u
    denom = pow_(_one_minus_z(), 2) * pow_(big, 2) * pow_(u, 2)
    A = (Const(-alpha) * (numer / denom)).with_singularities([1])
    f = pow_(u, alpha).with_singularities([1])
    return GalleryEntry(
        name="loglog_power",
        params={"alpha": alpha},
        A=A,
        solutions=[f],
        singularities=(1 + 0j,),
        facts=[
            "f = (log log(e^e/(1-z)))^alpha is zero-free and unbounded",
            "the coefficient carries an extra log log weight, so the mean-oscillation integral criteria converge",
        ],
        initial_values=[(1.0, alpha / math.e)],
    )


def _zero() -> GalleryEntry:
    return GalleryEntry(
        name="zero",
        params={},
        A=Const(0),
        solutions=[Const(1), Var()],
        singularities=(),
        facts=["solutions are the affine functions"],
        initial_values=[(1.0, 0.0), (0.0, 1.0)],
    )


def _constant(c: complex) -> GalleryEntry:
    c = complex(c)
    if c == 0:
        return _zero()
    mu = np.sqrt(complex(c))
    zv = Var()
    f1 = cos(Const(mu) * zv)
    f2 = sin(Const(mu) * zv) / Const(mu)
    return GalleryEntry(
        name="constant",
        params={"c": c},
        A=Const(c),
        solutions=[f1, f2],
        singularities=(),
        facts=["constant-coefficient flow: trigonometric basis cos/sin"],
        initial_values=[(1.0, 0.0), (0.0, 1.0)],
    )


_BUILDERS = {
    "hille": _hille,
    "power": _power,
    "exp_singular": _exp_singular,
    "log_power": _log_power,
    "loglog_power": _loglog_power,
    "zero": _zero,
    "constant": _constant,
}


def names() -> list[str]:
    return sorted(_BUILDERS)


def get(name: str, **params) -> GalleryEntry:
    """Construct a gallery entry; raises on unknown names or bad parameters."""
    if name not in _BUILDERS:
        raise KeyError(f"unknown gallery entry {name!r}; known: {', '.join(names())}")
    return _BUILDERS[name](**params)


def default_entries() -> list[GalleryEntry]:
    """The five parameterized families at their reference parameters."""
    return [
        get("hille", gamma=1.0),
        get("power", gamma=2.0),
        get("exp_singular"),
        get("log_power", alpha=0.5),
        get("loglog_power", alpha=1.0),
    ]


def verify(entry: GalleryEntry, residual_tol: float = 1e-9) -> dict:
    """Re-check the entry numerically: residual plus per-entry facts."""
    from . import solver, valence
    from .grids import DiscGrid, max_modulus

    grid = DiscGrid.compact(rmax=0.9, nradii=8, angular=128)
    checks: list[tuple[str, bool, str]] = []
    worst = 0.0
    for k, f in enumerate(entry.solutions):
        res = solver.residual(f, entry.A, grid)
        worst = max(worst, res)
        checks.append((f"residual solution {k}", res <= residual_tol, f"{res:.3e}"))

    if len(entry.solutions) == 2:
        f1, f2 = entry.solutions
        pts = [0.1 + 0.2j, -0.3 + 0.1j, 0.4j, 0.25]
        w = [solver.wronskian(f1, f2, p) for p in pts]
        spread = max(abs(x - w[0]) for x in w)
        checks.append(("wronskian constant", spread <= 1e-8 * max(1.0, abs(w[0])), f"W={w[0]:.6g}"))

    if entry.name == "hille":
        gamma = entry.params["gamma"]
        ref = valence.hille_zeros(gamma, range(1, 4))
        found = valence.find_zeros_on_segment(entry.solutions[0], 0.01, float(np.max(ref)) + 1e-4)
        ok = len(found) == len(ref) and max(abs(a - b) for a, b in zip(found, ref)) < 1e-10
        checks.append(("zero list matches closed form", ok, f"{len(found)} zeros"))
    elif entry.name == "exp_singular":
        g = solver.reduction_of_order(entry.solutions[0])
        ratio = abs(g(0.9)) / abs(g(0.5))
        checks.append(("companion grows on (0,1)", ratio > 1e3, f"g(0.9)/g(0.5)={ratio:.3e}"))
    elif entry.name == "loglog_power":
        deep, _ = max_modulus(entry.solutions[0], 1 - 1e-8, angular=128)
        shallow, _ = max_modulus(entry.solutions[0], 0.9, angular=128)
        checks.append(("solution unbounded", deep > shallow + (1.0 if entry.params["alpha"] >= 1 else 0.0), f"{shallow:.4f} -> {deep:.4f}"))

    return {
        "name": entry.name,
        "params": entry.params,
        "max_residual": worst,
        "checks": checks,
        "passed": all(ok for _, ok, _ in checks),
    }
