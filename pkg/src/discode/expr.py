"""Closed-form analytic functions on the unit disc as expression trees.

Nodes cover constants, the variable z, sums, products, quotients, negation,
real-exponent powers, exp, principal log, sqrt, sin and cos.  Every node is
immutable, evaluates deterministically on scalars or numpy arrays, and knows
its exact symbolic derivative.  Branch choices are always principal; the
built-in function families keep log/sqrt/power arguments inside the right
half-plane for z in the disc, so no cut is ever crossed.

Boundary singularities are declared, not discovered: each node carries a
tuple of declared singular points (unioned through the algebra), which the
series/continuation machinery uses to size trust radii and which the
integrators use to cluster angular nodes.
"""

from __future__ import annotations

import cmath
from typing import Iterable, Union

import numpy as np

Scalar = Union[complex, float, int]


class EvaluationError(ValueError):
    """Evaluation hit a pole or produced a non-finite value."""


def _merge_sing(*groups: tuple[complex, ...]) -> tuple[complex, ...]:
    pts: list[complex] = []
    for g in groups:
        for p in g:
            if not any(abs(p - q) < 1e-14 for q in pts):
                pts.append(p)
    pts.sort(key=lambda w: (w.real, w.imag))
    return tuple(pts)


class AnalyticExpr:
    """Base class; use the module helpers or operators to build trees."""

    __slots__ = ("sing",)

    def __init__(self, sing: tuple[complex, ...] = ()):
        self.sing = sing

    # -- algebra ----------------------------------------------------------
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, p):
        return pow_(self, p)

    # -- public API --------------------------------------------------------
    def eval(self, z):
        """Value at z; z may be a complex scalar or a numpy array."""
        if isinstance(z, np.ndarray):
            val = _eval_node(self, z, {})
            if not np.all(np.isfinite(val)):
                raise EvaluationError("non-finite value (pole or overflow) on the grid")
            return val
        val = _eval_node(self, complex(z), {})
        v = complex(val)
        if not (cmath.isfinite(v)):
            raise EvaluationError(f"non-finite value at z={z!r}")
        return v

    def __call__(self, z):
        return self.eval(z)

    def diff(self) -> "AnalyticExpr":
        """Exact symbolic derivative; closed over the node grammar."""
        return _diff_node(self)

    def with_singularities(self, points: Iterable[Scalar]) -> "AnalyticExpr":
        """Copy of this expression with extra declared boundary singularities."""
        extra = tuple(complex(p) for p in points)
        clone = self._clone()
        clone.sing = _merge_sing(self.sing, extra)
        return clone

    def nearest_singularity(self, center: Scalar) -> float | None:
        """Distance from center to the nearest declared singularity."""
        if not self.sing:
            return None
        c = complex(center)
        return min(abs(c - s) for s in self.sing)

    def _clone(self):  # default: nodes are stateless besides fields
        raise NotImplementedError


class Const(AnalyticExpr):
    __slots__ = ("value",)

    def __init__(self, value: Scalar, sing=()):
        super().__init__(sing)
        self.value = complex(value)

    def __repr__(self):
        return f"Const({self.value})"

    def _clone(self):
        return Const(self.value, self.sing)


class Var(AnalyticExpr):
    __slots__ = ()

    def __repr__(self):
        return "z"

    def _clone(self):
        return Var(self.sing)


class _Binary(AnalyticExpr):
    __slots__ = ("a", "b")

    def __init__(self, a, b, sing=()):
        super().__init__(_merge_sing(a.sing, b.sing, sing))
        self.a = a
        self.b = b

    def __repr__(self):
        return f"{type(self).__name__}({self.a!r}, {self.b!r})"

    def _clone(self):
        return type(self)(self.a, self.b, self.sing)


class Add(_Binary):
    __slots__ = ()


class Mul(_Binary):
    __slots__ = ()


class Div(_Binary):
    __slots__ = ()


class _Unary(AnalyticExpr):
    __slots__ = ("a",)

    def __init__(self, a, sing=()):
        super().__init__(_merge_sing(a.sing, sing))
        self.a = a

    def __repr__(self):
        return f"{type(self).__name__}({self.a!r})"

    def _clone(self):
        return type(self)(self.a, self.sing)


class Neg(_Unary):
    __slots__ = ()


class Exp(_Unary):
    __slots__ = ()


class Log(_Unary):
    __slots__ = ()


class Sqrt(_Unary):
    __slots__ = ()


class Sin(_Unary):
    __slots__ = ()


class Cos(_Unary):
    __slots__ = ()


class Pow(AnalyticExpr):
    """Real-exponent power of an expression, principal branch."""

    __slots__ = ("a", "p")

    def __init__(self, a, p: float, sing=()):
        super().__init__(_merge_sing(a.sing, sing))
        self.a = a
        self.p = float(p)

    def __repr__(self):
        return f"Pow({self.a!r}, {self.p})"

    def _clone(self):
        return Pow(self.a, self.p, self.sing)


# ---------------------------------------------------------------------------
# smart constructors (light folding keeps derivative trees small)
# ---------------------------------------------------------------------------

def as_expr(x) -> AnalyticExpr:
    if isinstance(x, AnalyticExpr):
        return x
    return Const(x)


def const(x: Scalar) -> Const:
    return Const(x)


def z() -> Var:
    return Var()


def _is_const(e, value=None) -> bool:
    if not isinstance(e, Const):
        return False
    return value is None or e.value == value


def add(a: AnalyticExpr, b: AnalyticExpr) -> AnalyticExpr:
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    if _is_const(a, 0):
        return b
    if _is_const(b, 0):
        return a
    return Add(a, b)


def neg(a: AnalyticExpr) -> AnalyticExpr:
    if _is_const(a):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.a
    return Neg(a)


def mul(a: AnalyticExpr, b: AnalyticExpr) -> AnalyticExpr:
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    if _is_const(a, 0) or _is_const(b, 0):
        return Const(0)
    if _is_const(a, 1):
        return b
    if _is_const(b, 1):
        return a
    return Mul(a, b)


def div(a: AnalyticExpr, b: AnalyticExpr) -> AnalyticExpr:
    if _is_const(b, 1):
        return a
    if _is_const(a, 0) and not _is_const(b, 0):
        return Const(0)
    if _is_const(a) and _is_const(b) and b.value != 0:
        return Const(a.value / b.value)
    return Div(a, b)


def pow_(a: AnalyticExpr, p: float) -> AnalyticExpr:
    p = float(p)
    if p == 0.0:
        return Const(1)
    if p == 1.0:
        return a
    if _is_const(a):
        return Const(a.value**p)
    return Pow(a, p)


def exp(a) -> AnalyticExpr:
    return Exp(as_expr(a))


def log(a) -> AnalyticExpr:
    return Log(as_expr(a))


def sqrt(a) -> AnalyticExpr:
    return Sqrt(as_expr(a))


def sin(a) -> AnalyticExpr:
    return Sin(as_expr(a))


def cos(a) -> AnalyticExpr:
    return Cos(as_expr(a))


def mobius(a: Scalar) -> tuple[AnalyticExpr, AnalyticExpr]:
    """Disc automorphism phi_a(z) = (a-z)/(1-conj(a) z) and its derivative.

    phi_a exchanges 0 and a and is an involution; the derivative is the
    closed form (|a|^2 - 1)/(1 - conj(a) z)^2.
    """
    a = complex(a)
    if abs(a) >= 1:
        raise ValueError("Moebius base point must lie in the open unit disc")
    denom = add(Const(1), neg(mul(Const(a.conjugate()), Var())))
    phi = div(add(Const(a), neg(Var())), denom)
    phi_prime = div(Const(abs(a) ** 2 - 1.0), pow_(denom, 2))
    return phi, phi_prime


# ---------------------------------------------------------------------------
# evaluation (memoized on node identity so shared subtrees are computed once)
# ---------------------------------------------------------------------------

def _eval_node(e: AnalyticExpr, zv, cache: dict):
    key = id(e)
    hit = cache.get(key)
    if hit is not None:
        return hit
    t = type(e)
    if t is Const:
        val = e.value if not isinstance(zv, np.ndarray) else np.full(zv.shape, e.value)
    elif t is Var:
        val = zv
    elif t is Add:
        val = _eval_node(e.a, zv, cache) + _eval_node(e.b, zv, cache)
    elif t is Mul:
        val = _eval_node(e.a, zv, cache) * _eval_node(e.b, zv, cache)
    elif t is Div:
        val = _eval_node(e.a, zv, cache) / _eval_node(e.b, zv, cache)
    elif t is Neg:
        val = -_eval_node(e.a, zv, cache)
    elif t is Pow:
        base = _eval_node(e.a, zv, cache)
        if isinstance(zv, np.ndarray):
            val = np.power(base, e.p)
        else:
            val = base**e.p
    elif t is Exp:
        val = np.exp(_eval_node(e.a, zv, cache))
    elif t is Log:
        val = np.log(_eval_node(e.a, zv, cache))
    elif t is Sqrt:
        val = np.sqrt(_eval_node(e.a, zv, cache))
    elif t is Sin:
        val = np.sin(_eval_node(e.a, zv, cache))
    elif t is Cos:
        val = np.cos(_eval_node(e.a, zv, cache))
    else:  # pragma: no cover
        raise TypeError(f"unknown node {t}")
    cache[key] = val
    return val


# ---------------------------------------------------------------------------
# symbolic differentiation
# ---------------------------------------------------------------------------

def _diff_node(e: AnalyticExpr) -> AnalyticExpr:
    t = type(e)
    if t is Const:
        return Const(0)
    if t is Var:
        return Const(1)
    if t is Add:
        return add(_diff_node(e.a), _diff_node(e.b))
    if t is Mul:
        return add(mul(_diff_node(e.a), e.b), mul(e.a, _diff_node(e.b)))
    if t is Div:
        num = add(mul(_diff_node(e.a), e.b), neg(mul(e.a, _diff_node(e.b))))
        return div(num, pow_(e.b, 2))
    if t is Neg:
        return neg(_diff_node(e.a))
    if t is Pow:
        return mul(mul(Const(e.p), pow_(e.a, e.p - 1)), _diff_node(e.a))
    if t is Exp:
        return mul(_diff_node(e.a), e)
    if t is Log:
        return div(_diff_node(e.a), e.a)
    if t is Sqrt:
        return div(_diff_node(e.a), mul(Const(2), e))
    if t is Sin:
        return mul(_diff_node(e.a), Cos(e.a))
    if t is Cos:
        return neg(mul(_diff_node(e.a), Sin(e.a)))
    raise TypeError(f"unknown node {t}")  # pragma: no cover


# ---------------------------------------------------------------------------
# expression mini-language
#
#   expr   := term (('+'|'-') term)*
#   term   := factor (('*'|'/') factor)*
#   factor := '-' factor | power
#   power  := atom ('^' real)?
#   atom   := number ['i'] | 'i' | 'z' | fn '(' expr ')' | '(' expr ')'
#           | 'gallery:' name '(' [k=v,...] ')' '.' (A|f1|f2)
# ---------------------------------------------------------------------------

class ParseError(ValueError):
    pass


_FUNCS = {"exp": exp, "log": log, "sqrt": sqrt, "sin": sin, "cos": cos}


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def peek(self) -> str:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch: str):
        if self.peek() != ch:
            raise ParseError(f"expected {ch!r} at position {self.pos} in {self.text!r}")
        self.pos += 1

    def number(self) -> float:
        self.peek()
        start = self.pos
        seen_e = False
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c.isdigit() or c == ".":
                self.pos += 1
            elif c in "eE" and self.pos + 1 < len(self.text) and (
                self.text[self.pos + 1].isdigit() or self.text[self.pos + 1] in "+-"
            ):
                seen_e = True
                self.pos += 2
            elif c in "+-" and seen_e and self.text[self.pos - 1] in "eE":
                self.pos += 1
            else:
                break
        if self.pos == start:
            raise ParseError(f"expected a number at position {self.pos} in {self.text!r}")
        return float(self.text[start : self.pos])

    def ident(self) -> str:
        self.peek()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] == "_"):
            self.pos += 1
        return self.text[start : self.pos]


def parse(text: str) -> AnalyticExpr:
    """Parse the expression mini-language into an expression tree."""
    lx = _Lexer(text)
    e = _parse_sum(lx)
    if lx.peek():
        raise ParseError(f"trailing input at position {lx.pos} in {text!r}")
    return e


def _parse_sum(lx: _Lexer) -> AnalyticExpr:
    e = _parse_term(lx)
    while lx.peek() in ("+", "-"):
        op = lx.peek()
        lx.pos += 1
        rhs = _parse_term(lx)
        e = add(e, rhs) if op == "+" else add(e, neg(rhs))
    return e


def _parse_term(lx: _Lexer) -> AnalyticExpr:
    e = _parse_factor(lx)
    while lx.peek() in ("*", "/"):
        op = lx.peek()
        lx.pos += 1
        rhs = _parse_factor(lx)
        e = mul(e, rhs) if op == "*" else div(e, rhs)
    return e


def _parse_factor(lx: _Lexer) -> AnalyticExpr:
    if lx.peek() == "-":
        lx.pos += 1
        return neg(_parse_factor(lx))
    return _parse_power(lx)


def _parse_power(lx: _Lexer) -> AnalyticExpr:
    base = _parse_atom(lx)
    if lx.peek() == "^":
        lx.pos += 1
        sign = 1.0
        if lx.peek() == "-":
            lx.pos += 1
            sign = -1.0
            p = lx.number()
        elif lx.peek() == "(":
            lx.take("(")
            if lx.peek() == "-":
                lx.pos += 1
                sign = -1.0
            p = lx.number()
            lx.take(")")
        else:
            p = lx.number()
        return pow_(base, sign * p)
    return base


def _parse_atom(lx: _Lexer) -> AnalyticExpr:
    c = lx.peek()
    if c == "(":
        lx.take("(")
        e = _parse_sum(lx)
        lx.take(")")
        return e
    if c.isdigit() or c == ".":
        v = lx.number()
        if lx.pos < len(lx.text) and lx.text[lx.pos] == "i":
            lx.pos += 1
            return Const(v * 1j)
        return Const(v)
    if c.isalpha():
        name = lx.ident()
        if name == "z":
            return Var()
        if name == "i":
            return Const(1j)
        if name == "e":
            return Const(np.e)
        if name == "pi":
            return Const(np.pi)
        if name in _FUNCS:
            lx.take("(")
            arg = _parse_sum(lx)
            lx.take(")")
            return _FUNCS[name](arg)
        if name == "gallery":
            lx.take(":")
            return _parse_gallery_ref(lx)
        raise ParseError(f"unknown identifier {name!r}")
    raise ParseError(f"unexpected character {c!r} at position {lx.pos}")


def _parse_gallery_ref(lx: _Lexer) -> AnalyticExpr:
    from . import gallery  # local import: gallery builds on this module

    name = lx.ident()
    params: dict[str, float] = {}
    lx.take("(")
    if lx.peek() != ")":
        while True:
            key = lx.ident()
            lx.take("=")
            sign = 1.0
            if lx.peek() == "-":
                lx.pos += 1
                sign = -1.0
            params[key] = sign * lx.number()
            if lx.peek() == ",":
                lx.pos += 1
                continue
            break
    lx.take(")")
    lx.take(".")
    attr = lx.ident()
    entry = gallery.get(name, **params)
    if attr == "A":
        return entry.A
    if attr == "f1":
        return entry.solutions[0]
    if attr == "f2":
        if len(entry.solutions) < 2:
            raise ParseError(f"gallery entry {name!r} has no second solution")
        return entry.solutions[1]
    raise ParseError(f"unknown gallery attribute {attr!r} (use A, f1 or f2)")
