"""Nested first-order dual numbers.

A :class:`Dual` holds ``re + eps*ε`` with ``ε² = 0``. Both parts may be
floats, numpy arrays or further :class:`Dual` objects, so nesting ``n``
levels deep and seeding the same variable at every level yields all
derivatives up to order ``n`` in one evaluation. Array parts make whole-grid
evaluation a single vectorised pass.

The elementary functions below accept plain numbers, arrays and duals alike;
closed-form fields are written against them instead of ``numpy``.
"""

from __future__ import annotations

import numpy as np


class Dual:
    __slots__ = ("re", "eps")
    __array_priority__ = 1000  # keep ndarray.__mul__ from broadcasting over us

    def __init__(self, re, eps=0.0):
        self.re = re
        self.eps = eps

    def __repr__(self):
        return f"Dual({self.re!r}, {self.eps!r})"

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.re + other.re, self.eps + other.eps)
        return Dual(self.re + other, self.eps)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.re - other.re, self.eps - other.eps)
        return Dual(self.re - other, self.eps)

    def __rsub__(self, other):
        return Dual(other - self.re, -self.eps)

    def __neg__(self):
        return Dual(-self.re, -self.eps)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.re * other.re, self.re * other.eps + self.eps * other.re)
        return Dual(self.re * other, self.eps * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            q = self.re / other.re
            return Dual(q, (self.eps - q * other.eps) / other.re)
        return Dual(self.re / other, self.eps / other)

    def __rtruediv__(self, other):
        q = other / self.re
        return Dual(q, -q * self.eps / self.re)

    def __pow__(self, p):
        if isinstance(p, Dual):
            return exp(p * log(self))
        if p == 0:
            return Dual(self.re**0, 0.0 * self.eps)
        if p == 1:
            return self
        if p == 2:
            return self * self
        return Dual(self.re**p, p * self.re ** (p - 1) * self.eps)

    def __rpow__(self, base):
        return exp(self * np.log(base))

    def __abs__(self):
        s = np.sign(primal(self.re))
        return self * s


def primal(z):
    """Strip every dual level and return the underlying number or array."""
    while isinstance(z, Dual):
        z = z.re
    return z


def seed(x, depth: int):
    """Variable ``x`` seeded for derivatives up to ``depth``."""
    if depth == 0:
        return x
    return Dual(seed(x, depth - 1), 1.0)


def derivative(z, order: int, depth: int):
    """Extract the ``order``-th derivative from a result seeded at ``depth``.

    Parts that collapsed to plain numbers (the result did not depend on the
    deeper levels) read as zero.
    """
    path = ["eps"] * order + ["re"] * (depth - order)
    for attr in path:
        if isinstance(z, Dual):
            z = getattr(z, attr)
        elif attr == "eps":
            return 0.0 * primal(z)
    return z


def _lift(f, df):
    def g(z):
        if isinstance(z, Dual):
            return Dual(g(z.re), z.eps * df(z.re))
        return f(z)

    g.__name__ = f.__name__
    return g


# Each derivative is written in terms of the lifted functions so it stays
# differentiable at deeper nesting levels.
def _dexp(z):
    return exp(z)


def _dtanh(z):
    t = tanh(z)
    return 1.0 - t * t


def _dcoth(z):
    c = coth(z)
    return 1.0 - c * c


exp = _lift(np.exp, _dexp)
log = _lift(np.log, lambda z: 1.0 / z)
sqrt = _lift(np.sqrt, lambda z: 0.5 / sqrt(z))
sin = _lift(np.sin, lambda z: cos(z))
cos = _lift(np.cos, lambda z: -sin(z))
tan = _lift(np.tan, lambda z: 1.0 + tan(z) * tan(z))
sinh = _lift(np.sinh, lambda z: cosh(z))
cosh = _lift(np.cosh, lambda z: sinh(z))
tanh = _lift(np.tanh, _dtanh)
coth = _lift(lambda z: 1.0 / np.tanh(z), _dcoth)
arctan = _lift(np.arctan, lambda z: 1.0 / (1.0 + z * z))

# name -> function table used when compiling text expressions
FUNCTIONS = {
    "exp": exp,
    "log": log,
    "sqrt": sqrt,
    "sin": sin,
    "cos": cos,
    "tan": tan,
    "sinh": sinh,
    "cosh": cosh,
    "tanh": tanh,
    "coth": coth,
    "atan": arctan,
    "pi": np.pi,
    "E": np.e,
}
