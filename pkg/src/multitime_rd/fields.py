"""Scalar fields over (tau^1..tau^m, x), derivative jets and tensor grids."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence

import numpy as np

from .dual import derivative, primal, seed
from .errors import BadRange, OutOfDomain, SingularPoint, SingularStencil, UnsupportedOrder

DEFAULT_FD_STEP = 1e-5
# Second and higher central differences lose ~eps/h^k to cancellation, so
# their step never drops below these floors.
FD_STEP_FLOOR = {1: 0.0, 2: 1e-4, 3: 1e-3, 4: 2e-3}


@dataclass(frozen=True)
class Point:
    tau: tuple[float, ...]
    x: float

    def __post_init__(self):
        object.__setattr__(self, "tau", tuple(float(t) for t in self.tau))
        object.__setattr__(self, "x", float(self.x))
        if not all(math.isfinite(v) for v in (*self.tau, self.x)):
            raise ValueError(f"non-finite coordinate in {self}")

    @property
    def m(self) -> int:
        return len(self.tau)


@dataclass
class JetValue:
    """Value, first time derivatives and spatial derivatives ``spatial[k-1] = d^k u/dx^k``.

    Entries are floats for a single point or arrays for a vectorised sweep.
    """

    value: object
    d_tau: tuple
    spatial: tuple

    @property
    def d_x(self):
        return self.spatial[0] if self.spatial else None

    @property
    def d_xx(self):
        return self.spatial[1] if len(self.spatial) > 1 else None

    def dx(self, k: int):
        return self.value if k == 0 else self.spatial[k - 1]


def _never(tau, x):
    return np.zeros(np.shape(primal(x)), dtype=bool)


@dataclass(frozen=True)
class ScalarField:
    """An evaluable u(tau, x).

    ``func(tau, x)`` receives a tuple of ``m`` time coordinates and a space
    coordinate; each may be a float, an array or a dual number, and the
    function must be written with the operators and functions of
    :mod:`multitime_rd.dual`. ``singular(tau, x)`` returns a boolean mask of
    points where the field is not to be trusted; ``domain(tau, x)`` returns
    the mask of points where it is defined at all.
    """

    func: Callable
    m: int
    singular: Callable | None = None
    domain: Callable | None = None
    max_order: int = 4
    name: str = "field"
    meta: dict = dc_field(default_factory=dict, compare=False)

    def __call__(self, tau, x):
        return self.func(tuple(tau), x)

    def singular_mask(self, tau, x) -> np.ndarray:
        if self.singular is None:
            return _never(tau, x)
        return np.asarray(self.singular(tuple(tau), x), dtype=bool)

    def outside_mask(self, tau, x) -> np.ndarray:
        if self.domain is None:
            return _never(tau, x)
        return ~np.asarray(self.domain(tuple(tau), x), dtype=bool)

    def excluded_mask(self, tau, x) -> np.ndarray:
        return self.singular_mask(tau, x) | self.outside_mask(tau, x)

    def check_point(self, p: Point) -> None:
        if bool(self.outside_mask(p.tau, p.x)):
            raise OutOfDomain(f"{self.name}: {p} lies outside the field's domain")
        if bool(self.singular_mask(p.tau, p.x)):
            raise SingularPoint(f"{self.name}: {p} is in the singular set")

    def _combine(self, other, op, name):
        if isinstance(other, ScalarField):
            if other.m != self.m:
                raise ValueError("fields have different numbers of times")
            a, b = self, other

            def func(tau, x):
                return op(a.func(tau, x), b.func(tau, x))

            def sing(tau, x):
                return a.singular_mask(tau, x) | b.singular_mask(tau, x)

            def dom(tau, x):
                return ~(a.outside_mask(tau, x) | b.outside_mask(tau, x))

            return ScalarField(func, self.m, sing, dom, min(a.max_order, b.max_order),
                               f"({a.name}{name}{b.name})")
        c = other
        return ScalarField(lambda tau, x: op(self.func(tau, x), c), self.m, self.singular,
                           self.domain, self.max_order, f"({self.name}{name}{c!r})")

    def __add__(self, other):
        return self._combine(other, lambda u, v: u + v, "+")

    def __mul__(self, other):
        return self._combine(other, lambda u, v: u * v, "*")

    __radd__ = __add__
    __rmul__ = __mul__


def constant_field(c: float, m: int) -> ScalarField:
    return ScalarField(lambda tau, x: c + 0.0 * x, m, name=f"const({c})")


# -- jets ------------------------------------------------------------------

def _broadcast(v, like):
    v = primal(v) if not isinstance(v, np.ndarray) else v
    return np.asarray(v, dtype=float) + np.zeros(np.shape(like))


def jet_arrays(field: ScalarField, tau: Sequence, x, order: int = 2) -> JetValue:
    """Exact jets by nested duals; no masking (callers filter first)."""
    tau = tuple(tau)
    x_arr = np.asarray(x, dtype=float)
    depth = max(order, 1)
    r = field.func(tau, seed(x_arr, depth))
    value = _broadcast(derivative(r, 0, depth), x_arr)
    spatial = tuple(_broadcast(derivative(r, k, depth), x_arr) for k in range(1, order + 1))
    d_tau = []
    for i in range(field.m):
        shifted = tau[:i] + (seed(np.asarray(tau[i], dtype=float), 1),) + tau[i + 1:]
        ri = field.func(shifted, x_arr)
        d_tau.append(_broadcast(derivative(ri, 1, 1), x_arr))
    return JetValue(value, tuple(d_tau), spatial)


def _scalarize(jet: JetValue) -> JetValue:
    return JetValue(float(jet.value), tuple(float(d) for d in jet.d_tau),
                    tuple(float(d) for d in jet.spatial))


def eval_jet(field: ScalarField, p: Point, order: int = 2) -> JetValue:
    """Value, every d/dtau^i and spatial derivatives up to ``order`` at ``p``."""
    if order > field.max_order:
        raise UnsupportedOrder(f"{field.name} supports spatial order <= {field.max_order}")
    if p.m != field.m:
        raise ValueError(f"point has {p.m} times, field expects {field.m}")
    field.check_point(p)
    return _scalarize(jet_arrays(field, p.tau, p.x, order))


def _fd_steps(h: float, order: int) -> dict[int, float]:
    return {k: max(h, FD_STEP_FLOOR[k]) for k in range(1, order + 1)}


def _spatial_fd(f, x, k, h):
    if k == 1:
        return (f(x + h) - f(x - h)) / (2 * h)
    if k == 2:
        return (f(x + h) - 2 * f(x) + f(x - h)) / (h * h)
    if k == 3:
        return (f(x + 2 * h) - 2 * f(x + h) + 2 * f(x - h) - f(x - 2 * h)) / (2 * h**3)
    if k == 4:
        return (f(x + 2 * h) - 4 * f(x + h) + 6 * f(x) - 4 * f(x - h) + f(x - 2 * h)) / h**4
    raise UnsupportedOrder(f"finite differences implemented up to order 4, got {k}")


def fd_jet_arrays(field: ScalarField, tau: Sequence, x, h: float = DEFAULT_FD_STEP,
                  order: int = 2) -> JetValue:
    """Central-difference jets, O(h^2) in every entry."""
    tau = tuple(np.asarray(t, dtype=float) for t in tau)
    x = np.asarray(x, dtype=float)
    steps = _fd_steps(h, order)

    def fx(xx):
        return _broadcast(field.func(tau, xx), xx)

    value = fx(x)
    spatial = tuple(_spatial_fd(fx, x, k, steps[k]) for k in range(1, order + 1))
    d_tau = []
    for i in range(field.m):
        def fi(ti, i=i):
            return _broadcast(field.func(tau[:i] + (ti,) + tau[i + 1:], x), x)
        d_tau.append((fi(tau[i] + h) - fi(tau[i] - h)) / (2 * h))
    return JetValue(value, tuple(d_tau), spatial)


def stencil_points(p: Point, h: float, order: int = 2):
    steps = _fd_steps(h, order)
    pts = [p]
    for i in range(p.m):
        for s in (-h, h):
            tau = list(p.tau)
            tau[i] += s
            pts.append(Point(tau, p.x))
    for k, hk in steps.items():
        reach = (1, 2) if k > 2 else (1,)
        for r in reach:
            for s in (-r * hk, r * hk):
                pts.append(Point(p.tau, p.x + s))
    return pts


def finite_diff_jet(field: ScalarField, p: Point, h: float = DEFAULT_FD_STEP,
                    order: int = 2) -> JetValue:
    """Central-difference jet at ``p``; every stencil point must be regular."""
    for q in stencil_points(p, h, order):
        if bool(field.excluded_mask(q.tau, q.x)):
            raise SingularStencil(f"{field.name}: stencil point {q} is masked")
    return _scalarize(fd_jet_arrays(field, p.tau, p.x, h, order))


# -- grids -----------------------------------------------------------------

@dataclass(frozen=True)
class Grid:
    """Uniform tensor grid; by convention the last axis is ``x``."""

    ranges: tuple[tuple[float, float], ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.ranges) != len(self.counts) or not self.ranges:
            raise BadRange("ranges and counts must be non-empty and of equal length")
        for (lo, hi), n in zip(self.ranges, self.counts):
            if not (lo < hi):
                raise BadRange(f"axis range [{lo}, {hi}] is empty")
            if int(n) < 2:
                raise BadRange(f"axis count {n} < 2")
        object.__setattr__(self, "ranges", tuple((float(lo), float(hi)) for lo, hi in self.ranges))
        object.__setattr__(self, "counts", tuple(int(n) for n in self.counts))

    @property
    def ndim(self) -> int:
        return len(self.counts)

    @property
    def size(self) -> int:
        return math.prod(self.counts)

    @property
    def axes(self) -> list[np.ndarray]:
        return [np.linspace(lo, hi, n) for (lo, hi), n in zip(self.ranges, self.counts)]

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple((hi - lo) / (n - 1) for (lo, hi), n in zip(self.ranges, self.counts))

    def mesh(self) -> list[np.ndarray]:
        """Flattened coordinate arrays, one per axis, in C order."""
        return [a.ravel() for a in np.meshgrid(*self.axes, indexing="ij")]

    def split(self) -> tuple[tuple[np.ndarray, ...], np.ndarray]:
        """Flattened mesh as (time coordinates, x)."""
        coords = self.mesh()
        return tuple(coords[:-1]), coords[-1]

    def points(self):
        for coords in itertools.product(*self.axes):
            yield Point(coords[:-1], coords[-1])

    def to_dict(self) -> dict:
        return {"ranges": [list(r) for r in self.ranges], "counts": list(self.counts)}


def make_grid(ranges, counts) -> Grid:
    return Grid(tuple(tuple(r) for r in ranges), tuple(counts))
