"""Coordinate and scaling transformations between forms of the equation.

A :class:`Transformation` maps *source* coordinates ``(t, x)`` (where the
original equation lives) to *target* coordinates ``(tau, x')`` (where a
simpler equation lives), optionally together with an amplitude factor
``u_target = amplitude * u_source``. :func:`pullback_solution` turns a
solution in target coordinates into one in source coordinates.

All forward maps accept floats, arrays and dual numbers, so pulled-back
fields have exact derivative jets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from . import dual
from .dual import Dual, primal
from .errors import BadParameter, CoefficientVanishes, DegenerateTransform, OutOfDomain
from .fields import Grid, ScalarField
from .quadrature import adaptive_simpson
from .verify import JET_TOL, Report, summarize

QUAD_TOL = 1e-10
TRACE_STEP = 1e-3
DEGENERACY_THRESHOLD = 1e-10
VANISHING_THRESHOLD = 1e-12


@dataclass(frozen=True)
class Transformation:
    kind: str
    m: int
    forward: Callable
    inverse: Callable
    amplitude: float = 1.0
    domain: tuple | None = None  # per-time (lo, hi) box on source coordinates
    params: dict = dc_field(default_factory=dict, compare=False)

    def __call__(self, tau, x):
        return self.forward(tuple(tau), x)

    def contains(self, tau, x) -> np.ndarray:
        inside = np.ones(np.shape(primal(x)), dtype=bool)
        if self.domain is None:
            return inside
        for t, (lo, hi) in zip(tau, self.domain):
            t = np.asarray(primal(t))
            inside = inside & (t >= lo) & (t <= hi)
        return inside

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "m": self.m,
            "params": self.params,
            "amplitude": self.amplitude,
            "domain": [list(b) for b in self.domain] if self.domain is not None else None,
        }


# -- per-variable time rescaling ------------------------------------------

class Antiderivative:
    """t -> integral of 1/h from ``lo`` to t, by adaptive Simpson.

    Dual arguments get the exact derivative 1/h(t); array arguments are
    integrated once per distinct value.
    """

    def __init__(self, h: Callable, lo: float, tol: float = QUAD_TOL):
        self.h = h
        self.lo = float(lo)
        self.tol = tol
        self._cache: dict[float, float] = {}

    def integrand(self, t):
        return 1.0 / self.h(t)

    def scalar(self, t: float) -> float:
        t = float(t)
        if t not in self._cache:
            self._cache[t] = adaptive_simpson(lambda s: float(self.integrand(s)), self.lo, t,
                                              self.tol)
        return self._cache[t]

    def __call__(self, t):
        if isinstance(t, Dual):
            return Dual(self(t.re), t.eps * self.integrand(t.re))
        arr = np.asarray(t, dtype=float)
        if arr.ndim == 0:
            return self.scalar(arr)
        uniq, inv = np.unique(arr, return_inverse=True)
        vals = np.array([self.scalar(u) for u in uniq])
        return vals[inv].reshape(arr.shape)


def fixed_sign_subdomains(h: Callable, lo: float, hi: float, samples: int = 2001):
    """Maximal sample intervals of [lo, hi] on which ``h`` keeps one sign.

    Samples where |h| < 1e-12 separate the intervals.
    """
    ts = np.linspace(lo, hi, samples)
    vals = np.array([float(h(t)) for t in ts])
    sign = np.where(np.abs(vals) < VANISHING_THRESHOLD, 0, np.sign(vals))
    out = []
    start = None
    for i, s in enumerate(sign):
        if s != 0 and start is not None and s == sign[start]:
            continue
        if start is not None and i - 1 > start:
            out.append((float(ts[start]), float(ts[i - 1])))
        start = i if s != 0 else None
    if start is not None and start < samples - 1:
        out.append((float(ts[start]), float(ts[-1])))
    return out


def _check_coefficient(h: Callable, lo: float, hi: float, label: str) -> float:
    ts = np.linspace(lo, hi, 2001)
    vals = np.array([float(h(t)) for t in ts])
    if not np.all(np.isfinite(vals)):
        raise CoefficientVanishes(f"{label} is not finite on [{lo}, {hi}]")
    if np.min(np.abs(vals)) < VANISHING_THRESHOLD or np.ptp(np.sign(vals)) != 0:
        parts = fixed_sign_subdomains(h, lo, hi)
        raise CoefficientVanishes(
            f"{label} vanishes or changes sign on [{lo}, {hi}]; fixed-sign sub-domains: {parts}"
        )
    return float(np.sign(vals[0]))


def time_rescale(h: Sequence[Callable], domain: Sequence[Sequence[float]]) -> Transformation:
    """tau^i = integral of dt^i / h^i(t^i), anchored to 0 at the lower edge of the domain."""
    h = list(h)
    domain = tuple((float(lo), float(hi)) for lo, hi in domain)
    if len(h) != len(domain):
        raise BadParameter("need one coefficient and one interval per time")
    for i, ((lo, hi), hi_fn) in enumerate(zip(domain, h)):
        if not lo < hi:
            raise BadParameter(f"empty interval for t{i + 1}")
        _check_coefficient(hi_fn, lo, hi, f"h^{i + 1}")
    F = [Antiderivative(hi_fn, lo) for hi_fn, (lo, _) in zip(h, domain)]

    def forward(tau, x):
        return tuple(Fi(t) for Fi, t in zip(F, tau)), x

    def _invert_one(Fi, lo, hi, target):
        a, b = Fi.scalar(lo), Fi.scalar(hi)
        if not (min(a, b) - 1e-12 <= target <= max(a, b) + 1e-12):
            raise OutOfDomain(f"tau={target} is outside the image [{min(a, b)}, {max(a, b)}]")
        if target == a:
            return lo
        if target == b:
            return hi
        return brentq(lambda s: Fi.scalar(s) - target, lo, hi, xtol=1e-15, rtol=1e-15)

    def inverse(tau, x):
        out = []
        for Fi, (lo, hi), t in zip(F, domain, tau):
            arr = np.asarray(t, dtype=float)
            flat = np.array([_invert_one(Fi, lo, hi, v) for v in arr.ravel()])
            out.append(flat.reshape(arr.shape) if arr.ndim else float(flat[0]))
        return tuple(out), x

    params = {"h": [getattr(fn, "source", repr(fn)) for fn in h]}
    return Transformation("time_rescale", len(h), forward, inverse, 1.0, domain, params)


def log_transform(m: int, domain: Sequence[Sequence[float]] | None = None) -> Transformation:
    """tau^i = ln t^i on t^i > 0."""
    if domain is None:
        domain = tuple((1e-300, math.inf) for _ in range(m))
    domain = tuple((float(lo), float(hi)) for lo, hi in domain)
    if any(lo <= 0 for lo, _ in domain):
        raise BadParameter("log transform needs t > 0")

    def forward(tau, x):
        return tuple(dual.log(t) for t in tau), x

    def inverse(tau, x):
        return tuple(dual.exp(t) for t in tau), x

    return Transformation("log", m, forward, inverse, 1.0, domain, {})


def scaling_normalize(mu: float, a: float, b: float, m: int = 1) -> Transformation:
    """u* = (a/b) u, x* = |b|/sqrt(mu a) x, tau*^i = (b^2/a) tau^i.

    Takes mu u_xx - a u^3 + b u^2 to u_xx - u^3 + u^2.
    """
    if not mu > 0:
        raise BadParameter("scaling needs mu > 0")
    if not a > 0:
        raise BadParameter("scaling needs a > 0")
    if b == 0:
        raise BadParameter("scaling needs b != 0")
    ct = b * b / a
    cx = abs(b) / math.sqrt(mu * a)

    def forward(tau, x):
        return tuple(ct * t for t in tau), cx * x

    def inverse(tau, x):
        return tuple(t / ct for t in tau), x / cx

    return Transformation("scaling", m, forward, inverse, a / b, None,
                          {"mu": mu, "a": a, "b": b, "time_factor": ct, "space_factor": cx})


def shift_to_wave_frame(k: float, m: int) -> Transformation:
    """(tau, x) -> (tau, y) with y = x + k tau^m."""
    if m < 1:
        raise BadParameter("m must be >= 1")

    def forward(tau, x):
        return tuple(tau), x + k * tau[m - 1]

    def inverse(tau, y):
        return tuple(tau), y - k * tau[m - 1]

    return Transformation("shift_y", m, forward, inverse, 1.0, None, {"k": k})


def map_transform(maps: Sequence[Callable], domain=None, inverse=None,
                  kind: str = "custom") -> Transformation:
    """Wrap explicit maps ``t -> H^j(t)`` (time coordinates only)."""
    maps = list(maps)

    def forward(tau, x):
        return tuple(H(tuple(tau)) for H in maps), x

    def no_inverse(tau, x):
        raise NotImplementedError("no inverse supplied for this map")

    return Transformation(kind, len(maps), forward, inverse or no_inverse, 1.0,
                          tuple(domain) if domain is not None else None, {})


# -- two-time characteristic construction --------------------------------

def trace_characteristic(h1: Callable, h2: Callable, t1, t2, anchor: float,
                         step: float = TRACE_STEP):
    """Follow dt^2/dt^1 = h^2/h^1 from (t1, t2) back to the line t^1 = anchor.

    Returns ``(t2 at the anchor, integral of dt^1/h^1 from the anchor to t1)``
    along the characteristic. Classical RK4 with a fixed number of steps of
    size <= ``step``; dual-valued starting points propagate derivatives
    through the discrete map.
    """
    span = np.max(np.abs(np.asarray(primal(t1), dtype=float) - anchor), initial=0.0)
    n = max(1, int(math.ceil(span / step)))
    ds = (anchor - t1) / n

    def rhs(s, T):
        a = h1((s, T))
        return h2((s, T)) / a, 1.0 / a

    s, T, G = t1, t2, 0.0
    for _ in range(n):
        k1T, k1G = rhs(s, T)
        k2T, k2G = rhs(s + 0.5 * ds, T + 0.5 * ds * k1T)
        k3T, k3G = rhs(s + 0.5 * ds, T + 0.5 * ds * k2T)
        k4T, k4G = rhs(s + ds, T + ds * k3T)
        T = T + ds / 6.0 * (k1T + 2.0 * k2T + 2.0 * k3T + k4T)
        G = G + ds / 6.0 * (k1G + 2.0 * k2G + 2.0 * k3G + k4G)
        s = s + ds
    return T, -G


@dataclass(frozen=True)
class FirstIntegral:
    """I(t1, t2), constant along dt^1/h^1 = dt^2/h^2.

    Either a closed-form dual-aware callable of the tuple ``(t1, t2)``, or
    traced numerically: I is the t^2 value where the characteristic through
    the point meets the transversal line t^1 = ``anchor``.
    """

    func: Callable | None = None
    h1: Callable | None = None
    h2: Callable | None = None
    anchor: float | None = None
    step: float = TRACE_STEP

    @classmethod
    def closed(cls, func: Callable) -> "FirstIntegral":
        return cls(func=func)

    @classmethod
    def traced(cls, h1: Callable, h2: Callable, anchor: float,
               step: float = TRACE_STEP) -> "FirstIntegral":
        return cls(None, h1, h2, float(anchor), step)

    @property
    def is_closed(self) -> bool:
        return self.func is not None

    def __call__(self, t):
        t1, t2 = t
        if self.func is not None:
            return self.func((t1, t2))
        return trace_characteristic(self.h1, self.h2, t1, t2, self.anchor, self.step)[0]


def _seeded_partials(fn: Callable, t1, t2):
    """(value, d/dt1, d/dt2) of a tuple-valued map via two dual sweeps."""
    r1 = fn(Dual(t1, 1.0), t2)
    r2 = fn(t1, Dual(t2, 1.0))
    vals = tuple(primal(r) for r in r1)
    d1 = tuple(r.eps if isinstance(r, Dual) else 0.0 * primal(r) for r in r1)
    d2 = tuple(r.eps if isinstance(r, Dual) else 0.0 * primal(r) for r in r2)
    return vals, d1, d2


def characteristic_transform(h1: Callable, h2: Callable, first_integral: FirstIntegral,
                             w1: Callable, w2: Callable, domain,
                             integral: Callable | None = None, step: float = TRACE_STEP,
                             check_samples: int = 5) -> Transformation:
    """H^j = integral of dt^1/h^1 + W_j(I), j = 1, 2.

    The integral runs along the characteristic from the lower t^1 edge of
    ``domain``; pass ``integral`` (a callable of ``(t1, t2)``) when it is known
    in closed form. Raises :class:`DegenerateTransform` if the Jacobian of
    (H^1, H^2) nearly vanishes at any of ``check_samples``^2 points.
    """
    domain = tuple((float(lo), float(hi)) for lo, hi in domain)
    if len(domain) != 2:
        raise BadParameter("the characteristic construction is for two times")
    (lo1, hi1), (lo2, hi2) = domain
    anchor = lo1

    g1, g2 = np.meshgrid(np.linspace(lo1, hi1, 21), np.linspace(lo2, hi2, 21), indexing="ij")
    with np.errstate(all="ignore"):
        hv = np.asarray(h1((g1.ravel(), g2.ravel())), dtype=float) + 0.0 * g1.ravel()
    if not np.all(np.isfinite(hv)) or np.min(np.abs(hv)) < VANISHING_THRESHOLD \
            or np.ptp(np.sign(hv)) != 0:
        raise CoefficientVanishes("h^1 vanishes or changes sign on the domain")

    def base(t1, t2):
        if integral is not None:
            return integral((t1, t2))
        return trace_characteristic(h1, h2, t1, t2, anchor, step)[1]

    def H(t1, t2):
        g = base(t1, t2)
        inv = first_integral((t1, t2))
        return g + w1(inv), g + w2(inv)

    def forward(tau, x):
        t1, t2 = tau
        return H(t1, t2), x

    s1, s2 = np.meshgrid(np.linspace(lo1, hi1, check_samples),
                         np.linspace(lo2, hi2, check_samples), indexing="ij")
    _, d1, d2 = _seeded_partials(H, s1.ravel(), s2.ravel())
    det = np.asarray(d1[0] * d2[1] - d1[1] * d2[0], dtype=float)
    if np.min(np.abs(det)) < DEGENERACY_THRESHOLD:
        raise DegenerateTransform(
            f"Jacobian determinant of (H1, H2) drops to {np.min(np.abs(det)):.3e}; "
            "W1 and W2 must be independent functions of the first integral"
        )

    # coarse table for Newton starting guesses
    c1, c2 = np.meshgrid(np.linspace(lo1, hi1, 41), np.linspace(lo2, hi2, 41), indexing="ij")
    c1, c2 = c1.ravel(), c2.ravel()
    table = np.stack([np.asarray(v, dtype=float) + 0 * c1 for v in H(c1, c2)], axis=1)

    def inverse(tau, x, tol=1e-13, max_iter=60):
        T1 = np.atleast_1d(np.asarray(tau[0], dtype=float))
        T2 = np.atleast_1d(np.asarray(tau[1], dtype=float))
        target = np.stack([T1.ravel(), T2.ravel()], axis=1)
        dist = ((target[:, None, :] - table[None, :, :]) ** 2).sum(axis=2)
        idx = np.argmin(dist, axis=1)
        a, b = c1[idx].copy(), c2[idx].copy()
        for _ in range(max_iter):
            vals, d1, d2 = _seeded_partials(H, a, b)
            r1 = np.asarray(vals[0]) - target[:, 0]
            r2 = np.asarray(vals[1]) - target[:, 1]
            J11, J12, J21, J22 = (np.asarray(v, dtype=float) + 0 * a
                                  for v in (d1[0], d2[0], d1[1], d2[1]))
            det = J11 * J22 - J12 * J21
            da = (J22 * r1 - J12 * r2) / det
            db = (-J21 * r1 + J11 * r2) / det
            a, b = a - da, b - db
            if max(np.max(np.abs(da)), np.max(np.abs(db))) < tol:
                break
        shape = np.shape(tau[0])
        if shape == ():
            return (float(a[0]), float(b[0])), x
        return (a.reshape(shape), b.reshape(shape)), x

    params = {"anchor": anchor, "integral": "closed" if integral is not None else "traced",
              "first_integral": "closed" if first_integral.is_closed else "traced"}
    return Transformation("characteristic", 2, forward, inverse, 1.0, domain, params)


# -- verification helpers --------------------------------------------------

def _time_coords(grid: Grid, m: int):
    coords = grid.mesh()
    if grid.ndim < m:
        raise ValueError(f"grid has {grid.ndim} axes, need at least {m} time axes")
    return tuple(coords[:m])


def verify_transform_system(h1: Callable, h2: Callable, T: Transformation, grid: Grid,
                            tol: float = JET_TOL) -> Report:
    """max over the grid of |h^1 dH^j/dt^1 + h^2 dH^j/dt^2 - 1|, j = 1, 2."""
    t1, t2 = _time_coords(grid, 2)
    x = np.zeros_like(t1)

    def H(a, b):
        return T.forward((a, b), x)[0]

    with np.errstate(all="ignore"):
        _, d1, d2 = _seeded_partials(H, t1, t2)
        c1 = np.asarray(h1((t1, t2)), dtype=float) + 0 * t1
        c2 = np.asarray(h2((t1, t2)), dtype=float) + 0 * t1
    rows = [c1 * d1[j] + c2 * d2[j] - 1.0 for j in range(2)]
    worst = np.maximum(np.abs(rows[0]), np.abs(rows[1]))
    return summarize(worst, (t1, t2), 0, tol, grid.to_dict(), f"{T.kind} system")


def check_first_integral(h1: Callable, h2: Callable, I: FirstIntegral, grid: Grid,
                         tol: float = JET_TOL) -> Report:
    """max over the grid of |h^1 dI/dt^1 + h^2 dI/dt^2|."""
    t1, t2 = _time_coords(grid, 2)
    with np.errstate(all="ignore"):
        _, d1, d2 = _seeded_partials(lambda a, b: (I((a, b)),), t1, t2)
        c1 = np.asarray(h1((t1, t2)), dtype=float) + 0 * t1
        c2 = np.asarray(h2((t1, t2)), dtype=float) + 0 * t1
    return summarize(c1 * d1[0] + c2 * d2[0], (t1, t2), 0, tol, grid.to_dict(), "first integral")


def pullback_solution(T: Transformation, field: ScalarField) -> ScalarField:
    """Source-coordinate field p -> field(forward(p)) / amplitude."""
    if field.m != T.m:
        raise BadParameter(f"field has {field.m} times, transformation has {T.m}")
    amp = T.amplitude

    def func(tau, x):
        if not isinstance(x, (Dual, np.ndarray)) and not any(
                isinstance(t, (Dual, np.ndarray)) for t in tau):
            if not bool(T.contains(tau, x)):
                raise OutOfDomain(f"{tuple(tau)} is outside the {T.kind} domain")
        tt, xx = T.forward(tau, x)
        return field.func(tt, xx) * (1.0 / amp)

    def singular(tau, x):
        inside = T.contains(tau, x)
        with np.errstate(all="ignore"):
            tt, xx = T.forward(tuple(np.where(inside, t, _safe(T, i)) for i, t in enumerate(tau)), x)
        return field.singular_mask(tt, xx) & inside

    def domain(tau, x):
        inside = T.contains(tau, x)
        with np.errstate(all="ignore"):
            tt, xx = T.forward(tuple(np.where(inside, t, _safe(T, i)) for i, t in enumerate(tau)), x)
        return inside & ~field.outside_mask(tt, xx)

    return ScalarField(func, T.m, singular, domain, field.max_order,
                       f"pullback[{T.kind}]({field.name})", dict(field.meta))


def _safe(T: Transformation, i: int) -> float:
    """A coordinate value inside the domain used to fill masked slots."""
    if T.domain is None:
        return 0.0
    lo, hi = T.domain[i]
    if math.isinf(hi):
        return lo + 1.0 if lo > 0 else 1.0
    return 0.5 * (lo + hi)
