"""Differential-constraint solutions of the multitime equation.

Any field that depends on the times only through ``omega_j = tau^m - tau^j``
is annihilated by ``sum_i d/dtau^i``. Feeding such a field into the
canonical equation leaves an ordinary equation in the space variable, and
shifting it by ``k tau^m`` or by an arbitrary smooth ``P(omega)`` carries
solutions across the whole multitime family. This module builds those
fields and the closed-form Huxley catalog.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence

import numpy as np

from . import dual
from .dual import primal
from .errors import BadParameter, CertificationError, ConfigError
from .fields import Grid, Point, ScalarField, jet_arrays, make_grid
from .pde import PDESpec, canonical_huxley
from .verify import JET_TOL, Report, residual_report

SQRT2 = math.sqrt(2.0)
# Residual rounding near a pole of the rational/exponential families grows
# like eps * 2 sqrt2 / d^3; d >= 2e-2 keeps it below 1e-10.
POLE_MASK = 2e-2
COTH_MASK = 1e-1


def omega_coords(tau: Sequence) -> tuple:
    """omega_j = tau^m - tau^j for j = 1..m-1 (empty for one time)."""
    tau = tuple(tau)
    last = tau[-1]
    return tuple(last - t for t in tau[:-1])


def tau_from_omega(omega: Sequence, s):
    """Invert omega_j = tau^m - tau^j for tau given tau^m = s."""
    return tuple(s - w for w in omega) + (s,)


def constraint_residual_arrays(field: ScalarField, tau, x):
    jet = jet_arrays(field, tau, x, order=0)
    return sum(jet.d_tau)


def constraint_residual(field: ScalarField, p: Point) -> float:
    """sum_i du/dtau^i at ``p``."""
    field.check_point(p)
    return float(constraint_residual_arrays(field, p.tau, p.x))


# -- arbitrary functions of omega ------------------------------------------

ARBITRARY_KINDS = ("constant", "linear", "sine", "expquad", "polynomial", "sum", "product")


@dataclass(frozen=True)
class ArbitraryFunction:
    """A smooth P(omega_1, ..., omega_{m-1}) from a small closed family.

    ``constant``  c
    ``linear``    offset + sum_j coeffs[j] omega_j
    ``sine``      amplitude * sin(sum_j frequencies[j] omega_j + phase)
    ``expquad``   amplitude * exp(sum_j coeffs[j] omega_j^2)
    ``polynomial`` sum_j sum_p coeffs[j][p] omega_j^p
    ``sum`` / ``product`` of ``parts``
    """

    kind: str
    params: dict = dc_field(default_factory=dict)
    parts: tuple = ()

    def __post_init__(self):
        if self.kind not in ARBITRARY_KINDS:
            raise BadParameter(f"unknown arbitrary-function kind {self.kind!r}")
        if self.kind in ("sum", "product") and not self.parts:
            raise BadParameter(f"{self.kind} needs at least one part")

    @classmethod
    def constant(cls, c: float):
        return cls("constant", {"c": float(c)})

    @classmethod
    def linear(cls, coeffs: Sequence[float], offset: float = 0.0):
        return cls("linear", {"coeffs": [float(c) for c in coeffs], "offset": float(offset)})

    @classmethod
    def sine(cls, amplitude: float, frequencies: Sequence[float], phase: float = 0.0):
        return cls("sine", {"amplitude": float(amplitude),
                            "frequencies": [float(f) for f in frequencies], "phase": float(phase)})

    @classmethod
    def expquad(cls, coeffs: Sequence[float], amplitude: float = 1.0):
        return cls("expquad", {"coeffs": [float(c) for c in coeffs], "amplitude": float(amplitude)})

    @classmethod
    def polynomial(cls, coeffs: Sequence[Sequence[float]]):
        return cls("polynomial", {"coeffs": [[float(c) for c in row] for row in coeffs]})

    def _check_arity(self, key, omega):
        got = len(self.params.get(key, []))
        if got > len(omega):
            raise BadParameter(f"{self.kind}: {got} coefficients for {len(omega)} omega variables")

    def __call__(self, omega: Sequence):
        omega = tuple(omega)
        p = self.params
        if self.kind == "constant":
            return p["c"]
        if self.kind == "linear":
            self._check_arity("coeffs", omega)
            return p.get("offset", 0.0) + sum(c * w for c, w in zip(p["coeffs"], omega))
        if self.kind == "sine":
            self._check_arity("frequencies", omega)
            arg = p.get("phase", 0.0) + sum(f * w for f, w in zip(p["frequencies"], omega))
            return p.get("amplitude", 1.0) * dual.sin(arg)
        if self.kind == "expquad":
            self._check_arity("coeffs", omega)
            arg = sum(c * w * w for c, w in zip(p["coeffs"], omega))
            return p.get("amplitude", 1.0) * dual.exp(arg + 0.0 * sum(omega))
        if self.kind == "polynomial":
            self._check_arity("coeffs", omega)
            total = 0.0
            for row, w in zip(p["coeffs"], omega):
                acc = 0.0
                for c in reversed(row):
                    acc = acc * w + c
                total = total + acc
            return total
        values = [part(omega) for part in self.parts]
        out = values[0]
        for v in values[1:]:
            out = out + v if self.kind == "sum" else out * v
        return out

    def to_dict(self) -> dict:
        doc = {"kind": self.kind}
        if self.params:
            doc["params"] = self.params
        if self.parts:
            doc["parts"] = [part.to_dict() for part in self.parts]
        return doc

    @classmethod
    def from_dict(cls, doc) -> "ArbitraryFunction":
        if isinstance(doc, ArbitraryFunction):
            return doc
        if isinstance(doc, (int, float)):
            return cls.constant(doc)
        if not isinstance(doc, dict) or "kind" not in doc:
            raise ConfigError("arbitrary function: expected a mapping with a 'kind' key")
        parts = tuple(cls.from_dict(p) for p in doc.get("parts", ()))
        return cls(doc["kind"], dict(doc.get("params", {})), parts)


# -- builders --------------------------------------------------------------

def build_constraint_solution(profile: Callable, k: float, m: int,
                              singular: Callable | None = None,
                              name: str = "constraint_solution") -> ScalarField:
    """u(tau, x) = profile(omega(tau), x + k tau^m).

    ``profile`` and the optional ``singular`` predicate take ``(omega, y)``.
    """
    if m < 1:
        raise BadParameter("m must be >= 1")

    def func(tau, x):
        return profile(omega_coords(tau), x + k * tau[-1])

    sing = None
    if singular is not None:
        def sing(tau, x):
            return singular(omega_coords(tau), x + k * tau[-1])

    return ScalarField(func, m, sing, name=name)


def build_proposition_form(phi: ScalarField, k: float, P: ArbitraryFunction,
                           m: int) -> ScalarField:
    """u(tau, x) = phi(tau, x + k tau^m + P(omega))."""
    if phi.m != m:
        raise BadParameter(f"phi has {phi.m} times, expected {m}")

    def arg(tau, x):
        return x + k * tau[-1] + P(omega_coords(tau))

    def func(tau, x):
        return phi.func(tau, arg(tau, x))

    def sing(tau, x):
        return phi.singular_mask(tau, primal(arg(tau, x)))

    return ScalarField(func, m, sing if phi.singular is not None else None,
                       max_order=phi.max_order, name=f"proposition({phi.name})")


def symmetry_orbit(field: ScalarField, tau0: Sequence[float], x0: float,
                   reflect: bool = False) -> ScalarField:
    """u(tau + tau0, +-x + x0), with the minus sign iff ``reflect``."""
    tau0 = tuple(float(t) for t in tau0)
    if len(tau0) != field.m:
        raise BadParameter(f"tau0 needs {field.m} entries")
    sign = -1.0 if reflect else 1.0

    def move(tau, x):
        return tuple(t + s for t, s in zip(tau, tau0)), sign * x + x0

    def func(tau, x):
        return field.func(*move(tau, x))

    def sing(tau, x):
        return field.singular_mask(*move(tau, x))

    def dom(tau, x):
        return ~field.outside_mask(*move(tau, x))

    return ScalarField(func, field.m, sing, dom, field.max_order,
                       f"orbit({field.name})", dict(field.meta))


# -- closed-form catalog ---------------------------------------------------

def _rational(m: int, P: ArbitraryFunction, mask: float = POLE_MASK) -> ScalarField:
    def den(tau, x):
        return x - SQRT2 * tau[-1] + P(omega_coords(tau))

    def func(tau, x):
        return SQRT2 / den(tau, x)

    def sing(tau, x):
        with np.errstate(all="ignore"):
            return np.abs(primal(den(tau, x))) < mask

    return ScalarField(func, m, sing, name="rational_family")


def _exponential(m: int, P: ArbitraryFunction, mask: float = POLE_MASK) -> ScalarField:
    def den(tau, x):
        return 1.0 + P(omega_coords(tau)) * dual.exp(x / SQRT2 - 0.5 * tau[-1])

    def func(tau, x):
        return 1.0 / den(tau, x)

    def sing(tau, x):
        with np.errstate(all="ignore"):
            return np.abs(primal(den(tau, x))) < mask

    return ScalarField(func, m, sing, name="exp_family")


def _front_arg(tau, x, x0):
    return -(SQRT2 / 4.0) * (x + x0) + 0.25 * tau[0]


def _front(x0: float, branch: str, mask: float = COTH_MASK) -> ScalarField:
    if branch == "tanh":
        return ScalarField(lambda tau, x: 0.5 * (1.0 + dual.tanh(_front_arg(tau, x, x0))), 1,
                           name="tanh_front")

    def sing(tau, x):
        return np.abs(primal(_front_arg(tau, x, x0))) < mask

    return ScalarField(lambda tau, x: 0.5 * (1.0 + dual.coth(_front_arg(tau, x, x0))), 1, sing,
                       name="coth_branch")


def shift_from_C(C: float) -> float:
    """x0 with 1/(1 + C e^z) = 1/2 (1 +- tanh/coth(-(sqrt2/4)(x + x0) + tau/4)).

    Equating -(z + ln|C|)/2 with the front argument, z = x/sqrt2 - tau/2,
    gives ln|C| = x0/sqrt2, i.e. x0 = sqrt2 ln|C|.
    """
    return SQRT2 * math.log(abs(C))


def C_from_shift(x0: float, branch: str = "tanh") -> float:
    c = math.exp(x0 / SQRT2)
    return c if branch == "tanh" else -c


CATALOG_IDS = ("rational_family", "exp_family", "rational_m1", "exp_m1", "tanh_front",
               "coth_branch")

PARAMETER_SCHEMAS = {
    "rational_family": {"m": "int >= 1 (default 2)",
                        "P": "arbitrary function of omega (default sine)"},
    "exp_family": {"m": "int >= 1 (default 2)",
                   "P": "arbitrary function of omega (default expquad, positive)"},
    "rational_m1": {"x0": "real shift (default 1)"},
    "exp_m1": {"C": "real constant (default 1)"},
    "tanh_front": {"x0": "real shift (default 0)", "C": "real > 0, alternative to x0"},
    "coth_branch": {"x0": "real shift (default 0)", "C": "real < 0, alternative to x0"},
}


def _default_P(entry_id: str, m: int) -> ArbitraryFunction:
    if entry_id == "rational_family":
        return ArbitraryFunction.sine(0.5, [1.0] * (m - 1), 0.3)
    return ArbitraryFunction.expquad([-0.5] * (m - 1), amplitude=1.0)


def _shift_param(entry_id: str, params: dict) -> float:
    branch = "tanh" if entry_id == "tanh_front" else "coth"
    if "C" in params:
        C = float(params["C"])
        if branch == "tanh" and not C > 0:
            raise BadParameter("tanh_front needs C > 0")
        if branch == "coth" and not C < 0:
            raise BadParameter("coth_branch needs C < 0")
        return shift_from_C(C)
    return float(params.get("x0", 0.0))


def catalog(entry_id: str, mask: float | None = None, **params) -> ScalarField:
    """Closed-form solution ``entry_id`` of the normalised Huxley equation.

    ``mask`` overrides the singular-set threshold: the distance of the
    denominator from zero for the rational/exponential entries, of the coth
    argument from zero for ``coth_branch``.
    """
    if entry_id not in CATALOG_IDS:
        raise BadParameter(f"unknown catalog entry {entry_id!r}; known: {list(CATALOG_IDS)}")
    unknown = set(params) - set(PARAMETER_SCHEMAS[entry_id])
    if unknown:
        raise BadParameter(f"{entry_id}: unknown parameters {sorted(unknown)}")
    if entry_id in ("rational_family", "exp_family"):
        m = int(params.get("m", 2))
        if m < 1:
            raise BadParameter("m must be >= 1")
        P = ArbitraryFunction.from_dict(params["P"]) if "P" in params else _default_P(entry_id, m)
        build = _rational if entry_id == "rational_family" else _exponential
        fld = build(m, P, POLE_MASK if mask is None else mask)
        meta = {"id": entry_id, "m": m, "P": P.to_dict()}
    elif entry_id == "rational_m1":
        x0 = float(params.get("x0", 1.0))
        fld = _rational(1, ArbitraryFunction.constant(x0), POLE_MASK if mask is None else mask)
        meta = {"id": entry_id, "x0": x0}
    elif entry_id == "exp_m1":
        C = float(params.get("C", 1.0))
        fld = _exponential(1, ArbitraryFunction.constant(C), POLE_MASK if mask is None else mask)
        meta = {"id": entry_id, "C": C}
    else:
        x0 = _shift_param(entry_id, params)
        fld = _front(x0, "tanh" if entry_id == "tanh_front" else "coth",
                     COTH_MASK if mask is None else mask)
        meta = {"id": entry_id, "x0": x0}
    return ScalarField(fld.func, fld.m, fld.singular, fld.domain, fld.max_order, entry_id, meta)


def default_grid(entry_id: str, m: int = 1, min_points: int = 10_000) -> Grid:
    """Default certification box with at least ``min_points`` points."""
    nx = 100 if m > 1 else 200
    nt = max(2, math.ceil((min_points / nx) ** (1.0 / m)))
    if entry_id in ("rational_family", "rational_m1"):
        tau_range, x_range = (0.0, 1.0), (-3.0, 3.0)
    else:
        tau_range, x_range = (0.0, 2.0), (-10.0, 10.0)
    return make_grid([tau_range] * m + [x_range], [nt] * m + [nx])


@dataclass
class CatalogEntry:
    id: str
    field: ScalarField
    pde: PDESpec
    grid: Grid
    certificate: Report | None = None
    notes: dict = dc_field(default_factory=dict)


def _p_sign_survey(P: ArbitraryFunction, m: int, box=(-2.0, 2.0), samples: int = 1000,
                   seed: int = 0) -> dict:
    if m == 1:
        v = float(primal(P(())))
        return {"min": v, "max": v, "nonnegative": v >= 0}
    rng = np.random.default_rng(seed)
    omega = tuple(rng.uniform(*box, size=samples) for _ in range(m - 1))
    vals = np.asarray(primal(P(omega)), dtype=float) + np.zeros(samples)
    return {"min": float(vals.min()), "max": float(vals.max()),
            "nonnegative": bool(vals.min() >= 0)}


def catalog_entry(entry_id: str, certify: bool = True, mask: float | None = None,
                  **params) -> CatalogEntry:
    """Field plus its declared equation and default grid.

    With ``certify`` the residual is checked on a coarse version of the
    default grid and :class:`CertificationError` is raised above 1e-8.
    """
    fld = catalog(entry_id, mask=mask, **params)
    m = fld.m
    grid = default_grid(entry_id, m)
    entry = CatalogEntry(entry_id, fld, canonical_huxley(m), grid)
    if entry_id == "exp_family":
        P = ArbitraryFunction.from_dict(fld.meta["P"])
        entry.notes["P_sign"] = _p_sign_survey(P, m)
    if certify:
        coarse = make_grid(grid.ranges, [3] * m + [41])
        rep = residual_report(entry.pde, fld, coarse, JET_TOL, label=f"{entry_id} certificate")
        if not rep.passed:
            raise CertificationError(
                f"{entry_id}: residual {rep.max_abs_residual:.3e} exceeds {JET_TOL:g}"
            )
        entry.certificate = rep
    return entry
