"""Multitime reaction-diffusion equations and their pointwise residual.

    sum_i h^i(t) du/dt^i = mu d^n u/dx^n - k du/dx + f(u, du/dx, ..., d^{n-1}u/dx^{n-1})

``form_tag`` is ``general`` when the time coefficients ``h^i`` are present,
``canonical`` when they are all 1 and there is no convection, and
``canonical_convective`` when they are all 1 and ``k`` may be non-zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dual import Dual
from .errors import BadParameter, ConfigError, MissingCoefficient
from .expr import CompiledExpression
from .fields import DEFAULT_FD_STEP, Point, ScalarField, fd_jet_arrays, jet_arrays

FORM_TAGS = ("general", "canonical", "canonical_convective")
REACTION_KINDS = ("huxley_normalized", "cubic", "fitzhugh_nagumo", "zero", "custom")


def derivative_symbols(n: int) -> tuple[str, ...]:
    """Names available to a custom reaction: u, u_x, u_xx, ... up to order n-1."""
    return ("u",) + tuple("u_" + "x" * k for k in range(1, n))


@dataclass(frozen=True)
class ReactionTerm:
    """The source term ``f``.

    ``huxley_normalized``: u^2 - u^3. ``cubic`` (a, b): -a u^3 + b u^2.
    ``fitzhugh_nagumo`` (delta): u (1 - u)(u - delta). ``zero``: 0.
    ``custom``: a text expression in ``u, u_x, u_xx, ...``.
    """

    kind: str = "huxley_normalized"
    params: dict = field(default_factory=dict)
    expression: str | None = None
    n: int = 2

    def __post_init__(self):
        if self.kind not in REACTION_KINDS:
            raise BadParameter(f"unknown reaction kind {self.kind!r}")
        if self.kind == "cubic":
            for key in ("a", "b"):
                if key not in self.params:
                    raise BadParameter(f"cubic reaction needs parameter {key!r}")
        if self.kind == "fitzhugh_nagumo" and "delta" not in self.params:
            raise BadParameter("fitzhugh_nagumo reaction needs parameter 'delta'")
        if self.kind == "custom":
            if not self.expression:
                raise BadParameter("custom reaction needs an expression")
            object.__setattr__(
                self, "_compiled", CompiledExpression(self.expression, derivative_symbols(self.n))
            )

    @classmethod
    def huxley(cls) -> "ReactionTerm":
        return cls("huxley_normalized")

    @classmethod
    def cubic(cls, a: float, b: float) -> "ReactionTerm":
        return cls("cubic", {"a": float(a), "b": float(b)})

    @classmethod
    def fitzhugh_nagumo(cls, delta: float) -> "ReactionTerm":
        return cls("fitzhugh_nagumo", {"delta": float(delta)})

    @classmethod
    def custom(cls, expression: str, n: int = 2) -> "ReactionTerm":
        return cls("custom", {}, expression, n)

    @property
    def depends_on_derivatives(self) -> bool:
        if self.kind != "custom":
            return False
        used = {str(s) for s in self._compiled.expr.free_symbols}
        return bool(used - {"u"})

    def __call__(self, u, derivs: Sequence = ()):
        if self.kind == "huxley_normalized":
            return u * u - u * u * u
        if self.kind == "cubic":
            a, b = self.params["a"], self.params["b"]
            return -a * u * u * u + b * u * u
        if self.kind == "fitzhugh_nagumo":
            d = self.params["delta"]
            return u * (1.0 - u) * (u - d)
        if self.kind == "zero":
            return 0.0 * u
        args = [u] + list(derivs)[: self.n - 1]
        while len(args) < self.n:
            args.append(0.0 * u)
        return self._compiled(*args) + 0.0 * u

    def derivative(self, u: float) -> float:
        """df/du at ``u`` (linearisation at equilibria)."""
        r = self(Dual(float(u), 1.0))
        return float(r.eps) if isinstance(r, Dual) else 0.0

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.params:
            out["params"] = dict(self.params)
        if self.expression:
            out["expression"] = self.expression
        return out

    @classmethod
    def from_dict(cls, doc: dict, n: int = 2) -> "ReactionTerm":
        if isinstance(doc, str):
            doc = {"kind": doc}
        if not isinstance(doc, dict) or "kind" not in doc:
            raise ConfigError("reaction: expected a mapping with a 'kind' key")
        return cls(doc["kind"], {k: float(v) for k, v in doc.get("params", {}).items()},
                   doc.get("expression"), n)


def reaction_eval(r: ReactionTerm, u: float) -> float:
    return r(u)


@dataclass(frozen=True)
class PDESpec:
    m: int
    mu: float = 1.0
    reaction: ReactionTerm = field(default_factory=ReactionTerm)
    n: int = 2
    k: float = 0.0
    h: tuple[Callable, ...] | None = None
    form_tag: str = "canonical"

    def __post_init__(self):
        if int(self.m) < 1:
            raise BadParameter("m must be >= 1")
        if int(self.n) < 1:
            raise BadParameter("n must be >= 1")
        if self.mu == 0:
            raise BadParameter("mu must be non-zero")
        if self.form_tag not in FORM_TAGS:
            raise BadParameter(f"form_tag must be one of {FORM_TAGS}")
        if self.form_tag == "general":
            if self.h is None:
                raise MissingCoefficient("general form needs the time coefficients h")
            if len(self.h) != self.m:
                raise BadParameter(f"expected {self.m} time coefficients, got {len(self.h)}")
        elif self.h is not None:
            raise BadParameter("time coefficients are only allowed in the general form")
        if self.form_tag == "canonical" and self.k != 0:
            raise BadParameter("canonical form has no convection; use canonical_convective")
        if self.reaction.kind == "custom" and self.reaction.n != self.n:
            object.__setattr__(self, "reaction", ReactionTerm.custom(self.reaction.expression, self.n))

    def time_coefficients(self, tau):
        if self.h is None:
            return tuple(1.0 for _ in range(self.m))
        return tuple(hi(tuple(tau)) for hi in self.h)

    def to_dict(self) -> dict:
        doc = {"m": self.m, "n": self.n, "mu": self.mu, "k": self.k,
               "reaction": self.reaction.to_dict(), "form": self.form_tag}
        if self.h is not None:
            doc["h"] = [getattr(hi, "source", repr(hi)) for hi in self.h]
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "PDESpec":
        if not isinstance(doc, dict):
            raise ConfigError("pde: expected a mapping")
        try:
            m = int(doc["m"])
        except KeyError as exc:
            raise ConfigError("pde.m is required") from exc
        n = int(doc.get("n", 2))
        form = doc.get("form", "general" if "h" in doc else "canonical")
        h = None
        if "h" in doc:
            names = time_symbols(m)
            h = tuple(_coefficient(CompiledExpression(str(s), names)) for s in doc["h"])
        return cls(m=m, mu=float(doc.get("mu", 1.0)),
                   reaction=ReactionTerm.from_dict(doc.get("reaction", "huxley_normalized"), n),
                   n=n, k=float(doc.get("k", 0.0)), h=h, form_tag=form)


def time_symbols(m: int) -> tuple[str, ...]:
    return tuple(f"t{i}" for i in range(1, m + 1))


def _coefficient(expr: CompiledExpression):
    def h(t):
        return expr(*t)

    h.source = expr.source
    return h


def canonical_huxley(m: int) -> PDESpec:
    """sum_i du/dtau^i = u_xx - u^3 + u^2."""
    return PDESpec(m=m, mu=1.0, reaction=ReactionTerm.huxley())


def canonical_cubic(m: int, mu: float, a: float, b: float) -> PDESpec:
    """sum_i du/dtau^i = mu u_xx - a u^3 + b u^2."""
    return PDESpec(m=m, mu=mu, reaction=ReactionTerm.cubic(a, b))


def huxley_type(m: int, mu: float, a: float, b: float) -> PDESpec:
    """sum_i t^i du/dt^i = mu u_xx - a u^3 + b u^2."""
    names = time_symbols(m)
    h = tuple(_coefficient(CompiledExpression(name, names)) for name in names)
    return PDESpec(m=m, mu=mu, reaction=ReactionTerm.cubic(a, b), h=h, form_tag="general")


def residual_from_jet(pde: PDESpec, jet, tau):
    coeffs = pde.time_coefficients(tau)
    lhs = sum(c * d for c, d in zip(coeffs, jet.d_tau))
    derivs = [jet.dx(j) for j in range(1, pde.n)]
    rhs = pde.mu * jet.dx(pde.n) - pde.k * jet.dx(1) + pde.reaction(jet.value, derivs)
    return lhs - rhs


def residual_arrays(pde: PDESpec, field: ScalarField, tau, x, method: str = "jet",
                    h: float = DEFAULT_FD_STEP):
    """Vectorised residual LHS - RHS at the given (unmasked) points."""
    if len(tuple(tau)) != pde.m:
        raise ValueError(f"expected {pde.m} time coordinates")
    if method == "jet":
        jet = jet_arrays(field, tau, x, pde.n)
    elif method == "fd":
        jet = fd_jet_arrays(field, tau, x, h, pde.n)
    else:
        raise ValueError(f"unknown method {method!r}")
    return residual_from_jet(pde, jet, tuple(np.asarray(t, dtype=float) for t in tau))


def residual(pde: PDESpec, field: ScalarField, p: Point, method: str = "jet",
             h: float = DEFAULT_FD_STEP) -> float:
    if p.m != pde.m:
        raise ValueError(f"point has {p.m} times, PDE has {pde.m}")
    field.check_point(p)
    return float(residual_arrays(pde, field, p.tau, p.x, method, h))
