"""Finite-difference simulation of the canonical multitime equation.

With s = tau^m and omega_j = tau^m - tau^j, the operator sum_i d/dtau^i is
d/ds at fixed omega, so each omega-slice is an ordinary 1D problem
u_s = mu u_xx + f(u). Slices are marched with Dirichlet boundary values and
initial data taken from an exact solution, and the numerical result is
compared with that solution.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.linalg import solve_banded

from .constraints import tau_from_omega
from .errors import (BadParameter, LevelNotCrossed, NonFinite, SingularPoint,
                     StabilityViolation, UnsupportedForm)
from .fields import ScalarField
from .pde import PDESpec, ReactionTerm

SCHEMES = ("explicit_ftcs", "crank_nicolson")
MAX_STORED_ROWS = 400


@dataclass(frozen=True)
class RD1DTemplate:
    """u_s = mu u_xx + f(u) on the slice omega = const."""

    mu: float
    reaction: ReactionTerm
    omega: tuple
    m: int

    def tau_of(self, s):
        return tau_from_omega(self.omega, s)


def reduce_to_characteristic(pde: PDESpec, omega: Sequence[float]) -> RD1DTemplate:
    if pde.form_tag != "canonical" or pde.k != 0:
        raise UnsupportedForm("the marching reduction needs the canonical form without convection")
    if pde.n != 2:
        raise UnsupportedForm("the marching reduction needs n = 2")
    omega = tuple(float(w) for w in omega)
    if len(omega) != pde.m - 1:
        raise BadParameter(f"expected {pde.m - 1} omega values, got {len(omega)}")
    return RD1DTemplate(pde.mu, pde.reaction, omega, pde.m)


@dataclass(frozen=True)
class RD1DProblem:
    template: RD1DTemplate
    exact: ScalarField
    x_range: tuple[float, float]
    s_range: tuple[float, float]

    def exact_values(self, s, x):
        tau = tuple(np.broadcast_to(np.asarray(t, dtype=float), np.shape(x))
                    for t in self.template.tau_of(s))
        return np.asarray(self.exact(tau, x), dtype=float) + np.zeros(np.shape(x))

    def exact_excluded(self, s, x):
        tau = tuple(np.broadcast_to(np.asarray(t, dtype=float), np.shape(x))
                    for t in self.template.tau_of(s))
        return self.exact.excluded_mask(tau, x)


@dataclass
class GridResult:
    x: np.ndarray
    s: np.ndarray
    u: np.ndarray          # (len(s), len(x))
    u_exact: np.ndarray
    meta: dict = dc_field(default_factory=dict)

    @property
    def error(self) -> np.ndarray:
        return self.u - self.u_exact

    @property
    def linf_error(self) -> float:
        """Max |u - u_exact| over every step taken, not only stored rows."""
        return float(self.meta.get("linf_error_all_steps", np.max(np.abs(self.error))))

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["s", "x", "u", "u_exact", "error"])
            for i, s in enumerate(self.s):
                for j, x in enumerate(self.x):
                    u, ue = self.u[i, j], self.u_exact[i, j]
                    writer.writerow([f"{s:.16e}", f"{x:.16e}", f"{u:.16e}", f"{ue:.16e}",
                                     f"{u - ue:.16e}"])


def _reaction(template: RD1DTemplate, u: np.ndarray, dx: float) -> np.ndarray:
    interior = u[1:-1]
    if template.reaction.depends_on_derivatives:
        ux = (u[2:] - u[:-2]) / (2 * dx)
        return np.asarray(template.reaction(interior, [ux]), dtype=float)
    return np.asarray(template.reaction(interior), dtype=float)


def march(problem: RD1DProblem, dx: float, ds: float, scheme: str = "explicit_ftcs",
          check_singular: bool = True) -> GridResult:
    """Advance the slice from s_range[0] to s_range[1].

    ``dx`` and ``ds`` are shrunk to divide the intervals evenly. The explicit
    scheme requires ds <= dx^2 / (2 mu). The reaction is explicit in both
    schemes; Crank-Nicolson treats only diffusion implicitly.
    """
    if scheme not in SCHEMES:
        raise BadParameter(f"scheme must be one of {SCHEMES}")
    if not (dx > 0 and ds > 0):
        raise BadParameter("dx and ds must be positive")
    mu = problem.template.mu
    if scheme == "explicit_ftcs" and ds > dx * dx / (2 * mu) * (1 + 1e-12):
        raise StabilityViolation(
            f"explicit scheme needs ds <= dx^2/(2 mu) = {dx * dx / (2 * mu):.3e}, got {ds:.3e}"
        )
    (x0, x1), (s0, s1) = problem.x_range, problem.s_range
    nx = max(2, int(math.ceil((x1 - x0) / dx - 1e-9)))
    ns = max(1, int(math.ceil((s1 - s0) / ds - 1e-9)))
    x = np.linspace(x0, x1, nx + 1)
    dx_eff = (x1 - x0) / nx
    ds_eff = (s1 - s0) / ns
    if scheme == "explicit_ftcs" and ds_eff > dx_eff * dx_eff / (2 * mu) * (1 + 1e-12):
        raise StabilityViolation("step bound violated after adjusting dx to the interval")
    if check_singular:
        for s in np.linspace(s0, s1, 9):
            if np.any(problem.exact_excluded(s, x)):
                raise SingularPoint(f"exact field is singular on the slice at s = {s:.3g}")

    stride = max(1, int(math.ceil(ns / MAX_STORED_ROWS)))
    u = problem.exact_values(s0, x)
    rows, exact_rows, s_rows = [u.copy()], [u.copy()], [s0]
    linf = 0.0
    r = mu * ds_eff / (dx_eff * dx_eff)
    if scheme == "crank_nicolson":
        n_in = nx - 1
        ab = np.zeros((3, n_in))
        ab[0, 1:] = -0.5 * r
        ab[1, :] = 1.0 + r
        ab[2, :-1] = -0.5 * r

    for step in range(1, ns + 1):
        s_new = s0 + step * ds_eff
        react = _reaction(problem.template, u, dx_eff)
        left, right = problem.exact_values(s_new, np.array([x0, x1]))
        new = np.empty_like(u)
        new[0], new[-1] = left, right
        if scheme == "explicit_ftcs":
            lap = u[2:] - 2 * u[1:-1] + u[:-2]
            new[1:-1] = u[1:-1] + r * lap + ds_eff * react
        else:
            rhs = 0.5 * r * u[:-2] + (1 - r) * u[1:-1] + 0.5 * r * u[2:] + ds_eff * react
            rhs[0] += 0.5 * r * left
            rhs[-1] += 0.5 * r * right
            new[1:-1] = solve_banded((1, 1), ab, rhs)
        if not np.all(np.isfinite(new)):
            raise NonFinite(f"non-finite value at s = {s_new:.6g}")
        u = new
        exact = problem.exact_values(s_new, x)
        linf = max(linf, float(np.max(np.abs(u - exact))))
        if step % stride == 0 or step == ns:
            rows.append(u.copy())
            exact_rows.append(exact)
            s_rows.append(s_new)

    meta = {"scheme": scheme, "dx": dx_eff, "ds": ds_eff, "steps": ns,
            "omega": list(problem.template.omega), "mu": mu,
            "linf_error_all_steps": linf, "field": problem.exact.name}
    return GridResult(x, np.array(s_rows), np.array(rows), np.array(exact_rows), meta)


def measure_front_speed(result: GridResult, level: float = 0.5) -> float:
    """Least-squares slope of the first ``level`` crossing position against s."""
    positions = []
    for row in result.u:
        d = row - level
        idx = np.flatnonzero(np.sign(d[:-1]) * np.sign(d[1:]) <= 0)
        idx = [i for i in idx if d[i] != d[i + 1]]
        if not idx:
            raise LevelNotCrossed(f"level {level} is not crossed on every stored row")
        i = idx[0]
        frac = d[i] / (d[i] - d[i + 1])
        positions.append(result.x[i] + frac * (result.x[i + 1] - result.x[i]))
    slope = np.polyfit(result.s, np.array(positions), 1)[0]
    return float(slope)
