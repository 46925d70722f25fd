"""Grid certification of candidate solutions.

A :class:`Report` summarises pointwise residuals over a grid with masked
points excluded from the statistics but always counted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from .errors import EmptyGrid
from .fields import DEFAULT_FD_STEP, Grid, Point, ScalarField
from .pde import PDESpec, residual_arrays

JET_TOL = 1e-8
FD_TOL = 1e-5


@dataclass
class Report:
    max_abs_residual: float
    rms_residual: float
    points_evaluated: int
    points_masked: int
    tolerance: float
    grid: dict = dc_field(default_factory=dict)
    worst_point: tuple | None = None
    label: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.max_abs_residual <= self.tolerance)

    @property
    def points_total(self) -> int:
        return self.points_evaluated + self.points_masked

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "pass": self.passed,
            "tolerance": self.tolerance,
            "max_abs_residual": self.max_abs_residual,
            "rms_residual": self.rms_residual,
            "points_evaluated": self.points_evaluated,
            "points_masked": self.points_masked,
            "worst_point": list(self.worst_point) if self.worst_point is not None else None,
            "grid": self.grid,
        }


def summarize(values: np.ndarray, coords: Sequence[np.ndarray], masked: int, tol: float,
              grid: dict | None = None, label: str = "") -> Report:
    """Build a report from residual values at the evaluated points.

    The sum of squares goes through ``math.fsum`` so the result does not
    depend on traversal order.
    """
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        raise EmptyGrid(f"{label or 'report'}: every grid point is masked")
    absval = np.abs(values)
    bad = ~np.isfinite(absval)
    if bad.any():
        worst = int(np.flatnonzero(bad)[0])
        max_abs = math.inf
        rms = math.inf
    else:
        worst = int(np.argmax(absval))
        max_abs = float(absval[worst])
        rms = math.sqrt(math.fsum((absval * absval).tolist()) / values.size)
    where = tuple(float(np.asarray(c).ravel()[worst]) for c in coords)
    return Report(max_abs, rms, int(values.size), int(masked), float(tol), grid or {}, where, label)


def residual_report(pde: PDESpec, field: ScalarField, grid: Grid, tol: float | None = None,
                    method: str = "jet", h: float = DEFAULT_FD_STEP, label: str = "") -> Report:
    """Residual of ``field`` in ``pde`` at every unmasked grid point."""
    if grid.ndim != pde.m + 1:
        raise ValueError(f"grid has {grid.ndim} axes, PDE needs {pde.m + 1}")
    if tol is None:
        tol = JET_TOL if method == "jet" else FD_TOL
    tau, x = grid.split()
    excluded = field.excluded_mask(tau, x)
    if method == "fd":
        # every stencil point has to be regular too
        for shift in (-2 * max(h, 1e-4), -max(h, 1e-4), max(h, 1e-4), 2 * max(h, 1e-4)):
            excluded = excluded | field.excluded_mask(tau, x + shift)
        for i in range(pde.m):
            for s in (-h, h):
                shifted = tau[:i] + (tau[i] + s,) + tau[i + 1:]
                excluded = excluded | field.excluded_mask(shifted, x)
    keep = ~excluded
    if not keep.any():
        raise EmptyGrid(f"{label or field.name}: every grid point is masked")
    tau_k = tuple(t[keep] for t in tau)
    x_k = x[keep]
    with np.errstate(all="ignore"):
        values = residual_arrays(pde, field, tau_k, x_k, method, h)
    return summarize(values, tau_k + (x_k,), int(excluded.sum()), tol, grid.to_dict(),
                     label or field.name)


def convergence_study(pde: PDESpec, field: ScalarField, p: Point,
                      steps: Sequence[float]) -> list[tuple[float, float]]:
    """|residual by jets - residual by central differences| for each step."""
    steps = [float(h) for h in steps]
    if len(steps) < 3:
        raise ValueError("need at least three steps")
    if any(b >= a for a, b in zip(steps, steps[1:])):
        raise ValueError("steps must be strictly decreasing")
    field.check_point(p)
    exact = float(residual_arrays(pde, field, p.tau, p.x, "jet"))
    out = []
    for h in steps:
        approx = float(residual_arrays(pde, field, p.tau, p.x, "fd", h))
        out.append((h, abs(exact - approx)))
    return out


def observed_orders(study: Sequence[tuple[float, float]]) -> list[float]:
    """log(e_i / e_{i+1}) / log(h_i / h_{i+1}) for consecutive entries."""
    orders = []
    for (h0, e0), (h1, e1) in zip(study, study[1:]):
        if e0 <= 0 or e1 <= 0:
            orders.append(math.nan)
        else:
            orders.append(math.log(e0 / e1) / math.log(h0 / h1))
    return orders
