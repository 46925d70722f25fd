"""Travelling-profile ODE  mu u'' - k u' + f(u) = 0.

``integrate_profile`` marches the ODE as a first-order system with the
classical fourth-order Runge-Kutta method. ``front_shoot`` finds the speed of
a front joining two equilibria by bisection on the launch from the unstable
manifold of the left state.

Speeds returned by ``front_shoot`` are physical: a solution
u(tau, x) = U(x - c tau) moves right for c > 0, which corresponds to k = -c in
the profile equation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import BadParameter, BlowUp, NoConnection
from .pde import ReactionTerm

BLOWUP = 1e6
LAUNCH_OFFSET = 1e-6
SPEED_TOL = 1e-8
LANDING_TOL = 1e-6
MAX_BISECTIONS = 100


@dataclass(frozen=True)
class WaveProblem:
    mu: float
    k: float
    reaction: ReactionTerm
    n: int = 2

    def __post_init__(self):
        if self.mu == 0:
            raise BadParameter("mu must be non-zero")
        if self.n != 2:
            raise BadParameter("profile integration is implemented for n = 2 only")

    def rhs(self, u: float, v: float) -> tuple[float, float]:
        return v, (self.k * v - float(self.reaction(u))) / self.mu


@dataclass
class Profile:
    y: np.ndarray
    u: np.ndarray
    du: np.ndarray
    blown_up: bool = False
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        self.u = np.asarray(self.u, dtype=float)
        self.du = np.asarray(self.du, dtype=float)
        if not (len(self.y) == len(self.u) == len(self.du)):
            raise ValueError("sample arrays differ in length")
        if len(self.y) < 4:
            raise ValueError("a profile needs at least four samples")
        if np.any(np.diff(self.y) <= 0):
            raise ValueError("y samples must be strictly increasing")
        self._spline = CubicHermiteSpline(self.y, self.u, self.du)

    def __call__(self, y, nu: int = 0):
        return self._spline(y, nu)

    def second_derivative_at_nodes(self) -> np.ndarray:
        """u'' at interior nodes, averaged over the two adjacent cubic pieces."""
        c = self._spline.c  # (4, pieces): value = c0 t^3 + c1 t^2 + c2 t + c3
        h = np.diff(self.y)
        left_end = 6 * c[0, :-1] * h[:-1] + 2 * c[1, :-1]   # end of piece i
        right_start = 2 * c[1, 1:]                          # start of piece i+1
        return 0.5 * (left_end + right_start)

    def ode_residual(self, prob: WaveProblem) -> np.ndarray:
        """mu u'' - k u' + f(u) at interior nodes, u'' from the interpolant."""
        d2 = self.second_derivative_at_nodes()
        u, du = self.u[1:-1], self.du[1:-1]
        return prob.mu * d2 - prob.k * du + prob.reaction(u)

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["y", "u"])
            for y, u in zip(self.y, self.u):
                writer.writerow([f"{y:.16e}", f"{u:.16e}"])


def _rk4_step(prob: WaveProblem, u: float, v: float, h: float) -> tuple[float, float]:
    k1u, k1v = prob.rhs(u, v)
    k2u, k2v = prob.rhs(u + 0.5 * h * k1u, v + 0.5 * h * k1v)
    k3u, k3v = prob.rhs(u + 0.5 * h * k2u, v + 0.5 * h * k2v)
    k4u, k4v = prob.rhs(u + h * k3u, v + h * k3v)
    return (u + h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u),
            v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v))


def _march(prob, u0, v0, y0, y1, step):
    """RK4 from y0 to y1 (either direction); stops early on blow-up."""
    span = y1 - y0
    n = max(1, int(math.ceil(abs(span) / step - 1e-9)))
    h = span / n
    ys, us, vs = [y0], [u0], [v0]
    u, v = u0, v0
    for i in range(1, n + 1):
        u, v = _rk4_step(prob, u, v, h)
        if not (math.isfinite(u) and math.isfinite(v)) or abs(u) > BLOWUP:
            return ys, us, vs, True
        ys.append(y0 + i * h)
        us.append(u)
        vs.append(v)
    return ys, us, vs, False


def integrate_profile(prob: WaveProblem, u0: float, du0: float, y_range, step: float,
                      y0: float | None = None) -> Profile:
    """Integrate from (y0, u0, du0) across ``y_range`` with RK4 steps <= ``step``.

    ``y0`` defaults to the left end; an interior ``y0`` integrates both ways.
    On blow-up (|u| > 1e6) the profile is truncated and ``blown_up`` is set;
    :class:`BlowUp` is raised only if fewer than four samples survive.
    """
    lo, hi = float(y_range[0]), float(y_range[1])
    if not lo < hi:
        raise BadParameter("y_range must be increasing")
    if not step > 0:
        raise BadParameter("step must be positive")
    y0 = lo if y0 is None else float(y0)
    if not lo <= y0 <= hi:
        raise BadParameter("y0 must lie in y_range")
    ys, us, vs, blown = [y0], [float(u0)], [float(du0)], False
    if y0 < hi:
        ys, us, vs, blown = _march(prob, float(u0), float(du0), y0, hi, step)
    if y0 > lo:
        ly, lu, lv, lblown = _march(prob, float(u0), float(du0), y0, lo, step)
        ys = ly[:0:-1] + ys
        us = lu[:0:-1] + us
        vs = lv[:0:-1] + vs
        blown = blown or lblown
    if len(ys) < 4:
        raise BlowUp(f"solution exceeded {BLOWUP:g} within {len(ys)} samples")
    return Profile(np.array(ys), np.array(us), np.array(vs), blown,
                   {"mu": prob.mu, "k": prob.k, "step": step})


# -- front shooting --------------------------------------------------------

def _unstable_rate(mu: float, c: float, fprime: float) -> float | None:
    """Positive root of mu l^2 + c l + f'(u-) = 0, if any."""
    disc = c * c - 4.0 * mu * fprime
    if disc < 0:
        return None
    lam = (-c + math.copysign(math.sqrt(disc), mu)) / (2.0 * mu)
    return lam if lam > 0 else None


def _shoot(mu, reaction, u_minus, u_plus, c, step, y_max, record=False):
    """+1 if the launched trajectory crosses ``u_plus``, else -1.

    Trajectories that neither cross nor turn back before ``y_max`` creep into
    a non-hyperbolic ``u_plus`` and count as -1, so bisection lands on the
    boundary between overshooting and monotone trajectories.
    """
    prob = WaveProblem(mu, -c, reaction)
    lam = _unstable_rate(mu, c, reaction.derivative(u_minus))
    if lam is None:
        raise NoConnection(f"u = {u_minus} is not a saddle for speed {c}")
    d = math.copysign(1.0, u_plus - u_minus)
    u, v, y = u_minus + d * LAUNCH_OFFSET, d * LAUNCH_OFFSET * lam, 0.0
    traj = [(y, u, v)] if record else None
    outcome = -1
    while y < y_max:
        u, v = _rk4_step(prob, u, v, step)
        y += step
        if not (math.isfinite(u) and math.isfinite(v)) or abs(u) > BLOWUP:
            outcome = 1 if d * (u - u_plus) > 0 else -1
            break
        if record:
            traj.append((y, u, v))
        if d * (u - u_plus) > 0:
            outcome = 1
            break
        if d * v < 0:
            outcome = -1
            break
    return outcome, traj


def front_shoot(mu: float, reaction: ReactionTerm, u_minus: float, u_plus: float,
                speed_bracket, step: float = 0.02, y_max: float = 100.0):
    """Speed c and profile U of a front U(-inf) = u_minus, U(+inf) = u_plus.

    Bisects on c until the bracket is narrower than 1e-8. The returned
    profile is shifted so that U(0) is the midpoint of the two states and is
    cut at the closest approach to ``u_plus``; its ``meta["gap"]`` records that
    distance.
    """
    for state in (u_minus, u_plus):
        if abs(float(reaction(state))) > 1e-12:
            raise BadParameter(f"u = {state} is not an equilibrium of the reaction")
    if u_minus == u_plus:
        raise NoConnection("the two states coincide")
    lo, hi = float(speed_bracket[0]), float(speed_bracket[1])
    s_lo = _shoot(mu, reaction, u_minus, u_plus, lo, step, y_max)[0]
    s_hi = _shoot(mu, reaction, u_minus, u_plus, hi, step, y_max)[0]
    if s_lo == s_hi:
        raise NoConnection(f"no sign change of the shooting outcome on [{lo}, {hi}]")
    for _ in range(MAX_BISECTIONS):
        if hi - lo < SPEED_TOL:
            break
        mid = 0.5 * (lo + hi)
        s_mid = _shoot(mu, reaction, u_minus, u_plus, mid, step, y_max)[0]
        if s_mid == s_lo:
            lo = mid
        else:
            hi = mid
    else:
        raise NoConnection("bisection did not converge")
    c = 0.5 * (lo + hi)
    _, traj = _shoot(mu, reaction, u_minus, u_plus, c, step, y_max, record=True)
    arr = np.array(traj)
    gaps = np.abs(arr[:, 1] - u_plus)
    stop = int(np.argmin(gaps))
    if gaps[stop] > LANDING_TOL:
        raise NoConnection(f"closest approach to u_plus is {gaps[stop]:.3e} > {LANDING_TOL:g}")
    arr = arr[: stop + 1]
    mid_value = 0.5 * (u_minus + u_plus)
    y_mid = float(np.interp(0.0, np.sign(u_plus - u_minus) * (arr[:, 1] - mid_value), arr[:, 0]))
    profile = Profile(arr[:, 0] - y_mid, arr[:, 1], arr[:, 2], False,
                      {"speed": c, "gap": float(gaps[stop]), "step": step, "mu": mu, "k": -c})
    return c, profile
