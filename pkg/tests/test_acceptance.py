"""Acceptance criteria 1-8.

Each check prints one line ``[PASS] criterion N: ...`` or ``[FAIL] ...``.
Run under pytest, or directly with ``python3 tests/test_acceptance.py``.
"""

import math
import time

import numpy as np
import pytest

from multitime_rd.constraints import CATALOG_IDS, ArbitraryFunction, catalog, default_grid
from multitime_rd.errors import DegenerateTransform
from multitime_rd.fields import ScalarField, make_grid
from multitime_rd.pde import ReactionTerm, canonical_cubic, canonical_huxley, huxley_type
from multitime_rd.simulate import RD1DProblem, march, measure_front_speed, reduce_to_characteristic
from multitime_rd.transforms import (FirstIntegral, characteristic_transform, log_transform,
                                     pullback_solution, scaling_normalize, time_rescale,
                                     verify_transform_system)
from multitime_rd.verify import residual_report
from multitime_rd.wave import WaveProblem, front_shoot, integrate_profile

SQRT2 = math.sqrt(2.0)
TOL = 1e-8

THREE_TIME_P = [
    ArbitraryFunction.constant(0.7),
    ArbitraryFunction.linear([1.0, -0.5], 0.2),
    ArbitraryFunction.sine(0.8, [1.0, 2.0], 0.1),
    ArbitraryFunction.expquad([-0.3, -0.2], 1.5),
    ArbitraryFunction.polynomial([[0.0, 0.3, 0.1], [0.5, 0.0, -0.2]]),
]


def _line(n, ok, text):
    return f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {text}"


def criterion_1():
    details, ok = [], True
    for entry in CATALOG_IDS:
        fld = catalog(entry)
        grid = default_grid(entry, fld.m)
        start = time.perf_counter()
        rep = residual_report(canonical_huxley(fld.m), fld, grid, TOL)
        elapsed = time.perf_counter() - start
        good = rep.passed and grid.size >= 10_000 and elapsed < 10.0
        ok &= good
        details.append(f"{entry} {rep.max_abs_residual:.1e}/{grid.size}pts/{elapsed:.2f}s")
    return ok, "catalog certification: " + ", ".join(details)


def criterion_2():
    worst, ok = 0.0, True
    for entry in ("rational_family", "exp_family"):
        grid = default_grid(entry, 3)
        for P in THREE_TIME_P:
            rep = residual_report(canonical_huxley(3), catalog(entry, m=3, P=P), grid, TOL)
            ok &= rep.passed
            worst = max(worst, rep.max_abs_residual)
    return ok, f"m = 3 families with 5 P each, worst residual {worst:.2e} <= {TOL:g}"


def criterion_3():
    T = time_rescale([lambda t: t], [(1.0, 10.0)])
    ts = np.linspace(1.0, 10.0, 200)
    err_a = float(np.max(np.abs(T((ts,), 0.0)[0][0] - np.log(ts))))
    rep_b = residual_report(huxley_type(1, 1.0, 1.0, 1.0),
                            pullback_solution(log_transform(1), catalog("tanh_front")),
                            make_grid([[1, 5], [-10, 10]], [50, 200]), TOL)
    worst_c, ok_c = 0.0, True
    for mu, a, b in [(1, 4, 2), (2, 1, -1), (3, 5, -2)]:
        fld = pullback_solution(scaling_normalize(mu, a, b), catalog("tanh_front"))
        rep = residual_report(canonical_cubic(1, mu, a, b), fld,
                              make_grid([[0, 2], [-10, 10]], [50, 200]), TOL)
        ok_c &= rep.passed
        worst_c = max(worst_c, rep.max_abs_residual)
    ok = err_a <= 1e-9 and rep_b.passed and ok_c
    return ok, (f"transforms: (a) |tau - ln t| {err_a:.1e}, (b) log pullback {rep_b.max_abs_residual:.1e},"
                f" (c) scaling pullbacks {worst_c:.1e}")


def _one(t):
    return 1.0 + 0.0 * t[0]


def _t1(t):
    return t[0] + 0.0 * t[1]


def criterion_4():
    first = FirstIntegral.closed(lambda t: t[1] - t[0] ** 2 / 2)
    T = characteristic_transform(_one, _t1, first, lambda s: 0.0 * s, lambda s: s,
                                 [(0.0, 1.0), (0.0, 1.0)])
    rep = verify_transform_system(_one, _t1, T, make_grid([[0, 1], [0, 1]], [20, 20]), 1e-10)
    try:
        characteristic_transform(_one, _t1, first, lambda s: s, lambda s: s,
                                 [(0.0, 1.0), (0.0, 1.0)])
        rejected = False
    except DegenerateTransform:
        rejected = True
    return rep.passed and rejected, (f"characteristic system residual {rep.max_abs_residual:.1e}"
                                     f" <= 1e-10, W1 = W2 rejected: {rejected}")


def _rational_error(step):
    prof = integrate_profile(WaveProblem(1.0, -SQRT2, ReactionTerm.huxley()),
                             SQRT2, -SQRT2, (1.0, 5.0), step)
    return float(np.max(np.abs(prof.u - SQRT2 / prof.y)))


def criterion_5():
    e_rat = _rational_error(1e-3)
    slope0 = -SQRT2 / 8
    prof = integrate_profile(WaveProblem(1.0, -SQRT2 / 2, ReactionTerm.huxley()),
                             0.5, slope0, (-5.0, 5.0), 1e-3, y0=0.0)
    e_tanh = float(np.max(np.abs(prof.u - 0.5 * (1 + np.tanh(-SQRT2 / 4 * prof.y)))))
    errs = [_rational_error(h) for h in (0.04, 0.02, 0.01)]
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    ok = e_rat <= 1e-6 and e_tanh <= 1e-6 and all(8 <= r <= 32 for r in ratios)
    return ok, (f"wave ODE: rational {e_rat:.1e}, tanh {e_tanh:.1e}, halving ratios "
                + ", ".join(f"{r:.1f}" for r in ratios))


def _front_run(dx, s_end, scheme="explicit_ftcs"):
    t = reduce_to_characteristic(canonical_huxley(1), ())
    prob = RD1DProblem(t, catalog("tanh_front"), (-10.0, 10.0), (0.0, s_end))
    return march(prob, dx, dx * dx / 4, scheme)


def criterion_6():
    c_shoot, _ = front_shoot(1.0, ReactionTerm.huxley(), 1.0, 0.0, (0.3, 1.0))
    c_sim = measure_front_speed(_front_run(0.05, 6.0, "crank_nicolson"), 0.5)
    target = SQRT2 / 2
    ok = (abs(c_shoot - target) <= 1e-3 and abs(c_sim - target) <= 2e-2
          and abs(c_shoot - c_sim) <= 2e-2)
    return ok, f"front speed: shooting {c_shoot:.6f}, simulation {c_sim:.6f}, target {target:.6f}"


def criterion_7():
    errs = [_front_run(dx, 2.0).linf_error for dx in (0.2, 0.1, 0.05)]
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    ok = errs[-1] <= 5e-3 and all(1.5 <= q <= 2.5 for q in orders)
    return ok, (f"simulator: L-inf error {errs[-1]:.2e} at dx = 0.05, orders "
                + ", ".join(f"{q:.2f}" for q in orders))


def criterion_8():
    grid = default_grid("rational_m1", 1)
    pde = canonical_huxley(1)
    tau1 = residual_report(pde, ScalarField(lambda tau, x: tau[0] + 0.0 * x, 1, name="tau1"),
                           grid, TOL)
    xfield = residual_report(pde, ScalarField(lambda tau, x: x + 0.0 * tau[0], 1, name="x"),
                             grid, TOL)
    ok = all(not r.passed and r.max_abs_residual >= 0.5 for r in (tau1, xfield))
    return ok, (f"negative controls fail: u = tau1 max {tau1.max_abs_residual:.2f},"
                f" u = x max {xfield.max_abs_residual:.2f}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8]


@pytest.mark.parametrize("n", range(1, 9))
def test_criterion(n, capsys):
    ok, text = CRITERIA[n - 1]()
    with capsys.disabled():
        print("\n" + _line(n, ok, text))
    assert ok, text


if __name__ == "__main__":
    start = time.perf_counter()
    results = []
    for n, check in enumerate(CRITERIA, 1):
        ok, text = check()
        results.append(ok)
        print(_line(n, ok, text), flush=True)
    print(f"{sum(results)}/{len(results)} criteria passed in {time.perf_counter() - start:.1f}s")
    raise SystemExit(0 if all(results) else 1)
