import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from multitime_rd.constraints import ArbitraryFunction, catalog, default_grid
from multitime_rd.errors import EmptyGrid
from multitime_rd.fields import Point, ScalarField, constant_field, make_grid
from multitime_rd.pde import PDESpec, ReactionTerm, canonical_huxley, residual_arrays
from multitime_rd.verify import (Report, convergence_study, observed_orders, residual_report,
                                 summarize)


def test_rational_report_masks_only_near_pole():
    grid = make_grid([[0, 1], [-3, 3]], [50, 200])
    fld = catalog("rational_m1")
    rep = residual_report(canonical_huxley(1), fld, grid, 1e-8)
    assert rep.passed
    assert rep.points_evaluated + rep.points_masked == grid.size
    assert 0 < rep.points_masked < 0.1 * grid.size
    tau, x = grid.split()
    masked = fld.excluded_mask(tau, x)
    assert np.all(np.abs(x[masked] - math.sqrt(2) * tau[0][masked] + 1.0) < 2e-2)


def test_non_solution_fails():
    u = ScalarField(lambda tau, x: tau[0] + 0.0 * x, 1)
    rep = residual_report(canonical_huxley(1), u, make_grid([[0, 1], [-3, 3]], [20, 20]))
    assert not rep.passed
    assert rep.max_abs_residual == pytest.approx(1.0)
    assert rep.worst_point[0] == 0.0


def test_three_time_rational_with_mixed_P():
    P = ArbitraryFunction("sum", parts=(ArbitraryFunction.sine(1.0, [1.0, 0.0]),
                                        ArbitraryFunction.polynomial([[0.0], [0.0, 0.0, 1.0]])))
    rep = residual_report(canonical_huxley(3), catalog("rational_family", m=3, P=P),
                          make_grid([[0, 1]] * 3 + [[-3, 3]], [10, 10, 10, 50]), 1e-8)
    assert rep.passed


def test_fd_method_uses_looser_tolerance():
    rep = residual_report(canonical_huxley(1), catalog("tanh_front"), default_grid("tanh_front"),
                          method="fd")
    assert rep.tolerance == 1e-5 and rep.passed


def test_fd_method_masks_stencils_near_pole():
    grid = make_grid([[0, 1], [-3, 3]], [50, 200])
    fld = catalog("rational_m1")
    jet = residual_report(canonical_huxley(1), fld, grid)
    fd = residual_report(canonical_huxley(1), fld, grid, method="fd")
    assert fd.points_masked >= jet.points_masked
    # away from the pole the difference residual is within its tolerance
    far = residual_report(canonical_huxley(1), fld, make_grid([[0, 1], [1.5, 3]], [20, 40]),
                          method="fd")
    assert far.passed


def test_all_masked_is_empty():
    fld = ScalarField(lambda tau, x: x, 1, singular=lambda tau, x: np.ones(np.shape(x), bool))
    with pytest.raises(EmptyGrid):
        residual_report(canonical_huxley(1), fld, make_grid([[0, 1], [0, 1]], [3, 3]))


def test_report_pass_flag_is_max_against_tolerance():
    rep = Report(1e-8, 1e-9, 10, 0, 1e-8)
    assert rep.passed
    assert not Report(1.1e-8, 1e-9, 10, 0, 1e-8).passed
    keys = list(rep.to_dict())
    assert keys[:3] == ["label", "pass", "tolerance"]


def test_convergence_on_front():
    study = convergence_study(canonical_huxley(1), catalog("tanh_front"), Point((0.0,), 0.0),
                              [1e-2, 5e-3, 2.5e-3])
    errs = [e for _, e in study]
    for a, b in zip(errs, errs[1:]):
        assert 3 <= a / b <= 5
    assert all(1.5 < q < 2.5 for q in observed_orders(study))


def test_convergence_on_constant():
    study = convergence_study(canonical_huxley(1), constant_field(0.3, 1), Point((0.0,), 0.0),
                              [1e-2, 5e-3, 2.5e-3])
    assert all(e <= 1e-12 for _, e in study)


def test_fd_is_exact_on_quadratics():
    pde = PDESpec(1, reaction=ReactionTerm("zero"))
    u = ScalarField(lambda tau, x: x * x, 1)
    for h in (1e-1, 1e-2, 1e-3):
        assert float(residual_arrays(pde, u, (0.0,), 0.7, "fd", h)) == pytest.approx(-2.0, abs=1e-7)


def test_convergence_preconditions():
    with pytest.raises(ValueError):
        convergence_study(canonical_huxley(1), constant_field(0, 1), Point((0.0,), 0.0), [1e-2, 1e-3])
    with pytest.raises(ValueError):
        convergence_study(canonical_huxley(1), constant_field(0, 1), Point((0.0,), 0.0),
                          [1e-3, 1e-2, 1e-4])


@settings(max_examples=25, deadline=None)
@given(st.permutations(list(range(60))))
def test_grid_order_independence(perm):
    rng = np.random.default_rng(1)
    vals = rng.normal(size=60) * np.logspace(-12, 0, 60)
    coords = (np.arange(60.0),)
    a = summarize(vals, coords, 3, 1e-8)
    idx = np.array(perm)
    b = summarize(vals[idx], (coords[0][idx],), 3, 1e-8)
    assert (a.max_abs_residual, a.rms_residual) == (b.max_abs_residual, b.rms_residual)
    assert a.worst_point == b.worst_point


def test_grid_traversal_order_does_not_change_report():
    fld = catalog("exp_m1")
    pde = canonical_huxley(1)
    g1 = make_grid([[0, 2], [-10, 10]], [50, 200])
    r1 = residual_report(pde, fld, g1)
    # x-major traversal of the same points
    tt, xx = np.meshgrid(*g1.axes, indexing="xy")
    vals = residual_arrays(pde, fld, (tt.ravel(),), xx.ravel())
    r2 = summarize(vals, (tt.ravel(), xx.ravel()), 0, 1e-8)
    assert (r1.max_abs_residual, r1.rms_residual) == (r2.max_abs_residual, r2.rms_residual)
