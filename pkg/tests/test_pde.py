import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from multitime_rd import dual
from multitime_rd.errors import BadParameter, ConfigError, MissingCoefficient, SingularPoint
from multitime_rd.fields import Point, ScalarField, constant_field
from multitime_rd.pde import (PDESpec, ReactionTerm, canonical_huxley, huxley_type,
                              reaction_eval, residual)

SQRT2 = math.sqrt(2.0)


def test_huxley_equilibria():
    r = ReactionTerm.huxley()
    assert reaction_eval(r, 0.0) == 0.0 and reaction_eval(r, 1.0) == 0.0
    assert reaction_eval(r, 0.5) == pytest.approx(0.125)


def test_cubic_and_fhn_definitions():
    assert reaction_eval(ReactionTerm.cubic(2, 3), 2.0) == pytest.approx(-16 + 12)
    assert reaction_eval(ReactionTerm.fitzhugh_nagumo(0.25), 0.5) == pytest.approx(0.5 * 0.5 * 0.25)


@pytest.mark.parametrize("u", [0.0, 0.5, 1.0])
def test_fhn_with_zero_delta_is_huxley(u):
    assert reaction_eval(ReactionTerm.fitzhugh_nagumo(0.0), u) == reaction_eval(
        ReactionTerm.huxley(), u)


def test_custom_reaction_with_derivative():
    r = ReactionTerm.custom("u**2 - u**3 + 0.5*u_x")
    assert r.depends_on_derivatives
    assert r(0.5, [2.0]) == pytest.approx(0.125 + 1.0)
    with pytest.raises(ConfigError):
        ReactionTerm.custom("u + v")


def test_reaction_derivative():
    assert ReactionTerm.huxley().derivative(1.0) == pytest.approx(-1.0)
    assert ReactionTerm.huxley().derivative(0.0) == 0.0


def test_unknown_reaction_kind():
    with pytest.raises(BadParameter):
        ReactionTerm("quartic")


@pytest.mark.parametrize("c", [0.0, 1.0])
def test_equilibrium_constants_have_zero_residual(c):
    assert residual(canonical_huxley(1), constant_field(c, 1), Point((0.3,), 0.2)) == 0.0


@pytest.mark.parametrize("c", [0.5, 2.0, -1.0])
def test_constant_residual_is_minus_f(c):
    r = residual(canonical_huxley(2), constant_field(c, 2), Point((0.1, 0.2), 0.0))
    assert r == pytest.approx(-(c * c - c ** 3))


def test_rational_solution_residual():
    u = ScalarField(lambda tau, x: SQRT2 / (x - SQRT2 * tau[0] + 1.0), 1)
    assert abs(residual(canonical_huxley(1), u, Point((0.0,), 0.0))) < 1e-10


def test_jet_and_fd_residuals_agree():
    u = ScalarField(lambda tau, x: dual.sin(x) * dual.exp(-tau[0]), 1)
    p = Point((0.2,), 0.4)
    pde = canonical_huxley(1)
    assert abs(residual(pde, u, p, "jet") - residual(pde, u, p, "fd")) < 1e-5


def test_singular_point_propagates():
    u = ScalarField(lambda tau, x: 1 / x, 1, singular=lambda tau, x: np.abs(x) < 1e-3)
    with pytest.raises(SingularPoint):
        residual(canonical_huxley(1), u, Point((0.0,), 0.0))


def test_general_form_needs_coefficients():
    with pytest.raises(MissingCoefficient):
        PDESpec(1, form_tag="general")


def test_canonical_rejects_convection():
    with pytest.raises(BadParameter):
        PDESpec(1, k=1.0, form_tag="canonical")


def test_general_form_uses_time_coefficients():
    # u = t1 in t1 u_t1 = u_xx - u^3 + u^2: residual t1 - (t1^2 - t1^3)
    pde = huxley_type(1, 1.0, 1.0, 1.0)
    u = ScalarField(lambda tau, x: tau[0] + 0.0 * x, 1)
    t = 0.7
    assert residual(pde, u, Point((t,), 0.0)) == pytest.approx(t - (t * t - t ** 3))


def test_convective_residual_sign():
    # u = x: LHS 0, RHS = -k u_x + f = -k + (x^2 - x^3)
    pde = PDESpec(1, k=2.0, form_tag="canonical_convective")
    u = ScalarField(lambda tau, x: x, 1)
    assert residual(pde, u, Point((0.0,), 0.0)) == pytest.approx(2.0)


def test_third_order_residual():
    pde = PDESpec(1, n=3, reaction=ReactionTerm("zero"))
    u = ScalarField(lambda tau, x: x ** 3 + tau[0], 1)
    assert residual(pde, u, Point((0.0,), 1.0)) == pytest.approx(1.0 - 6.0)


def test_pde_roundtrip_through_dict():
    pde = PDESpec.from_dict({"m": 2, "h": ["t1", "t2"], "mu": 2,
                             "reaction": {"kind": "cubic", "params": {"a": 1, "b": 2}}})
    again = PDESpec.from_dict(pde.to_dict())
    assert again.to_dict() == pde.to_dict()
    p = Point((0.5, 1.5), 0.3)
    u = ScalarField(lambda tau, x: dual.sin(x + tau[0] * tau[1]), 2)
    assert residual(pde, u, p) == residual(again, u, p)


@settings(max_examples=30, deadline=None)
@given(alpha=st.floats(-5, 5), x=st.floats(-2, 2), t=st.floats(0, 2))
def test_linear_part_is_linear(alpha, x, t):
    pde = PDESpec(1, reaction=ReactionTerm("zero"))
    u = ScalarField(lambda tau, x: dual.sin(x) * dual.exp(-0.5 * tau[0]) + x * x, 1)
    au = u * alpha
    p = Point((t,), x)
    assert residual(pde, au, p) == pytest.approx(alpha * residual(pde, u, p), abs=1e-12)
