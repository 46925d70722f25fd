"""Exact solutions of multitime reaction-diffusion equations, built by
differential constraints and machine-checked by residuals and simulation."""

__version__ = "0.1.0"

from .constraints import (ArbitraryFunction, build_constraint_solution, build_proposition_form,
                          catalog, catalog_entry, constraint_residual, omega_coords,
                          symmetry_orbit)
from .fields import Grid, JetValue, Point, ScalarField, eval_jet, finite_diff_jet, make_grid
from .pde import PDESpec, ReactionTerm, reaction_eval, residual
from .simulate import march, measure_front_speed, reduce_to_characteristic
from .transforms import (FirstIntegral, Transformation, characteristic_transform,
                         log_transform, pullback_solution, scaling_normalize,
                         shift_to_wave_frame, time_rescale, verify_transform_system)
from .verify import Report, convergence_study, residual_report
from .wave import Profile, WaveProblem, front_shoot, integrate_profile

__all__ = [
    "ArbitraryFunction", "FirstIntegral", "Grid", "JetValue", "PDESpec", "Point", "Profile",
    "ReactionTerm", "Report", "ScalarField", "Transformation", "WaveProblem",
    "build_constraint_solution", "build_proposition_form", "catalog", "catalog_entry",
    "characteristic_transform", "constraint_residual", "convergence_study", "eval_jet",
    "finite_diff_jet", "front_shoot", "integrate_profile", "log_transform", "make_grid",
    "march", "measure_front_speed", "omega_coords", "pullback_solution", "reaction_eval",
    "reduce_to_characteristic", "residual", "residual_report", "scaling_normalize",
    "shift_to_wave_frame", "symmetry_orbit", "time_rescale", "verify_transform_system",
]
