"""Constrained FE spaces, assembly kernels and saddle solvers."""

from .forms import (
    assemble_form,
    assemble_load,
    evaluate_field,
    export_operator,
    field_norms,
    gaffney_ratio,
    ibp_residual,
    integrate_field,
    integrate_field_on_tets,
    mean_vector,
    surface_cross_integral,
)
from .solve import SaddleFactorization, SaddleResult, SaddleSystem, solve_saddle
from .spaces import Field, Space, build_space, tangent_frame

__all__ = [
    "Field",
    "SaddleFactorization",
    "SaddleResult",
    "SaddleSystem",
    "Space",
    "assemble_form",
    "assemble_load",
    "build_space",
    "evaluate_field",
    "export_operator",
    "field_norms",
    "gaffney_ratio",
    "ibp_residual",
    "integrate_field",
    "integrate_field_on_tets",
    "mean_vector",
    "solve_saddle",
    "surface_cross_integral",
    "tangent_frame",
]
