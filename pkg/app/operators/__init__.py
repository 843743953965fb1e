"""Operadores de difusão semi-discretizados e diagnósticos."""

from app.operators.assembly import (
    BoundaryMode,
    OperatorSet,
    assemble,
    boundary_mode_for,
    export_operator_coo,
    transpose,
)
from app.operators.checks import MMatrixReport, check_m_matrix
from app.operators.stencils import (
    MixedStencil,
    convection_diffusion_weights,
    mixed_stencil_weights,
)

__all__ = [
    "BoundaryMode",
    "OperatorSet",
    "assemble",
    "boundary_mode_for",
    "export_operator_coo",
    "transpose",
    "MMatrixReport",
    "check_m_matrix",
    "MixedStencil",
    "convection_diffusion_weights",
    "mixed_stencil_weights",
]
