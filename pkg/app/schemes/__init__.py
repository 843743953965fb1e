"""Esquemas ADI backward/forward, Euler implícito e indução temporal."""

from app.schemes.induction import is_damped, run_induction
from app.schemes.steps import (
    SchemeCoefficients,
    adi_step,
    hv_backward_step,
    hv_forward_step,
    implicit_euler_step,
    mcs_backward_step,
    mcs_forward_step,
    scheme_coefficients,
)
from app.schemes.transition import (
    TransitionMatrix,
    assemble_transition_matrix,
    spectral_radius,
)

__all__ = [
    "is_damped",
    "run_induction",
    "SchemeCoefficients",
    "adi_step",
    "hv_backward_step",
    "hv_forward_step",
    "implicit_euler_step",
    "mcs_backward_step",
    "mcs_forward_step",
    "scheme_coefficients",
    "TransitionMatrix",
    "assemble_transition_matrix",
    "spectral_radius",
]
