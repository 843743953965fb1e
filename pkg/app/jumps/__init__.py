"""Estágio de saltos de Merton (gerador discreto e exponencial)."""

from app.jumps.operator import (
    JumpOperator,
    apply_jump_exponential,
    build_jump_operator,
    jump_exponential,
    jump_operator_for_grid,
    strang_composite_step,
)

__all__ = [
    "JumpOperator",
    "apply_jump_exponential",
    "build_jump_operator",
    "jump_exponential",
    "jump_operator_for_grid",
    "strang_composite_step",
]
