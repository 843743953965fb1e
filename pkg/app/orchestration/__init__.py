"""Comandos do motor expostos pela CLI."""

from app.orchestration.commands import (
    COMMANDS,
    CommandResult,
    EngineProblem,
    build_problem,
    cmd_consistency_check,
    cmd_density,
    cmd_price,
    cmd_theta_sweep,
    density_forward,
    price_backward,
    price_forward,
    strike_prices,
    transpose_residuals,
)

__all__ = [
    "COMMANDS",
    "CommandResult",
    "EngineProblem",
    "build_problem",
    "cmd_consistency_check",
    "cmd_density",
    "cmd_price",
    "cmd_theta_sweep",
    "density_forward",
    "price_backward",
    "price_forward",
    "strike_prices",
    "transpose_residuals",
]
