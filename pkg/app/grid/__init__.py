"""Grades espaciais e campos discretos."""

from app.grid.builder import Grid2D, GridSpec, build_grid, build_log_grid, export_grid_csv
from app.grid.fields import (
    Field,
    FieldKind,
    Payoff,
    cell_average_payoff,
    discretize_delta,
    integrate_against,
)

__all__ = [
    "Grid2D",
    "GridSpec",
    "build_grid",
    "build_log_grid",
    "export_grid_csv",
    "Field",
    "FieldKind",
    "Payoff",
    "cell_average_payoff",
    "discretize_delta",
    "integrate_against",
]
