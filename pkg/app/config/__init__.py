"""Modelos de domínio, erros e configuração do motor."""

from app.config.errors import EngineError, GridError, SolverError, ValidationError
from app.config.model import (
    STABILITY_THETA,
    ConfigCheck,
    Direction,
    DividendSchedule,
    JumpSpec,
    ModelParams,
    SchemeConfig,
    SchemeKind,
    levy_drift,
    validate_config,
)

__all__ = [
    "EngineError",
    "GridError",
    "SolverError",
    "ValidationError",
    "STABILITY_THETA",
    "ConfigCheck",
    "Direction",
    "DividendSchedule",
    "JumpSpec",
    "ModelParams",
    "SchemeConfig",
    "SchemeKind",
    "levy_drift",
    "validate_config",
]
