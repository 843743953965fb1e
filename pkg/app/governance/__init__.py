"""Módulo de governança e observabilidade."""

from app.governance.logging import RunContext, setup_logging

__all__ = [
    "RunContext",
    "setup_logging",
]
