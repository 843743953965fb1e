"""
Fatorações esparsas reutilizadas pelos passos ADI e pelo Euler implícito.
A mesma fatoração LU resolve M x = b (backward) e M^T x = b (forward).
"""

import logging
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from app.config.errors import SolverError
from app.operators.assembly import OperatorSet

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-8


class _Factor:
    """LU de I - c A com solução direta ou transposta."""

    def __init__(self, A: sp.spmatrix, c: float, label: str):
        n = A.shape[0]
        self.matrix = (sp.identity(n, format="csc") - c * A).tocsc()
        self.label = label
        try:
            self._lu = splu(self.matrix)
        except RuntimeError as e:
            raise SolverError(f"fatoração singular de {label}: {e}") from e

    def solve(self, b: np.ndarray, transpose: bool = False) -> np.ndarray:
        x = self._lu.solve(np.ascontiguousarray(b), trans="T" if transpose else "N")
        if not np.all(np.isfinite(x)):
            raise SolverError(f"solução não finita em {self.label}")
        return x

    def residual(self, x: np.ndarray, b: np.ndarray, transpose: bool = False) -> float:
        M = self.matrix.T if transpose else self.matrix
        scale = max(float(np.abs(b).max(initial=0.0)), 1.0)
        return float(np.abs(M @ x - b).max(initial=0.0)) / scale


class DirectionalSolver:
    """Fatorações de M1 = I - c F1 e M2 = I - c F2."""

    def __init__(self, ops: OperatorSet, c: float):
        self.c = c
        self.M1 = _Factor(ops.F1, c, "M1")
        self.M2 = _Factor(ops.F2, c, "M2")

    def solve1(self, b: np.ndarray, transpose: bool = False) -> np.ndarray:
        return self.M1.solve(b, transpose)

    def solve2(self, b: np.ndarray, transpose: bool = False) -> np.ndarray:
        return self.M2.solve(b, transpose)


@lru_cache(maxsize=32)
def directional_solver(ops: OperatorSet, c: float) -> DirectionalSolver:
    """Fatorações em cache por (conjunto de operadores, theta*dt)."""
    logger.debug(f"fatorando M1, M2 com theta*dt={c:.6g}")
    return DirectionalSolver(ops, c)


@lru_cache(maxsize=16)
def implicit_solver(ops: OperatorSet, dt: float) -> _Factor:
    """Fatoração de I - dt F para o Euler implícito."""
    logger.debug(f"fatorando I - dt F com dt={dt:.6g}")
    return _Factor(ops.F, dt, "I - dt F")


def clear_factor_cache() -> None:
    directional_solver.cache_clear()
    implicit_solver.cache_clear()
