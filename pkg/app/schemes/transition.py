"""
Matrizes de transição densas dos passos temporais (oráculo para grades pequenas).
Duas construções independentes: composição fechada dos estágios e sondagem
do passo com os vetores da base canônica.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from scipy import linalg

from app.config.errors import SolverError
from app.config.model import Direction, SchemeConfig, SchemeKind
from app.config.settings import max_dense_size
from app.operators.assembly import OperatorSet
from app.schemes.steps import adi_step

logger = logging.getLogger(__name__)


@dataclass
class TransitionMatrix:
    """Matriz densa R de um passo, com o sentido a que se refere."""
    matrix: np.ndarray
    direction: Direction

    def __post_init__(self):
        if not np.all(np.isfinite(self.matrix)):
            raise SolverError("matriz de transição com entradas não finitas")

    @property
    def T(self) -> np.ndarray:
        return self.matrix.T

    def to_csv(self, path: str | Path) -> None:
        """Grava a matriz densa em CSV (uma linha da matriz por linha)."""
        pd.DataFrame(self.matrix).to_csv(path, index=False, header=False, float_format="%.17g")


def _dense_parts(ops: OperatorSet) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    return ops.F.toarray(), ops.F1.toarray(), ops.F2.toarray()


def _closed_form(
    kind: SchemeKind,
    theta: float,
    ops_prev: OperatorSet,
    ops_now: OperatorSet,
    dt: float,
) -> np.ndarray:
    n = ops_now.size
    eye = np.eye(n)
    Fp, F1p, F2p = _dense_parts(ops_prev)
    Fn, F1n, F2n = _dense_parts(ops_now)

    if kind == SchemeKind.IMPLICIT_EULER:
        return linalg.solve(eye - dt * Fn, eye)

    M1 = eye - theta * dt * F1n
    M2 = eye - theta * dt * F2n
    R2 = linalg.solve(M2, linalg.solve(M1, eye + dt * (Fp - theta * F1p)) - theta * dt * F2p)

    if kind == SchemeKind.HV:
        inner = eye + 0.5 * dt * Fp + dt * (0.5 * Fn - theta * F1n) @ R2
        return linalg.solve(M2, linalg.solve(M1, inner) - theta * dt * F2n @ R2)

    Gp, Gn = F1p + F2p, F1n + F2n
    inner = (
        eye
        + dt * (0.5 * Fp + theta * Gp)
        + dt * (0.5 * Fn - theta * Gn) @ R2
        - theta * dt * F1n
    )
    return linalg.solve(M2, linalg.solve(M1, inner) - theta * dt * F2n)


def assemble_transition_matrix(
    scheme: SchemeConfig,
    ops_prev: OperatorSet,
    ops_now: OperatorSet,
    dt: float,
    method: str = "closed_form",
    direction: Direction = Direction.BACKWARD,
) -> TransitionMatrix:
    """
    Monta a matriz densa de um passo do esquema.

    Args:
        scheme: Configuração (tipo de esquema e theta)
        ops_prev: Operadores em tau_{n-1}
        ops_now: Operadores em tau_n
        dt: Passo de tempo
        method: 'closed_form' (composição dos estágios) ou 'basis' (passo aplicado às colunas da identidade)
        direction: BACKWARD devolve R; FORWARD devolve a matriz do passo forward

    Returns:
        TransitionMatrix

    Raises:
        SolverError: Dimensão acima de ENGINE_MAX_DENSE_SIZE
    """
    n = ops_now.size
    limit = max_dense_size()
    if n > limit:
        raise SolverError(f"matriz densa {n}x{n} excede o limite {limit}")

    if method == "closed_form":
        R = _closed_form(scheme.scheme, scheme.theta, ops_prev, ops_now, dt)
        matrix = R if direction == Direction.BACKWARD else R.T.copy()
    elif method == "basis":
        matrix = adi_step(scheme.scheme, direction, ops_prev, ops_now, scheme.theta, dt, np.eye(n))
    else:
        raise ValueError(f"método desconhecido: {method}")

    logger.debug(f"matriz de transição {scheme.scheme.value}/{direction.value} via {method}: {n}x{n}")
    return TransitionMatrix(np.asarray(matrix), direction)


def spectral_radius(R: TransitionMatrix | np.ndarray) -> float:
    """Maior módulo dos autovalores de R."""
    matrix = R.matrix if isinstance(R, TransitionMatrix) else np.asarray(R)
    return float(np.max(np.abs(linalg.eigvals(matrix))))
