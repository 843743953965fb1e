"""
Gerador de saltos de Merton discretizado na grade uniforme de log-spot
e o estágio exponencial e^{dt J} do splitting de Strang.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import linalg

from app.config.errors import GridError, SolverError
from app.config.model import Direction, JumpSpec, ModelParams, levy_drift
from app.grid.builder import Grid2D
from app.grid.fields import Field, FieldKind

logger = logging.getLogger(__name__)

MIN_TRUNCATION_SIGMAS = 8.0


@dataclass(frozen=True, eq=False)
class JumpOperator:
    """
    Matriz J sobre o eixo de log-spot.

    matrix tem dimensão len(x_nodes); embedded acrescenta o nó S = 0 (linha
    e coluna nulas) para atuar sobre o eixo S da grade 2D.
    """
    matrix: np.ndarray
    x_nodes: np.ndarray
    compensator: float
    row_drift: np.ndarray

    @property
    def embedded(self) -> np.ndarray:
        n = self.matrix.shape[0]
        out = np.zeros((n + 1, n + 1))
        out[1:, 1:] = self.matrix
        return out


def _uniform_step(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 3:
        raise GridError("grade de log-spot precisa de ao menos 3 nós")
    steps = np.diff(x)
    h = float(steps.mean())
    if h <= 0 or not np.allclose(steps, h, rtol=1e-9, atol=0.0):
        raise GridError("o gerador de saltos exige grade uniforme em log-spot")
    return h


def build_jump_operator(jumps: JumpSpec, x_grid: np.ndarray, model: ModelParams | None = None) -> JumpOperator:
    """
    Discretiza o gerador de saltos com compensador.

    Os pesos fora da diagonal são as massas de nu nas células de destino
    (saltos além da grade vão para o nó da borda). O termo do compensador
    usa diferença de um lado com coeficiente de ajuste exponencial, de modo
    que J e^x = 0 nas linhas interiores e J continua Metzler. A diagonal
    zera a soma de cada linha.

    Args:
        jumps: Especificação dos saltos de Merton
        x_grid: Grade uniforme em x = log(S/S0)
        model: Parâmetros do modelo (para o compensador contínuo de referência)

    Returns:
        JumpOperator

    Raises:
        GridError: Grade não uniforme
    """
    x = np.asarray(x_grid, dtype=float)
    h = _uniform_step(x)
    n = x.size
    if jumps.truncation < MIN_TRUNCATION_SIGMAS * jumps.sigma_j:
        logger.warning(
            f"truncamento {jumps.truncation} cobre menos de {MIN_TRUNCATION_SIGMAS} desvios do log-salto"
        )

    J = np.zeros((n, n))
    drift = np.zeros(n)
    if jumps.lam == 0:
        return JumpOperator(J, x, 0.0, drift)

    edges = np.concatenate(([-np.inf], 0.5 * (x[:-1] + x[1:]), [np.inf]))
    for i in range(n):
        mass = jumps.cell_mass(edges[:-1] - x[i], edges[1:] - x[i])
        mass[i] = 0.0
        J[i] = mass
        drift[i] = float(np.dot(mass, np.expm1(x - x[i])))

    # compensador -omega d/dx em upwind com ajuste exponencial
    for i in range(1, n - 1):
        omega = drift[i]
        if omega > 0:
            J[i, i - 1] += omega / -np.expm1(-h)
        elif omega < 0:
            J[i, i + 1] += -omega / np.expm1(h)

    J[np.diag_indices(n)] = 0.0
    J[np.diag_indices(n)] = -J.sum(axis=1)

    compensator = levy_drift(model, jumps)
    logger.debug(f"operador de saltos: n={n}, h={h:.4g}, compensador={compensator:.6e}")
    return JumpOperator(J, x, compensator, drift)


@lru_cache(maxsize=8)
def _exponential(op: JumpOperator, dt: float) -> np.ndarray:
    E = linalg.expm(dt * op.embedded)
    if not np.all(np.isfinite(E)):
        raise SolverError(f"exponencial do operador de saltos não finita para dt={dt}")
    return E


def jump_exponential(op: JumpOperator, dt: float) -> np.ndarray:
    """e^{dt J} embutida no eixo S (escalonamento e quadratura de Padé)."""
    if dt < 0:
        raise SolverError(f"dt deve ser não negativo (recebido {dt})")
    return _exponential(op, float(dt))


def _apply_along_s(E: np.ndarray, values: np.ndarray, Ns: int) -> np.ndarray:
    block = values.reshape(Ns, -1)
    return (E @ block).reshape(values.shape)


def apply_jump_exponential(
    op: JumpOperator,
    dt: float,
    V: Field | np.ndarray,
    direction: Direction = Direction.BACKWARD,
) -> Field | np.ndarray:
    """
    Aplica e^{dt J} (backward) ou sua transposta (forward) em cada linha de v.

    Args:
        op: Operador de saltos
        dt: Passo de tempo
        V: Field ou array ordenado por (i_s, i_v), com colunas extras opcionais
        direction: Sentido

    Returns:
        Mesmo tipo de V
    """
    E = jump_exponential(op, dt)
    if direction == Direction.FORWARD:
        E = E.T
    Ns = E.shape[0]
    if not isinstance(V, Field):
        return _apply_along_s(E, np.asarray(V, dtype=float), Ns)
    if V.grid.Ns != Ns:
        raise GridError(f"operador de saltos com {Ns} nós em S para grade com {V.grid.Ns}")
    if direction == Direction.FORWARD and V.kind == FieldKind.DENSITY:
        areas = V.grid.cell_areas()
        return V.with_values(_apply_along_s(E, V.values * areas, Ns) / areas)
    return V.with_values(_apply_along_s(E, V.values, Ns))


def strang_composite_step(
    diffusion_half: Callable,
    jump_full: Callable,
    V,
    diffusion_second: Callable | None = None,
):
    """
    Composição de Strang: meio passo de difusão, salto completo, meio passo.

    No sentido forward o chamador passa os meios passos transpostos em ordem
    trocada (diffusion_half = transposto do segundo meio passo backward).

    Args:
        diffusion_half: Primeiro meio passo de difusão
        jump_full: Estágio de salto completo
        V: Valores ou massas
        diffusion_second: Segundo meio passo (padrão: diffusion_half)

    Returns:
        Resultado da composição
    """
    second = diffusion_second or diffusion_half
    return second(jump_full(diffusion_half(V)))


def jump_operator_for_grid(jumps: JumpSpec, grid: Grid2D, model: ModelParams) -> JumpOperator:
    """
    Gerador de saltos sobre os nós S > 0 de uma grade log-uniforme.

    Raises:
        GridError: Grade não log-uniforme
    """
    if not grid.log_uniform:
        raise GridError("saltos exigem grade log-uniforme em S (build_log_grid)")
    return build_jump_operator(jumps, grid.x_nodes, model)
