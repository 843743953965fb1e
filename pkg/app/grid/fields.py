"""
Campos sobre a grade: valores de opção (backward) e densidades (forward).
Inclui a discretização do payoff por média de célula e do delta de Dirac inicial.
"""

from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum

import numpy as np

from app.config.errors import GridError
from app.config.model import ModelParams
from app.grid.builder import Grid2D

PayoffFunction = Callable[[np.ndarray], np.ndarray]


class FieldKind(Enum):
    """Semântica do vetor de valores."""
    OPTION_VALUE = "option_value"
    DENSITY = "density"


@dataclass
class Field:
    """Vetor de valores de comprimento Ns*Nv, ordenado por linha em (i_s, i_v)."""
    values: np.ndarray
    kind: FieldKind
    grid: Grid2D

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).ravel()
        if self.values.size != self.grid.size:
            raise GridError(
                f"campo com {self.values.size} valores para grade de {self.grid.size} nós"
            )

    def as_matrix(self) -> np.ndarray:
        """Visão (Ns, Nv) dos valores."""
        return self.values.reshape(self.grid.shape)

    def with_values(self, values: np.ndarray) -> "Field":
        return Field(values, self.kind, self.grid)

    def copy(self) -> "Field":
        return Field(self.values.copy(), self.kind, self.grid)

    def value_at(self, i: int, j: int) -> float:
        return float(self.values[self.grid.flat_index(i, j)])


@dataclass(frozen=True)
class Payoff:
    """Payoff vanilla; kind 'call' ou 'put'."""
    kind: str
    strike: float

    def __call__(self, S: np.ndarray) -> np.ndarray:
        S = np.asarray(S, dtype=float)
        if self.kind == "call":
            return np.maximum(S - self.strike, 0.0)
        if self.kind == "put":
            return np.maximum(self.strike - S, 0.0)
        raise ValueError(f"payoff desconhecido: {self.kind}")

    def integral(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Integral exata de a até b (payoff linear por partes)."""
        K = self.strike
        if self.kind == "call":
            return 0.5 * (np.maximum(b - K, 0.0) ** 2 - np.maximum(a - K, 0.0) ** 2)
        return 0.5 * (np.maximum(K - a, 0.0) ** 2 - np.maximum(K - b, 0.0) ** 2)


def _cell_bounds(nodes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mid = 0.5 * (nodes[:-1] + nodes[1:])
    lower = np.concatenate(([nodes[0]], mid))
    upper = np.concatenate((mid, [nodes[-1]]))
    return lower, upper


def _gauss_average(payoff: PayoffFunction, a: float, b: float) -> float:
    points, weights = np.polynomial.legendre.leggauss(5)
    s = 0.5 * (b - a) * points + 0.5 * (a + b)
    return float(0.5 * np.dot(weights, payoff(s)))


def cell_average_payoff(payoff: PayoffFunction, grid: Grid2D, strike: float) -> Field:
    """
    Discretiza o payoff trocando o valor nodal pela média da célula nos nós
    cuja célula contém o strike.

    Para Payoff (call/put) a integral é exata; para outras funções usa
    quadratura de Gauss com 5 pontos. Fora da célula do strike o payoff é
    avaliado pontualmente.

    Args:
        payoff: Payoff ou função S -> valor
        grid: Grade
        strike: Ponto de não suavidade

    Returns:
        Field OPTION_VALUE replicado em todas as linhas de v
    """
    s = grid.s_nodes
    nodal = np.asarray(payoff(s), dtype=float).copy()
    lower, upper = _cell_bounds(s)
    inside = np.flatnonzero((lower < strike) & (strike < upper))
    for i in inside:
        a, b = lower[i], upper[i]
        if isinstance(payoff, Payoff):
            nodal[i] = float(payoff.integral(a, b)) / (b - a)
        else:
            nodal[i] = _gauss_average(payoff, a, b)
    values = np.repeat(nodal, grid.Nv)
    return Field(values, FieldKind.OPTION_VALUE, grid)


def discretize_delta(grid: Grid2D, model: ModelParams) -> Field:
    """
    Delta de Dirac em (S0, v0) com integral discreta unitária.

    Raises:
        GridError: (S0, v0) fora dos nós da grade
    """
    S0, v0 = model.S0, model.v0
    i0 = np.flatnonzero(np.isclose(grid.s_nodes, S0, rtol=1e-12, atol=1e-12))
    j0 = np.flatnonzero(np.isclose(grid.v_nodes, v0, rtol=1e-12, atol=1e-12))
    if i0.size == 0 or j0.size == 0:
        raise GridError(f"(S0, v0) = ({S0}, {v0}) não está sobre a grade")
    i, j = int(i0[0]), int(j0[0])
    values = np.zeros(grid.size)
    values[grid.flat_index(i, j)] = 1.0 / (grid.s_cell_widths[i] * grid.v_cell_widths[j])
    return Field(values, FieldKind.DENSITY, grid)


def integrate_against(density: Field, values: Field, grid: Grid2D) -> float:
    """
    Integral discreta ponderada por célula de density * values.

    Raises:
        GridError: Campos definidos sobre grades diferentes
    """
    for f in (density, values):
        if not f.grid.same_as(grid):
            raise GridError("campos e grade incompatíveis na integração")
    return float(np.sum(density.values * values.values * grid.cell_areas()))
