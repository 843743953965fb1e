"""
Ajuste de dividendos discretos por deslocamento da grade em S.
B (backward) interpola V em S - D(S), com D(S) = min(d, S). O operador
forward padrão é B^T; o modo 'shift' monta a matriz de deslocamento da
densidade diretamente e reporta a diferença para B^T.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from app.config.errors import GridError, ValidationError
from app.config.model import Direction, DividendSchedule
from app.grid.builder import Grid2D
from app.grid.fields import Field, FieldKind

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DividendOperator:
    """Matriz esparsa sobre os nós de S aplicada a cada linha de v."""
    matrix: sp.csr_matrix
    direction: Direction
    d: float
    grid: Grid2D
    gap_to_transpose: float = 0.0


def _interpolation_weights(nodes: np.ndarray, targets: np.ndarray) -> sp.csr_matrix:
    """Linhas de interpolação linear por partes dos nós nos alvos."""
    n = nodes.size
    targets = np.clip(targets, nodes[0], nodes[-1])
    k = np.clip(np.searchsorted(nodes, targets, side="right") - 1, 0, n - 2)
    h = nodes[k + 1] - nodes[k]
    upper = (targets - nodes[k]) / h
    lower = 1.0 - upper
    rows = np.arange(targets.size)
    matrix = sp.coo_matrix(
        (np.concatenate((lower, upper)), (np.concatenate((rows, rows)), np.concatenate((k, k + 1)))),
        shape=(targets.size, n),
    ).tocsr()
    matrix.eliminate_zeros()
    return matrix


def _check_amount(d: float) -> None:
    if d < 0:
        raise ValidationError(f"dividendo negativo: {d}")


def build_backward_dividend_op(grid: Grid2D, d: float) -> DividendOperator:
    """
    Operador B: (B V)_j = V interpolado em max(S_j - d, 0).

    Com d menor que o passo local, B é bidiagonal inferior; para d maior o
    par de pesos desloca-se floor(d / h) células. B_00 = 1 e as linhas com
    S_j <= d apontam para S = 0.

    Args:
        grid: Grade
        d: Valor do dividendo por ação

    Returns:
        DividendOperator BACKWARD (linhas somam 1)

    Raises:
        ValidationError: d negativo
    """
    _check_amount(d)
    S = grid.s_nodes
    B = _interpolation_weights(S, np.maximum(S - d, 0.0))
    return DividendOperator(B, Direction.BACKWARD, d, grid)


def _shift_operator(grid: Grid2D, d: float) -> sp.csr_matrix:
    """Deslocamento da densidade: p(S + d) com densidade nula acima de S_max."""
    S = grid.s_nodes
    n = S.size
    targets = S + d
    inside = targets <= S[-1]
    pulled = _interpolation_weights(S, np.where(inside, targets, S[-1])).tolil()

    for j in np.flatnonzero(~inside):
        pulled.rows[j], pulled.data[j] = [], []
        excess = targets[j] - S[-1]
        last_step = S[-1] - S[-2]
        if excess < last_step:
            pulled[j, n - 1] = 1.0 - excess / last_step

    # nó S = 0 acumula a massa de S <= d (pagamento limitado a S)
    pulled.rows[0], pulled.data[0] = [], []
    covered = S <= d
    for k in np.flatnonzero(covered):
        pulled[0, k] = 1.0
    k = int(np.argmin(covered)) if not covered.all() else None
    if k is not None and k > 0:
        pulled[0, k] = (d - S[k - 1]) / (S[k] - S[k - 1])
    return pulled.tocsr()


def build_forward_dividend_op(grid: Grid2D, d: float, mode: str = "transpose") -> DividendOperator:
    """
    Operador forward do dividendo.

    Args:
        grid: Grade
        d: Valor do dividendo
        mode: 'transpose' usa B^T (consistência exata); 'shift' monta o
            deslocamento bidiagonal superior da densidade

    Returns:
        DividendOperator FORWARD com gap_to_transpose = max|F - B^T|
    """
    _check_amount(d)
    BT = build_backward_dividend_op(grid, d).matrix.T.tocsr()
    if mode == "transpose":
        return DividendOperator(BT, Direction.FORWARD, d, grid)
    if mode != "shift":
        raise ValueError(f"modo de dividendo desconhecido: {mode}")
    F = _shift_operator(grid, d)
    diff = (F - BT).tocoo()
    gap = float(np.abs(diff.data).max(initial=0.0))
    if gap > 0:
        logger.info(f"dividendo d={d}: diferença entre F e B^T = {gap:.3e}")
    return DividendOperator(F, Direction.FORWARD, d, grid, gap_to_transpose=gap)


def apply_dividend(op: DividendOperator, V: Field | np.ndarray) -> Field | np.ndarray:
    """
    Aplica o operador ao longo de S em cada linha de v.

    Campos de densidade passam por massas nodais, de modo que
    <B^T p, v> = <p, B v> no produto interno ponderado por célula.

    Raises:
        GridError: Campo definido sobre outra grade
    """
    Ns = op.grid.Ns

    def apply(values: np.ndarray) -> np.ndarray:
        return (op.matrix @ values.reshape(Ns, -1)).reshape(values.shape)

    if not isinstance(V, Field):
        return apply(np.asarray(V, dtype=float))
    if not V.grid.same_as(op.grid):
        raise GridError("operador de dividendo e campo em grades diferentes")
    if V.kind == FieldKind.DENSITY:
        areas = V.grid.cell_areas()
        return V.with_values(apply(V.values * areas) / areas)
    return V.with_values(apply(V.values))


@dataclass(frozen=True)
class SnappedDividend:
    """Dividendo movido para o nó temporal step (tempo de calendário step * dt)."""
    step: int
    d: float
    t_original: float


def snap_dividend_dates(
    schedule: DividendSchedule,
    maturity: float,
    n_steps: int,
    r: float,
) -> list[SnappedDividend]:
    """
    Move cada data ex-dividendo para o nó temporal mais próximo.

    O valor é capitalizado (ou descontado) à taxa r pelo deslocamento.

    Args:
        schedule: Calendário de dividendos
        maturity: Maturidade T
        n_steps: Número de passos
        r: Taxa de juros

    Returns:
        Lista ordenada de SnappedDividend
    """
    schedule.validate_against(maturity)
    dt = maturity / n_steps
    snapped = []
    for t, d in schedule.events:
        step = int(np.clip(round(t / dt), 1, n_steps - 1))
        t_node = step * dt
        amount = d * np.exp(r * (t_node - t))
        if not np.isclose(t_node, t, rtol=0.0, atol=1e-12):
            logger.warning(f"dividendo em t={t} movido para t={t_node:.6g}; d={d} -> {amount:.6g}")
        snapped.append(SnappedDividend(step, float(amount), t))
    return snapped
