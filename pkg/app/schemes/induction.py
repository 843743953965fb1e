"""
Indução temporal completa: amortecimento com Euler implícito nas pontas,
esquema ADI no restante, estágios de saltos (Strang) e dividendos.

O sentido forward propaga massas nodais (densidade x área da célula) e
aplica, passo a passo, as transpostas exatas das matrizes do backward na
ordem inversa.
"""

import logging
from collections.abc import Callable

import numpy as np

from app.config.errors import GridError, ValidationError
from app.config.model import (
    Direction,
    DividendSchedule,
    JumpSpec,
    ModelParams,
    SchemeConfig,
    SchemeKind,
    validate_config,
)
from app.dividends.operator import (
    DividendOperator,
    build_backward_dividend_op,
    build_forward_dividend_op,
    snap_dividend_dates,
)
from app.governance.logging import RunContext
from app.grid.builder import Grid2D
from app.grid.fields import Field, FieldKind
from app.jumps.operator import (
    JumpOperator,
    jump_exponential,
    jump_operator_for_grid,
    strang_composite_step,
)
from app.operators.assembly import BoundaryMode, OperatorSet, assemble, boundary_mode_for
from app.schemes.steps import adi_step

logger = logging.getLogger(__name__)

POSITIVITY_TOL = 1e-12

StepObserver = Callable[[int, np.ndarray], None]


class _OperatorCache:
    """Operadores por tempo até o vencimento tau; constantes quando phi = 1."""

    def __init__(self, grid: Grid2D, model: ModelParams, maturity: float, mode: BoundaryMode):
        self.grid = grid
        self.model = model
        self.maturity = maturity
        self.mode = mode
        self._cache: dict[float, OperatorSet] = {}

    def __call__(self, tau: float) -> OperatorSet:
        key = 0.0 if self.model.phi is None else round(tau, 14)
        if key not in self._cache:
            self._cache[key] = assemble(self.grid, self.model, self.maturity - tau, self.mode)
        return self._cache[key]


def is_damped(n: int, scheme: SchemeConfig) -> bool:
    """Passo backward n (1..M) usa Euler implícito?"""
    return n <= scheme.damping_start or n > scheme.n_steps - scheme.damping_end


def _check_initial(initial: Field, grid: Grid2D, direction: Direction) -> None:
    expected = FieldKind.DENSITY if direction == Direction.FORWARD else FieldKind.OPTION_VALUE
    if initial.kind != expected:
        raise ValidationError(
            f"campo inicial {initial.kind.value} incompatível com indução {direction.value}"
        )
    if not initial.grid.same_as(grid):
        raise GridError("campo inicial definido sobre outra grade")


def _dividend_ops(
    dividends: DividendSchedule | None,
    scheme: SchemeConfig,
    model: ModelParams,
    grid: Grid2D,
    direction: Direction,
    dividend_mode: str,
) -> dict[int, list[DividendOperator]]:
    ops: dict[int, list[DividendOperator]] = {}
    if not dividends:
        return ops
    for event in snap_dividend_dates(dividends, scheme.maturity, scheme.n_steps, model.r):
        if direction == Direction.BACKWARD:
            op = build_backward_dividend_op(grid, event.d)
        else:
            op = build_forward_dividend_op(grid, event.d, mode=dividend_mode)
        ops.setdefault(event.step, []).append(op)
    return ops


def _apply_dividends(ops: list[DividendOperator], values: np.ndarray, Ns: int) -> np.ndarray:
    for op in ops:
        values = (op.matrix @ values.reshape(Ns, -1)).reshape(values.shape)
    return values


def _diffusion_step(
    kind: SchemeKind,
    direction: Direction,
    ops_at: _OperatorCache,
    scheme: SchemeConfig,
    tau_start: float,
    tau_end: float,
) -> Callable[[np.ndarray], np.ndarray]:
    ops_prev, ops_now = ops_at(tau_start), ops_at(tau_end)
    dt = tau_end - tau_start

    def step(values: np.ndarray) -> np.ndarray:
        return adi_step(kind, direction, ops_prev, ops_now, scheme.theta, dt, values)

    return step


def _time_step(
    n: int,
    scheme: SchemeConfig,
    direction: Direction,
    ops_at: _OperatorCache,
    jump_op: JumpOperator | None,
    values: np.ndarray,
    Ns: int,
) -> np.ndarray:
    dt = scheme.maturity / scheme.n_steps
    kind = SchemeKind.IMPLICIT_EULER if is_damped(n, scheme) else scheme.scheme
    tau0, tau1 = (n - 1) * dt, n * dt
    if jump_op is None:
        return _diffusion_step(kind, direction, ops_at, scheme, tau0, tau1)(values)

    mid = tau0 + 0.5 * dt
    first = _diffusion_step(kind, direction, ops_at, scheme, tau0, mid)
    second = _diffusion_step(kind, direction, ops_at, scheme, mid, tau1)
    E = jump_exponential(jump_op, dt)
    if direction == Direction.FORWARD:
        E = E.T
        first, second = second, first

    def jump_full(v: np.ndarray) -> np.ndarray:
        return (E @ v.reshape(Ns, -1)).reshape(v.shape)

    return strang_composite_step(first, jump_full, values, diffusion_second=second)


def run_induction(
    scheme: SchemeConfig,
    model: ModelParams,
    grid: Grid2D,
    initial: Field,
    direction: Direction,
    jumps: JumpSpec | None = None,
    dividends: DividendSchedule | None = None,
    boundary: str = "split",
    dividend_mode: str = "transpose",
    context: RunContext | None = None,
    on_step: StepObserver | None = None,
) -> Field:
    """
    Executa a indução completa no sentido pedido.

    Backward: payoff em tau = 0 até tau = T (valores da opção em t = 0).
    Forward: densidade em t = 0 até t = T (densidade descontada no vencimento).

    Args:
        scheme: Configuração do esquema
        model: Parâmetros do modelo
        grid: Grade
        initial: Payoff (OPTION_VALUE) ou delta inicial (DENSITY)
        direction: Sentido da indução
        jumps: Saltos de Merton (exige grade log-uniforme)
        dividends: Calendário de dividendos discretos
        boundary: 'split' ou 'shared'
        dividend_mode: 'transpose' (B^T) ou 'shift' no sentido forward
        context: Contexto de execução para rastreamento
        on_step: Chamado após cada passo com (passo, vetor de estado)

    Returns:
        Field terminal do mesmo tipo do inicial

    Raises:
        ValidationError: Configuração ou campo inicial inválidos
        SolverError: Falha numérica em algum estágio
    """
    check = validate_config(scheme)
    _check_initial(initial, grid, direction)
    if context is not None:
        for warning in check.warnings:
            context.log_warning(warning)

    M = scheme.n_steps
    Ns = grid.Ns
    forward = direction == Direction.FORWARD
    mode = boundary_mode_for(boundary, direction)
    ops_at = _OperatorCache(grid, model, scheme.maturity, mode)
    jump_op = None
    if jumps is not None and jumps.lam > 0:
        jump_op = jump_operator_for_grid(jumps, grid, model)
    dividend_ops = _dividend_ops(dividends, scheme, model, grid, direction, dividend_mode)

    areas = grid.cell_areas()
    values = initial.values * areas if forward else initial.values.copy()
    absorbing = ops_at(0.0).dirichlet_mask if forward and mode == BoundaryMode.DENSITY else None
    negative_steps = 0

    for m in range(1, M + 1):
        n = M - m + 1 if forward else m
        if forward and (m - 1) in dividend_ops:
            values = _apply_dividends(dividend_ops[m - 1], values, Ns)

        values = _time_step(n, scheme, direction, ops_at, jump_op, values, Ns)

        if absorbing is not None:
            values[absorbing] = 0.0
        if not forward and (M - n) in dividend_ops:
            # eventos do mesmo nó: o mais tardio primeiro
            values = _apply_dividends(dividend_ops[M - n][::-1], values, Ns)

        if forward and (values / areas).min() < -POSITIVITY_TOL:
            negative_steps += 1
        if context is not None:
            context.log_step(m, "IE" if is_damped(n, scheme) else scheme.scheme.value)
        if on_step is not None:
            on_step(m, values)

    if negative_steps:
        message = f"densidade negativa em {negative_steps} de {M} passos"
        logger.warning(message)
        if context is not None:
            context.log_warning(message, {"negative_steps": negative_steps})

    result = values / areas if forward else values
    logger.debug(f"indução {direction.value} concluída: {M} passos, {scheme.scheme.value}")
    return initial.with_values(result)
