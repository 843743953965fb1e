"""
Comandos do motor: preço único, densidade forward, varredura em theta e
verificação de consistência forward/backward.
Cada comando recebe as configurações validadas e um RunContext opcional e
devolve tabelas pandas; a escrita em disco fica com a CLI.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
import scipy.sparse as sp

from app.config.errors import GridError, ValidationError
from app.config.model import (
    Direction,
    DividendSchedule,
    JumpSpec,
    ModelParams,
    SchemeConfig,
    SchemeKind,
)
from app.config.settings import EngineSettings
from app.governance.logging import RunContext
from app.grid.builder import Grid2D, build_grid
from app.grid.fields import (
    Field,
    Payoff,
    cell_average_payoff,
    discretize_delta,
    integrate_against,
)
from app.operators.assembly import BoundaryMode, OperatorSet, assemble
from app.operators.checks import check_m_matrix
from app.pricing.benchmark import fft_price
from app.pricing.report import error_report
from app.schemes.induction import run_induction
from app.schemes.transition import assemble_transition_matrix

logger = logging.getLogger(__name__)

ERROR_DECIMALS = 6
TRANSPOSE_TOL = 1e-12
ADJOINT_TOL = 1e-10
POSITIVITY_TOL = 1e-12


@dataclass
class CommandResult:
    """Tabela principal do comando e tabelas auxiliares nomeadas."""
    table: pd.DataFrame
    extras: dict[str, pd.DataFrame] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)


@dataclass
class EngineProblem:
    """Configuração convertida para os tipos do domínio, com a grade pronta."""
    settings: EngineSettings
    model: ModelParams
    grid: Grid2D
    payoff: Payoff
    jumps: JumpSpec | None
    dividends: DividendSchedule

    @property
    def node(self) -> tuple[int, int]:
        i, j = self.grid.s0_index, self.grid.v0_index
        if i is None or j is None:
            raise GridError("(S0, v0) não está sobre a grade")
        return i, j

    def payoff_field(self, strike: float | None = None) -> Field:
        payoff = self.payoff if strike is None else Payoff(self.payoff.kind, strike)
        return cell_average_payoff(payoff, self.grid, payoff.strike)


def build_problem(settings: EngineSettings) -> EngineProblem:
    """
    Monta modelo, grade, payoff, saltos e dividendos a partir das configurações.

    Raises:
        ValidationError: Parâmetros inválidos
        GridError: Grade não pode ser construída
    """
    model = settings.model_params()
    payoff = Payoff(settings.payoff.kind, settings.payoff.strike)
    grid = build_grid(settings.grid_spec(), model, payoff.strike)
    dividends = (
        settings.dividend_schedule() if settings.scheme.maturity > 0 else DividendSchedule()
    )
    return EngineProblem(settings, model, grid, payoff, settings.jump_spec(), dividends)


def price_backward(
    problem: EngineProblem,
    scheme: SchemeConfig,
    boundary: str | None = None,
    strike: float | None = None,
    context: RunContext | None = None,
) -> float:
    """Uma indução backward; preço no nó (S0, v0)."""
    result = run_induction(
        scheme,
        problem.model,
        problem.grid,
        problem.payoff_field(strike),
        Direction.BACKWARD,
        jumps=problem.jumps,
        dividends=problem.dividends,
        boundary=boundary or problem.settings.boundary,
        context=context,
    )
    return result.value_at(*problem.node)


def density_forward(
    problem: EngineProblem,
    scheme: SchemeConfig,
    boundary: str | None = None,
    context: RunContext | None = None,
    on_step=None,
) -> Field:
    """Uma indução forward a partir do delta em (S0, v0)."""
    return run_induction(
        scheme,
        problem.model,
        problem.grid,
        discretize_delta(problem.grid, problem.model),
        Direction.FORWARD,
        jumps=problem.jumps,
        dividends=problem.dividends,
        boundary=boundary or problem.settings.boundary,
        context=context,
        on_step=on_step,
    )


def price_forward(
    problem: EngineProblem,
    scheme: SchemeConfig,
    boundary: str | None = None,
    strikes: list[float] | None = None,
    context: RunContext | None = None,
) -> list[float]:
    """Preços de vários strikes a partir de uma única densidade forward."""
    density = density_forward(problem, scheme, boundary, context)
    return strike_prices(problem, density, strikes or [problem.payoff.strike])


def strike_prices(problem: EngineProblem, density: Field, strikes: list[float]) -> list[float]:
    """Integra a densidade contra o payoff médio de célula de cada strike."""
    return [integrate_against(density, problem.payoff_field(K), problem.grid) for K in strikes]


def cmd_price(settings: EngineSettings, context: RunContext | None = None) -> CommandResult:
    """
    Preço de uma opção por uma indução backward.

    Com maturidade zero devolve o payoff médio de célula em (S0, v0).

    Args:
        settings: Configurações validadas
        context: Contexto de execução

    Returns:
        CommandResult com uma linha (strike, kind, maturity, scheme, theta, price)
    """
    context = context or RunContext("price")
    context.log_config("price", settings.model_dump(by_alias=True))
    problem = build_problem(settings)

    if settings.scheme.maturity == 0:
        price = problem.payoff_field().value_at(*problem.node)
    else:
        price = price_backward(problem, settings.scheme_config(), context=context)

    row = {
        "strike": problem.payoff.strike,
        "kind": problem.payoff.kind,
        "maturity": settings.scheme.maturity,
        "scheme": settings.scheme.scheme.value,
        "theta": settings.scheme.theta,
        "price": price,
    }
    context.log_result(f"preço = {price:.6f}", row)
    return CommandResult(pd.DataFrame([row]), summary=row)


def cmd_density(settings: EngineSettings, context: RunContext | None = None) -> CommandResult:
    """
    Densidade descontada no vencimento e preços para a lista de strikes.

    Args:
        settings: Configurações validadas (strikes opcionais)
        context: Contexto de execução

    Returns:
        CommandResult com a superfície (S, v, density) e a tabela 'prices'
    """
    context = context or RunContext("density")
    context.log_config("density", settings.model_dump(by_alias=True))
    problem = build_problem(settings)
    scheme = settings.scheme_config()

    density = density_forward(problem, scheme, context=context)
    strikes = settings.strikes or [problem.payoff.strike]
    prices = strike_prices(problem, density, strikes)

    S, v = np.meshgrid(problem.grid.s_nodes, problem.grid.v_nodes, indexing="ij")
    surface = pd.DataFrame({"S": S.ravel(), "v": v.ravel(), "density": density.values})
    price_table = pd.DataFrame({"strike": strikes, "kind": problem.payoff.kind, "price": prices})
    mass = float(np.sum(density.values * problem.grid.cell_areas()))

    context.log_result(f"densidade com massa descontada {mass:.6f}", {"strikes": strikes})
    return CommandResult(surface, extras={"prices": price_table}, summary={"mass": mass})


def cmd_theta_sweep(settings: EngineSettings, context: RunContext | None = None) -> CommandResult:
    """
    Varre theta e compara backward e forward com o preço FFT.

    Args:
        settings: Configurações validadas; 'thetas' não pode ser vazio
        context: Contexto de execução

    Returns:
        CommandResult com linhas (theta, eps_bk, eps_fw, gap)

    Raises:
        ValidationError: Lista de theta vazia ou modelo sem referência FFT
    """
    if not settings.thetas:
        raise ValidationError("lista 'thetas' vazia para a varredura")
    context = context or RunContext("theta_sweep")
    context.log_config("theta_sweep", settings.model_dump(by_alias=True))
    problem = build_problem(settings)
    if problem.jumps is not None or len(problem.dividends):
        raise ValidationError("referência FFT indisponível com saltos ou dividendos")

    reference = fft_price(
        problem.model, problem.payoff.strike, settings.scheme.maturity, problem.payoff.kind
    )
    context.log_event("reference", f"preço FFT = {reference:.6f}", {"reference": reference})

    rows = []
    for theta in settings.thetas:
        scheme = settings.scheme_config(theta)
        bk = price_backward(problem, scheme, context=context)
        (fw,) = price_forward(problem, scheme, context=context)
        report = error_report(bk, fw, reference, theta=theta)
        logger.info(f"theta={theta}: eps_bk={report.eps_bk:.4f} eps_fw={report.eps_fw:.4f}")
        rows.append(report.to_dict(ERROR_DECIMALS))

    table = pd.DataFrame(rows, columns=["theta", "eps_bk", "eps_fw", "gap"])
    # gap recalculado sobre os valores arredondados
    table["gap"] = (table["eps_bk"] - table["eps_fw"]).round(ERROR_DECIMALS)
    context.log_result(f"varredura com {len(rows)} valores de theta")
    return CommandResult(table, summary={"reference_price": reference})


def transpose_residuals(
    ops_prev: OperatorSet,
    ops_now: OperatorSet,
    theta: float,
    dt: float,
    maturity: float = 1.0,
) -> list[dict]:
    """
    Resíduos densos max|R_fw - R_bk^T| e closed-form contra colunas da base, por esquema.

    Returns:
        Lista de linhas (check, scheme, value, tolerance, ok)
    """
    rows = []
    for kind in (SchemeKind.HV, SchemeKind.MCS, SchemeKind.IMPLICIT_EULER):
        scheme = SchemeConfig(kind, theta, 1, maturity, 0, 0)
        closed = assemble_transition_matrix(scheme, ops_prev, ops_now, dt, "closed_form")
        basis = assemble_transition_matrix(scheme, ops_prev, ops_now, dt, "basis")
        forward = assemble_transition_matrix(
            scheme, ops_prev, ops_now, dt, "basis", direction=Direction.FORWARD
        )
        for check, value in (
            ("transpose", float(np.max(np.abs(forward.matrix - closed.T)))),
            ("closed_form_vs_basis", float(np.max(np.abs(closed.matrix - basis.matrix)))),
        ):
            rows.append({
                "check": check,
                "scheme": kind.value,
                "value": value,
                "tolerance": TRANSPOSE_TOL,
                "ok": value <= TRANSPOSE_TOL,
            })
    return rows


def cmd_consistency_check(
    settings: EngineSettings,
    context: RunContext | None = None,
) -> CommandResult:
    """
    Relatório de consistência forward/backward numa grade pequena.

    Inclui resíduos das matrizes de transição densas, a identidade adjunta
    de preços com fronteira compartilhada, veredictos de M-matriz dos
    sistemas implícitos e a positividade da densidade forward.

    Args:
        settings: Configurações validadas
        context: Contexto de execução

    Returns:
        CommandResult com linhas (check, scheme, value, tolerance, ok)

    Raises:
        SolverError: Grade acima do limite das matrizes densas
    """
    context = context or RunContext("consistency_check")
    context.log_config("consistency_check", settings.model_dump(by_alias=True))
    problem = build_problem(settings)
    scheme = settings.scheme_config()
    dt = scheme.maturity / scheme.n_steps

    ops_prev = assemble(problem.grid, problem.model, scheme.maturity, BoundaryMode.SHARED)
    ops_now = assemble(problem.grid, problem.model, scheme.maturity - dt, BoundaryMode.SHARED)
    rows = transpose_residuals(ops_prev, ops_now, scheme.theta, dt, scheme.maturity)

    bk = price_backward(problem, scheme, boundary="shared", context=context)
    (fw,) = price_forward(problem, scheme, boundary="shared", context=context)
    gap = abs(fw - bk)
    rows.append({
        "check": "adjoint_price",
        "scheme": scheme.scheme.value,
        "value": gap,
        "tolerance": ADJOINT_TOL,
        "ok": gap <= ADJOINT_TOL,
    })

    eye = sp.identity(problem.grid.size, format="csr")
    systems = {
        "m_matrix_I-theta_dt_F1": eye - scheme.theta * dt * ops_now.F1,
        "m_matrix_I-theta_dt_F2": eye - scheme.theta * dt * ops_now.F2,
        "m_matrix_I-dt_F": eye - dt * ops_now.F,
    }
    for check, matrix in systems.items():
        report = check_m_matrix(matrix, dense_check=True)
        rows.append({
            "check": check,
            "scheme": scheme.scheme.value,
            "value": float(report.is_m_matrix),
            "tolerance": 1.0,
            "ok": report.is_m_matrix,
        })

    areas = problem.grid.cell_areas()
    minima: list[float] = []
    density_forward(
        problem,
        scheme,
        context=context,
        on_step=lambda m, masses: minima.append(float((masses / areas).min())),
    )
    lowest = min(minima)
    rows.append({
        "check": "positivity",
        "scheme": scheme.scheme.value,
        "value": lowest,
        "tolerance": -POSITIVITY_TOL,
        "ok": lowest >= -POSITIVITY_TOL,
    })
    rows.append({
        "check": "stencil_constraint_clear",
        "scheme": scheme.scheme.value,
        "value": float(not ops_now.constraint_violated),
        "tolerance": 1.0,
        "ok": not ops_now.constraint_violated,
    })

    table = pd.DataFrame(rows, columns=["check", "scheme", "value", "tolerance", "ok"])
    failed = table.loc[~table["ok"], "check"].tolist()
    context.log_result(f"consistência: {len(table) - len(failed)}/{len(table)} verificações ok", {"failed": failed})
    return CommandResult(table, summary={"failed": failed})


COMMANDS = {
    "price": cmd_price,
    "density": cmd_density,
    "theta_sweep": cmd_theta_sweep,
    "consistency_check": cmd_consistency_check,
}
