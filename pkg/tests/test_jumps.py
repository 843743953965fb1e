"""Testes do gerador de saltos de Merton e do splitting de Strang."""

import numpy as np
import pytest
from scipy import linalg

from app.config.errors import GridError, SolverError
from app.config.model import Direction, JumpSpec, ModelParams, SchemeConfig, SchemeKind, levy_drift
from app.grid.builder import GridSpec, build_log_grid
from app.grid.fields import Payoff, cell_average_payoff, discretize_delta, integrate_against
from app.jumps.operator import (
    apply_jump_exponential,
    build_jump_operator,
    jump_exponential,
    jump_operator_for_grid,
    strang_composite_step,
)
from app.schemes.induction import run_induction
from tests.conftest import TABLE_PARAMS

MERTON = JumpSpec(lam=0.5, mu_j=0.0, sigma_j=0.25, truncation=2.5)


@pytest.fixture
def x_grid():
    return np.linspace(-3.0, 3.0, 201)


@pytest.fixture
def jump_op(x_grid):
    return build_jump_operator(MERTON, x_grid)


@pytest.fixture
def log_grid(table_model):
    return build_log_grid(GridSpec(Ns=31, Nv=8, s_max_mult=4.0), table_model, 100.0)


def test_zero_intensity_gives_zero_operator(x_grid):
    op = build_jump_operator(JumpSpec(0.0, 0.0, 0.25, 2.5), x_grid)
    assert not op.matrix.any()
    assert op.compensator == 0.0


def test_rows_sum_to_zero(jump_op):
    assert np.abs(jump_op.matrix.sum(axis=1)).max() <= 1e-14


def test_exponential_is_annihilated_on_interior_rows(jump_op, x_grid):
    residual = jump_op.matrix @ np.exp(x_grid)
    assert np.abs(residual[1:-1]).max() <= 1e-12


def test_operator_is_metzler(jump_op):
    J = jump_op.matrix
    off = J[~np.eye(J.shape[0], dtype=bool)]
    assert off.min() >= 0.0
    assert np.all(np.diag(J) <= 0.0)


def test_discrete_drift_approximates_compensator(jump_op):
    middle = jump_op.row_drift.size // 2
    assert jump_op.compensator == levy_drift(None, MERTON)
    assert jump_op.row_drift[middle] == pytest.approx(jump_op.compensator, rel=1e-2)


def test_exponential_is_stochastic(jump_op):
    E = jump_exponential(jump_op, 0.1)
    assert E.min() >= -1e-15
    np.testing.assert_allclose(E.sum(axis=1), 1.0, atol=1e-12)
    assert E[0, 0] == 1.0 and not E[0, 1:].any() and not E[1:, 0].any()


def test_zero_step_is_identity(jump_op):
    E = jump_exponential(jump_op, 0.0)
    np.testing.assert_array_equal(E, np.eye(E.shape[0]))


def test_negative_step_rejected(jump_op):
    with pytest.raises(SolverError):
        jump_exponential(jump_op, -0.1)


def test_exponential_is_second_order_accurate(jump_op):
    """e^{dt J} contra I + dt J: erro O(dt^2)."""
    J = jump_op.embedded
    eye = np.eye(J.shape[0])
    errors = [np.abs(jump_exponential(jump_op, dt) - eye - dt * J).max() for dt in (0.02, 0.01)]
    assert 3.9 <= errors[0] / errors[1] <= 4.1


def test_forward_application_is_transpose(jump_op, rng):
    n = jump_op.embedded.shape[0]
    p, v = rng.random((n, 3)), rng.random((n, 3))
    fw = apply_jump_exponential(jump_op, 0.2, p, Direction.FORWARD)
    bk = apply_jump_exponential(jump_op, 0.2, v, Direction.BACKWARD)
    assert np.sum(fw * v) == pytest.approx(np.sum(p * bk), rel=1e-13)
    np.testing.assert_allclose(fw.sum(axis=0), p.sum(axis=0), rtol=1e-12)


def test_apply_on_field_checks_grid(jump_op, small_grid, table_model):
    with pytest.raises(GridError):
        apply_jump_exponential(jump_op, 0.1, discretize_delta(small_grid, table_model))


def test_forward_density_keeps_mass(log_grid, table_model):
    op = jump_operator_for_grid(MERTON, log_grid, table_model)
    delta = discretize_delta(log_grid, table_model)
    out = apply_jump_exponential(op, 0.5, delta, Direction.FORWARD)
    areas = log_grid.cell_areas()
    assert np.sum(out.values * areas) == pytest.approx(1.0, rel=1e-12)
    assert out.values.min() >= -1e-15


def test_nonuniform_log_grid_rejected():
    with pytest.raises(GridError):
        build_jump_operator(MERTON, np.array([0.0, 0.1, 0.3, 0.4]))


def test_jumps_require_log_grid(small_grid, table_model):
    with pytest.raises(GridError):
        jump_operator_for_grid(MERTON, small_grid, table_model)


def test_short_truncation_warns(x_grid, caplog):
    build_jump_operator(JumpSpec(0.5, 0.0, 0.25, 1.0), x_grid)
    assert "truncamento" in caplog.text


def test_strang_with_identity_jump_is_two_half_steps():
    result = strang_composite_step(lambda v: 2.0 * v, lambda v: v, np.ones(3))
    np.testing.assert_array_equal(result, np.full(3, 4.0))


def test_strang_exact_for_commuting_parts():
    a, b, dt = -0.4, -0.7, 0.3
    result = strang_composite_step(lambda v: np.exp(0.5 * dt * a) * v, lambda v: np.exp(dt * b) * v, 1.0)
    assert result == pytest.approx(np.exp(dt * (a + b)), rel=1e-14)


def test_strang_second_order_for_noncommuting_parts():
    A = np.array([[-1.0, 0.5], [0.2, -0.7]])
    B = np.array([[-0.3, 0.3], [0.9, -0.9]])
    v0 = np.array([1.0, 2.0])
    exact = linalg.expm(A + B) @ v0
    errors = []
    for n in (16, 32, 64):
        half, full = linalg.expm(0.5 / n * A), linalg.expm(B / n)
        v = v0
        for _ in range(n):
            v = strang_composite_step(lambda x: half @ x, lambda x: full @ x, v)
        errors.append(np.abs(v - exact).max())
    assert 3.5 <= errors[0] / errors[1] <= 4.5
    assert 3.5 <= errors[1] / errors[2] <= 4.5


def jump_prices(grid, model, jumps, kind=SchemeKind.HV):
    scheme = SchemeConfig(kind, 0.5, 10, 1.0)
    payoff = cell_average_payoff(Payoff("call", 100.0), grid, 100.0)
    backward = run_induction(scheme, model, grid, payoff, Direction.BACKWARD, jumps=jumps, boundary="shared")
    density = run_induction(
        scheme, model, grid, discretize_delta(grid, model), Direction.FORWARD, jumps=jumps, boundary="shared"
    )
    return backward.value_at(grid.s0_index, grid.v0_index), integrate_against(density, payoff, grid)


@pytest.mark.parametrize("kind", [SchemeKind.HV, SchemeKind.MCS])
def test_adjoint_identity_with_jumps(kind, log_grid, table_model):
    bk, fw = jump_prices(log_grid, table_model, MERTON, kind)
    assert abs(fw - bk) <= 1e-10


def test_jumps_raise_call_value():
    model = ModelParams(**{**TABLE_PARAMS, "rho": -0.5, "v0": 0.1})
    grid = build_log_grid(GridSpec(Ns=61, Nv=12, s_max_mult=4.0), model, 100.0)
    with_jumps, _ = jump_prices(grid, model, MERTON)
    without, _ = jump_prices(grid, model, None)
    assert with_jumps > without


def test_strang_against_dense_oracle_on_log_grid():
    x = np.linspace(-3.0, 3.0, 40)
    h = x[1] - x[0]
    D = 0.02 / h**2 * (np.eye(40, k=-1) - 2 * np.eye(40) + np.eye(40, k=1))
    J = build_jump_operator(MERTON, x).matrix
    v0 = np.maximum(np.exp(x) - 1.0, 0.0)
    exact = linalg.expm(D + J) @ v0
    errors = []
    for n in (16, 32, 64):
        half, full = linalg.expm(0.5 / n * D), linalg.expm(J / n)
        v = v0
        for _ in range(n):
            v = strang_composite_step(lambda y: half @ y, lambda y: full @ y, v)
        errors.append(np.abs(v - exact).max())
    assert errors[0] / errors[1] >= 3.5
    assert errors[1] / errors[2] >= 3.5
