"""Testes da construção de grades e dos campos discretos."""

import numpy as np
import pandas as pd
import pytest

from app.config.errors import GridError
from app.config.model import ModelParams
from app.grid.builder import Grid2D, GridSpec, build_grid, build_log_grid, export_grid_csv
from app.grid.fields import (
    Field,
    FieldKind,
    Payoff,
    cell_average_payoff,
    discretize_delta,
    integrate_against,
)
from tests.conftest import TABLE_PARAMS


@pytest.fixture
def uniform_grid(table_model):
    """S em passos de 50 até 400 (S0 = K = 100 no nó 2)."""
    spec = GridSpec(Ns=9, Nv=7, s_max_mult=4.0, v_max_mult=3.0, condense_strength=0)
    return build_grid(spec, table_model, 100.0)


def test_zero_strength_gives_uniform_grid(uniform_grid):
    np.testing.assert_allclose(np.diff(uniform_grid.s_nodes), 50.0)
    assert uniform_grid.s0_index == 2


def test_table_grid_is_condensed_near_spot(table_model):
    grid = build_grid(GridSpec(Ns=76, Nv=79), table_model, 100.0)
    steps = np.diff(grid.s_nodes)
    assert grid.s_nodes[-1] == pytest.approx(4000.0)
    near = steps[np.argmin(np.abs(grid.s_nodes[:-1] - 100.0))]
    assert steps[-1] >= 10 * near
    assert grid.s0_index is not None
    np.testing.assert_allclose(np.diff(grid.v_nodes), 3.0 / 78, rtol=1e-12)
    assert grid.v_nodes[grid.v0_index] == 0.5


def test_condense_point_outside_range(table_model):
    with pytest.raises(GridError):
        build_grid(GridSpec(Ns=20, Nv=10, condense_points=(5000.0,)), table_model, 100.0)


def test_grid_too_small(table_model):
    with pytest.raises(GridError):
        build_grid(GridSpec(Ns=3, Nv=10), table_model, 100.0)


def test_v_max_adjusted_to_hit_v0(table_model, caplog):
    grid = build_grid(GridSpec(Ns=10, Nv=21, v_max_mult=3.0), table_model, 100.0)
    assert grid.v0_index is not None
    assert "v_max ajustado" in caplog.text


def test_log_grid_is_uniform_in_log_spot(table_model):
    grid = build_log_grid(GridSpec(Ns=41, Nv=8, s_max_mult=4.0), table_model, 100.0)
    x = grid.x_nodes
    assert grid.log_uniform and grid.s_nodes[0] == 0.0
    np.testing.assert_allclose(np.diff(x), np.diff(x)[0], rtol=1e-10)
    assert grid.s_nodes[grid.s0_index] == 100.0
    assert grid.s_nodes[-1] == pytest.approx(400.0)


def test_build_grid_dispatches_to_log_grid(table_model):
    grid = build_grid(GridSpec(Ns=21, Nv=8, s_max_mult=4.0, log_uniform=True), table_model, 100.0)
    assert grid.log_uniform


@pytest.mark.parametrize(
    "s_nodes, v_nodes",
    [([1.0, 2.0, 3.0], [0.0, 1.0, 2.0]), ([0.0, 2.0, 1.0], [0.0, 1.0, 2.0]), ([0.0, 1.0], [0.0, 1.0, 2.0])],
)
def test_grid2d_validation(s_nodes, v_nodes):
    with pytest.raises(GridError):
        Grid2D(np.array(s_nodes), np.array(v_nodes))


def test_cell_areas_sum_to_domain_area(small_grid):
    total = small_grid.s_nodes[-1] * small_grid.v_nodes[-1]
    assert small_grid.cell_areas().sum() == pytest.approx(total, rel=1e-14)


def test_cell_average_at_strike_node(uniform_grid):
    field = cell_average_payoff(Payoff("call", 100.0), uniform_grid, 100.0)
    values = field.as_matrix()
    assert values[2, 0] == pytest.approx(50.0 / 8)
    assert values[3, 0] == pytest.approx(50.0)
    assert values[1, 0] == 0.0
    np.testing.assert_array_equal(values[:, 0], values[:, -1])
    assert field.kind == FieldKind.OPTION_VALUE


def test_cell_average_put(uniform_grid):
    field = cell_average_payoff(Payoff("put", 100.0), uniform_grid, 100.0)
    values = field.as_matrix()
    assert values[2, 3] == pytest.approx(50.0 / 8)
    assert values[0, 3] == 100.0
    assert values[4, 3] == 0.0


def test_cell_average_generic_payoff_uses_quadrature(uniform_grid):
    field = cell_average_payoff(lambda S: S**2, uniform_grid, 100.0)
    expected = (125.0**3 - 75.0**3) / (3 * 50.0)
    assert field.value_at(2, 1) == pytest.approx(expected, rel=1e-13)
    assert field.value_at(3, 1) == 150.0**2


def test_discretize_delta_small_grid():
    model = ModelParams(**{**TABLE_PARAMS, "S0": 1.0, "v0": 0.1})
    grid = Grid2D(np.array([0.0, 1.0, 2.0]), np.array([0.0, 0.1, 0.2]), S0=1.0, v0=0.1)
    delta = discretize_delta(grid, model)
    expected = np.zeros(9)
    expected[4] = 10.0
    np.testing.assert_allclose(delta.values, expected)
    assert delta.kind == FieldKind.DENSITY


def test_discretize_delta_unit_mass(small_grid, table_model):
    delta = discretize_delta(small_grid, table_model)
    assert np.sum(delta.values * small_grid.cell_areas()) == pytest.approx(1.0, abs=1e-15)


def test_discretize_delta_off_grid(small_grid):
    model = ModelParams(**{**TABLE_PARAMS, "S0": 101.0})
    with pytest.raises(GridError):
        discretize_delta(small_grid, model)


def test_integrate_delta_picks_node_value(small_grid, table_model):
    delta = discretize_delta(small_grid, table_model)
    payoff = cell_average_payoff(Payoff("call", 100.0), small_grid, 100.0)
    i, j = small_grid.s0_index, small_grid.v0_index
    assert integrate_against(delta, payoff, small_grid) == pytest.approx(payoff.value_at(i, j), rel=1e-14)


def test_integrate_uniform_density_against_constant(small_grid):
    areas = small_grid.cell_areas()
    density = Field(np.full(small_grid.size, 1.0 / areas.sum()), FieldKind.DENSITY, small_grid)
    values = Field(np.full(small_grid.size, 3.5), FieldKind.OPTION_VALUE, small_grid)
    assert integrate_against(density, values, small_grid) == pytest.approx(3.5, rel=1e-14)


def test_integrate_matches_double_loop(small_grid, rng):
    p = rng.random(small_grid.size)
    v = rng.random(small_grid.size)
    oracle = 0.0
    for i in range(small_grid.Ns):
        for j in range(small_grid.Nv):
            k = small_grid.flat_index(i, j)
            oracle += p[k] * v[k] * small_grid.s_cell_widths[i] * small_grid.v_cell_widths[j]
    result = integrate_against(
        Field(p, FieldKind.DENSITY, small_grid),
        Field(v, FieldKind.OPTION_VALUE, small_grid),
        small_grid,
    )
    assert result == pytest.approx(oracle, rel=1e-14)


def test_integrate_rejects_other_grid(small_grid, uniform_grid):
    density = Field(np.zeros(uniform_grid.size), FieldKind.DENSITY, uniform_grid)
    values = Field(np.zeros(small_grid.size), FieldKind.OPTION_VALUE, small_grid)
    with pytest.raises(GridError):
        integrate_against(density, values, small_grid)


def test_field_size_checked(small_grid):
    with pytest.raises(GridError):
        Field(np.zeros(3), FieldKind.DENSITY, small_grid)


def test_export_grid_csv(small_grid, tmp_path):
    path = tmp_path / "grid.csv"
    export_grid_csv(small_grid, path)
    frame = pd.read_csv(path)
    assert len(frame) == small_grid.Ns + small_grid.Nv
    np.testing.assert_allclose(frame.loc[frame["axis"] == "S", "node"], small_grid.s_nodes)
