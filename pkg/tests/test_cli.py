"""Testes dos comandos e da CLI."""

import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from app.config.errors import ValidationError
from app.config.settings import load_settings, parse_settings
from app.main import EXIT_OK, EXIT_SOLVER, EXIT_VALIDATION, main
from app.operators.assembly import OperatorSet
from app.orchestration.commands import (
    build_problem,
    cmd_consistency_check,
    cmd_density,
    cmd_theta_sweep,
    price_backward,
    transpose_residuals,
)
from tests.conftest import make_settings

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
UNIFORM_GRID = {"Ns": 9, "Nv": 7, "s_max_mult": 4.0, "v_max_mult": 3.0, "condense_strength": 0}


def write_config(tmp_path, **overrides):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(make_settings(**overrides)), encoding="utf-8")
    return path


def test_price_at_zero_maturity(tmp_path):
    config = write_config(
        tmp_path,
        grid=UNIFORM_GRID,
        scheme={"scheme": "HV", "n_steps": 10, "maturity": 0.0},
    )
    out = tmp_path / "price.csv"
    assert main(["price", "--config", str(config), "--out", str(out)]) == EXIT_OK
    frame = pd.read_csv(out)
    assert list(frame.columns) == ["strike", "kind", "maturity", "scheme", "theta", "price"]
    assert frame.loc[0, "price"] == pytest.approx(6.25)


def test_price_json_output(tmp_path):
    config = write_config(tmp_path)
    out = tmp_path / "price.json"
    assert main(["price", "--config", str(config), "--out", str(out), "--format", "json"]) == EXIT_OK
    [record] = json.loads(out.read_text(encoding="utf-8"))
    assert record["scheme"] == "HV" and record["price"] > 0


def test_output_is_deterministic(tmp_path):
    config = write_config(tmp_path)
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["price", "--config", str(config), "--out", str(first)]) == EXIT_OK
    assert main(["price", "--config", str(config), "--out", str(second)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()


def test_missing_config_exit_code(tmp_path):
    code = main(["price", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o.csv")])
    assert code == EXIT_VALIDATION


def test_invalid_config_exit_code(tmp_path, capsys):
    config = write_config(tmp_path, model={"r": 0.05})
    assert main(["price", "--config", str(config), "--out", str(tmp_path / "o.csv")]) == EXIT_VALIDATION
    assert "erro de validação" in capsys.readouterr().err


def test_empty_theta_list_exit_code(tmp_path):
    config = write_config(tmp_path)
    code = main(["theta_sweep", "--config", str(config), "--out", str(tmp_path / "s.csv")])
    assert code == EXIT_VALIDATION


def test_dense_limit_exit_code(tmp_path, monkeypatch):
    monkeypatch.setenv("ENGINE_MAX_DENSE_SIZE", "10")
    config = write_config(tmp_path)
    code = main(["consistency_check", "--config", str(config), "--out", str(tmp_path / "c.csv")])
    assert code == EXIT_SOLVER


def test_unknown_command_rejected(tmp_path):
    with pytest.raises(SystemExit):
        main(["calibrate", "--config", "x.json", "--out", str(tmp_path / "o.csv")])


def test_consistency_check_on_toy_config():
    settings = load_settings(CONFIGS / "consistency_toy.json")
    table = cmd_consistency_check(settings).table
    checks = table.set_index(["check", "scheme"])["value"]
    for scheme in ("HV", "MCS", "IMPLICIT_EULER"):
        assert checks[("transpose", scheme)] <= 1e-12
        assert checks[("closed_form_vs_basis", scheme)] <= 1e-12
    assert checks[("adjoint_price", "MCS")] <= 1e-10
    assert {"m_matrix_I-dt_F", "positivity", "stencil_constraint_clear"} <= set(table["check"])


def test_transpose_residuals_vanish_for_zero_operators():
    ops = OperatorSet.zeros(6)
    rows = transpose_residuals(ops, ops, 0.5, 0.1)
    assert len(rows) == 6
    assert all(row["value"] == 0.0 and row["ok"] for row in rows)


def test_density_prices_match_backward_with_shared_boundary():
    settings = parse_settings(make_settings(strikes=[90.0, 100.0, 110.0]))
    result = cmd_density(settings)
    prices = result.extras["prices"]
    problem = build_problem(settings)
    scheme = settings.scheme_config()
    for K, price in zip(prices["strike"], prices["price"], strict=True):
        assert price == pytest.approx(price_backward(problem, scheme, strike=K), abs=1e-9)
    assert len(result.table) == problem.grid.size
    assert 0 < result.summary["mass"] <= 1.0 + 1e-9


def test_density_writes_price_table(tmp_path):
    config = write_config(tmp_path, strikes=[95.0, 105.0])
    out = tmp_path / "density.csv"
    assert main(["density", "--config", str(config), "--out", str(out)]) == EXIT_OK
    prices = pd.read_csv(tmp_path / "density_prices.csv")
    assert list(prices["strike"]) == [95.0, 105.0]
    assert prices["price"].iloc[0] > prices["price"].iloc[1]


def test_theta_sweep_columns_and_gap():
    settings = parse_settings(make_settings(thetas=[0.5, 1.0]))
    result = cmd_theta_sweep(settings)
    table = result.table
    assert list(table.columns) == ["theta", "eps_bk", "eps_fw", "gap"]
    np.testing.assert_allclose(table["gap"], (table["eps_bk"] - table["eps_fw"]).round(6))
    # fronteira compartilhada: backward e forward coincidem
    assert np.abs(table["gap"]).max() <= 1e-6
    assert result.summary["reference_price"] == pytest.approx(24.0047, abs=2e-4)


def test_theta_sweep_rejects_dividends():
    settings = parse_settings(make_settings(thetas=[0.5], dividends=[{"t": 0.5, "d": 1.0}]))
    with pytest.raises(ValidationError, match="FFT"):
        cmd_theta_sweep(settings)


def test_density_with_jumps_on_merton_config():
    result = cmd_density(load_settings(CONFIGS / "merton_jumps.json"))
    prices = result.extras["prices"]
    assert list(prices["kind"].unique()) == ["put"]
    assert prices["price"].is_monotonic_increasing
    assert 0.9 < result.summary["mass"] < 1.0


@pytest.mark.slow
@pytest.mark.parametrize("rho", [0.8, 0.0, -0.8])
def test_table_reproduction(rho):
    """Grade 76 x 79, 100 passos: erros relativos pequenos e gap de poucos pontos-base."""
    data = json.loads((CONFIGS / "heston_table.json").read_text(encoding="utf-8"))
    data["model"]["rho"] = rho
    settings = parse_settings(data)
    table = cmd_theta_sweep(settings).table
    assert list(table["theta"]) == settings.thetas
    assert np.abs(table[["eps_bk", "eps_fw"]].to_numpy()).max() <= 0.15
    assert np.abs(table["gap"]).max() <= 0.03
