"""Fixtures compartilhadas dos testes do motor."""

import numpy as np
import pytest

from app.config.model import ModelParams
from app.config.settings import parse_settings
from app.grid.builder import GridSpec, build_grid
from app.schemes.solvers import clear_factor_cache

TABLE_PARAMS = {
    "r": 0.05,
    "q": 0.0,
    "kappa": 1.5,
    "v_inf": 0.1,
    "xi": 0.3,
    "rho": 0.8,
    "S0": 100.0,
    "v0": 0.5,
}


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: reprodução das tabelas e convergência (lento)")


@pytest.fixture(autouse=True)
def _fresh_factor_cache():
    yield
    clear_factor_cache()


@pytest.fixture
def table_model() -> ModelParams:
    return ModelParams(**TABLE_PARAMS)


@pytest.fixture
def small_grid(table_model):
    """Grade uniforme 12 x 10 (S0 e v0 sobre nós)."""
    spec = GridSpec(Ns=12, Nv=10, s_max_mult=4.0, v_max_mult=3.0, condense_strength=0)
    return build_grid(spec, table_model, 100.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def make_settings(**overrides) -> dict:
    """Documento de configuração pequeno; overrides substituem seções inteiras."""
    data = {
        "model": dict(TABLE_PARAMS),
        "scheme": {"scheme": "HV", "theta": 0.5, "n_steps": 20, "maturity": 1.0},
        "grid": {"Ns": 12, "Nv": 10, "s_max_mult": 4.0, "v_max_mult": 3.0, "condense_strength": 0},
        "payoff": {"kind": "call", "strike": 100.0},
        "boundary": "shared",
    }
    data.update(overrides)
    return data


@pytest.fixture
def settings_factory():
    def factory(**overrides):
        return parse_settings(make_settings(**overrides))

    return factory
