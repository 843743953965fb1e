"""
Leitura e validação do arquivo de configuração JSON do motor.
Os esquemas pydantic espelham as chaves do arquivo e são convertidos
para os dataclasses imutáveis do domínio.
"""

import json
import logging
import os
from pathlib import Path
from typing import Literal

import pydantic
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field

from app.config.errors import ValidationError
from app.config.model import (
    DividendSchedule,
    JumpSpec,
    ModelParams,
    SchemeConfig,
    SchemeKind,
)
from app.grid.builder import GridSpec

logger = logging.getLogger(__name__)

load_dotenv()

DEFAULT_MAX_DENSE_SIZE = 2500
DEFAULT_FFT_POINTS = 2**14


def get_env_int(name: str, default: int) -> int:
    """Lê um inteiro do ambiente (.env incluído), com valor padrão."""
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError as e:
        raise ValidationError(f"variável {name} deve ser inteira (recebido {raw!r})") from e


def max_dense_size() -> int:
    return get_env_int("ENGINE_MAX_DENSE_SIZE", DEFAULT_MAX_DENSE_SIZE)


def fft_points() -> int:
    return get_env_int("ENGINE_FFT_POINTS", DEFAULT_FFT_POINTS)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class ModelSection(_Section):
    r: float
    q: float = 0.0
    kappa: float
    v_inf: float
    xi: float
    rho: float
    beta: float = 0.5
    S0: float
    v0: float


class JumpSection(_Section):
    lam: float = Field(alias="lambda")
    mu_j: float
    sigma_j: float
    truncation: float | None = None


class DividendSection(_Section):
    t: float
    d: float


class SchemeSection(_Section):
    scheme: SchemeKind = SchemeKind.HV
    theta: float = 0.5
    n_steps: int
    damping_start: int = 2
    damping_end: int = 2
    maturity: float


class GridSection(_Section):
    Ns: int
    Nv: int
    s_max_mult: float = 40.0
    v_max_mult: float = 6.0
    condense_points: list[float] = Field(default_factory=list)
    condense_strength: float = 200.0
    log_uniform: bool = False


class PayoffSection(_Section):
    kind: Literal["call", "put"] = "call"
    strike: float


class EngineSettings(_Section):
    """Documento de configuração completo."""
    model: ModelSection
    jumps: JumpSection | None = None
    dividends: list[DividendSection] = Field(default_factory=list)
    scheme: SchemeSection
    grid: GridSection
    payoff: PayoffSection
    strikes: list[float] = Field(default_factory=list)
    thetas: list[float] = Field(default_factory=list)
    boundary: Literal["shared", "split"] = "split"

    def model_params(self) -> ModelParams:
        return ModelParams(**self.model.model_dump())

    def jump_spec(self) -> JumpSpec | None:
        if self.jumps is None:
            return None
        # Padrão: 10 desvios em torno da média do log-salto
        truncation = self.jumps.truncation
        if truncation is None:
            truncation = abs(self.jumps.mu_j) + 10 * self.jumps.sigma_j
        return JumpSpec(
            lam=self.jumps.lam,
            mu_j=self.jumps.mu_j,
            sigma_j=self.jumps.sigma_j,
            truncation=truncation,
        )

    def dividend_schedule(self) -> DividendSchedule:
        schedule = DividendSchedule(tuple((e.t, e.d) for e in self.dividends))
        schedule.validate_against(self.scheme.maturity)
        return schedule

    def scheme_config(self, theta: float | None = None) -> SchemeConfig:
        data = self.scheme.model_dump()
        if theta is not None:
            data["theta"] = theta
        return SchemeConfig(**data)

    def grid_spec(self) -> GridSpec:
        data = self.grid.model_dump()
        data["condense_points"] = tuple(data["condense_points"])
        return GridSpec(**data)


def parse_settings(data: dict) -> EngineSettings:
    """
    Valida um documento de configuração já decodificado.

    Raises:
        ValidationError: Chaves ausentes, desconhecidas ou com tipo inválido
    """
    try:
        return EngineSettings.model_validate(data)
    except pydantic.ValidationError as e:
        raise ValidationError(f"configuração inválida: {e}") from e


def load_settings(path: str | Path) -> EngineSettings:
    """
    Carrega o arquivo de configuração JSON.

    Args:
        path: Caminho do arquivo

    Returns:
        EngineSettings validado

    Raises:
        ValidationError: Arquivo inexistente, JSON malformado ou esquema inválido
    """
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"arquivo de configuração não encontrado: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ValidationError(f"JSON inválido em {path}: {e}") from e
    logger.debug(f"configuração carregada de {path}")
    return parse_settings(data)
