"""
Camada central de modelos do motor.
Parâmetros do modelo LSV/Heston, especificação de saltos de Merton,
calendário de dividendos discretos e configuração do esquema temporal.
Todos os tipos são imutáveis após a construção.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import integrate, stats

from app.config.errors import ValidationError

logger = logging.getLogger(__name__)

LocalVolFunction = Callable[[np.ndarray, float], np.ndarray]

# Abaixo deste valor a estabilidade incondicional do ADI não é garantida.
STABILITY_THETA = 1.0 / 3.0


class SchemeKind(Enum):
    """Esquemas de passo temporal suportados."""
    HV = "HV"
    MCS = "MCS"
    IMPLICIT_EULER = "IMPLICIT_EULER"


class Direction(Enum):
    """Sentido da indução: preços (backward) ou densidade (forward)."""
    BACKWARD = "backward"
    FORWARD = "forward"


@dataclass(frozen=True)
class ModelParams:
    """Coeficientes do modelo de volatilidade local-estocástica."""
    r: float
    q: float
    kappa: float
    v_inf: float
    xi: float
    rho: float
    S0: float
    v0: float
    beta: float = 0.5
    phi: LocalVolFunction | None = field(default=None, compare=False)

    def __post_init__(self):
        checks = [
            (self.xi > 0, f"xi deve ser positivo (recebido {self.xi})"),
            (self.kappa >= 0, f"kappa deve ser não negativo (recebido {self.kappa})"),
            (self.v_inf >= 0, f"v_inf deve ser não negativo (recebido {self.v_inf})"),
            (abs(self.rho) <= 1, f"rho deve estar em [-1, 1] (recebido {self.rho})"),
            (self.beta >= 0, f"beta deve ser não negativo (recebido {self.beta})"),
            (self.S0 > 0, f"S0 deve ser positivo (recebido {self.S0})"),
            (self.v0 > 0, f"v0 deve ser positivo (recebido {self.v0})"),
        ]
        for ok, message in checks:
            if not ok:
                raise ValidationError(message)

    @property
    def is_pure_heston(self) -> bool:
        """Verdadeiro quando phi = 1 e a difusão da variância é xi*sqrt(v)."""
        return self.phi is None and self.beta == 0.5

    def local_vol(self, S: np.ndarray, t: float) -> np.ndarray:
        """
        Avalia phi(S, t) nos nós fornecidos.

        Args:
            S: Níveis de spot
            t: Tempo de calendário

        Returns:
            Array com o multiplicador de volatilidade local
        """
        S = np.asarray(S, dtype=float)
        if self.phi is None:
            return np.ones_like(S)
        return np.broadcast_to(np.asarray(self.phi(S, t), dtype=float), S.shape)


@dataclass(frozen=True)
class JumpSpec:
    """Medida de Lévy de Merton: saltos log-normais com intensidade lambda."""
    lam: float
    mu_j: float
    sigma_j: float
    truncation: float

    def __post_init__(self):
        if self.lam < 0:
            raise ValidationError(f"lambda deve ser não negativo (recebido {self.lam})")
        if self.sigma_j <= 0:
            raise ValidationError(f"sigma_j deve ser positivo (recebido {self.sigma_j})")
        if self.truncation <= 0:
            raise ValidationError(f"truncation deve ser positivo (recebido {self.truncation})")

    def density(self, y: np.ndarray) -> np.ndarray:
        """Densidade de nu(dy) (inclui o fator lambda)."""
        return self.lam * stats.norm.pdf(y, loc=self.mu_j, scale=self.sigma_j)

    def cell_mass(self, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
        """Massa de nu em [lower, upper], restrita ao domínio truncado."""
        lo = np.clip(lower, -self.truncation, self.truncation)
        hi = np.clip(upper, -self.truncation, self.truncation)
        cdf_hi = stats.norm.cdf(hi, loc=self.mu_j, scale=self.sigma_j)
        cdf_lo = stats.norm.cdf(lo, loc=self.mu_j, scale=self.sigma_j)
        return self.lam * np.maximum(cdf_hi - cdf_lo, 0.0)


@dataclass(frozen=True)
class DividendSchedule:
    """Dividendos discretos em dinheiro: pares (t_ex, d) ordenados."""
    events: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        times = [t for t, _ in self.events]
        if any(b <= a for a, b in zip(times, times[1:], strict=False)):
            raise ValidationError("datas ex-dividendo devem ser estritamente crescentes")
        for t, d in self.events:
            if d < 0:
                raise ValidationError(f"dividendo negativo em t={t}: {d}")

    def validate_against(self, maturity: float) -> None:
        """Garante que todas as datas estão em (0, T)."""
        for t, _ in self.events:
            if not 0 < t < maturity:
                raise ValidationError(f"data ex-dividendo {t} fora de (0, {maturity})")

    def __len__(self) -> int:
        return len(self.events)


@dataclass(frozen=True)
class SchemeConfig:
    """Configuração do esquema temporal. Validada por validate_config."""
    scheme: SchemeKind
    theta: float
    n_steps: int
    maturity: float
    damping_start: int = 2
    damping_end: int = 2


@dataclass
class ConfigCheck:
    """Resultado da validação de uma SchemeConfig."""
    ok: bool = True
    warnings: list[str] = field(default_factory=list)


def validate_config(cfg: SchemeConfig) -> ConfigCheck:
    """
    Valida a configuração do esquema.

    Args:
        cfg: Configuração a validar

    Returns:
        ConfigCheck com avisos (theta < 1/3 gera aviso de estabilidade)

    Raises:
        ValidationError: theta fora de (0, 1], n_steps <= 0, amortecimento
            maior que o número de passos ou maturidade não positiva
    """
    if cfg.theta <= 0 or cfg.theta > 1:
        raise ValidationError(f"theta deve estar em (0, 1] (recebido {cfg.theta})")
    if cfg.n_steps <= 0:
        raise ValidationError(f"n_steps deve ser positivo (recebido {cfg.n_steps})")
    if cfg.damping_start < 0 or cfg.damping_end < 0:
        raise ValidationError("passos de amortecimento não podem ser negativos")
    if cfg.n_steps < cfg.damping_start + cfg.damping_end:
        raise ValidationError(
            f"n_steps={cfg.n_steps} menor que o amortecimento "
            f"({cfg.damping_start} + {cfg.damping_end})"
        )
    if cfg.maturity <= 0:
        raise ValidationError(f"maturidade deve ser positiva (recebido {cfg.maturity})")

    check = ConfigCheck()
    if cfg.theta < STABILITY_THETA and cfg.scheme != SchemeKind.IMPLICIT_EULER:
        message = f"theta={cfg.theta} < 1/3: estabilidade incondicional não garantida"
        check.warnings.append(message)
        logger.warning(message)
    return check


def levy_drift(model: ModelParams | None, jumps: JumpSpec) -> float:
    """
    Compensador de martingale dos saltos: integral de (e^y - 1) nu(dy).

    Para medidas de atividade finita (Merton) o truncamento de pequenos
    saltos é dispensado. Os termos r, q e sigma^2/2 vivem em F1, por isso
    apenas a parte integral é retornada.

    Args:
        model: Parâmetros do modelo (mantido para a assinatura do drift completo)
        jumps: Especificação dos saltos

    Returns:
        Valor do compensador (taxa anual)

    Raises:
        ValidationError: Integral não finita
    """
    if jumps.lam == 0:
        return 0.0

    def integrand(y: float) -> float:
        return math.expm1(y) * stats.norm.pdf(y, loc=jumps.mu_j, scale=jumps.sigma_j)

    value, _ = integrate.quad(
        integrand,
        -jumps.truncation,
        jumps.truncation,
        points=[jumps.mu_j] if abs(jumps.mu_j) < jumps.truncation else None,
        epsabs=1e-15,
        epsrel=1e-13,
        limit=200,
    )
    drift = jumps.lam * value
    if not math.isfinite(drift):
        raise ValidationError(f"compensador de saltos não finito para {jumps}")
    logger.debug(f"levy_drift: lambda={jumps.lam}, compensador={drift:.6e}")
    return drift
