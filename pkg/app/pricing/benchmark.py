"""
Preços de referência semi-analíticos do Heston puro via FFT (Carr-Madan).
A função característica usa a formulação sem corte de ramo do logaritmo
complexo; call e put saem de amortecimentos espelhados e a paridade entre
eles valida a resolução escolhida.
"""

import logging
from functools import lru_cache

import numpy as np
from scipy import fft
from scipy.interpolate import CubicSpline

from app.config.errors import SolverError, ValidationError
from app.config.model import ModelParams
from app.config.settings import fft_points

logger = logging.getLogger(__name__)

CALL_DAMPING = 1.25
# espelho do call na variável do put: e^{(alpha + 1) k} P(k) decai como e^{-1.25 k}
PUT_DAMPING = -(1.0 + CALL_DAMPING)
# passos de Fourier tentados em ordem; o primeiro que fecha a paridade vence
FOURIER_STEPS = (0.1, 0.05)
PARITY_TOL = 1e-6
_SPLINE_HALF_WIDTH = 8


def _log1p(z: np.ndarray) -> np.ndarray:
    """log(1 + z) complexo sem perder a parte real quando |z| é minúsculo."""
    real = 0.5 * np.log1p(2.0 * z.real + z.real**2 + z.imag**2)
    return real + 1j * np.arctan2(z.imag, 1.0 + z.real)


def heston_char_fn(model: ModelParams, u: complex | np.ndarray, T: float) -> complex | np.ndarray:
    """
    Função característica de ln(S_T / S0) no Heston puro.

    Os termos (b - d)/xi^2 e o log da razão são escritos em forma que não
    cancela quando xi -> 0, recuperando o limite de variância determinística.

    Args:
        model: Parâmetros (phi = 1, beta = 1/2)
        u: Argumento complexo (escalar ou array)
        T: Horizonte, T > 0

    Returns:
        E[exp(i u ln(S_T/S0))] com o mesmo formato de u

    Raises:
        ValidationError: Modelo não Heston puro ou T não positivo
    """
    if not model.is_pure_heston:
        raise ValidationError("função característica disponível apenas para Heston puro")
    if T <= 0:
        raise ValidationError(f"T deve ser positivo (recebido {T})")

    u = np.asarray(u, dtype=complex)
    iu = 1j * u
    quad = iu + u * u
    b = model.kappa - model.rho * model.xi * iu
    d = np.sqrt(b * b + model.xi**2 * quad)
    beta = -quad / (b + d)
    g = model.xi**2 * beta / (b + d)
    decay = np.exp(-d * T)

    log_ratio = (_log1p(-g * decay) - _log1p(-g)) / model.xi**2
    exponent = (
        iu * (model.r - model.q) * T
        + model.kappa * model.v_inf * (beta * T - 2.0 * log_ratio)
        + model.v0 * beta * (1.0 - decay) / (1.0 - g * decay)
    )
    result = np.exp(exponent)
    return complex(result) if result.ndim == 0 else result


@lru_cache(maxsize=64)
def _fft_curve(
    model: ModelParams, T: float, alpha: float, n_points: int, eta: float
) -> tuple[np.ndarray, np.ndarray]:
    """Preços normalizados (S0 = 1) em toda a grade de log-strike."""
    lam = 2.0 * np.pi / (n_points * eta)
    upper = 0.5 * n_points * lam

    j = np.arange(n_points)
    u = eta * j
    k = -upper + lam * j

    shifted = heston_char_fn(model, u - (alpha + 1.0) * 1j, T)
    psi = np.exp(-model.r * T) * shifted / (alpha * alpha + alpha - u * u + 1j * (2.0 * alpha + 1.0) * u)

    # pesos de Simpson
    weights = eta / 3.0 * (3.0 + (-1.0) ** (j + 1))
    weights[0] -= eta / 3.0

    transformed = fft.fft(np.exp(1j * upper * u) * psi * weights)
    prices = np.exp(-alpha * k) / np.pi * transformed.real
    return k, prices


def _interpolate(k: np.ndarray, prices: np.ndarray, target: float) -> float:
    idx = int(np.searchsorted(k, target))
    if idx < _SPLINE_HALF_WIDTH or idx > k.size - _SPLINE_HALF_WIDTH:
        raise ValidationError(f"log-strike {target:.4f} fora da grade FFT")
    window = slice(idx - _SPLINE_HALF_WIDTH, idx + _SPLINE_HALF_WIDTH)
    return float(CubicSpline(k[window], prices[window])(target))


def fft_price(
    model: ModelParams,
    K: float,
    T: float,
    kind: str = "call",
    n_points: int | None = None,
) -> float:
    """
    Preço de referência de uma opção europeia vanilla.

    Args:
        model: Parâmetros do Heston puro
        K: Strike
        T: Maturidade
        kind: 'call' ou 'put'
        n_points: Nós de Fourier (padrão: ENGINE_FFT_POINTS)

    Returns:
        Preço descontado

    Raises:
        ValidationError: Modelo não suportado, K ou kind inválidos
        SolverError: Paridade call-put violada além de PARITY_TOL
    """
    if kind not in ("call", "put"):
        raise ValidationError(f"tipo de opção desconhecido: {kind}")
    if K <= 0:
        raise ValidationError(f"strike deve ser positivo (recebido {K})")
    n_points = n_points or fft_points()

    target = np.log(K / model.S0)
    forward_value = model.S0 * np.exp(-model.q * T) - K * np.exp(-model.r * T)

    parity_gap = np.inf
    for eta in FOURIER_STEPS:
        call = model.S0 * _interpolate(*_fft_curve(model, T, CALL_DAMPING, n_points, eta), target)
        put = model.S0 * _interpolate(*_fft_curve(model, T, PUT_DAMPING, n_points, eta), target)
        parity_gap = abs(call - put - forward_value)
        if parity_gap <= PARITY_TOL:
            logger.debug(
                f"fft_price K={K} T={T} eta={eta}: call={call:.6f} put={put:.6f} paridade={parity_gap:.1e}"
            )
            return call if kind == "call" else put
        logger.debug(f"fft_price eta={eta}: paridade {parity_gap:.1e} acima da tolerância")

    raise SolverError(
        f"paridade call-put violada na FFT: |C - P - F| = {parity_gap:.3e} "
        f"(K={K}, T={T}, N={n_points})"
    )
