"""
Estênceis de diferenças finitas em grades não uniformes.
"""

from dataclasses import dataclass

import numpy as np

Offset = tuple[int, int]


def convection_diffusion_weights(
    hm: np.ndarray,
    hp: np.ndarray,
    a: np.ndarray,
    b: np.ndarray,
    reserve_lo: np.ndarray | float = 0.0,
    reserve_hi: np.ndarray | float = 0.0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Pesos (vizinho de baixo, centro, vizinho de cima) de a d2/dx2 + b d/dx.

    O drift usa diferença central quando 2a >= |b| max(h-, h+). Se algum
    vizinho precisa cobrir uma reserva (o peso axial negativo do termo misto
    no mesmo deslocamento), a central só é mantida quando cobre a reserva ou
    quando o upwind também não cobre; caso contrário passa a upwind de
    primeira ordem.

    Args:
        hm: Passo para o vizinho de baixo
        hp: Passo para o vizinho de cima
        a: Coeficiente de difusão (>= 0)
        b: Coeficiente de drift
        reserve_lo: Peso mínimo exigido no vizinho de baixo
        reserve_hi: Peso mínimo exigido no vizinho de cima

    Returns:
        Tupla (lo, mid, hi) com o formato de a
    """
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    hm = np.broadcast_to(hm, a.shape)
    hp = np.broadcast_to(hp, a.shape)
    span = hm + hp

    lo = 2 * a / (hm * span)
    hi = 2 * a / (hp * span)
    mid = -2 * a / (hm * hp)

    c_lo = -b * hp / (hm * span)
    c_hi = b * hm / (hp * span)
    c_mid = b * (hp - hm) / (hm * hp)
    u_lo = np.maximum(-b, 0.0) / hm
    u_hi = np.maximum(b, 0.0) / hp
    u_mid = -(u_lo + u_hi)

    central_ok = (lo + c_lo >= reserve_lo) & (hi + c_hi >= reserve_hi)
    upwind_ok = (lo + u_lo >= reserve_lo) & (hi + u_hi >= reserve_hi)
    central = (2 * a >= np.abs(b) * np.maximum(hm, hp)) & (central_ok | ~upwind_ok)

    lo = lo + np.where(central, c_lo, u_lo)
    hi = hi + np.where(central, c_hi, u_hi)
    mid = mid + np.where(central, c_mid, u_mid)
    return lo, mid, hi


@dataclass
class MixedStencil:
    """Pesos do estêncil de 7 pontos indexados por deslocamento (dS, dv)."""
    weights: dict[Offset, np.ndarray]
    constraint_violated: bool


def mixed_stencil_weights(
    rho_sign: float,
    local_steps: tuple,
    coeff: np.ndarray | float,
    a_s: np.ndarray | float = 0.0,
    a_v: np.ndarray | float = 0.0,
) -> MixedStencil:
    """
    Estêncil de 7 pontos para coeff * d2/dSdv com cantos escolhidos pelo sinal.

    Para rho > 0 usa os cantos (+,+) e (-,-); para rho < 0 os cantos (+,-)
    e (-,+). Em ambos os casos os pesos de canto ficam >= 0 e os pesos
    axiais são negativos.

    Args:
        rho_sign: Sinal da correlação
        local_steps: (hS-, hS+, hv-, hv+)
        coeff: Coeficiente da derivada mista (escalar ou array)
        a_s: Coeficiente de difusão em S no nó, para o teste de positividade
        a_v: Coeficiente de difusão em v no nó

    Returns:
        MixedStencil; constraint_violated indica que algum peso axial somado
        ao peso de difusão do mesmo vizinho ficou negativo
    """
    hsm, hsp, hvm, hvp = (np.asarray(h, dtype=float) for h in local_steps)
    c = np.asarray(coeff, dtype=float)

    if rho_sign >= 0:
        wpp = 0.5 * c / (hsp * hvp)
        wmm = 0.5 * c / (hsm * hvm)
        weights = {
            (1, 1): wpp,
            (-1, -1): wmm,
            (1, 0): -wpp,
            (0, 1): -wpp,
            (-1, 0): -wmm,
            (0, -1): -wmm,
            (0, 0): wpp + wmm,
        }
    else:
        wpm = -0.5 * c / (hsp * hvm)
        wmp = -0.5 * c / (hsm * hvp)
        weights = {
            (1, -1): wpm,
            (-1, 1): wmp,
            (1, 0): -wpm,
            (0, -1): -wpm,
            (0, 1): -wmp,
            (-1, 0): -wmp,
            (0, 0): wpm + wmp,
        }

    diffusion = {
        (-1, 0): 2 * np.asarray(a_s) / (hsm * (hsm + hsp)),
        (1, 0): 2 * np.asarray(a_s) / (hsp * (hsm + hsp)),
        (0, -1): 2 * np.asarray(a_v) / (hvm * (hvm + hvp)),
        (0, 1): 2 * np.asarray(a_v) / (hvp * (hvm + hvp)),
    }
    violated = any(
        bool(np.any(weights[offset] + support < 0)) for offset, support in diffusion.items()
    )
    return MixedStencil(weights=weights, constraint_violated=violated)
