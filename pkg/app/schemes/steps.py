"""
Passos temporais ADI (Hundsdorfer-Verwer e Craig-Sneyd modificado) e
Euler implícito, nos sentidos backward (preços) e forward (densidade).

Cada passo forward aplica exatamente a transposta da matriz de transição
do passo backward correspondente. Os passos aceitam vetores 1D ou matrizes
(uma coluna por vetor), o que permite sondar a matriz de transição com a
identidade.

Convenção de tempo: ops_prev está congelado em tau_{n-1}, ops_now em tau_n,
e M_j = I - theta dt F_j^n.
"""

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
import scipy.sparse as sp

from app.config.errors import SolverError
from app.config.model import Direction, SchemeKind
from app.grid.fields import Field, FieldKind
from app.operators.assembly import OperatorSet
from app.schemes.solvers import RESIDUAL_TOL, directional_solver, implicit_solver

Vector = np.ndarray


@dataclass(frozen=True, eq=False)
class SchemeCoefficients:
    """Combinações transpostas usadas pelos passos forward."""
    ops: OperatorSet
    theta: float

    @cached_property
    def _FT(self) -> sp.csr_matrix:
        return self.ops.F.T.tocsr()

    @cached_property
    def _F1T(self) -> sp.csr_matrix:
        return self.ops.F1.T.tocsr()

    @cached_property
    def _F2T(self) -> sp.csr_matrix:
        return self.ops.F2.T.tocsr()

    @cached_property
    def c0(self) -> sp.csr_matrix:
        return 0.5 * self._FT

    @cached_property
    def c1(self) -> sp.csr_matrix:
        return (0.5 * self._FT - self.theta * self._F1T).tocsr()

    @cached_property
    def c2(self) -> sp.csr_matrix:
        return (self.theta * self._F2T).tocsr()

    @cached_property
    def c3(self) -> sp.csr_matrix:
        return (self._FT - self.theta * self._F1T).tocsr()

    @cached_property
    def c_plus(self) -> sp.csr_matrix:
        return (0.5 * self._FT + self.theta * (self._F1T + self._F2T)).tocsr()

    @cached_property
    def c_minus(self) -> sp.csr_matrix:
        return (0.5 * self._FT - self.theta * (self._F1T + self._F2T)).tocsr()

    @cached_property
    def F1T(self) -> sp.csr_matrix:
        return self._F1T


@lru_cache(maxsize=32)
def scheme_coefficients(ops: OperatorSet, theta: float) -> SchemeCoefficients:
    return SchemeCoefficients(ops, theta)


def _check_inputs(ops_prev: OperatorSet, ops_now: OperatorSet, dt: float) -> None:
    if dt < 0:
        raise SolverError(f"dt deve ser não negativo (recebido {dt})")
    if ops_prev.shape != ops_now.shape:
        raise SolverError("ops_prev e ops_now com dimensões diferentes")


def _on_values(step, V: Field | Vector, forward: bool) -> Field | Vector:
    """
    Aplica um passo sobre array ou Field.

    Densidades (FieldKind.DENSITY) são convertidas em massas nodais antes do
    passo forward e de volta depois, para que o passo seja exatamente R^T.
    """
    if not isinstance(V, Field):
        return step(np.asarray(V, dtype=float))
    if forward and V.kind == FieldKind.DENSITY:
        areas = V.grid.cell_areas()
        return V.with_values(step(V.values * areas) / areas)
    return V.with_values(step(V.values))


def hv_backward_step(
    ops_prev: OperatorSet,
    ops_now: OperatorSet,
    theta: float,
    dt: float,
    V: Field | Vector,
) -> Field | Vector:
    """
    Passo backward Hundsdorfer-Verwer.

    Args:
        ops_prev: Operadores em tau_{n-1}
        ops_now: Operadores em tau_n
        theta: Parâmetro do esquema
        dt: Passo de tempo
        V: Valores em tau_{n-1}

    Returns:
        Valores em tau_n
    """
    _check_inputs(ops_prev, ops_now, dt)
    solver = directional_solver(ops_now, theta * dt)
    c = theta * dt

    def step(v: Vector) -> Vector:
        Fp_v = ops_prev.F @ v
        y0 = v + dt * Fp_v
        y1 = solver.solve1(y0 - c * (ops_prev.F1 @ v))
        y2 = solver.solve2(y1 - c * (ops_prev.F2 @ v))
        z0 = y0 + 0.5 * dt * (ops_now.F @ y2 - Fp_v)
        z1 = solver.solve1(z0 - c * (ops_now.F1 @ y2))
        return solver.solve2(z1 - c * (ops_now.F2 @ y2))

    return _on_values(step, V, forward=False)


def hv_forward_step(
    ops_prev: OperatorSet,
    ops_now: OperatorSet,
    theta: float,
    dt: float,
    P: Field | Vector,
    rearranged: bool = True,
) -> Field | Vector:
    """
    Passo forward Hundsdorfer-Verwer: aplica R^T do passo backward.

    A forma rearranjada trabalha com os incrementos Ytil_j - Y_{j-1}. Com
    rearranged=False o terceiro estágio é calculado pela composição direta
    R2^T W, mais sensível a arredondamento.

    Args:
        ops_prev: Operadores em tau_{n-1}
        ops_now: Operadores em tau_n
        theta: Parâmetro do esquema
        dt: Passo de tempo
        P: Massas (ou Field de densidade) no início do passo
        rearranged: Usa a forma rearranjada

    Returns:
        Massas (ou densidade) no fim do passo
    """
    _check_inputs(ops_prev, ops_now, dt)
    solver = directional_solver(ops_now, theta * dt)
    cp = scheme_coefficients(ops_prev, theta)
    cn = scheme_coefficients(ops_now, theta)

    def step(p: Vector) -> Vector:
        y0 = solver.solve2(p, transpose=True)
        y1 = solver.solve1(y0, transpose=True)
        w = dt * (cn.c1 @ y1 - cn.c2 @ y0)
        if not rearranged:
            u0 = solver.solve2(w, transpose=True)
            u1 = solver.solve1(u0, transpose=True)
            return y1 + dt * (cp.c0 @ y1) + u1 + dt * (cp.c3 @ u1 - cp.c2 @ u0)
        yt1 = solver.solve2(p + w, transpose=True)
        yt2 = solver.solve1(yt1, transpose=True)
        return yt2 + dt * (cp.c3 @ (yt2 - y1) - cp.c2 @ (yt1 - y0) + cp.c0 @ y1)

    return _on_values(step, P, forward=True)


def mcs_backward_step(
    ops_prev: OperatorSet,
    ops_now: OperatorSet,
    theta: float,
    dt: float,
    V: Field | Vector,
) -> Field | Vector:
    """
    Passo backward Craig-Sneyd modificado.

    O estágio corretor inclui -theta dt [(F1 + F2) Y2 - (F1 + F2) V] e os
    estágios implícitos finais relaxam contra V.
    """
    _check_inputs(ops_prev, ops_now, dt)
    solver = directional_solver(ops_now, theta * dt)
    c = theta * dt

    def step(v: Vector) -> Vector:
        Fp_v = ops_prev.F @ v
        y0 = v + dt * Fp_v
        y1 = solver.solve1(y0 - c * (ops_prev.F1 @ v))
        y2 = solver.solve2(y1 - c * (ops_prev.F2 @ v))
        z0 = (
            y0
            + 0.5 * dt * (ops_now.F @ y2 - Fp_v)
            - c * (ops_now.G @ y2 - ops_prev.G @ v)
        )
        z1 = solver.solve1(z0 - c * (ops_now.F1 @ v))
        return solver.solve2(z1 - c * (ops_now.F2 @ v))

    return _on_values(step, V, forward=False)


def mcs_forward_step(
    ops_prev: OperatorSet,
    ops_now: OperatorSet,
    theta: float,
    dt: float,
    P: Field | Vector,
) -> Field | Vector:
    """Passo forward Craig-Sneyd modificado: aplica R^T do passo backward."""
    _check_inputs(ops_prev, ops_now, dt)
    solver = directional_solver(ops_now, theta * dt)
    cp = scheme_coefficients(ops_prev, theta)
    cn = scheme_coefficients(ops_now, theta)

    def step(p: Vector) -> Vector:
        y0 = solver.solve2(p, transpose=True)
        y1 = solver.solve1(y0, transpose=True)
        yt0 = p + dt * (cn.c_minus @ y1)
        yt1 = solver.solve2(yt0, transpose=True)
        yt2 = solver.solve1(yt1, transpose=True)
        return yt2 + dt * (
            cp.c3 @ (yt2 - y1)
            - cp.c2 @ (yt1 - y0)
            + cp.c_plus @ y1
            - theta * (cn.F1T @ y1)
            - cn.c2 @ y0
        )

    return _on_values(step, P, forward=True)


def implicit_euler_step(
    ops: OperatorSet,
    dt: float,
    V: Field | Vector,
    direction: Direction = Direction.BACKWARD,
) -> Field | Vector:
    """
    Passo de Euler implícito com o gerador completo F = F0 + F1 + F2.

    Backward resolve (I - dt F) V_n = V_{n-1}; forward resolve com a
    transposta da mesma matriz.

    Raises:
        SolverError: Solução não finita ou resíduo acima da tolerância
    """
    if dt < 0:
        raise SolverError(f"dt deve ser não negativo (recebido {dt})")
    factor = implicit_solver(ops, dt)
    forward = direction == Direction.FORWARD

    def step(v: Vector) -> Vector:
        x = factor.solve(v, transpose=forward)
        residual = factor.residual(x, v, transpose=forward)
        if residual > RESIDUAL_TOL:
            raise SolverError(f"Euler implícito não convergiu: resíduo relativo {residual:.3e}")
        return x

    return _on_values(step, V, forward=forward)


def adi_step(
    scheme_kind: SchemeKind,
    direction: Direction,
    ops_prev: OperatorSet,
    ops_now: OperatorSet,
    theta: float,
    dt: float,
    V: Field | Vector,
) -> Field | Vector:
    """Despacha para o passo do esquema e sentido pedidos."""
    if scheme_kind == SchemeKind.IMPLICIT_EULER:
        return implicit_euler_step(ops_now, dt, V, direction)
    table = {
        (SchemeKind.HV, Direction.BACKWARD): hv_backward_step,
        (SchemeKind.HV, Direction.FORWARD): hv_forward_step,
        (SchemeKind.MCS, Direction.BACKWARD): mcs_backward_step,
        (SchemeKind.MCS, Direction.FORWARD): mcs_forward_step,
    }
    return table[(scheme_kind, direction)](ops_prev, ops_now, theta, dt, V)
