"""
Montagem do gerador de difusão semi-discretizado F = F0 + F1 + F2.
F1 atua na direção S, F2 na direção v e F0 concentra a derivada mista.
Os estênceis mantêm o padrão de Metzler (fora da diagonal >= 0) sempre
que a condição local de Péclet ou o upwind permitem.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path

import numpy as np
import pandas as pd
import scipy.sparse as sp

from app.config.errors import GridError
from app.config.model import Direction, ModelParams
from app.grid.builder import Grid2D
from app.operators.stencils import Offset, convection_diffusion_weights, mixed_stencil_weights

logger = logging.getLogger(__name__)


class BoundaryMode(Enum):
    """Tratamento das linhas de fronteira."""
    SHARED = "shared"
    PAYOFF = "payoff"
    DENSITY = "density"


def boundary_mode_for(boundary: str, direction: Direction) -> BoundaryMode:
    """
    Traduz a política de fronteira da configuração para o modo do sentido.

    Args:
        boundary: 'shared' (mesmas linhas nos dois sentidos) ou 'split'
        direction: Sentido da indução

    Returns:
        BoundaryMode correspondente
    """
    if boundary == "shared":
        return BoundaryMode.SHARED
    if boundary == "split":
        return BoundaryMode.PAYOFF if direction == Direction.BACKWARD else BoundaryMode.DENSITY
    raise ValueError(f"política de fronteira desconhecida: {boundary}")


@dataclass(frozen=True, eq=False)
class OperatorSet:
    """Matrizes esparsas F0, F1, F2 congeladas no instante t_label."""
    F0: sp.csr_matrix
    F1: sp.csr_matrix
    F2: sp.csr_matrix
    t_label: float = 0.0
    boundary: BoundaryMode = BoundaryMode.SHARED
    dirichlet_mask: np.ndarray | None = None
    constraint_violated: bool = False
    transposed: bool = False
    shape: tuple[int, int] = field(init=False)

    def __post_init__(self):
        mats = [sp.csr_matrix(m, dtype=float) for m in (self.F0, self.F1, self.F2)]
        shapes = {m.shape for m in mats}
        if len(shapes) != 1:
            raise GridError(f"operadores com dimensões diferentes: {shapes}")
        shape = shapes.pop()
        if shape[0] != shape[1]:
            raise GridError(f"operador não quadrado: {shape}")
        for name, m in zip(("F0", "F1", "F2"), mats, strict=True):
            object.__setattr__(self, name, m)
        object.__setattr__(self, "shape", shape)

    @classmethod
    def zeros(cls, n: int) -> "OperatorSet":
        empty = sp.csr_matrix((n, n))
        return cls(empty, empty, empty)

    @property
    def size(self) -> int:
        return self.shape[0]

    @cached_property
    def F(self) -> sp.csr_matrix:
        """Gerador completo F0 + F1 + F2."""
        return (self.F0 + self.F1 + self.F2).tocsr()

    @cached_property
    def G(self) -> sp.csr_matrix:
        """Parte direcional F1 + F2."""
        return (self.F1 + self.F2).tocsr()

    def components(self) -> tuple[sp.csr_matrix, sp.csr_matrix, sp.csr_matrix]:
        return self.F0, self.F1, self.F2


def transpose(ops: OperatorSet) -> OperatorSet:
    """
    Transpõe cada matriz do conjunto, reutilizando os coeficientes.

    Args:
        ops: Conjunto montado

    Returns:
        OperatorSet com F0^T, F1^T, F2^T
    """
    return OperatorSet(
        ops.F0.T.tocsr(),
        ops.F1.T.tocsr(),
        ops.F2.T.tocsr(),
        t_label=ops.t_label,
        boundary=ops.boundary,
        dirichlet_mask=ops.dirichlet_mask,
        constraint_violated=ops.constraint_violated,
        transposed=not ops.transposed,
    )


def _dirichlet_mask(grid: Grid2D, boundary: BoundaryMode) -> np.ndarray:
    mask = np.zeros(grid.shape, dtype=bool)
    if boundary == BoundaryMode.PAYOFF:
        mask[0, :] = True
    elif boundary == BoundaryMode.DENSITY:
        mask[0, :] = True
        mask[-1, :] = True
        mask[:, -1] = True
    return mask


class _Triplets:
    """Acumulador de entradas (linha, coluna, valor) para montagem COO."""

    def __init__(self, n: int):
        self.n = n
        self.rows: list[np.ndarray] = []
        self.cols: list[np.ndarray] = []
        self.vals: list[np.ndarray] = []

    def add(self, rows: np.ndarray, cols: np.ndarray, vals: np.ndarray) -> None:
        rows, cols, vals = np.broadcast_arrays(rows, cols, vals)
        self.rows.append(rows.ravel())
        self.cols.append(cols.ravel())
        self.vals.append(vals.ravel())

    def to_csr(self, keep_rows: np.ndarray) -> sp.csr_matrix:
        if not self.rows:
            return sp.csr_matrix((self.n, self.n))
        rows = np.concatenate(self.rows)
        cols = np.concatenate(self.cols)
        vals = np.concatenate(self.vals)
        keep = keep_rows[rows] & (vals != 0.0)
        coo = sp.coo_matrix((vals[keep], (rows[keep], cols[keep])), shape=(self.n, self.n))
        return coo.tocsr()


def _assemble_s_direction(
    grid: Grid2D, model: ModelParams, t: float, out: _Triplets, reserves: dict[Offset, np.ndarray]
) -> None:
    Ns, Nv = grid.shape
    S, v = grid.s_nodes, grid.v_nodes
    idx = np.arange(grid.size).reshape(Ns, Nv)
    phi = model.local_vol(S, t)
    half_r = 0.5 * model.r

    out.add(idx, idx, -half_r)

    a = 0.5 * np.outer(phi**2 * S**2, v)
    b = np.broadcast_to(((model.r - model.q) * S)[:, None], (Ns, Nv))
    h = np.diff(S)
    hm, hp = h[:-1, None], h[1:, None]
    lo, mid, hi = convection_diffusion_weights(
        hm, hp, a[1:-1], b[1:-1], reserves[(-1, 0)][1:-1], reserves[(1, 0)][1:-1]
    )
    inner = idx[1:-1]
    out.add(inner, inner - Nv, lo)
    out.add(inner, inner, mid)
    out.add(inner, inner + Nv, hi)

    # S_max: V_SS = 0 e drift de um lado
    top = idx[-1]
    drift = b[-1] / h[-1]
    out.add(top, top - Nv, -drift)
    out.add(top, top, drift)


def _assemble_v_direction(
    grid: Grid2D, model: ModelParams, out: _Triplets, reserves: dict[Offset, np.ndarray]
) -> None:
    Ns, Nv = grid.shape
    v = grid.v_nodes
    idx = np.arange(grid.size).reshape(Ns, Nv)
    half_r = 0.5 * model.r

    out.add(idx, idx, -half_r)

    a = np.broadcast_to(0.5 * model.xi**2 * v ** (2 * model.beta), (Ns, Nv))
    b = np.broadcast_to(model.kappa * (model.v_inf - v), (Ns, Nv))
    h = np.diff(v)
    hm, hp = h[None, :-1], h[None, 1:]
    lo, mid, hi = convection_diffusion_weights(
        hm, hp, a[:, 1:-1], b[:, 1:-1], reserves[(0, -1)][:, 1:-1], reserves[(0, 1)][:, 1:-1]
    )
    inner = idx[:, 1:-1]
    out.add(inner, inner - 1, lo)
    out.add(inner, inner, mid)
    out.add(inner, inner + 1, hi)

    # v = 0: linha degenerada, só o drift kappa*v_inf em upwind
    bottom = idx[:, 0]
    drift = model.kappa * model.v_inf / h[0]
    out.add(bottom, bottom + 1, drift)
    out.add(bottom, bottom, -drift)

    top = idx[:, -1]
    drift = model.kappa * (model.v_inf - v[-1]) / h[-1]
    out.add(top, top - 1, -drift)
    out.add(top, top, drift)


def _assemble_mixed(grid: Grid2D, model: ModelParams, t: float, out: _Triplets) -> dict[Offset, np.ndarray]:
    """
    Termo misto nos nós interiores a partir de i = 2.

    A linha i = 1, vizinha de S = 0, fica sem termo misto: em grade
    logarítmica o passo até a fronteira deixa vazia a faixa de passos em v
    que cobriria seus pesos axiais.

    Returns:
        Reservas (Ns, Nv) por deslocamento axial: o quanto o peso de
        convecção-difusão do mesmo vizinho precisa cobrir
    """
    Ns, Nv = grid.shape
    S, v = grid.s_nodes, grid.v_nodes
    reserves = {offset: np.zeros((Ns, Nv)) for offset in ((-1, 0), (1, 0), (0, -1), (0, 1))}
    if model.rho == 0 or Ns < 4:
        return reserves
    phi = model.local_vol(S, t)
    hs, hv = np.diff(S), np.diff(v)
    steps = (hs[1:-1, None], hs[2:, None], hv[None, :-1], hv[None, 1:])
    coeff = model.rho * model.xi * np.outer(phi[2:-1] * S[2:-1], v[1:-1] ** (model.beta + 0.5))
    stencil = mixed_stencil_weights(np.sign(model.rho), steps, coeff)
    inner = np.arange(grid.size).reshape(Ns, Nv)[2:-1, 1:-1]
    for (di, dj), w in stencil.weights.items():
        out.add(inner, inner + di * Nv + dj, w)
        if (di, dj) in reserves:
            reserves[(di, dj)][2:-1, 1:-1] = np.maximum(-w, 0.0)
    return reserves


def _mixed_constraint_violated(F: sp.spmatrix, grid: Grid2D) -> bool:
    """Procura pesos negativos fora da diagonal nas linhas interiores de F."""
    coo = sp.coo_matrix(F)
    i_s, i_v = np.divmod(coo.row, grid.Nv)
    interior = (i_s > 0) & (i_s < grid.Ns - 1) & (i_v > 0) & (i_v < grid.Nv - 1)
    off = interior & (coo.row != coo.col)
    scale = np.abs(coo.data).max(initial=1.0)
    return bool(np.any(coo.data[off] < -1e-12 * scale))


def assemble(
    grid: Grid2D,
    model: ModelParams,
    t: float = 0.0,
    boundary: BoundaryMode = BoundaryMode.SHARED,
) -> OperatorSet:
    """
    Monta F0, F1 e F2 sobre a grade no instante t.

    F1 = (r-q) S d/dS + 1/2 v phi^2 S^2 d2/dS2 - r/2
    F2 = kappa (v_inf - v) d/dv + 1/2 xi^2 v^(2 beta) d2/dv2 - r/2
    F0 = rho xi phi S v^(beta + 1/2) d2/dSdv (nós interiores com i >= 2)

    Args:
        grid: Grade
        model: Parâmetros do modelo
        t: Tempo de calendário para phi(S, t)
        boundary: Tratamento das fronteiras

    Returns:
        OperatorSet montado

    Raises:
        GridError: Grade não monótona
    """
    for nodes in (grid.s_nodes, grid.v_nodes):
        if np.any(np.diff(nodes) <= 0):
            raise GridError("grade não monótona na montagem dos operadores")

    n = grid.size
    dirichlet = _dirichlet_mask(grid, boundary)
    keep = ~dirichlet.ravel()

    t1, t2, t0 = _Triplets(n), _Triplets(n), _Triplets(n)
    reserves = _assemble_mixed(grid, model, t, t0)
    _assemble_s_direction(grid, model, t, t1, reserves)
    _assemble_v_direction(grid, model, t2, reserves)
    F0, F1, F2 = t0.to_csr(keep), t1.to_csr(keep), t2.to_csr(keep)

    violated = _mixed_constraint_violated(F0 + F1 + F2, grid)
    if violated:
        logger.warning("restrição do estêncil misto violada: F não é Metzler em algum nó")

    logger.debug(f"operadores montados em t={t}: nnz={F0.nnz}+{F1.nnz}+{F2.nnz}, {boundary.value}")
    return OperatorSet(
        F0,
        F1,
        F2,
        t_label=t,
        boundary=boundary,
        dirichlet_mask=dirichlet.ravel(),
        constraint_violated=violated,
    )


def export_operator_coo(matrix: sp.spmatrix, path: str | Path) -> None:
    """Exporta uma matriz esparsa em formato de coordenadas (row, col, value)."""
    coo = sp.coo_matrix(matrix)
    frame = pd.DataFrame({"row": coo.row, "col": coo.col, "value": coo.data})
    frame.sort_values(["row", "col"]).to_csv(path, index=False, float_format="%.17g")

